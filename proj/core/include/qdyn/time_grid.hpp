#pragma once

#include <cstddef>
#include <vector>

#include "qdyn/errors.hpp"

namespace qdyn {

/// Uniformly spaced time points (hbar = 1 units throughout the library).
class TimeGrid {
public:
    /// Inclusive grid t0, t0+dt, ..., t_end. t_end must be an integer number
    /// of steps away from t0 (within 1e-9).
    static TimeGrid from_range(double t0, double t_end, double dt);

    /// Wraps an explicit point list, validating uniform spacing to 1e-9.
    static TimeGrid from_points(std::vector<double> points);

    double t0() const { return t0_; }
    double dt() const { return dt_; }
    const std::vector<double>& points() const { return points_; }

    std::size_t size() const { return points_.size(); }
    /// Number of propagation intervals (size() - 1).
    std::size_t steps() const { return points_.empty() ? 0 : points_.size() - 1; }
    double at(std::size_t k) const { return points_[k]; }
    double t_end() const { return points_.back(); }

    /// Index of the nearest grid point at or before t (clamped to the grid).
    std::size_t index_left_of(double t) const;

    bool operator==(const TimeGrid& other) const;

private:
    TimeGrid(double t0, double dt, std::vector<double> points)
        : t0_(t0), dt_(dt), points_(std::move(points)) {}

    double t0_ = 0.0;
    double dt_ = 0.0;
    std::vector<double> points_;
};

}  // namespace qdyn
