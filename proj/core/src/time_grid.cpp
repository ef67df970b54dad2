#include "qdyn/time_grid.hpp"

#include <cmath>
#include <string>

namespace qdyn {

TimeGrid TimeGrid::from_range(double t0, double t_end, double dt) {
    if (!(dt > 0.0)) throw ArgumentError("TimeGrid: dt must be positive");
    if (t_end < t0) throw ArgumentError("TimeGrid: t_end before t0");
    const auto n = static_cast<std::size_t>(std::llround((t_end - t0) / dt));
    if (std::abs(t0 + static_cast<double>(n) * dt - t_end) > 1e-9) {
        throw ArgumentError("TimeGrid: span is not an integer number of steps");
    }
    std::vector<double> pts(n + 1);
    for (std::size_t k = 0; k <= n; ++k) pts[k] = t0 + static_cast<double>(k) * dt;
    return TimeGrid(t0, dt, std::move(pts));
}

TimeGrid TimeGrid::from_points(std::vector<double> points) {
    if (points.empty()) throw ArgumentError("TimeGrid: empty point list");
    if (points.size() == 1) return TimeGrid(points[0], 0.0, std::move(points));
    const double dt = points[1] - points[0];
    if (!(dt > 0.0)) throw ArgumentError("TimeGrid: points must be strictly increasing");
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
        if (std::abs(points[k + 1] - points[k] - dt) > 1e-9) {
            throw ArgumentError("TimeGrid: spacing not uniform at index " + std::to_string(k));
        }
    }
    const double t0 = points[0];
    return TimeGrid(t0, dt, std::move(points));
}

std::size_t TimeGrid::index_left_of(double t) const {
    if (points_.size() < 2 || t <= points_.front()) return 0;
    if (t >= points_.back()) return points_.size() - 1;
    const auto k = static_cast<std::size_t>(std::floor((t - t0_) / dt_ + 1e-9));
    return k >= points_.size() ? points_.size() - 1 : k;
}

bool TimeGrid::operator==(const TimeGrid& other) const {
    return points_.size() == other.points_.size() &&
           std::abs(t0_ - other.t0_) <= 1e-12 && std::abs(dt_ - other.dt_) <= 1e-12;
}

}  // namespace qdyn
