#pragma once

#include <cstdint>
#include <vector>

#include "qdyn/dynamics.hpp"
#include "qdyn/operators.hpp"
#include "qdyn/states.hpp"
#include "qdyn/time_grid.hpp"

namespace qdyn::grape {

/// Per-step control amplitudes with a symmetric box bound. The stored values
/// may exceed the bound; every consumer clips them first (hard clip, zero
/// gradient outside).
struct PulseSchedule {
    Eigen::MatrixXd values;  // n_steps x n_channels
    double bound = 1.0;

    int n_steps() const { return static_cast<int>(values.rows()); }
    int n_channels() const { return static_cast<int>(values.cols()); }

    double clipped(int step, int channel) const;
    Eigen::MatrixXd clipped_values() const;
};

/// State-transfer problem: drive psi0 to target through
/// H_k = drift + sum_j clip(theta_kj) H_j on a uniform grid.
struct ControlProblem {
    Operator drift;
    std::vector<Operator> channels;
    QuantumState psi0;
    QuantumState target;
    TimeGrid grid;  // n_steps + 1 points
    double l2_weight = 0.0;

    ControlProblem(Operator drift_op, std::vector<Operator> channel_ops, QuantumState initial,
                   QuantumState target_state, TimeGrid time_grid, double l2 = 0.0);
};

/// Adam with bias correction over a flat parameter vector.
struct AdamState {
    long step_count = 0;
    Eigen::VectorXd first_moment;
    Eigen::VectorXd second_moment;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    static AdamState for_size(Eigen::Index n, double lr = 1e-3);
};

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grads);

struct PropagationResult {
    StateTrajectory trajectory;  // one state per grid point
    Complex overlap;             // <target | psi_N>
};

/// Piecewise-constant propagation with clipped controls;
/// U_k = exp(-i (drift + sum_j clip(theta_kj) H_j) dt).
PropagationResult propagate_piecewise(const ControlProblem& problem,
                                      const PulseSchedule& schedule);

struct LossValue {
    double total;       // infidelity + l2_weight * sum(theta^2)
    double infidelity;  // 1 - |<target|psi_N>|^2
};

LossValue loss(const ControlProblem& problem, const PulseSchedule& schedule);

/// Exact gradient of the total loss via the adjoint recursion. The transfer
/// term uses the Frechet derivative of each step propagator and is zero for
/// entries clipped at the bound; the L2 term contributes 2 * weight * theta
/// on the raw values regardless of clipping.
Eigen::MatrixXd gradient(const ControlProblem& problem, const PulseSchedule& schedule);

struct OptimizeOptions {
    int iterations = 2000;
    double loss_threshold = 1e-4;  // stop when the infidelity drops below this
    double lr = 1e-3;
};

struct OptimizeResult {
    PulseSchedule schedule;  // best seen, not last
    std::vector<double> loss_history;
    std::vector<double> infidelity_history;
    double best_total = 0.0;
    std::size_t best_iteration = 0;
};

OptimizeResult optimize(const ControlProblem& problem, PulseSchedule initial,
                        const OptimizeOptions& opts = {});

/// Standard-normal initial schedule; the seed fully determines the values.
PulseSchedule random_schedule(int n_steps, int n_channels, double bound, std::uint64_t seed);

}  // namespace qdyn::grape
