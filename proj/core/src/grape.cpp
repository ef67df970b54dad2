#include "qdyn/grape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qdyn/rng.hpp"

namespace qdyn::grape {

namespace {

constexpr Complex kI(0.0, 1.0);

void check_schedule(const ControlProblem& problem, const PulseSchedule& schedule) {
    if (schedule.n_channels() != static_cast<int>(problem.channels.size())) {
        throw ShapeError("schedule channel count does not match problem channels");
    }
    if (schedule.n_steps() != static_cast<int>(problem.grid.steps())) {
        throw ShapeError("schedule has " + std::to_string(schedule.n_steps()) +
                         " steps but the grid has " + std::to_string(problem.grid.steps()));
    }
    if (!(schedule.bound > 0.0)) throw ArgumentError("schedule bound must be positive");
}

ComplexMatrix step_hamiltonian(const ControlProblem& problem, const PulseSchedule& schedule,
                               int k) {
    ComplexMatrix h = problem.drift.matrix();
    for (int j = 0; j < schedule.n_channels(); ++j) {
        h += schedule.clipped(k, j) * problem.channels[j].matrix();
    }
    return h;
}

}  // namespace

double PulseSchedule::clipped(int step, int channel) const {
    return std::clamp(values(step, channel), -bound, bound);
}

Eigen::MatrixXd PulseSchedule::clipped_values() const {
    return values.cwiseMax(-bound).cwiseMin(bound);
}

ControlProblem::ControlProblem(Operator drift_op, std::vector<Operator> channel_ops,
                               QuantumState initial, QuantumState target_state,
                               TimeGrid time_grid, double l2)
    : drift(std::move(drift_op)),
      channels(std::move(channel_ops)),
      psi0(std::move(initial)),
      target(std::move(target_state)),
      grid(std::move(time_grid)),
      l2_weight(l2) {
    if (channels.empty()) throw ArgumentError("ControlProblem: need at least one channel");
    for (const auto& c : channels) {
        if (c.dims() != drift.dims()) throw ShapeError("ControlProblem: channel dimension mismatch");
    }
    if (psi0.dims() != drift.dims() || target.dims() != drift.dims()) {
        throw ShapeError("ControlProblem: state dimension mismatch");
    }
    if (grid.steps() < 1) throw ArgumentError("ControlProblem: grid needs at least one step");
    if (l2_weight < 0.0) throw ArgumentError("ControlProblem: l2_weight must be non-negative");
}

AdamState AdamState::for_size(Eigen::Index n, double lr_value) {
    AdamState s;
    s.first_moment = Eigen::VectorXd::Zero(n);
    s.second_moment = Eigen::VectorXd::Zero(n);
    s.lr = lr_value;
    return s;
}

void adam_step(AdamState& state, Eigen::Ref<Eigen::VectorXd> params,
               const Eigen::Ref<const Eigen::VectorXd>& grads) {
    if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
        throw ShapeError("adam_step: parameter, gradient and moment sizes differ");
    }
    state.step_count += 1;
    state.first_moment = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads;
    state.second_moment =
        state.beta2 * state.second_moment + (1.0 - state.beta2) * grads.cwiseProduct(grads);

    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (Eigen::Index i = 0; i < params.size(); ++i) {
        const double m_hat = state.first_moment(i) / bc1;
        const double v_hat = state.second_moment(i) / bc2;
        params(i) -= state.lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

PropagationResult propagate_piecewise(const ControlProblem& problem,
                                      const PulseSchedule& schedule) {
    check_schedule(problem, schedule);
    const double dt = problem.grid.dt();

    PropagationResult result;
    result.trajectory.times = problem.grid.points();
    result.trajectory.values.reserve(problem.grid.size());
    result.trajectory.values.push_back(problem.psi0);

    ComplexMatrix amp = problem.psi0.amplitudes();
    for (int k = 0; k < schedule.n_steps(); ++k) {
        const ComplexMatrix u = linalg::expm((-kI * dt) * step_hamiltonian(problem, schedule, k));
        amp = u * amp;
        result.trajectory.values.emplace_back(amp, problem.psi0.product_dims());
    }
    result.overlap = (problem.target.amplitudes().adjoint() * amp)(0, 0);
    return result;
}

LossValue loss(const ControlProblem& problem, const PulseSchedule& schedule) {
    const PropagationResult prop = propagate_piecewise(problem, schedule);
    const double infidelity = 1.0 - std::norm(prop.overlap);
    const double total = infidelity + problem.l2_weight * schedule.values.squaredNorm();
    return {total, infidelity};
}

Eigen::MatrixXd gradient(const ControlProblem& problem, const PulseSchedule& schedule) {
    check_schedule(problem, schedule);
    const double dt = problem.grid.dt();
    const int n_steps = schedule.n_steps();
    const int n_channels = schedule.n_channels();

    // Forward pass, keeping the state before every step and the propagators.
    std::vector<ComplexMatrix> states(n_steps + 1);
    std::vector<ComplexMatrix> propagators(n_steps);
    std::vector<ComplexMatrix> step_h(n_steps);
    states[0] = problem.psi0.amplitudes();
    for (int k = 0; k < n_steps; ++k) {
        step_h[k] = step_hamiltonian(problem, schedule, k);
        propagators[k] = linalg::expm((-kI * dt) * step_h[k]);
        states[k + 1] = propagators[k] * states[k];
    }
    const Complex overlap = (problem.target.amplitudes().adjoint() * states[n_steps])(0, 0);

    Eigen::MatrixXd grad = 2.0 * problem.l2_weight * schedule.values;

    // Backward pass: lambda_k = U_{k+1}^dag ... U_N^dag |target>, so that
    // d<target|psi_N>/dtheta_kj = lambda_k^dag D_k[-i dt H_j] psi_{k-1}.
    ComplexMatrix costate = problem.target.amplitudes();
    for (int k = n_steps - 1; k >= 0; --k) {
        for (int j = 0; j < n_channels; ++j) {
            if (std::abs(schedule.values(k, j)) >= schedule.bound) continue;  // clipped: no flow
            const ComplexMatrix direction = (-kI * dt) * problem.channels[j].matrix();
            const auto [unused, frechet] =
                linalg::expm_frechet((-kI * dt) * step_h[k], direction);
            const Complex dc = (costate.adjoint() * frechet * states[k])(0, 0);
            grad(k, j) += -2.0 * (std::conj(overlap) * dc).real();
        }
        costate = propagators[k].adjoint() * costate;
    }
    return grad;
}

OptimizeResult optimize(const ControlProblem& problem, PulseSchedule initial,
                        const OptimizeOptions& opts) {
    check_schedule(problem, initial);

    OptimizeResult result;
    result.schedule = initial;
    result.best_total = std::numeric_limits<double>::infinity();

    AdamState adam = AdamState::for_size(initial.values.size(), opts.lr);
    PulseSchedule current = std::move(initial);

    // Evaluates iterations + 1 schedules so the last update is scored too;
    // the best-seen schedule is returned, not the last.
    for (int it = 0;; ++it) {
        const LossValue l = loss(problem, current);
        result.loss_history.push_back(l.total);
        result.infidelity_history.push_back(l.infidelity);
        if (l.total < result.best_total) {
            result.best_total = l.total;
            result.best_iteration = static_cast<std::size_t>(it);
            result.schedule = current;
        }
        if (l.infidelity < opts.loss_threshold || it >= opts.iterations) break;

        const Eigen::MatrixXd g = gradient(problem, current);
        Eigen::Map<Eigen::VectorXd> params(current.values.data(), current.values.size());
        Eigen::Map<const Eigen::VectorXd> grads(g.data(), g.size());
        adam_step(adam, params, grads);
    }
    return result;
}

PulseSchedule random_schedule(int n_steps, int n_channels, double bound, std::uint64_t seed) {
    if (n_steps < 1 || n_channels < 1) {
        throw ArgumentError("random_schedule: need at least one step and one channel");
    }
    Rng rng(seed);
    PulseSchedule schedule;
    schedule.bound = bound;
    schedule.values.resize(n_steps, n_channels);
    for (int k = 0; k < n_steps; ++k) {
        for (int j = 0; j < n_channels; ++j) {
            schedule.values(k, j) = rng.normal();
        }
    }
    return schedule;
}

}  // namespace qdyn::grape
