#include "qdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace qdyn::dynamics {

namespace {

constexpr Complex kI(0.0, 1.0);

// ---------------------------------------------------------------------------
// Shared Runge-Kutta machinery. The integrator state is a ComplexMatrix so
// the same code drives state columns (TDSE) and density matrices (Lindblad).
// ---------------------------------------------------------------------------

template <typename Rhs>
ComplexMatrix rk4_interval(const Rhs& rhs, double ta, double tb, ComplexMatrix y, int substeps) {
    const double h = (tb - ta) / substeps;
    for (int s = 0; s < substeps; ++s) {
        const double t = ta + s * h;
        const ComplexMatrix k1 = rhs(t, y);
        const ComplexMatrix k2 = rhs(t + 0.5 * h, (y + 0.5 * h * k1).eval());
        const ComplexMatrix k3 = rhs(t + 0.5 * h, (y + 0.5 * h * k2).eval());
        const ComplexMatrix k4 = rhs(t + h, (y + h * k3).eval());
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

// Runge-Kutta-Fehlberg 4(5). The 5th-order solution propagates; the
// difference to the embedded 4th-order one drives a PI step controller.
struct Rk45Control {
    double h = 0.0;
    double err_old = 1e-4;
};

template <typename Rhs>
ComplexMatrix rk45_interval(const Rhs& rhs, double ta, double tb, ComplexMatrix y,
                            const IntegratorConfig& cfg, Rk45Control& ctl, double min_step) {
    static constexpr double c2 = 1.0 / 4, c3 = 3.0 / 8, c4 = 12.0 / 13, c6 = 1.0 / 2;
    static constexpr double a21 = 1.0 / 4;
    static constexpr double a31 = 3.0 / 32, a32 = 9.0 / 32;
    static constexpr double a41 = 1932.0 / 2197, a42 = -7200.0 / 2197, a43 = 7296.0 / 2197;
    static constexpr double a51 = 439.0 / 216, a52 = -8.0, a53 = 3680.0 / 513,
                            a54 = -845.0 / 4104;
    static constexpr double a61 = -8.0 / 27, a62 = 2.0, a63 = -3544.0 / 2565,
                            a64 = 1859.0 / 4104, a65 = -11.0 / 40;
    static constexpr double b1 = 25.0 / 216, b3 = 1408.0 / 2565, b4 = 2197.0 / 4104,
                            b5 = -1.0 / 5;
    static constexpr double d1 = 16.0 / 135, d3 = 6656.0 / 12825, d4 = 28561.0 / 56430,
                            d5 = -9.0 / 50, d6 = 2.0 / 55;

    double t = ta;
    while (tb - t > 1e-14 * std::max(1.0, std::abs(tb))) {
        const double h = std::min(ctl.h, tb - t);
        if (h < min_step) {
            throw ConvergenceError("rk45: step size underflow at t = " + std::to_string(t));
        }

        const ComplexMatrix k1 = rhs(t, y);
        const ComplexMatrix k2 = rhs(t + c2 * h, (y + h * (a21 * k1)).eval());
        const ComplexMatrix k3 = rhs(t + c3 * h, (y + h * (a31 * k1 + a32 * k2)).eval());
        const ComplexMatrix k4 =
            rhs(t + c4 * h, (y + h * (a41 * k1 + a42 * k2 + a43 * k3)).eval());
        const ComplexMatrix k5 =
            rhs(t + h, (y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)).eval());
        const ComplexMatrix k6 = rhs(
            t + c6 * h, (y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)).eval());

        const ComplexMatrix y4 = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5);
        const ComplexMatrix y5 = y + h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6);

        double err = 0.0;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            const double scale = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(*(y.data() + i)),
                                                                      std::abs(*(y5.data() + i)));
            err = std::max(err, std::abs(*(y5.data() + i) - *(y4.data() + i)) / scale);
        }

        if (err <= 1.0) {
            t += h;
            y = y5;
            const double e = std::max(err, 1e-16);
            double fac = 0.9 * std::pow(e, -0.17) * std::pow(ctl.err_old, 0.04);
            ctl.h = h * std::clamp(fac, 0.2, 5.0);
            ctl.err_old = std::max(err, 1e-4);
        } else {
            ctl.h = h * std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9);
        }
    }
    return y;
}

void check_engine_inputs(int state_dims, const DynamicOperator& h, const TimeGrid& grid,
                         const char* who) {
    if (h.dims() != state_dims) {
        throw ShapeError(std::string(who) + ": Hamiltonian dimension " + std::to_string(h.dims()) +
                         " does not match state dimension " + std::to_string(state_dims));
    }
    if (!(h.grid() == grid)) {
        throw ShapeError(std::string(who) + ": Hamiltonian grid does not match propagation grid");
    }
}

void check_jumps(int dims, std::span<const Operator> jump_ops, std::span<const double> rates,
                 const char* who) {
    if (jump_ops.size() != rates.size()) {
        throw ArgumentError(std::string(who) + ": need one rate per jump operator");
    }
    for (const auto& op : jump_ops) {
        if (op.dims() != dims) {
            throw ShapeError(std::string(who) + ": jump operator dimension mismatch");
        }
    }
    for (double g : rates) {
        if (g < 0.0) throw ArgumentError(std::string(who) + ": rates must be non-negative");
    }
}

}  // namespace

LindbladSpec::LindbladSpec(DynamicOperator h, std::vector<Operator> jumps,
                           std::vector<double> gammas)
    : hamiltonian(std::move(h)), jump_ops(std::move(jumps)), rates(std::move(gammas)) {
    check_jumps(hamiltonian.dims(), jump_ops, rates, "LindbladSpec");
}

StateTrajectory tdse_analytic(const QuantumState& psi0, const DynamicOperator& h,
                              const TimeGrid& grid) {
    if (!psi0.is_normalized()) throw ArgumentError("tdse_analytic: initial state not normalized");
    check_engine_inputs(psi0.dims(), h, grid, "tdse_analytic");

    StateTrajectory traj;
    traj.times = grid.points();
    traj.values.reserve(grid.size());
    traj.values.push_back(psi0);

    const double dt = grid.dt();
    ComplexMatrix propagator;
    if (h.is_constant()) propagator = linalg::expm(-kI * dt * h.frame(0));

    ComplexMatrix amp = psi0.amplitudes();
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (h.is_constant()) {
            amp = propagator * amp;
        } else {
            amp = linalg::expm(-kI * dt * h.frame(k)) * amp;
        }
        traj.values.emplace_back(amp, psi0.product_dims());
    }
    return traj;
}

StateTrajectory tdse_numeric(const QuantumState& psi0, const DynamicOperator& h,
                             const TimeGrid& grid, const IntegratorConfig& cfg) {
    if (!psi0.is_normalized()) throw ArgumentError("tdse_numeric: initial state not normalized");
    check_engine_inputs(psi0.dims(), h, grid, "tdse_numeric");

    const auto rhs = [&h](double t, const ComplexMatrix& psi) -> ComplexMatrix {
        return -kI * (h.frame_at(t) * psi);
    };

    StateTrajectory traj;
    traj.times = grid.points();
    traj.values.reserve(grid.size());
    traj.values.push_back(psi0);

    Rk45Control ctl{grid.dt() / 10.0};
    const double min_step = grid.dt() * 1e-12;

    ComplexMatrix amp = psi0.amplitudes();
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double ta = grid.at(k), tb = grid.at(k + 1);
        amp = cfg.method == StepperKind::Rk4Fixed
                  ? rk4_interval(rhs, ta, tb, std::move(amp), cfg.substeps_per_dt)
                  : rk45_interval(rhs, ta, tb, std::move(amp), cfg, ctl, min_step);
        if (!linalg::is_finite(amp)) {
            throw InvariantError("tdse_numeric: state became non-finite at t = " +
                                 std::to_string(tb));
        }
        traj.values.emplace_back(amp, psi0.product_dims());
    }
    return traj;
}

ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& h_t,
                           std::span<const Operator> jump_ops, std::span<const double> rates) {
    if (rho.rows() != rho.cols() || h_t.rows() != h_t.cols() || rho.rows() != h_t.rows()) {
        throw ShapeError("lindblad_rhs: rho and H must be square with equal dimension");
    }
    check_jumps(static_cast<int>(rho.rows()), jump_ops, rates, "lindblad_rhs");

    ComplexMatrix out = -kI * (h_t * rho - rho * h_t);
    for (std::size_t i = 0; i < jump_ops.size(); ++i) {
        if (rates[i] == 0.0) continue;
        const ComplexMatrix& l = jump_ops[i].matrix();
        const ComplexMatrix ldl = l.adjoint() * l;
        out += rates[i] * (l * rho * l.adjoint() - 0.5 * (ldl * rho + rho * ldl));
    }
    return out;
}

DensityTrajectory lindblad_integrate(const DensityMatrix& rho0, const LindbladSpec& spec,
                                     const TimeGrid& grid, const IntegratorConfig& cfg) {
    check_engine_inputs(rho0.dims(), spec.hamiltonian, grid, "lindblad_integrate");

    const auto rhs = [&spec](double t, const ComplexMatrix& rho) -> ComplexMatrix {
        return lindblad_rhs(rho, spec.hamiltonian.frame_at(t), spec.jump_ops, spec.rates);
    };

    DensityTrajectory traj;
    traj.times = grid.points();
    traj.values.reserve(grid.size());
    traj.values.push_back(rho0);

    Rk45Control ctl{grid.dt() / 10.0};
    const double min_step = grid.dt() * 1e-12;

    ComplexMatrix rho = rho0.matrix();
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        const double ta = grid.at(k), tb = grid.at(k + 1);
        rho = cfg.method == StepperKind::Rk4Fixed
                  ? rk4_interval(rhs, ta, tb, std::move(rho), cfg.substeps_per_dt)
                  : rk45_interval(rhs, ta, tb, std::move(rho), cfg, ctl, min_step);

        if (!linalg::is_finite(rho)) {
            throw InvariantError("lindblad_integrate: state became non-finite at t = " +
                                 std::to_string(tb) + "; reduce the time step");
        }
        const double trace_err = std::abs(rho.trace() - Complex(1.0, 0.0));
        if (trace_err > 1e-4) {
            throw InvariantError("lindblad_integrate: trace drift " + std::to_string(trace_err) +
                                 " at t = " + std::to_string(tb) + "; reduce the time step");
        }
        const double herm_err = linalg::max_abs(rho - rho.adjoint());
        if (herm_err > 1e-8) {
            throw InvariantError("lindblad_integrate: hermiticity drift " +
                                 std::to_string(herm_err) + " at t = " + std::to_string(tb));
        }
        traj.values.emplace_back(rho, rho0.product_dims());
    }
    return traj;
}

Liouvillian build_liouvillian(const ComplexMatrix& h, std::span<const Operator> jump_ops,
                              std::span<const double> rates) {
    if (h.rows() != h.cols()) throw ShapeError("build_liouvillian: H must be square");
    const auto n = h.rows();
    check_jumps(static_cast<int>(n), jump_ops, rates, "build_liouvillian");

    const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
    ComplexMatrix l = -kI * (linalg::kron(h, ident) - linalg::kron(ident, h.transpose()));
    for (std::size_t i = 0; i < jump_ops.size(); ++i) {
        if (rates[i] == 0.0) continue;
        const ComplexMatrix& f = jump_ops[i].matrix();
        const ComplexMatrix fdf = f.adjoint() * f;
        l += rates[i] * (linalg::kron(f, f.conjugate()) -
                         0.5 * (linalg::kron(fdf, ident) + linalg::kron(ident, fdf.transpose())));
    }
    return Liouvillian{static_cast<int>(n), std::move(l)};
}

DensityTrajectory fls_propagate(const DensityMatrix& rho0, const LindbladSpec& spec,
                                const TimeGrid& grid) {
    check_engine_inputs(rho0.dims(), spec.hamiltonian, grid, "fls_propagate");
    const auto n = rho0.matrix().rows();
    const double dt = grid.dt();

    DensityTrajectory traj;
    traj.times = grid.points();
    traj.values.reserve(grid.size());
    traj.values.push_back(rho0);

    ComplexMatrix propagator;
    if (spec.hamiltonian.is_constant()) {
        const Liouvillian l =
            build_liouvillian(spec.hamiltonian.frame(0), spec.jump_ops, spec.rates);
        propagator = linalg::expm(dt * l.matrix);
    }

    ComplexMatrix v = linalg::vec(rho0.matrix());
    for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
        if (spec.hamiltonian.is_constant()) {
            v = propagator * v;
        } else {
            const Liouvillian l =
                build_liouvillian(spec.hamiltonian.frame(k), spec.jump_ops, spec.rates);
            v = linalg::expm(dt * l.matrix) * v;
        }

        ComplexMatrix rho = linalg::unvec(v, n);
        const double herm_err = linalg::max_abs(rho - rho.adjoint());
        if (herm_err > 1e-9) {
            throw InvariantError("fls_propagate: hermiticity residue " + std::to_string(herm_err) +
                                 " at t = " + std::to_string(grid.at(k + 1)));
        }
        traj.values.emplace_back(std::move(rho), rho0.product_dims());
    }
    return traj;
}

}  // namespace qdyn::dynamics
