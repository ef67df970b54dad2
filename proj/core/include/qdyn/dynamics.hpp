#pragma once

#include <span>
#include <vector>

#include "qdyn/operators.hpp"
#include "qdyn/states.hpp"
#include "qdyn/time_grid.hpp"

namespace qdyn {

/// Ordered (time, value) pairs produced by every dynamics engine.
template <typename T>
struct Trajectory {
    std::vector<double> times;
    std::vector<T> values;

    std::size_t size() const { return values.size(); }
    const T& front() const { return values.front(); }
    const T& back() const { return values.back(); }
};

using StateTrajectory = Trajectory<QuantumState>;
using DensityTrajectory = Trajectory<DensityMatrix>;

namespace dynamics {

/// Hamiltonian plus dissipation channels: jump operator L_i at rate gamma_i.
struct LindbladSpec {
    DynamicOperator hamiltonian;
    std::vector<Operator> jump_ops;
    std::vector<double> rates;

    LindbladSpec(DynamicOperator h, std::vector<Operator> jumps = {},
                 std::vector<double> gammas = {});
};

/// The n^2 x n^2 generator of vectorized density-matrix dynamics
/// (row-major vec convention).
struct Liouvillian {
    int dims = 0;
    ComplexMatrix matrix;
};

enum class StepperKind { Rk4Fixed, Rk45Adaptive };

struct IntegratorConfig {
    StepperKind method = StepperKind::Rk4Fixed;
    int substeps_per_dt = 10;  // rk4
    double abs_tol = 1e-10;    // rk45
    double rel_tol = 1e-8;     // rk45
};

/// Piecewise-exact Schroedinger propagation: one matrix exponential of the
/// left-endpoint Hamiltonian per step, psi_{k+1} = exp(-i H(t_k) dt) psi_k.
/// Returns one state per grid point including the initial one.
StateTrajectory tdse_analytic(const QuantumState& psi0, const DynamicOperator& h,
                              const TimeGrid& grid);

/// Numerically integrates d psi / dt = -i H(t) psi with the configured
/// stepper; frames are looked up with nearest-left semantics inside stages.
StateTrajectory tdse_numeric(const QuantumState& psi0, const DynamicOperator& h,
                             const TimeGrid& grid, const IntegratorConfig& cfg = {});

/// -i [H, rho] + sum_i gamma_i (L_i rho L_i^dag - 1/2 {L_i^dag L_i, rho}).
/// Traceless, and Hermiticity-preserving for Hermitian rho.
ComplexMatrix lindblad_rhs(const ComplexMatrix& rho, const ComplexMatrix& h_t,
                           std::span<const Operator> jump_ops, std::span<const double> rates);

/// Master-equation integration on the grid. Raises InvariantError when the
/// trace drifts by more than 1e-4 or the state stops being finite; both
/// signal a time step too large for the problem.
DensityTrajectory lindblad_integrate(const DensityMatrix& rho0, const LindbladSpec& spec,
                                     const TimeGrid& grid, const IntegratorConfig& cfg = {});

/// L = -i (H ox I - I ox H^T)
///     + sum_i gamma_i [ F_i ox conj(F_i)
///                       - 1/2 (F_i^dag F_i ox I + I ox (F_i^dag F_i)^T) ],
/// so that unvec(L vec(rho)) reproduces lindblad_rhs(rho) exactly.
Liouvillian build_liouvillian(const ComplexMatrix& h, std::span<const Operator> jump_ops,
                              std::span<const double> rates);

/// Superoperator propagation: vec(rho_{k+1}) = exp(L(t_k) dt) vec(rho_k),
/// exact per step for a piecewise-constant generator. A time-independent
/// generator is exponentiated once and reused.
DensityTrajectory fls_propagate(const DensityMatrix& rho0, const LindbladSpec& spec,
                                const TimeGrid& grid);

}  // namespace dynamics
}  // namespace qdyn
