#pragma once

#include <functional>
#include <vector>

#include "qdyn/linalg.hpp"
#include "qdyn/states.hpp"
#include "qdyn/time_grid.hpp"

namespace qdyn {

/// A square matrix acting on the Hilbert space at a single instant.
class Operator {
public:
    explicit Operator(ComplexMatrix matrix, std::vector<int> product_dims = {});

    int dims() const { return static_cast<int>(matrix_.rows()); }
    const ComplexMatrix& matrix() const { return matrix_; }
    const std::vector<int>& product_dims() const { return product_dims_; }

    Operator dagger() const;
    bool is_hermitian(double tol = 1e-10) const;
    bool is_unitary(double tol = 1e-10) const;

    /// Applies the operator to a state column.
    QuantumState mul(const QuantumState& psi) const;

    friend Operator operator*(const Operator& a, const Operator& b);  // composition
    friend Operator operator+(const Operator& a, const Operator& b);
    friend Operator operator-(const Operator& a, const Operator& b);
    friend Operator operator*(Complex scalar, const Operator& a);
    friend Operator operator*(double scalar, const Operator& a);
    friend QuantumState operator*(const Operator& a, const QuantumState& psi);

private:
    ComplexMatrix matrix_;
    std::vector<int> product_dims_;
};

/// A time grid plus one square matrix per grid point: a piecewise-constant
/// operator in time. Three construction modes, detected by the named
/// constructor rather than by sniffing the argument type:
///   from_frames   - one explicit matrix per grid point,
///   from_constant - a single operator replicated over the grid,
///   from_function - a callback t -> matrix evaluated at every grid point.
class DynamicOperator {
public:
    static DynamicOperator from_frames(TimeGrid grid, std::vector<ComplexMatrix> frames);
    static DynamicOperator from_constant(const Operator& op, TimeGrid grid);
    static DynamicOperator from_function(const std::function<ComplexMatrix(double)>& fn,
                                         TimeGrid grid);

    int dims() const { return dims_; }
    const TimeGrid& grid() const { return grid_; }

    std::size_t frame_count() const { return grid_.size(); }
    const ComplexMatrix& frame(std::size_t k) const;
    /// Frame at the nearest grid point at or before t.
    const ComplexMatrix& frame_at(double t) const { return frame(grid_.index_left_of(t)); }

    /// True when every frame is the same matrix; constant operators are
    /// stored once and analytic engines reuse their propagator.
    bool is_constant() const { return frames_.size() == 1; }

private:
    DynamicOperator(TimeGrid grid, std::vector<ComplexMatrix> frames, int dims)
        : grid_(std::move(grid)), frames_(std::move(frames)), dims_(dims) {}

    TimeGrid grid_;
    std::vector<ComplexMatrix> frames_;  // single entry when constant
    int dims_ = 0;
};

// The standard operator zoo. Index 0 of the two-level basis plays the role
// that sigma_plus() = [[0,1],[0,0]] raises into: sigma_plus maps |1> to |0>,
// sigma_minus is its adjoint, and all couplings below follow that
// convention.
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();
Operator sigma_plus();
Operator sigma_minus();
Operator eye(int n);
Operator annihilation(int n);  // a[k-1, k] = sqrt(k)
Operator creation(int n);      // adjoint of annihilation
/// exp(alpha a^dagger - conj(alpha) a) on the truncated Fock ladder.
Operator displacement(int n, Complex alpha);
/// exp(i pi a^dagger a) = diag((-1)^k).
Operator parity(int n);

/// Tr(rho_k O) for each density matrix, requiring a Hermitian observable.
/// The imaginary residue must stay below 1e-8; the real part is returned.
std::vector<double> expect_val_dm(const std::vector<DensityMatrix>& trajectory,
                                  const Operator& op);

/// Tr(rho_target rho); equals |<phi|psi>|^2 when both states are pure.
/// The target must be pure (rank one).
double fidelity(const DensityMatrix& rho, const DensityMatrix& target);

}  // namespace qdyn
