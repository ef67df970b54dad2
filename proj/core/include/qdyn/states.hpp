#pragma once

#include <vector>

#include "qdyn/linalg.hpp"

namespace qdyn {

class DensityMatrix;

/// A column of complex amplitudes, optionally annotated with the factor
/// dimensions of a tensor-product space so reduced states can be formed.
class QuantumState {
public:
    explicit QuantumState(ComplexMatrix amplitudes, std::vector<int> product_dims = {});

    /// The n orthonormal basis columns of an n-dimensional space.
    static std::vector<QuantumState> basis(int n);

    /// Coherent state truncated to n_fock levels: amplitudes proportional to
    /// alpha^k / sqrt(k!), renormalized to unit norm inside the truncation.
    static QuantumState coherent(int n_fock, Complex alpha);

    int dims() const { return static_cast<int>(amplitudes_.rows()); }
    const ComplexMatrix& amplitudes() const { return amplitudes_; }
    const std::vector<int>& product_dims() const { return product_dims_; }

    double norm() const;
    bool is_normalized(double tol = 1e-10) const;

    /// Unit-norm state on the same ray; the zero vector has no direction.
    QuantumState normalized() const;

    /// Row vector <psi| (conjugate transpose of the amplitude column).
    ComplexMatrix dagger() const;

    /// |c_k|^2 per basis index.
    std::vector<double> populations() const;

    friend QuantumState operator+(const QuantumState& a, const QuantumState& b);
    friend QuantumState operator-(const QuantumState& a, const QuantumState& b);
    friend QuantumState operator*(Complex scalar, const QuantumState& s);

private:
    ComplexMatrix amplitudes_;
    std::vector<int> product_dims_;
};

/// <psi|phi>, conjugating the first argument.
Complex inner_product(const QuantumState& psi, const QuantumState& phi);

/// Hermitian, unit-trace matrix representation of a (possibly mixed) state.
/// Construction symmetrizes inputs whose hermiticity residue is at most
/// 1e-8 and rejects anything worse; the trace must be 1 within 1e-6.
class DensityMatrix {
public:
    explicit DensityMatrix(ComplexMatrix matrix, std::vector<int> product_dims = {});

    int dims() const { return static_cast<int>(matrix_.rows()); }
    const ComplexMatrix& matrix() const { return matrix_; }
    const std::vector<int>& product_dims() const { return product_dims_; }

private:
    ComplexMatrix matrix_;
    std::vector<int> product_dims_;
};

/// |psi><psi| for a normalized state; product dimensions carry over.
DensityMatrix get_density_matrix(const QuantumState& psi);

}  // namespace qdyn
