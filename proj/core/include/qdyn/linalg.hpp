#pragma once

#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qdyn/errors.hpp"

namespace qdyn {

using Complex = std::complex<double>;

/// Dense row-major complex matrix: the carrier for states (n x 1 columns),
/// operators and superoperators alike.
using ComplexMatrix =
    Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace linalg {

/// Largest entry modulus (0 for empty matrices).
double max_abs(const ComplexMatrix& a);

bool is_finite(const ComplexMatrix& a);

bool is_hermitian(const ComplexMatrix& a, double tol = 1e-10);

/// Checked matrix product: a.cols() must equal b.rows().
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);

/// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& a);

/// Kronecker product. Block (i,j) of the result is a(i,j) * b, so a 1x1
/// factor degenerates to scalar multiplication.
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

/// Sum of diagonal entries; requires a square input.
Complex trace(const ComplexMatrix& a);

/// Traces out the listed tensor factors of a square matrix whose dimension
/// factorizes as the product of factor_dims. Remaining factors keep their
/// original order; the trace of the input is preserved.
ComplexMatrix partial_trace_raw(const ComplexMatrix& rho,
                                const std::vector<int>& factor_dims,
                                const std::vector<int>& trace_out);

/// Matrix exponential. Scaling-and-squaring with a fixed order-13 Pade
/// approximant; inputs detected Hermitian (residue below 1e-12) go through
/// an eigendecomposition instead.
ComplexMatrix expm(const ComplexMatrix& a);

/// Returns (expm(a), D) where D is the Frechet derivative of expm at a in
/// direction e, i.e. the exact first-order response expm(a + s e) =
/// expm(a) + s D + O(s^2). Computed as the upper-right block of the
/// exponential of the 2n x 2n matrix [[a, e], [0, a]].
std::pair<ComplexMatrix, ComplexMatrix> expm_frechet(const ComplexMatrix& a,
                                                     const ComplexMatrix& e);

/// Row-major vectorization: stacks rows, vec(rho) = (rho_11, rho_12, ...,
/// rho_1n, rho_21, ..., rho_nn)^T. Satisfies
/// vec(A rho B) == kron(A, B^T) vec(rho).
ComplexMatrix vec(const ComplexMatrix& rho);

/// Inverse of vec for an n^2 x 1 column.
ComplexMatrix unvec(const ComplexMatrix& v, Eigen::Index n);

}  // namespace linalg
}  // namespace qdyn
