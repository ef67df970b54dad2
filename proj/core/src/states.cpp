#include "qdyn/states.hpp"

#include <cmath>
#include <string>

namespace qdyn {

namespace {

long product_of(const std::vector<int>& dims) {
    long p = 1;
    for (int d : dims) p *= d;
    return p;
}

void check_product_dims(const std::vector<int>& dims, long expected, const char* who) {
    if (dims.empty()) return;
    for (int d : dims) {
        if (d <= 0) throw ArgumentError(std::string(who) + ": factor dims must be positive");
    }
    if (product_of(dims) != expected) {
        throw ShapeError(std::string(who) + ": product of factor dims does not match dimension " +
                         std::to_string(expected));
    }
}

}  // namespace

QuantumState::QuantumState(ComplexMatrix amplitudes, std::vector<int> product_dims)
    : amplitudes_(std::move(amplitudes)), product_dims_(std::move(product_dims)) {
    if (amplitudes_.cols() != 1 || amplitudes_.rows() < 1) {
        throw ShapeError("QuantumState: amplitudes must be an n x 1 column, n >= 1");
    }
    if (!linalg::is_finite(amplitudes_)) {
        throw ArgumentError("QuantumState: non-finite amplitudes");
    }
    check_product_dims(product_dims_, amplitudes_.rows(), "QuantumState");
}

std::vector<QuantumState> QuantumState::basis(int n) {
    if (n < 1) throw ArgumentError("basis: dimension must be at least 1");
    std::vector<QuantumState> states;
    states.reserve(n);
    for (int k = 0; k < n; ++k) {
        ComplexMatrix amp = ComplexMatrix::Zero(n, 1);
        amp(k, 0) = Complex(1.0, 0.0);
        states.emplace_back(std::move(amp));
    }
    return states;
}

QuantumState QuantumState::coherent(int n_fock, Complex alpha) {
    if (n_fock < 1) throw ArgumentError("coherent: need at least one Fock level");
    ComplexMatrix amp(n_fock, 1);
    Complex c(1.0, 0.0);  // alpha^k / sqrt(k!) built up recursively
    amp(0, 0) = c;
    for (int k = 1; k < n_fock; ++k) {
        c *= alpha / std::sqrt(static_cast<double>(k));
        amp(k, 0) = c;
    }
    return QuantumState(std::move(amp)).normalized();
}

double QuantumState::norm() const { return amplitudes_.norm(); }

bool QuantumState::is_normalized(double tol) const {
    return std::abs(amplitudes_.squaredNorm() - 1.0) <= tol;
}

QuantumState QuantumState::normalized() const {
    const double n = norm();
    if (n == 0.0) throw ArgumentError("normalize: zero vector has no direction");
    return QuantumState(amplitudes_ / n, product_dims_);
}

ComplexMatrix QuantumState::dagger() const { return amplitudes_.adjoint(); }

std::vector<double> QuantumState::populations() const {
    std::vector<double> pops(amplitudes_.rows());
    for (Eigen::Index k = 0; k < amplitudes_.rows(); ++k) {
        pops[k] = std::norm(amplitudes_(k, 0));
    }
    return pops;
}

QuantumState operator+(const QuantumState& a, const QuantumState& b) {
    if (a.dims() != b.dims()) throw ShapeError("state addition: dimensions differ");
    auto dims = a.product_dims_ == b.product_dims_ ? a.product_dims_ : std::vector<int>{};
    return QuantumState(a.amplitudes_ + b.amplitudes_, std::move(dims));
}

QuantumState operator-(const QuantumState& a, const QuantumState& b) {
    if (a.dims() != b.dims()) throw ShapeError("state subtraction: dimensions differ");
    auto dims = a.product_dims_ == b.product_dims_ ? a.product_dims_ : std::vector<int>{};
    return QuantumState(a.amplitudes_ - b.amplitudes_, std::move(dims));
}

QuantumState operator*(Complex scalar, const QuantumState& s) {
    return QuantumState(scalar * s.amplitudes_, s.product_dims_);
}

Complex inner_product(const QuantumState& psi, const QuantumState& phi) {
    if (psi.dims() != phi.dims()) throw ShapeError("inner_product: dimensions differ");
    return (psi.amplitudes().adjoint() * phi.amplitudes())(0, 0);
}

DensityMatrix::DensityMatrix(ComplexMatrix matrix, std::vector<int> product_dims)
    : matrix_(std::move(matrix)), product_dims_(std::move(product_dims)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
        throw ShapeError("DensityMatrix: matrix must be square, n >= 1");
    }
    if (!linalg::is_finite(matrix_)) throw ArgumentError("DensityMatrix: non-finite entries");

    const double herm_residue = linalg::max_abs(matrix_ - matrix_.adjoint());
    if (herm_residue > 1e-8) {
        throw ArgumentError("DensityMatrix: hermiticity residue " + std::to_string(herm_residue) +
                            " exceeds 1e-8");
    }
    matrix_ = 0.5 * (matrix_ + matrix_.adjoint().eval());

    const double trace_err = std::abs(matrix_.trace() - Complex(1.0, 0.0));
    if (trace_err > 1e-6) {
        throw ArgumentError("DensityMatrix: trace deviates from 1 by " + std::to_string(trace_err));
    }
    check_product_dims(product_dims_, matrix_.rows(), "DensityMatrix");
}

DensityMatrix get_density_matrix(const QuantumState& psi) {
    if (!psi.is_normalized()) {
        throw ArgumentError("get_density_matrix: state is not normalized");
    }
    return DensityMatrix(psi.amplitudes() * psi.amplitudes().adjoint(), psi.product_dims());
}

}  // namespace qdyn
