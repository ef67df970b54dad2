#include "qdyn/operators.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace qdyn {

namespace {
constexpr Complex kI(0.0, 1.0);
}

Operator::Operator(ComplexMatrix matrix, std::vector<int> product_dims)
    : matrix_(std::move(matrix)), product_dims_(std::move(product_dims)) {
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() < 1) {
        throw ShapeError("Operator: matrix must be square, n >= 1");
    }
    if (!product_dims_.empty()) {
        long p = 1;
        for (int d : product_dims_) p *= d;
        if (p != matrix_.rows()) {
            throw ShapeError("Operator: product of factor dims does not match dimension");
        }
    }
}

Operator Operator::dagger() const { return Operator(matrix_.adjoint(), product_dims_); }

bool Operator::is_hermitian(double tol) const { return linalg::is_hermitian(matrix_, tol); }

bool Operator::is_unitary(double tol) const {
    const ComplexMatrix residue =
        matrix_.adjoint() * matrix_ - ComplexMatrix::Identity(matrix_.rows(), matrix_.cols());
    return linalg::max_abs(residue) <= tol;
}

QuantumState Operator::mul(const QuantumState& psi) const {
    if (dims() != psi.dims()) throw ShapeError("Operator::mul: dimensions differ");
    return QuantumState(matrix_ * psi.amplitudes(), psi.product_dims());
}

Operator operator*(const Operator& a, const Operator& b) {
    if (a.dims() != b.dims()) throw ShapeError("operator composition: dimensions differ");
    auto dims = a.product_dims_ == b.product_dims_ ? a.product_dims_ : std::vector<int>{};
    return Operator(a.matrix_ * b.matrix_, std::move(dims));
}

Operator operator+(const Operator& a, const Operator& b) {
    if (a.dims() != b.dims()) throw ShapeError("operator addition: dimensions differ");
    auto dims = a.product_dims_ == b.product_dims_ ? a.product_dims_ : std::vector<int>{};
    return Operator(a.matrix_ + b.matrix_, std::move(dims));
}

Operator operator-(const Operator& a, const Operator& b) {
    if (a.dims() != b.dims()) throw ShapeError("operator subtraction: dimensions differ");
    auto dims = a.product_dims_ == b.product_dims_ ? a.product_dims_ : std::vector<int>{};
    return Operator(a.matrix_ - b.matrix_, std::move(dims));
}

Operator operator*(Complex scalar, const Operator& a) {
    return Operator(scalar * a.matrix_, a.product_dims_);
}

Operator operator*(double scalar, const Operator& a) {
    return Operator(Complex(scalar, 0.0) * a.matrix_, a.product_dims_);
}

QuantumState operator*(const Operator& a, const QuantumState& psi) { return a.mul(psi); }

DynamicOperator DynamicOperator::from_frames(TimeGrid grid, std::vector<ComplexMatrix> frames) {
    if (frames.size() != grid.size()) {
        throw ShapeError("DynamicOperator: need one frame per grid point (" +
                         std::to_string(grid.size()) + " points, " +
                         std::to_string(frames.size()) + " frames)");
    }
    const int n = static_cast<int>(frames.front().rows());
    bool constant = true;
    for (const auto& f : frames) {
        if (f.rows() != n || f.cols() != n) {
            throw ShapeError("DynamicOperator: all frames must be square of equal dimension");
        }
        if (constant && f != frames.front()) constant = false;
    }
    if (constant) frames.resize(1);
    return DynamicOperator(std::move(grid), std::move(frames), n);
}

DynamicOperator DynamicOperator::from_constant(const Operator& op, TimeGrid grid) {
    return DynamicOperator(std::move(grid), {op.matrix()}, op.dims());
}

DynamicOperator DynamicOperator::from_function(const std::function<ComplexMatrix(double)>& fn,
                                               TimeGrid grid) {
    std::vector<ComplexMatrix> frames;
    frames.reserve(grid.size());
    for (double t : grid.points()) frames.push_back(fn(t));
    return from_frames(std::move(grid), std::move(frames));
}

const ComplexMatrix& DynamicOperator::frame(std::size_t k) const {
    if (k >= grid_.size()) throw ArgumentError("DynamicOperator: frame index out of range");
    return frames_.size() == 1 ? frames_.front() : frames_[k];
}

Operator sigma_x() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 1, 0;
    return Operator(std::move(m));
}

Operator sigma_y() {
    ComplexMatrix m(2, 2);
    m << 0, -kI, kI, 0;
    return Operator(std::move(m));
}

Operator sigma_z() {
    ComplexMatrix m(2, 2);
    m << 1, 0, 0, -1;
    return Operator(std::move(m));
}

Operator sigma_plus() {
    ComplexMatrix m(2, 2);
    m << 0, 1, 0, 0;
    return Operator(std::move(m));
}

Operator sigma_minus() { return sigma_plus().dagger(); }

Operator eye(int n) {
    if (n < 1) throw ArgumentError("eye: dimension must be at least 1");
    return Operator(ComplexMatrix::Identity(n, n));
}

Operator annihilation(int n) {
    if (n < 1) throw ArgumentError("annihilation: dimension must be at least 1");
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (int k = 1; k < n; ++k) m(k - 1, k) = std::sqrt(static_cast<double>(k));
    return Operator(std::move(m));
}

Operator creation(int n) { return annihilation(n).dagger(); }

Operator displacement(int n, Complex alpha) {
    const ComplexMatrix a = annihilation(n).matrix();
    return Operator(linalg::expm(alpha * a.adjoint() - std::conj(alpha) * a));
}

Operator parity(int n) {
    if (n < 1) throw ArgumentError("parity: dimension must be at least 1");
    ComplexMatrix number = ComplexMatrix::Zero(n, n);
    for (int k = 0; k < n; ++k) number(k, k) = Complex(static_cast<double>(k), 0.0);
    return Operator(linalg::expm(kI * std::numbers::pi * number));
}

std::vector<double> expect_val_dm(const std::vector<DensityMatrix>& trajectory,
                                  const Operator& op) {
    if (!op.is_hermitian()) throw ArgumentError("expect_val_dm: observable must be Hermitian");
    std::vector<double> values;
    values.reserve(trajectory.size());
    for (const auto& rho : trajectory) {
        if (rho.dims() != op.dims()) throw ShapeError("expect_val_dm: dimensions differ");
        const Complex tr = (rho.matrix() * op.matrix()).trace();
        if (std::abs(tr.imag()) > 1e-8) {
            throw InvariantError("expect_val_dm: imaginary residue " +
                                 std::to_string(tr.imag()) + " exceeds 1e-8");
        }
        values.push_back(tr.real());
    }
    return values;
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& target) {
    if (rho.dims() != target.dims()) throw ShapeError("fidelity: dimensions differ");
    const double purity = (target.matrix() * target.matrix()).trace().real();
    if (std::abs(purity - 1.0) > 1e-6) {
        throw ArgumentError("fidelity: target state must be pure");
    }
    const Complex tr = (target.matrix() * rho.matrix()).trace();
    const double value = tr.real();
    if (value < -1e-9 || value > 1.0 + 1e-9) {
        throw InvariantError("fidelity: value " + std::to_string(value) + " outside [0, 1]");
    }
    return value;
}

}  // namespace qdyn
