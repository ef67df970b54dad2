#pragma once

#include <vector>

#include "qdyn/linalg.hpp"
#include "qdyn/rng.hpp"

namespace testsupport {

using qdyn::Complex;
using qdyn::ComplexMatrix;

inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols, qdyn::Rng& rng,
                                    double scale = 1.0) {
    ComplexMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = Complex(rng.uniform(-scale, scale), rng.uniform(-scale, scale));
        }
    }
    return m;
}

inline ComplexMatrix random_hermitian(Eigen::Index n, qdyn::Rng& rng, double scale = 1.0) {
    const ComplexMatrix m = random_complex(n, n, rng, scale);
    return 0.5 * (m + m.adjoint()).eval();
}

inline ComplexMatrix random_anti_hermitian(Eigen::Index n, qdyn::Rng& rng, double scale = 1.0) {
    const ComplexMatrix m = random_complex(n, n, rng, scale);
    return 0.5 * (m - m.adjoint()).eval();
}

inline double max_diff(const ComplexMatrix& a, const ComplexMatrix& b) {
    return qdyn::linalg::max_abs(a - b);
}

// Straight truncated power series: independent of the production expm path.
inline ComplexMatrix expm_taylor(const ComplexMatrix& a, int terms = 30) {
    ComplexMatrix sum = ComplexMatrix::Identity(a.rows(), a.cols());
    ComplexMatrix term = sum;
    for (int k = 1; k <= terms; ++k) {
        term = (term * a / static_cast<double>(k)).eval();
        sum += term;
    }
    return sum;
}

// Plain fixed-step rk4 over an arbitrary matrix-valued right-hand side.
template <typename Rhs>
ComplexMatrix rk4_oracle(const Rhs& rhs, double t0, double t1, ComplexMatrix y, int steps) {
    const double h = (t1 - t0) / steps;
    for (int s = 0; s < steps; ++s) {
        const double t = t0 + s * h;
        const ComplexMatrix k1 = rhs(t, y);
        const ComplexMatrix k2 = rhs(t + 0.5 * h, (y + 0.5 * h * k1).eval());
        const ComplexMatrix k3 = rhs(t + 0.5 * h, (y + 0.5 * h * k2).eval());
        const ComplexMatrix k4 = rhs(t + h, (y + h * k3).eval());
        y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return y;
}

}  // namespace testsupport
