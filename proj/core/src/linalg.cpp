#include "qdyn/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace qdyn::linalg {

namespace {

void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() != a.cols()) {
        throw ShapeError(std::string(who) + ": matrix must be square, got " +
                         std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
    }
}

// Order-13 Pade approximant after scaling so the 1-norm is below theta13,
// then repeated squaring. Handles the non-normal matrices (Liouvillians,
// augmented Frechet blocks) that an eigendecomposition cannot.
ComplexMatrix expm_pade13(const ComplexMatrix& a) {
    static constexpr double kTheta13 = 5.371920351148152;
    static constexpr double kB[14] = {
        64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
        1187353796428800.0,  129060195264000.0,   10559470521600.0,
        670442572800.0,      33522128640.0,       1323241920.0,
        40840800.0,          960960.0,            16380.0,
        182.0,               1.0};

    const Eigen::Index n = a.rows();
    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();

    int squarings = 0;
    ComplexMatrix scaled = a;
    if (norm1 > kTheta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / kTheta13)));
        scaled /= std::pow(2.0, squarings);
    }

    const ComplexMatrix ident = ComplexMatrix::Identity(n, n);
    const ComplexMatrix a2 = scaled * scaled;
    const ComplexMatrix a4 = a2 * a2;
    const ComplexMatrix a6 = a4 * a2;

    const ComplexMatrix u =
        scaled * (a6 * (kB[13] * a6 + kB[11] * a4 + kB[9] * a2) +
                  kB[7] * a6 + kB[5] * a4 + kB[3] * a2 + kB[1] * ident);
    const ComplexMatrix v = a6 * (kB[12] * a6 + kB[10] * a4 + kB[8] * a2) +
                            kB[6] * a6 + kB[4] * a4 + kB[2] * a2 + kB[0] * ident;

    ComplexMatrix f = (v - u).partialPivLu().solve(v + u);
    for (int i = 0; i < squarings; ++i) {
        f = (f * f).eval();
    }
    return f;
}

ComplexMatrix expm_hermitian(const ComplexMatrix& a) {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a);
    const Eigen::VectorXd& lam = es.eigenvalues();
    Eigen::VectorXcd phases(lam.size());
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        phases(i) = std::exp(Complex(lam(i), 0.0));
    }
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

double max_abs(const ComplexMatrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().maxCoeff();
}

bool is_finite(const ComplexMatrix& a) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        const Complex& z = *(a.data() + i);
        if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
    }
    return true;
}

bool is_hermitian(const ComplexMatrix& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return max_abs(a - a.adjoint()) <= tol;
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: inner dimensions differ (" +
                         std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + ")");
    }
    return a * b;
}

ComplexMatrix adjoint(const ComplexMatrix& a) { return a.adjoint(); }

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
    ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Complex trace(const ComplexMatrix& a) {
    require_square(a, "trace");
    return a.trace();
}

ComplexMatrix partial_trace_raw(const ComplexMatrix& rho,
                                const std::vector<int>& factor_dims,
                                const std::vector<int>& trace_out) {
    require_square(rho, "partial_trace_raw");

    long product = 1;
    for (int d : factor_dims) {
        if (d <= 0) throw ArgumentError("partial_trace_raw: factor dims must be positive");
        product *= d;
    }
    if (product != rho.rows()) {
        throw ShapeError("partial_trace_raw: product of factor dims " + std::to_string(product) +
                         " does not match matrix dimension " + std::to_string(rho.rows()));
    }

    const int m = static_cast<int>(factor_dims.size());
    std::vector<bool> traced(m, false);
    for (int f : trace_out) {
        if (f < 0 || f >= m) throw ArgumentError("partial_trace_raw: factor index out of range");
        if (traced[f]) throw ArgumentError("partial_trace_raw: duplicate factor index");
        traced[f] = true;
    }

    std::vector<long> stride(m, 1);
    for (int f = m - 2; f >= 0; --f) stride[f] = stride[f + 1] * factor_dims[f + 1];

    std::vector<int> kept, out;
    for (int f = 0; f < m; ++f) (traced[f] ? out : kept).push_back(f);

    long kdim = 1, tdim = 1;
    for (int f : kept) kdim *= factor_dims[f];
    for (int f : out) tdim *= factor_dims[f];

    // Flat offsets of every kept / traced multi-index into the row index.
    auto offsets = [&](const std::vector<int>& factors, long count) {
        std::vector<long> offs(count);
        for (long x = 0; x < count; ++x) {
            long rem = x, off = 0;
            for (auto it = factors.rbegin(); it != factors.rend(); ++it) {
                const long digit = rem % factor_dims[*it];
                rem /= factor_dims[*it];
                off += digit * stride[*it];
            }
            offs[x] = off;
        }
        return offs;
    };
    const std::vector<long> keep_off = offsets(kept, kdim);
    const std::vector<long> out_off = offsets(out, tdim);

    ComplexMatrix reduced = ComplexMatrix::Zero(kdim, kdim);
    for (long i = 0; i < kdim; ++i) {
        for (long j = 0; j < kdim; ++j) {
            Complex sum(0.0, 0.0);
            for (long t = 0; t < tdim; ++t) {
                sum += rho(keep_off[i] + out_off[t], keep_off[j] + out_off[t]);
            }
            reduced(i, j) = sum;
        }
    }
    return reduced;
}

ComplexMatrix expm(const ComplexMatrix& a) {
    require_square(a, "expm");
    if (!is_finite(a)) throw ArgumentError("expm: non-finite entries");
    if (a.rows() == 0) return a;
    if (is_hermitian(a, 1e-12)) return expm_hermitian(a);
    return expm_pade13(a);
}

std::pair<ComplexMatrix, ComplexMatrix> expm_frechet(const ComplexMatrix& a,
                                                     const ComplexMatrix& e) {
    require_square(a, "expm_frechet");
    require_square(e, "expm_frechet");
    if (a.rows() != e.rows()) {
        throw ShapeError("expm_frechet: base and direction dimensions differ");
    }
    if (!is_finite(a) || !is_finite(e)) {
        throw ArgumentError("expm_frechet: non-finite entries");
    }
    const Eigen::Index n = a.rows();
    if (n == 0) return {a, e};

    ComplexMatrix block = ComplexMatrix::Zero(2 * n, 2 * n);
    block.topLeftCorner(n, n) = a;
    block.topRightCorner(n, n) = e;
    block.bottomRightCorner(n, n) = a;

    const ComplexMatrix big = expm_pade13(block);
    return {big.topLeftCorner(n, n), big.topRightCorner(n, n)};
}

ComplexMatrix vec(const ComplexMatrix& rho) {
    require_square(rho, "vec");
    const Eigen::Index n = rho.rows();
    ComplexMatrix v(n * n, 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            v(i * n + j, 0) = rho(i, j);
        }
    }
    return v;
}

ComplexMatrix unvec(const ComplexMatrix& v, Eigen::Index n) {
    if (v.cols() != 1 || v.rows() != n * n) {
        throw ShapeError("unvec: expected an n^2 x 1 column with n = " + std::to_string(n));
    }
    ComplexMatrix rho(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            rho(i, j) = v(i * n + j, 0);
        }
    }
    return rho;
}

}  // namespace qdyn::linalg
