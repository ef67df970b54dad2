#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "qdyn/states.hpp"
#include "support/helpers.hpp"

using namespace qdyn;
using testsupport::max_diff;

TEST_CASE("basis states", "[states]") {
    const auto b2 = QuantumState::basis(2);
    REQUIRE(b2.size() == 2);
    REQUIRE(b2[0].amplitudes()(0, 0) == Complex(1.0, 0.0));
    REQUIRE(b2[0].amplitudes()(1, 0) == Complex(0.0, 0.0));

    const auto b3 = QuantumState::basis(3);
    REQUIRE(b3[2].amplitudes()(2, 0) == Complex(1.0, 0.0));
    REQUIRE(b3[2].amplitudes()(0, 0) == Complex(0.0, 0.0));

    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const Complex ip = inner_product(b3[i], b3[j]);
            REQUIRE(std::abs(ip - (i == j ? Complex(1, 0) : Complex(0, 0))) == 0.0);
        }
    }
    REQUIRE_THROWS_AS(QuantumState::basis(0), ArgumentError);
}

TEST_CASE("coherent states", "[states]") {
    SECTION("vacuum at alpha = 0") {
        const QuantumState vac = QuantumState::coherent(10, Complex(0.0, 0.0));
        REQUIRE(std::abs(vac.amplitudes()(0, 0) - Complex(1.0, 0.0)) == 0.0);
        for (int k = 1; k < 10; ++k) REQUIRE(std::abs(vac.amplitudes()(k, 0)) == 0.0);
    }
    SECTION("poissonian populations at alpha = sqrt(20)") {
        const double nbar = 20.0;
        const QuantumState state = QuantumState::coherent(50, Complex(std::sqrt(nbar), 0.0));
        const auto pops = state.populations();

        // independent Poisson evaluation e^-nbar nbar^k / k!
        double weight = std::exp(-nbar);
        double max_dev = 0.0;
        double mean = 0.0;
        for (int k = 0; k < 50; ++k) {
            max_dev = std::max(max_dev, std::abs(pops[k] - weight));
            mean += k * pops[k];
            weight *= nbar / (k + 1);
        }
        REQUIRE(max_dev <= 1e-6);
        REQUIRE(std::abs(mean - nbar) <= 1e-4);  // photon-number expectation

        const double total = std::accumulate(pops.begin(), pops.end(), 0.0);
        REQUIRE(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("normalize", "[states]") {
    const auto b = QuantumState::basis(2);
    const QuantumState sum = (b[0] + b[1]).normalized();
    const double s = 1.0 / std::sqrt(2.0);
    REQUIRE(std::abs(sum.amplitudes()(0, 0) - Complex(s, 0.0)) <= 1e-15);
    REQUIRE(std::abs(sum.amplitudes()(1, 0) - Complex(s, 0.0)) <= 1e-15);

    REQUIRE(max_diff(sum.normalized().amplitudes(), sum.amplitudes()) <= 1e-12);  // idempotent

    ComplexMatrix two(2, 1);
    two << 2, 0;
    const QuantumState scaled = QuantumState(two).normalized();
    REQUIRE(std::abs(scaled.amplitudes()(0, 0) - Complex(1.0, 0.0)) == 0.0);

    REQUIRE_THROWS_AS(QuantumState(ComplexMatrix::Zero(2, 1)).normalized(), ArgumentError);
}

TEST_CASE("inner product", "[states]") {
    const auto b = QuantumState::basis(2);
    const QuantumState plus = (b[0] + b[1]).normalized();
    REQUIRE(std::abs(inner_product(plus, b[0]) - Complex(1.0 / std::sqrt(2.0), 0.0)) <= 1e-15);
    REQUIRE(std::abs(inner_product(plus, plus) - Complex(1.0, 0.0)) <= 1e-15);
    REQUIRE(std::abs(inner_product(b[0], b[1])) == 0.0);

    // conjugation sits on the first argument
    const QuantumState phased = (Complex(0.0, 1.0) * b[0]);
    REQUIRE(std::abs(inner_product(phased, b[0]) - Complex(0.0, -1.0)) <= 1e-15);

    REQUIRE_THROWS_AS(inner_product(b[0], QuantumState::basis(3)[0]), ShapeError);
}

TEST_CASE("populations", "[states]") {
    const auto b = QuantumState::basis(2);
    REQUIRE(b[0].populations() == std::vector<double>{1.0, 0.0});

    const auto plus_pops = (b[0] + b[1]).normalized().populations();
    REQUIRE(std::abs(plus_pops[0] - 0.5) <= 1e-15);
    REQUIRE(std::abs(plus_pops[1] - 0.5) <= 1e-15);
}

TEST_CASE("density matrices", "[states]") {
    const auto b = QuantumState::basis(2);

    SECTION("ground-state projector") {
        const DensityMatrix rho = get_density_matrix(b[0]);
        ComplexMatrix expected(2, 2);
        expected << 1, 0, 0, 0;
        REQUIRE(max_diff(rho.matrix(), expected) == 0.0);
    }
    SECTION("plus-state projector") {
        const DensityMatrix rho = get_density_matrix((b[0] + b[1]).normalized());
        for (Eigen::Index i = 0; i < 2; ++i) {
            for (Eigen::Index j = 0; j < 2; ++j) {
                REQUIRE(std::abs(rho.matrix()(i, j) - Complex(0.5, 0.0)) <= 1e-15);
            }
        }
    }
    SECTION("purity of pure states") {
        qdyn::Rng rng(97);
        ComplexMatrix amp = testsupport::random_complex(4, 1, rng);
        const QuantumState psi = QuantumState(std::move(amp)).normalized();
        const DensityMatrix rho = get_density_matrix(psi);
        REQUIRE(std::abs((rho.matrix() * rho.matrix()).trace().real() - 1.0) <= 1e-12);
    }
    SECTION("rejects unnormalized input") {
        ComplexMatrix two(2, 1);
        two << 2, 0;
        REQUIRE_THROWS_AS(get_density_matrix(QuantumState(two)), ArgumentError);
    }
    SECTION("rejects non-hermitian and wrong-trace matrices") {
        ComplexMatrix skew(2, 2);
        skew << 1, 1, 0, 0;
        REQUIRE_THROWS_AS(DensityMatrix(skew), ArgumentError);

        ComplexMatrix half = 0.25 * ComplexMatrix::Identity(2, 2);
        REQUIRE_THROWS_AS(DensityMatrix(half), ArgumentError);
    }
    SECTION("propagates product dims") {
        ComplexMatrix amp = ComplexMatrix::Zero(4, 1);
        amp(0, 0) = 1.0;
        const QuantumState psi(amp, {2, 2});
        REQUIRE(get_density_matrix(psi).product_dims() == std::vector<int>{2, 2});
    }
}
