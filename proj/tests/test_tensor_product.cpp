#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qdyn/tensor_product.hpp"
#include "support/helpers.hpp"

using namespace qdyn;
using testsupport::max_diff;

TEST_CASE("product states", "[tensor]") {
    const auto b = QuantumState::basis(2);
    const QuantumState plus = (b[0] + b[1]).normalized();
    const QuantumState minus = (b[0] - b[1]).normalized();

    SECTION("plus ox minus") {
        const QuantumState psi = tensor_product_states(plus, minus);
        ComplexMatrix expected(4, 1);
        expected << 0.5, -0.5, 0.5, -0.5;
        REQUIRE(max_diff(psi.amplitudes(), expected) <= 1e-15);
        REQUIRE(psi.product_dims() == std::vector<int>{2, 2});
    }
    SECTION("four factors record their dimensions") {
        const auto fock = QuantumState::basis(10);
        const QuantumState psi = tensor_product_states(b[0], b[1], b[0], fock[0]);
        REQUIRE(psi.dims() == 80);
        REQUIRE(psi.product_dims() == std::vector<int>{2, 2, 2, 10});
        // |0 1 0> ox |0>: single nonzero amplitude at qubit index 2 (binary 010)
        REQUIRE(std::abs(psi.amplitudes()(2 * 10, 0) - Complex(1.0, 0.0)) == 0.0);
    }
    SECTION("identity products") {
        const Operator both = tensor_product_ops(eye(2), eye(2));
        REQUIRE(max_diff(both.matrix(), ComplexMatrix::Identity(4, 4)) == 0.0);
        REQUIRE(both.product_dims() == std::vector<int>{2, 2});
    }
}

TEST_CASE("partial trace on density matrices", "[tensor]") {
    const auto b = QuantumState::basis(2);
    const QuantumState plus = (b[0] + b[1]).normalized();
    const QuantumState minus = (b[0] - b[1]).normalized();
    const DensityMatrix rho1 = get_density_matrix(plus);
    const DensityMatrix rho2 = get_density_matrix(minus);

    SECTION("composite built from factors") {
        const DensityMatrix rho = tensor_product_dms(rho1, rho2);
        REQUIRE(rho.product_dims() == std::vector<int>{2, 2});
        for (Eigen::Index i = 0; i < 4; ++i) {
            for (Eigen::Index j = 0; j < 4; ++j) {
                REQUIRE(std::abs(std::abs(rho.matrix()(i, j).real()) - 0.25) <= 1e-15);
            }
        }

        const DensityMatrix back1 = partial_trace(rho, {1});
        const DensityMatrix back2 = partial_trace(rho, {0});
        REQUIRE(max_diff(back1.matrix(), rho1.matrix()) <= 1e-15);
        REQUIRE(max_diff(back2.matrix(), rho2.matrix()) <= 1e-15);
    }
    SECTION("product state roundtrip through the composite") {
        const QuantumState psi = tensor_product_states(plus, minus);
        const DensityMatrix rho = get_density_matrix(psi);
        REQUIRE(max_diff(partial_trace(rho, {1}).matrix(), rho1.matrix()) <= 1e-12);
        REQUIRE(max_diff(partial_trace(rho, {0}).matrix(), rho2.matrix()) <= 1e-12);
    }
    SECTION("bell state reduces to the maximally mixed state") {
        ComplexMatrix amp = ComplexMatrix::Zero(4, 1);
        amp(0, 0) = 1.0 / std::sqrt(2.0);
        amp(3, 0) = 1.0 / std::sqrt(2.0);
        const DensityMatrix bell = get_density_matrix(QuantumState(amp, {2, 2}));
        for (int f : {0, 1}) {
            REQUIRE(max_diff(partial_trace(bell, {f}).matrix(),
                             0.5 * ComplexMatrix::Identity(2, 2)) <= 1e-15);
        }
    }
    SECTION("missing product dims") {
        const DensityMatrix plain(0.25 * ComplexMatrix::Identity(4, 4));
        REQUIRE_THROWS_AS(partial_trace(plain, {0}), ArgumentError);
    }
}
