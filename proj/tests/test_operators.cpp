#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qdyn/operators.hpp"
#include "qdyn/states.hpp"
#include "support/helpers.hpp"

using namespace qdyn;
using testsupport::expm_taylor;
using testsupport::max_diff;

namespace {
const Complex kI(0.0, 1.0);
}

TEST_CASE("operator algebra", "[operators]") {
    SECTION("pauli composition and addition") {
        const Operator comp = sigma_x() * sigma_y();
        ComplexMatrix comp_expected(2, 2);
        comp_expected << kI, 0, 0, -kI;
        REQUIRE(max_diff(comp.matrix(), comp_expected) == 0.0);

        const Operator sum = sigma_x() + sigma_y();
        ComplexMatrix sum_expected(2, 2);
        sum_expected << 0, Complex(1, -1), Complex(1, 1), 0;
        REQUIRE(max_diff(sum.matrix(), sum_expected) == 0.0);
    }
    SECTION("acting on a state") {
        const auto b = QuantumState::basis(2);
        const QuantumState flipped = sigma_x().mul(b[0]);
        REQUIRE(max_diff(flipped.amplitudes(), b[1].amplitudes()) == 0.0);
    }
    SECTION("hermiticity and unitarity checks") {
        REQUIRE(sigma_y().is_hermitian());
        REQUIRE(sigma_y().is_unitary());
        REQUIRE_FALSE(sigma_plus().is_hermitian());
        REQUIRE_FALSE(annihilation(4).is_unitary());
    }
}

TEST_CASE("ladder operators", "[operators]") {
    SECTION("raising and lowering adjoint pair") {
        REQUIRE(max_diff(sigma_plus().matrix(), sigma_minus().dagger().matrix()) == 0.0);
        ComplexMatrix sp(2, 2);
        sp << 0, 1, 0, 0;
        REQUIRE(max_diff(sigma_plus().matrix(), sp) == 0.0);
    }
    SECTION("annihilation matrix elements") {
        const Operator a = annihilation(4);
        for (int k = 1; k < 4; ++k) {
            REQUIRE(std::abs(a.matrix()(k - 1, k) - std::sqrt(static_cast<double>(k))) <= 1e-15);
        }
        REQUIRE(max_diff(creation(4).matrix(), a.dagger().matrix()) == 0.0);
    }
    SECTION("commutator is the identity away from the truncation edge") {
        const int n = 6;
        const Operator a = annihilation(n);
        const ComplexMatrix comm = (a * creation(n) - creation(n) * a).matrix();
        REQUIRE(max_diff(comm.topLeftCorner(n - 1, n - 1),
                         ComplexMatrix::Identity(n - 1, n - 1)) <= 1e-14);
    }
}

TEST_CASE("parity operator", "[operators]") {
    const Operator p = parity(4);
    ComplexMatrix expected = ComplexMatrix::Zero(4, 4);
    for (int k = 0; k < 4; ++k) expected(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
    REQUIRE(max_diff(p.matrix(), expected) <= 1e-12);
}

TEST_CASE("displacement operator", "[operators]") {
    // Displacing vacuum produces the coherent state.
    for (const Complex alpha : {Complex(0.4, 0.0), Complex(1.1, -0.7), Complex(0.0, 2.0)}) {
        const Operator d = displacement(50, alpha);
        const QuantumState displaced = d.mul(QuantumState::basis(50)[0]);
        const QuantumState coherent = QuantumState::coherent(50, alpha);
        REQUIRE(max_diff(displaced.amplitudes(), coherent.amplitudes()) <= 1e-8);
        REQUIRE(d.is_unitary(1e-10));
    }
}

TEST_CASE("dynamic operators", "[operators]") {
    const TimeGrid grid = TimeGrid::from_range(0.0, 1.0, 0.2);

    SECTION("constant replication") {
        const DynamicOperator h = DynamicOperator::from_constant(sigma_x(), grid);
        REQUIRE(h.frame_count() == grid.size());
        REQUIRE(h.is_constant());
        for (std::size_t k = 0; k < grid.size(); ++k) {
            REQUIRE(max_diff(h.frame(k), sigma_x().matrix()) == 0.0);
        }
    }
    SECTION("alternating function of time") {
        const auto fn = [&grid](double t) -> ComplexMatrix {
            const auto index = grid.index_left_of(t);
            return index % 2 == 0 ? sigma_x().matrix() : sigma_z().matrix();
        };
        const DynamicOperator h = DynamicOperator::from_function(fn, grid);
        REQUIRE_FALSE(h.is_constant());
        REQUIRE(max_diff(h.frame(0), sigma_x().matrix()) == 0.0);
        REQUIRE(max_diff(h.frame(1), sigma_z().matrix()) == 0.0);
        REQUIRE(max_diff(h.frame(2), sigma_x().matrix()) == 0.0);
        REQUIRE(max_diff(h.frame(3), sigma_z().matrix()) == 0.0);
        REQUIRE(max_diff(h.frame(4), sigma_x().matrix()) == 0.0);
    }
    SECTION("nearest-left lookup") {
        std::vector<ComplexMatrix> frames;
        for (std::size_t k = 0; k < grid.size(); ++k) {
            frames.push_back(static_cast<double>(k) * ComplexMatrix::Identity(2, 2));
        }
        const DynamicOperator h = DynamicOperator::from_frames(grid, frames);
        REQUIRE(h.frame_at(0.05)(0, 0).real() == 0.0);
        REQUIRE(h.frame_at(0.2)(0, 0).real() == 1.0);
        REQUIRE(h.frame_at(0.39)(0, 0).real() == 1.0);
        REQUIRE(h.frame_at(5.0)(0, 0).real() == 5.0);  // clamped to the last frame
    }
    SECTION("frame stacks detected constant") {
        std::vector<ComplexMatrix> frames(grid.size(), sigma_z().matrix());
        REQUIRE(DynamicOperator::from_frames(grid, frames).is_constant());
    }
    SECTION("frame count mismatch") {
        std::vector<ComplexMatrix> frames(2, sigma_z().matrix());
        REQUIRE_THROWS_AS(DynamicOperator::from_frames(grid, frames), ShapeError);
    }
}

TEST_CASE("expectation values", "[operators]") {
    const auto b = QuantumState::basis(2);

    SECTION("basis projector gives +1") {
        const std::vector<DensityMatrix> traj{get_density_matrix(b[0])};
        REQUIRE(expect_val_dm(traj, sigma_z())[0] == 1.0);
    }
    SECTION("maximally mixed gives 0") {
        const std::vector<DensityMatrix> traj{DensityMatrix(0.5 * ComplexMatrix::Identity(2, 2))};
        REQUIRE(std::abs(expect_val_dm(traj, sigma_z())[0]) <= 1e-15);
    }
    SECTION("rejects non-hermitian observables") {
        const std::vector<DensityMatrix> traj{get_density_matrix(b[0])};
        REQUIRE_THROWS_AS(expect_val_dm(traj, sigma_plus()), ArgumentError);
    }
    SECTION("rejects dimension mismatch") {
        const std::vector<DensityMatrix> traj{get_density_matrix(b[0])};
        REQUIRE_THROWS_AS(expect_val_dm(traj, eye(3)), ShapeError);
    }
}

TEST_CASE("fidelity", "[operators]") {
    const auto b = QuantumState::basis(2);
    const DensityMatrix rho0 = get_density_matrix(b[0]);
    const DensityMatrix rho1 = get_density_matrix(b[1]);

    REQUIRE(fidelity(rho0, rho0) == 1.0);
    REQUIRE(fidelity(rho0, rho1) == 0.0);

    const DensityMatrix mixed(0.5 * ComplexMatrix::Identity(2, 2));
    REQUIRE(std::abs(fidelity(mixed, rho0) - 0.5) <= 1e-15);

    // pure-state fidelity reduces to the squared overlap
    const QuantumState plus = (b[0] + b[1]).normalized();
    const double overlap = std::norm(inner_product(plus, b[0]));
    REQUIRE(std::abs(fidelity(get_density_matrix(plus), rho0) - overlap) <= 1e-14);

    REQUIRE_THROWS_AS(fidelity(rho0, mixed), ArgumentError);  // target must be pure
    const DensityMatrix big(ComplexMatrix::Identity(3, 3) / 3.0);
    REQUIRE_THROWS_AS(fidelity(rho0, big), ShapeError);
}
