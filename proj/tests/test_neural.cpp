#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "qdyn/neural.hpp"
#include "support/helpers.hpp"

using namespace qdyn;
using namespace qdyn::neural;

namespace {

BusProblem reduced_problem(bool with_penalty) {
    BusProblem p;
    p.n_qubits = 2;
    p.n_fock = 3;
    p.t_final = 0.5;
    p.dt = 0.1;
    p.penalty.enabled = with_penalty;
    p.penalty.weight = 0.1;
    p.penalty.cutoff = 1;
    return p;
}

}  // namespace

TEST_CASE("mlp forward", "[neural]") {
    SECTION("zero parameters give zero output") {
        Mlp net = Mlp::create(8, 1, 2, Activation::Tanh, 1.0, 3);
        net.set_parameters(Eigen::VectorXd::Zero(net.parameter_count()));
        for (double t : {-1.0, 0.0, 0.4, 2.0}) {
            REQUIRE(net.forward(t).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    SECTION("outputs always respect the bound") {
        for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
            Mlp net = Mlp::create(16, 2, 3, Activation::Sin, 1.0, seed);
            Eigen::VectorXd big = 50.0 * net.parameters();
            net.set_parameters(big);
            for (double t = -2.0; t <= 2.0; t += 0.13) {
                REQUIRE(net.forward(t).cwiseAbs().maxCoeff() <= 1.0);
            }
        }
    }
    SECTION("single sin unit reproduces the closed form") {
        const double w1 = 1.7, b1 = 0.3, w2 = 0.8, b2 = -0.1;
        std::vector<Mlp::Layer> layers(2);
        layers[0].weight = Eigen::MatrixXd::Constant(1, 1, w1);
        layers[0].bias = Eigen::VectorXd::Constant(1, b1);
        layers[1].weight = Eigen::MatrixXd::Constant(1, 1, w2);
        layers[1].bias = Eigen::VectorXd::Constant(1, b2);
        const Mlp net(layers, Activation::Sin, 10.0);
        for (double t : {0.0, 0.5, 1.3, -0.7}) {
            REQUIRE(std::abs(net.forward(t)(0) - (w2 * std::sin(w1 * t + b1) + b2)) <= 1e-14);
        }
    }
}

TEST_CASE("mlp backward", "[neural]") {
    SECTION("matches finite differences") {
        Mlp net = Mlp::create(8, 0, 2, Activation::Sin, 5.0, 11);  // 1 x 8 x 2, interior outputs
        const std::vector<double> ts{0.1, 0.35, 0.8};

        Rng rng(13);
        Eigen::MatrixXd upstream(3, 2);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 2; ++j) upstream(i, j) = rng.uniform(-1.0, 1.0);
        }

        Mlp::Tape tape;
        net.forward_batch(ts, &tape);
        const Eigen::VectorXd analytic = net.backward(tape, upstream);

        const auto objective = [&](const Eigen::VectorXd& params) {
            Mlp probe = net;
            probe.set_parameters(params);
            return (upstream.cwiseProduct(probe.forward_batch(ts))).sum();
        };
        const Eigen::VectorXd base = net.parameters();
        Eigen::VectorXd numeric(base.size());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < base.size(); ++i) {
            Eigen::VectorXd up = base, down = base;
            up(i) += h;
            down(i) -= h;
            numeric(i) = (objective(up) - objective(down)) / (2 * h);
        }
        REQUIRE((analytic - numeric).norm() / numeric.norm() <= 1e-6);
    }
    SECTION("zero upstream gives zero gradients") {
        Mlp net = Mlp::create(8, 1, 2, Activation::Tanh, 1.0, 17);
        Mlp::Tape tape;
        net.forward_batch(std::vector<double>{0.2, 0.7}, &tape);
        const Eigen::VectorXd g = net.backward(tape, Eigen::MatrixXd::Zero(2, 2));
        REQUIRE(g.cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("saturated outputs block all gradient flow") {
        Mlp net = Mlp::create(8, 0, 2, Activation::Tanh, 0.5, 19);
        Eigen::VectorXd params = net.parameters();
        params.tail(2) << 100.0, -100.0;  // output biases far outside the bound
        net.set_parameters(params);

        Mlp::Tape tape;
        const Eigen::MatrixXd out = net.forward_batch(std::vector<double>{0.1, 0.9}, &tape);
        REQUIRE(out.cwiseAbs().minCoeff() == 0.5);
        const Eigen::VectorXd g = net.backward(tape, Eigen::MatrixXd::Ones(2, 2));
        REQUIRE(g.cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("bus hamiltonian", "[neural]") {
    BusProblem p;  // 3 qubits, 10 Fock levels

    SECTION("zero controls give the zero matrix") {
        const std::vector<double> controls(4, 0.0);
        REQUIRE(linalg::max_abs(bus_hamiltonian(p, controls)) == 0.0);
    }
    SECTION("hermitian for arbitrary controls") {
        Rng rng(23);
        for (int trial = 0; trial < 3; ++trial) {
            const std::vector<double> controls{rng.uniform(-1, 1), rng.uniform(-1, 1),
                                               rng.uniform(-1, 1), rng.uniform(-1, 1)};
            const ComplexMatrix h = bus_hamiltonian(p, controls);
            REQUIRE(linalg::max_abs(h - h.adjoint()) <= 1e-12);
        }
    }
    SECTION("first-qubit coupling exchanges one excitation with the resonator") {
        const std::vector<double> controls{1.0, 0.0, 0.0, 0.0};
        const ComplexMatrix h = bus_hamiltonian(p, controls);
        const int n_fock = p.n_fock;
        // qubit 1 swaps its index-0 occupation against one photon:
        // <1 q2 q3; n+1| H |0 q2 q3; n> = sqrt(n+1)
        for (int q23 = 0; q23 < 4; ++q23) {
            const int from = (0 * 4 + q23) * n_fock + 0;
            const int to = (1 * 4 + q23) * n_fock + 1;
            REQUIRE(std::abs(h(to, from) - Complex(1.0, 0.0)) <= 1e-14);
            REQUIRE(std::abs(h(from, to) - Complex(1.0, 0.0)) <= 1e-14);
        }
        // and the drive channel is off
        REQUIRE(std::abs(h(1, 0)) == 0.0);
    }
    SECTION("control count is checked") {
        const std::vector<double> controls(3, 0.0);
        REQUIRE_THROWS_AS(bus_hamiltonian(p, controls), ShapeError);
    }
}

TEST_CASE("bus evaluation", "[neural]") {
    SECTION("untrained nets start at high loss and orthogonal fidelity") {
        BusProblem p = reduced_problem(false);
        const Mlp net = Mlp::create(8, 0, p.n_channels(), Activation::Sin, 1.0, 29);
        const BusEval eval = bus_evaluate(p, net);
        REQUIRE(eval.loss > 0.0);
        REQUIRE(eval.loss <= 1.0 + 1e-12);
        REQUIRE(eval.fidelity_series.front() == 0.0);  // |01> overlaps neither |00> nor |11>
        REQUIRE(eval.norm_error <= 1e-8);
    }
    SECTION("idle controls leave the cavity empty, so no penalty") {
        BusProblem p = reduced_problem(true);
        Mlp net = Mlp::create(8, 0, p.n_channels(), Activation::Sin, 1.0, 31);
        net.set_parameters(Eigen::VectorXd::Zero(net.parameter_count()));
        const BusEval eval = bus_evaluate(p, net);
        REQUIRE(eval.penalty == 0.0);
    }
    SECTION("gradient-path loss equals the engine-path loss") {
        for (bool with_penalty : {false, true}) {
            BusProblem p = reduced_problem(with_penalty);
            const Mlp net = Mlp::create(8, 0, p.n_channels(), Activation::Sin, 1.0, 37);
            double from_gradient = 0.0;
            bus_gradient(p, net, &from_gradient);
            REQUIRE(std::abs(from_gradient - bus_loss(p, net)) <= 1e-11);
        }
    }
}

TEST_CASE("bus gradient matches finite differences", "[neural]") {
    for (bool with_penalty : {false, true}) {
        BusProblem p = reduced_problem(with_penalty);
        Mlp net = Mlp::create(8, 0, p.n_channels(), Activation::Sin, 5.0, 41);

        const Eigen::VectorXd analytic = bus_gradient(p, net);
        const Eigen::VectorXd base = net.parameters();
        Eigen::VectorXd numeric(base.size());
        const double h = 1e-6;
        for (Eigen::Index i = 0; i < base.size(); ++i) {
            Eigen::VectorXd up = base, down = base;
            up(i) += h;
            down(i) -= h;
            Mlp probe = net;
            probe.set_parameters(up);
            const double f_up = bus_loss(p, probe);
            probe.set_parameters(down);
            const double f_down = bus_loss(p, probe);
            numeric(i) = (f_up - f_down) / (2 * h);
        }
        const double rel = (analytic - numeric).norm() / numeric.norm();
        REQUIRE(rel <= 1e-5);
    }
}

TEST_CASE("network serialization", "[neural]") {
    namespace fs = std::filesystem;
    const fs::path path = fs::temp_directory_path() / "qdyn_test_net.bin";

    SECTION("roundtrip preserves everything") {
        Mlp net = Mlp::create(12, 2, 4, Activation::Sin, 1.0, 43);
        net.save(path);
        const Mlp loaded = Mlp::load(path);
        REQUIRE(loaded.activation() == net.activation());
        REQUIRE(loaded.bound() == net.bound());
        REQUIRE((loaded.parameters() - net.parameters()).cwiseAbs().maxCoeff() == 0.0);
        REQUIRE((loaded.forward(0.37) - net.forward(0.37)).cwiseAbs().maxCoeff() == 0.0);
        fs::remove(path);
    }
    SECTION("garbage files are rejected") {
        std::ofstream out(path, std::ios::binary);
        out << "definitely not a network";
        out.close();
        REQUIRE_THROWS_AS(Mlp::load(path), ArgumentError);
        fs::remove(path);
    }
}

TEST_CASE("train_bbnn", "[neural]") {
    SECTION("zero iterations leave the network unchanged") {
        BusProblem p = reduced_problem(false);
        Mlp net = Mlp::create(8, 0, p.n_channels(), Activation::Sin, 1.0, 47);
        const Eigen::VectorXd before = net.parameters();
        const std::vector<TrainSession> sessions{{1e-3, 0}};
        const TrainResult result = train_bbnn(p, net, sessions);
        REQUIRE((result.net.parameters() - before).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("loss improves on the reduced problem") {
        BusProblem p = reduced_problem(false);
        p.t_final = 2.0;  // enough time to move the excitation around
        Mlp net = Mlp::create(16, 1, p.n_channels(), Activation::Sin, 1.0, 53);
        const double before = bus_loss(p, net);
        const std::vector<TrainSession> sessions{{1e-2, 60}};
        const TrainResult result = train_bbnn(p, net, sessions);
        REQUIRE(result.best_loss < before);
        REQUIRE(result.best_loss <= result.loss_history.back() + 1e-12);

        // best-seen loss is non-increasing by construction
        double best = std::numeric_limits<double>::infinity();
        for (double l : result.loss_history) {
            best = std::min(best, l);
        }
        REQUIRE(result.best_loss == best);
    }
}
