#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "qdyn/dynamics.hpp"
#include "qdyn/grape.hpp"
#include "qdyn/states.hpp"
#include "qdyn/time_grid.hpp"

namespace qdyn::neural {

enum class Activation { Tanh, Sin };

/// Fully connected feed-forward network mapping a scalar input to bounded
/// control amplitudes: Linear(1, h) + act, n_hidden x (Linear(h, h) + act),
/// Linear(h, C), hard clip to [-bound, bound].
class Mlp {
public:
    struct Layer {
        Eigen::MatrixXd weight;  // out x in
        Eigen::VectorXd bias;
    };

    /// Activation tape from a batched forward pass, consumed by backward().
    struct Tape {
        Eigen::MatrixXd input;                       // n_t x 1
        std::vector<Eigen::MatrixXd> pre_acts;       // per layer, n_t x width
        std::vector<Eigen::MatrixXd> post_acts;      // per hidden layer
        Eigen::MatrixXd pre_clip;                    // n_t x C
    };

    Mlp(std::vector<Layer> layers, Activation act, double bound);

    /// Network with uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and
    /// biases, fully determined by the seed.
    static Mlp create(int hidden_size, int n_hidden_layers, int output_size, Activation act,
                      double bound, std::uint64_t seed);

    Activation activation() const { return activation_; }
    double bound() const { return bound_; }
    int output_size() const { return static_cast<int>(layers_.back().weight.rows()); }
    const std::vector<Layer>& layers() const { return layers_; }

    Eigen::Index parameter_count() const;
    /// Flat view: per layer, the weight matrix row by row, then the bias.
    Eigen::VectorXd parameters() const;
    void set_parameters(const Eigen::Ref<const Eigen::VectorXd>& flat);

    /// Control vector for one input value (already clipped).
    Eigen::VectorXd forward(double x) const;

    /// Batched forward over many inputs, one row per input. Pass a tape to
    /// record activations for a later backward().
    Eigen::MatrixXd forward_batch(std::span<const double> xs, Tape* tape = nullptr) const;

    /// Exact reverse-mode gradient of sum_{t,c} upstream(t,c) * output(t,c)
    /// with respect to the flat parameters. Outputs saturated at the bound
    /// contribute nothing (hard-clip rule).
    Eigen::VectorXd backward(const Tape& tape, const Eigen::MatrixXd& upstream) const;

    /// Portable dump: layer shapes plus the flat parameter list as
    /// little-endian 64-bit floats.
    void save(const std::filesystem::path& path) const;
    static Mlp load(const std::filesystem::path& path);

private:
    std::vector<Layer> layers_;
    Activation activation_;
    double bound_;
};

struct BusPenalty {
    bool enabled = false;
    double weight = 0.1;
    int cutoff = 2;  // Fock levels >= cutoff are penalized
};

/// Qubit register coupled to a driven single-mode resonator. Qubit j sits in
/// tensor slot j, the resonator last. The network supplies the per-qubit
/// couplings g_1..g_n and the drive amplitude xi at every time step; the
/// target is the GHZ state of the qubit register after the resonator is
/// traced out.
struct BusProblem {
    int n_qubits = 3;
    int n_fock = 10;
    double t_final = 8.0;
    double dt = 0.1;
    BusPenalty penalty{};
    /// Feed t / t_final instead of raw t to the network. Off by default:
    /// with sin activations the raw time axis spans several periods of the
    /// first-layer features and trains markedly better.
    bool normalize_time = false;

    int dim() const { return (1 << n_qubits) * n_fock; }
    int n_channels() const { return n_qubits + 1; }
    TimeGrid grid() const { return TimeGrid::from_range(0.0, t_final, dt); }

    /// Qubit register |010...0> (second qubit excited) with the resonator in
    /// vacuum.
    QuantumState initial_state() const;
    QuantumState ghz_state() const;
    DensityMatrix ghz_target() const;

    void validate() const;
};

/// sum_j g_j (a^dag sigma_j^- + a sigma_j^+) + xi (a + a^dag); controls are
/// (g_1, ..., g_n, xi). Hermitian by construction.
ComplexMatrix bus_hamiltonian(const BusProblem& problem, std::span<const double> controls);

struct BusEval {
    double loss = 0.0;
    double infidelity = 0.0;
    double penalty = 0.0;
    double final_fidelity = 0.0;
    double norm_error = 0.0;               // | ||psi(T)|| - 1 |
    std::vector<double> fidelity_series;   // per grid point
    Eigen::MatrixXd controls;              // clipped controls at every grid point
};

/// Forward pass with diagnostics: samples the network on the grid, evolves
/// the full state with the piecewise-exact engine, reduces out the resonator
/// and scores 1 - fidelity [+ the time-averaged high-Fock population when
/// the penalty is enabled].
BusEval bus_evaluate(const BusProblem& problem, const Mlp& net);

double bus_loss(const BusProblem& problem, const Mlp& net);

/// Exact gradient of bus_loss with respect to the network parameters: a
/// discrete adjoint through the step sequence (the Frechet derivative of
/// each step exponential, evaluated in the Hamiltonian eigenbasis),
/// accumulating terminal and running-cost contributions, chained through
/// the network backward pass.
Eigen::VectorXd bus_gradient(const BusProblem& problem, const Mlp& net,
                             double* loss_out = nullptr);

struct TrainSession {
    double lr = 1e-3;
    int iterations = 500;
};

struct TrainResult {
    Mlp net;  // best seen over the whole run
    std::vector<double> loss_history;
    double best_loss = 0.0;
    std::size_t best_iteration = 0;
};

/// Adam-driven training, one optimizer per session; stops early when the
/// loss drops below loss_threshold.
TrainResult train_bbnn(const BusProblem& problem, Mlp net, std::span<const TrainSession> sessions,
                       double loss_threshold = 1e-4);

}  // namespace qdyn::neural
