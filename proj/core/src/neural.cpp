#include "qdyn/neural.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

#include "qdyn/operators.hpp"
#include "qdyn/rng.hpp"
#include "qdyn/tensor_product.hpp"

static_assert(std::endian::native == std::endian::little,
              "network files are little-endian; add byte swapping for this platform");

namespace qdyn::neural {

namespace {

constexpr Complex kI(0.0, 1.0);
constexpr char kMagic[8] = {'Q', 'D', 'Y', 'N', 'M', 'L', 'P', '1'};

Eigen::MatrixXd apply_activation(const Eigen::MatrixXd& z, Activation act) {
    switch (act) {
        case Activation::Tanh:
            return z.array().tanh().matrix();
        case Activation::Sin:
            return z.array().sin().matrix();
    }
    throw ArgumentError("unknown activation");
}

Eigen::MatrixXd activation_derivative(const Eigen::MatrixXd& pre, const Eigen::MatrixXd& post,
                                      Activation act) {
    switch (act) {
        case Activation::Tanh:
            return (1.0 - post.array().square()).matrix();
        case Activation::Sin:
            return pre.array().cos().matrix();
    }
    throw ArgumentError("unknown activation");
}

// Divided difference (exp(mu_i) - exp(mu_j)) / (mu_i - mu_j) for the purely
// imaginary eigenvalues mu = -i dt lambda of a Hermitian generator, stable
// near coincident values.
Complex exp_divided_difference(double dt, double li, double lj, Complex phi_i, Complex phi_j) {
    const double gap = dt * (li - lj);
    if (std::abs(gap) < 1e-5) {
        // exp(mid) * sinch(delta), delta = (mu_i - mu_j)/2, delta^2 = -(gap/2)^2
        const double x2 = 0.25 * gap * gap;
        const Complex mid = std::exp(Complex(0.0, -0.5 * dt * (li + lj)));
        return mid * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
    }
    return (phi_i - phi_j) * Complex(0.0, 1.0) / gap;
}

ComplexMatrix kron_chain(const std::vector<ComplexMatrix>& factors) {
    ComplexMatrix acc = factors.front();
    for (std::size_t i = 1; i < factors.size(); ++i) acc = linalg::kron(acc, factors[i]);
    return acc;
}

// Real matrix times complex vector as two real products.
Eigen::VectorXcd rmul(const Eigen::MatrixXd& m, const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out(m.rows());
    out.real() = m * v.real();
    out.imag() = m * v.imag();
    return out;
}

Eigen::VectorXcd rtmul(const Eigen::MatrixXd& m, const Eigen::VectorXcd& v) {
    Eigen::VectorXcd out(m.cols());
    out.real() = m.transpose() * v.real();
    out.imag() = m.transpose() * v.imag();
    return out;
}

// Control operators in channel order: one coupling per qubit, then the drive.
std::vector<ComplexMatrix> control_operators(const BusProblem& p) {
    const ComplexMatrix qubit_eye = ComplexMatrix::Identity(2, 2);
    const ComplexMatrix a = annihilation(p.n_fock).matrix();
    const ComplexMatrix sm = sigma_minus().matrix();

    std::vector<ComplexMatrix> ops;
    ops.reserve(p.n_channels());
    for (int j = 0; j < p.n_qubits; ++j) {
        std::vector<ComplexMatrix> factors;
        for (int i = 0; i < p.n_qubits; ++i) factors.push_back(i == j ? sm : qubit_eye);
        factors.push_back(a.adjoint());
        const ComplexMatrix half = kron_chain(factors);  // a^dag sigma_j^-
        ops.push_back(half + half.adjoint());
    }
    std::vector<ComplexMatrix> drive_factors(p.n_qubits, qubit_eye);
    drive_factors.push_back(a + a.adjoint());
    ops.push_back(kron_chain(drive_factors));
    return ops;
}

// Population of Fock levels >= cutoff, from the amplitudes of the full state
// (the resonator index is the fastest-varying one).
double high_fock_population(const ComplexMatrix& amp, int n_fock, int cutoff) {
    double pop = 0.0;
    for (Eigen::Index i = 0; i < amp.rows(); ++i) {
        if (static_cast<int>(i % n_fock) >= cutoff) pop += std::norm(amp(i, 0));
    }
    return pop;
}

}  // namespace

Mlp::Mlp(std::vector<Layer> layers, Activation act, double bound)
    : layers_(std::move(layers)), activation_(act), bound_(bound) {
    if (layers_.empty()) throw ArgumentError("Mlp: need at least one layer");
    if (!(bound_ > 0.0)) throw ArgumentError("Mlp: bound must be positive");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].weight.rows() != layers_[l].bias.size()) {
            throw ShapeError("Mlp: bias size does not match layer output");
        }
        if (l > 0 && layers_[l].weight.cols() != layers_[l - 1].weight.rows()) {
            throw ShapeError("Mlp: layer " + std::to_string(l) + " input does not match previous output");
        }
    }
}

Mlp Mlp::create(int hidden_size, int n_hidden_layers, int output_size, Activation act,
                double bound, std::uint64_t seed) {
    if (hidden_size < 1 || n_hidden_layers < 0 || output_size < 1) {
        throw ArgumentError("Mlp::create: bad architecture");
    }
    Rng rng(seed);
    std::vector<Layer> layers;
    auto make_layer = [&rng](int out, int in) {
        const double k = 1.0 / std::sqrt(static_cast<double>(in));
        Layer layer{Eigen::MatrixXd(out, in), Eigen::VectorXd(out)};
        for (int r = 0; r < out; ++r) {
            for (int c = 0; c < in; ++c) layer.weight(r, c) = rng.uniform(-k, k);
        }
        for (int r = 0; r < out; ++r) layer.bias(r) = rng.uniform(-k, k);
        return layer;
    };
    layers.push_back(make_layer(hidden_size, 1));
    for (int l = 0; l < n_hidden_layers; ++l) layers.push_back(make_layer(hidden_size, hidden_size));
    layers.push_back(make_layer(output_size, hidden_size));
    return Mlp(std::move(layers), act, bound);
}

Eigen::Index Mlp::parameter_count() const {
    Eigen::Index n = 0;
    for (const auto& l : layers_) n += l.weight.size() + l.bias.size();
    return n;
}

Eigen::VectorXd Mlp::parameters() const {
    Eigen::VectorXd flat(parameter_count());
    Eigen::Index pos = 0;
    for (const auto& l : layers_) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat(pos++) = l.weight(r, c);
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) flat(pos++) = l.bias(r);
    }
    return flat;
}

void Mlp::set_parameters(const Eigen::Ref<const Eigen::VectorXd>& flat) {
    if (flat.size() != parameter_count()) throw ShapeError("Mlp: parameter vector size mismatch");
    Eigen::Index pos = 0;
    for (auto& l : layers_) {
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat(pos++);
        }
        for (Eigen::Index r = 0; r < l.bias.size(); ++r) l.bias(r) = flat(pos++);
    }
}

Eigen::VectorXd Mlp::forward(double x) const {
    const double xs[1] = {x};
    return forward_batch(xs).row(0).transpose();
}

Eigen::MatrixXd Mlp::forward_batch(std::span<const double> xs, Tape* tape) const {
    const auto n_t = static_cast<Eigen::Index>(xs.size());
    Eigen::MatrixXd cur(n_t, 1);
    for (Eigen::Index i = 0; i < n_t; ++i) cur(i, 0) = xs[i];
    if (tape) {
        *tape = Tape{};
        tape->input = cur;
    }

    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
        Eigen::MatrixXd z = (cur * layers_[l].weight.transpose()).rowwise() +
                            layers_[l].bias.transpose();
        cur = apply_activation(z, activation_);
        if (tape) {
            tape->pre_acts.push_back(std::move(z));
            tape->post_acts.push_back(cur);
        }
    }
    Eigen::MatrixXd pre_clip = (cur * layers_.back().weight.transpose()).rowwise() +
                               layers_.back().bias.transpose();
    if (tape) tape->pre_clip = pre_clip;
    return pre_clip.cwiseMax(-bound_).cwiseMin(bound_);
}

Eigen::VectorXd Mlp::backward(const Tape& tape, const Eigen::MatrixXd& upstream) const {
    if (upstream.rows() != tape.pre_clip.rows() || upstream.cols() != tape.pre_clip.cols()) {
        throw ShapeError("Mlp::backward: upstream shape does not match the taped forward pass");
    }

    // Hard clip: saturated outputs pass no gradient.
    Eigen::MatrixXd g = upstream;
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            if (std::abs(tape.pre_clip(i, j)) >= bound_) g(i, j) = 0.0;
        }
    }

    const auto n_lin = static_cast<long>(layers_.size());
    std::vector<Eigen::MatrixXd> grad_w(n_lin);
    std::vector<Eigen::VectorXd> grad_b(n_lin);

    for (long l = n_lin - 1; l >= 0; --l) {
        const Eigen::MatrixXd& in_act = (l == 0) ? tape.input : tape.post_acts[l - 1];
        grad_w[l] = g.transpose() * in_act;
        grad_b[l] = g.colwise().sum().transpose();
        if (l > 0) {
            const Eigen::MatrixXd da = g * layers_[l].weight;
            g = da.cwiseProduct(
                activation_derivative(tape.pre_acts[l - 1], tape.post_acts[l - 1], activation_));
        }
    }

    Eigen::VectorXd flat(parameter_count());
    Eigen::Index pos = 0;
    for (long l = 0; l < n_lin; ++l) {
        for (Eigen::Index r = 0; r < grad_w[l].rows(); ++r) {
            for (Eigen::Index c = 0; c < grad_w[l].cols(); ++c) flat(pos++) = grad_w[l](r, c);
        }
        for (Eigen::Index r = 0; r < grad_b[l].size(); ++r) flat(pos++) = grad_b[l](r);
    }
    return flat;
}

void Mlp::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ArgumentError("Mlp::save: cannot open " + path.string());

    out.write(kMagic, sizeof(kMagic));
    const auto write_u32 = [&out](std::uint32_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    };
    const auto write_f64 = [&out](double v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    };

    write_u32(static_cast<std::uint32_t>(activation_));
    write_f64(bound_);
    write_u32(static_cast<std::uint32_t>(layers_.size()));
    for (const auto& l : layers_) {
        write_u32(static_cast<std::uint32_t>(l.weight.rows()));
        write_u32(static_cast<std::uint32_t>(l.weight.cols()));
    }
    const Eigen::VectorXd flat = parameters();
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) throw ArgumentError("Mlp::save: write failed for " + path.string());
}

Mlp Mlp::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("Mlp::load: cannot open " + path.string());

    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
        throw ArgumentError("Mlp::load: not a network file: " + path.string());
    }
    const auto read_u32 = [&in]() {
        std::uint32_t v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    };
    const auto read_f64 = [&in]() {
        double v = 0;
        in.read(reinterpret_cast<char*>(&v), sizeof(v));
        return v;
    };

    const auto act_raw = read_u32();
    if (act_raw > 1) throw ArgumentError("Mlp::load: unknown activation id");
    const double bound = read_f64();
    const std::uint32_t n_layers = read_u32();
    if (!in || n_layers == 0 || n_layers > 1000) {
        throw ArgumentError("Mlp::load: corrupt layer count");
    }

    std::vector<Layer> layers;
    layers.reserve(n_layers);
    for (std::uint32_t l = 0; l < n_layers; ++l) {
        const std::uint32_t rows = read_u32();
        const std::uint32_t cols = read_u32();
        if (!in || rows == 0 || cols == 0 || rows > 100000 || cols > 100000) {
            throw ArgumentError("Mlp::load: corrupt layer shape");
        }
        layers.push_back(Layer{Eigen::MatrixXd::Zero(rows, cols), Eigen::VectorXd::Zero(rows)});
    }

    Mlp net(std::move(layers), static_cast<Activation>(act_raw), bound);
    Eigen::VectorXd flat(net.parameter_count());
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!in) throw ArgumentError("Mlp::load: truncated parameter list");
    net.set_parameters(flat);
    return net;
}

void BusProblem::validate() const {
    if (n_qubits < 1 || n_qubits > 4) throw ArgumentError("BusProblem: n_qubits must be 1..4");
    if (n_fock < 2) throw ArgumentError("BusProblem: need at least two Fock levels");
    if (!(t_final > 0.0) || !(dt > 0.0)) throw ArgumentError("BusProblem: bad time span");
    if (penalty.weight < 0.0 || penalty.cutoff < 0) throw ArgumentError("BusProblem: bad penalty");
}

QuantumState BusProblem::initial_state() const {
    validate();
    int qubit_index = 0;
    for (int j = 0; j < n_qubits; ++j) qubit_index = qubit_index * 2 + (j == 1 ? 1 : 0);
    ComplexMatrix amp = ComplexMatrix::Zero(dim(), 1);
    amp(static_cast<Eigen::Index>(qubit_index) * n_fock, 0) = Complex(1.0, 0.0);
    std::vector<int> factors(n_qubits, 2);
    factors.push_back(n_fock);
    return QuantumState(std::move(amp), std::move(factors));
}

QuantumState BusProblem::ghz_state() const {
    validate();
    const int q_dim = 1 << n_qubits;
    ComplexMatrix amp = ComplexMatrix::Zero(q_dim, 1);
    amp(0, 0) = Complex(1.0 / std::sqrt(2.0), 0.0);
    amp(q_dim - 1, 0) = Complex(1.0 / std::sqrt(2.0), 0.0);
    std::vector<int> factors = n_qubits > 1 ? std::vector<int>(n_qubits, 2) : std::vector<int>{};
    return QuantumState(std::move(amp), std::move(factors));
}

DensityMatrix BusProblem::ghz_target() const { return get_density_matrix(ghz_state()); }

ComplexMatrix bus_hamiltonian(const BusProblem& problem, std::span<const double> controls) {
    problem.validate();
    if (controls.size() != static_cast<std::size_t>(problem.n_channels())) {
        throw ShapeError("bus_hamiltonian: expected " + std::to_string(problem.n_channels()) +
                         " controls");
    }
    const std::vector<ComplexMatrix> ops = control_operators(problem);
    ComplexMatrix h = ComplexMatrix::Zero(problem.dim(), problem.dim());
    for (std::size_t c = 0; c < ops.size(); ++c) h += controls[c] * ops[c];
    return h;
}

BusEval bus_evaluate(const BusProblem& problem, const Mlp& net) {
    problem.validate();
    if (net.output_size() != problem.n_channels()) {
        throw ShapeError("bus_evaluate: network outputs do not match control channels");
    }

    const TimeGrid grid = problem.grid();
    std::vector<double> xs(grid.points());
    if (problem.normalize_time) {
        for (double& x : xs) x /= problem.t_final;
    }

    BusEval eval;
    eval.controls = net.forward_batch(xs);

    const std::vector<ComplexMatrix> ops = control_operators(problem);
    std::vector<ComplexMatrix> frames(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        ComplexMatrix h = ComplexMatrix::Zero(problem.dim(), problem.dim());
        for (int c = 0; c < problem.n_channels(); ++c) h += eval.controls(k, c) * ops[c];
        frames[k] = std::move(h);
    }

    const auto dyn = DynamicOperator::from_frames(grid, std::move(frames));
    const StateTrajectory traj = dynamics::tdse_analytic(problem.initial_state(), dyn, grid);

    const DensityMatrix target = problem.ghz_target();
    eval.fidelity_series.reserve(traj.size());
    for (const auto& psi : traj.values) {
        const DensityMatrix reduced = partial_trace(get_density_matrix(psi), {problem.n_qubits});
        eval.fidelity_series.push_back(fidelity(reduced, target));
    }
    eval.final_fidelity = eval.fidelity_series.back();
    eval.infidelity = 1.0 - eval.final_fidelity;

    if (problem.penalty.enabled) {
        double acc = 0.0;
        for (std::size_t k = 1; k < traj.size(); ++k) {
            acc += high_fock_population(traj.values[k].amplitudes(), problem.n_fock,
                                        problem.penalty.cutoff);
        }
        eval.penalty = problem.penalty.weight * problem.dt * acc / problem.t_final;
    }
    eval.loss = eval.infidelity + eval.penalty;
    eval.norm_error = std::abs(traj.back().norm() - 1.0);
    return eval;
}

double bus_loss(const BusProblem& problem, const Mlp& net) {
    return bus_evaluate(problem, net).loss;
}

Eigen::VectorXd bus_gradient(const BusProblem& problem, const Mlp& net, double* loss_out) {
    problem.validate();
    if (net.output_size() != problem.n_channels()) {
        throw ShapeError("bus_gradient: network outputs do not match control channels");
    }

    const TimeGrid grid = problem.grid();
    const auto n_steps = static_cast<Eigen::Index>(grid.steps());
    const int dim = problem.dim();
    const int n_channels = problem.n_channels();
    const double dt = problem.dt;

    // Controls at the left endpoint of every step.
    std::vector<double> xs(grid.points().begin(), grid.points().end() - 1);
    if (problem.normalize_time) {
        for (double& x : xs) x /= problem.t_final;
    }
    Mlp::Tape tape;
    const Eigen::MatrixXd controls = net.forward_batch(xs, &tape);

    // The couplings and the drive all have real matrix elements, so every
    // step Hamiltonian is real symmetric; the decompositions, reused for the
    // exact per-step derivatives below, can stay in real arithmetic.
    std::vector<Eigen::MatrixXd> ops;
    for (const auto& op : control_operators(problem)) ops.push_back(op.real());

    std::vector<Eigen::MatrixXd> vectors(n_steps);
    std::vector<Eigen::VectorXd> lambdas(n_steps);
    std::vector<Eigen::VectorXcd> phases(n_steps);
    std::vector<Eigen::VectorXcd> psis(n_steps + 1);

    psis[0] = problem.initial_state().amplitudes().col(0);
    for (Eigen::Index k = 0; k < n_steps; ++k) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
        for (int c = 0; c < n_channels; ++c) h += controls(k, c) * ops[c];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
        if (es.info() != Eigen::Success) {
            throw ConvergenceError("bus_gradient: eigendecomposition failed");
        }
        vectors[k] = es.eigenvectors();
        lambdas[k] = es.eigenvalues();
        phases[k] = ((-kI * dt) * lambdas[k].cast<Complex>()).array().exp().matrix();
        psis[k + 1] = rmul(vectors[k], phases[k].cwiseProduct(rtmul(vectors[k], psis[k])));
    }

    // Terminal loss pieces, as quadratic forms in the final state.
    const Eigen::VectorXcd ghz = problem.ghz_state().amplitudes().col(0);
    const int n_fock = problem.n_fock;
    const auto project_ghz = [&](const Eigen::VectorXcd& psi) {
        // (|G><G| ox I) psi
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
        for (int n = 0; n < n_fock; ++n) {
            Complex a(0.0, 0.0);
            for (Eigen::Index q = 0; q < ghz.size(); ++q) a += std::conj(ghz(q)) * psi(q * n_fock + n);
            for (Eigen::Index q = 0; q < ghz.size(); ++q) out(q * n_fock + n) = ghz(q) * a;
        }
        return out;
    };
    const auto project_high_fock = [&](const Eigen::VectorXcd& psi) {
        Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
        for (Eigen::Index i = 0; i < psi.size(); ++i) {
            if (static_cast<int>(i % n_fock) >= problem.penalty.cutoff) out(i) = psi(i);
        }
        return out;
    };

    const double penalty_coeff =
        problem.penalty.enabled ? problem.penalty.weight * dt / problem.t_final : 0.0;

    double fid = psis[n_steps].dot(project_ghz(psis[n_steps])).real();
    double penalty_value = 0.0;
    if (problem.penalty.enabled) {
        for (Eigen::Index k = 1; k <= n_steps; ++k) {
            penalty_value += penalty_coeff * psis[k].dot(project_high_fock(psis[k])).real();
        }
    }
    if (loss_out) *loss_out = (1.0 - fid) + penalty_value;

    // Adjoint sweep. costate(k) = dLoss / d conj(psi_k); the per-step control
    // derivative contracts the Frechet derivative of exp(-i H dt) in the
    // eigenbasis against costate and state. For real eigenvectors only the
    // imaginary part of the contraction matrix survives into the gradient.
    Eigen::VectorXcd costate = -project_ghz(psis[n_steps]);
    if (problem.penalty.enabled) costate += penalty_coeff * project_high_fock(psis[n_steps]);

    Eigen::MatrixXd contraction(dim, dim);
    Eigen::MatrixXd upstream(n_steps, n_channels);
    for (Eigen::Index k = n_steps - 1; k >= 0; --k) {
        const Eigen::MatrixXd& v = vectors[k];
        const Eigen::VectorXcd p = rtmul(v, costate);
        const Eigen::VectorXcd q = rtmul(v, psis[k]);

        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
                const Complex f = exp_divided_difference(dt, lambdas[k](i), lambdas[k](j),
                                                         phases[k](i), phases[k](j));
                contraction(i, j) = (std::conj(p(i)) * q(j) * f).imag();
            }
        }
        const Eigen::MatrixXd im_w = v * contraction * v.transpose();
        for (int c = 0; c < n_channels; ++c) {
            upstream(k, c) = 2.0 * dt * ops[c].cwiseProduct(im_w).sum();
        }

        // Pull the costate back through this step and add the running cost.
        costate = rmul(v, phases[k].conjugate().cwiseProduct(rtmul(v, costate)));
        if (k >= 1 && problem.penalty.enabled) {
            costate += penalty_coeff * project_high_fock(psis[k]);
        }
    }

    return net.backward(tape, upstream);
}

TrainResult train_bbnn(const BusProblem& problem, Mlp net, std::span<const TrainSession> sessions,
                       double loss_threshold) {
    TrainResult result{net, {}, std::numeric_limits<double>::infinity(), 0};

    const auto record = [&result, &net](double loss_value) {
        result.loss_history.push_back(loss_value);
        if (loss_value < result.best_loss) {
            result.best_loss = loss_value;
            result.best_iteration = result.loss_history.size() - 1;
            result.net = net;
        }
        return loss_value;
    };

    for (const TrainSession& session : sessions) {
        grape::AdamState adam = grape::AdamState::for_size(net.parameter_count(), session.lr);
        for (int it = 0; it < session.iterations; ++it) {
            double loss_value = 0.0;
            const Eigen::VectorXd grads = bus_gradient(problem, net, &loss_value);
            record(loss_value);
            if (loss_value < loss_threshold) return result;

            Eigen::VectorXd params = net.parameters();
            grape::adam_step(adam, params, grads);
            net.set_parameters(params);
        }
    }
    record(bus_loss(problem, net));  // score the final update too
    return result;
}

}  // namespace qdyn::neural
