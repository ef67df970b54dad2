#include "scenarios.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>

#include <json.hpp>

#include "csv.hpp"
#include "svg_plot.hpp"

#include "qdyn/dynamics.hpp"
#include "qdyn/grape.hpp"
#include "qdyn/neural.hpp"
#include "qdyn/rlenv.hpp"
#include "qdyn/rng.hpp"
#include "qdyn/tensor_product.hpp"

namespace qdyn::cli {

namespace {

using nlohmann::json;

constexpr Complex kI(0.0, 1.0);

// ---------------------------------------------------------------------------
// Scenario plumbing: parameter specs, config merging, seeding, artifacts.
// ---------------------------------------------------------------------------

enum class ParamType { Number, Boolean, String };

struct ParamSpec {
    ParamType type = ParamType::Number;
    double lo = 0.0;
    double hi = 0.0;
    json default_value;
};

struct Io {
    std::string name;
    json cfg;
    std::optional<std::uint64_t> root_seed;
    std::filesystem::path out_dir;
    bool plots = false;

    double num(const std::string& key) const { return cfg.at(key).get<double>(); }
    bool flag(const std::string& key) const { return cfg.at(key).get<bool>(); }
    std::string str(const std::string& key) const { return cfg.at(key).get<std::string>(); }

    /// Shipped seed unless --seed was given, in which case a per-scenario,
    /// per-stream substream of the root seed.
    std::uint64_t seed(std::uint64_t shipped, std::uint64_t stream = 0) const {
        if (!root_seed) return shipped;
        std::uint64_t tag = 1469598103934665603ULL;  // FNV-1a over the scenario name
        for (char c : name) tag = (tag ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
        return Rng(*root_seed).split(tag).split(stream).next_u64();
    }

    std::filesystem::path artifact(const std::string& suffix) const {
        return out_dir / (name + suffix);
    }

    void plot(const std::vector<std::string>& columns, const std::string& title) const {
        if (!plots) return;
        PlotStyle style;
        style.title = title;
        emit_plot(artifact(".csv"), columns, style, artifact(".svg"));
    }
};

struct Outcome {
    bool pass = true;
    std::string failed_metric;
    std::map<std::string, double> metrics;
    std::uint64_t seed_used = 0;

    void require(bool ok, const std::string& metric) {
        if (!ok && pass) {
            pass = false;
            failed_metric = metric;
        }
    }
};

struct Scenario {
    std::string description;
    std::map<std::string, ParamSpec> params;
    std::function<Outcome(const Io&)> run;
};

ParamSpec number(double def, double lo, double hi) {
    ParamSpec spec;
    spec.type = ParamType::Number;
    spec.lo = lo;
    spec.hi = hi;
    spec.default_value = def;
    return spec;
}

ParamSpec boolean(bool def) {
    ParamSpec spec;
    spec.type = ParamType::Boolean;
    spec.default_value = def;
    return spec;
}

ParamSpec text(const std::string& def) {
    ParamSpec spec;
    spec.type = ParamType::String;
    spec.default_value = def;
    return spec;
}

double expectation(const QuantumState& psi, const ComplexMatrix& op) {
    return (psi.amplitudes().adjoint() * op * psi.amplitudes())(0, 0).real();
}

// ---------------------------------------------------------------------------
// rabi: driven qubit under H = sigma_x starting from the ground state.
// ---------------------------------------------------------------------------

Outcome run_rabi(const Io& io) {
    const double t_final = io.num("T");
    const double dt = io.num("dt");
    const TimeGrid grid = TimeGrid::from_range(0.0, t_final, dt);

    const auto h = DynamicOperator::from_constant(sigma_x(), grid);
    const auto traj = dynamics::tdse_analytic(QuantumState::basis(2)[0], h, grid);

    Table table;
    table.columns = {"t", "P1", "P2"};
    double max_dev = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        const auto pops = traj.values[k].populations();
        table.rows.push_back({t, pops[0], pops[1]});
        max_dev = std::max(max_dev, std::abs(pops[1] - std::sin(t) * std::sin(t)));
    }
    write_csv(io.artifact(".csv"), table);
    io.plot({"P1", "P2"}, "Qubit population exchange under a resonant drive");

    Outcome out;
    out.metrics["max_dev_from_closed_form"] = max_dev;
    out.require(max_dev <= 1e-9, "max_dev_from_closed_form");
    return out;
}

// ---------------------------------------------------------------------------
// dissipative-qubit: H = (delta/2) sigma_x with sigma_z dephasing; the
// damped-cosine envelope is the gamma << delta closed form.
// ---------------------------------------------------------------------------

Outcome run_dissipative_qubit(const Io& io) {
    const double t_final = io.num("T");
    const double dt = io.num("dt");
    const double gamma = io.num("gamma");
    const double delta = io.num("delta");
    const TimeGrid grid = TimeGrid::from_range(0.0, t_final, dt);

    const auto h = DynamicOperator::from_constant(Operator(0.5 * delta * sigma_x().matrix()), grid);
    const dynamics::LindbladSpec spec(h, {sigma_z()}, {gamma});
    const auto traj =
        dynamics::lindblad_integrate(get_density_matrix(QuantumState::basis(2)[0]), spec, grid);
    const auto sz = expect_val_dm(traj.values, sigma_z());

    Table table;
    table.columns = {"t", "sz", "sz_analytic"};
    double max_dev = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        const double analytic = std::exp(-gamma * t) * std::cos(delta * t);
        table.rows.push_back({t, sz[k], analytic});
        max_dev = std::max(max_dev, std::abs(sz[k] - analytic));
    }
    write_csv(io.artifact(".csv"), table);
    io.plot({"sz", "sz_analytic"}, "Dephasing qubit vs damped-cosine envelope");

    Outcome out;
    out.metrics["max_dev_analytic"] = max_dev;
    out.require(max_dev <= 0.05, "max_dev_analytic");
    return out;
}

// ---------------------------------------------------------------------------
// fls-check: the same dissipative problem solved by direct integration and
// by superoperator exponentials, compared point by point.
// ---------------------------------------------------------------------------

Outcome run_fls_check(const Io& io) {
    const double t_final = io.num("T");
    const double dt = io.num("dt");
    const double gamma = io.num("gamma");
    const TimeGrid grid = TimeGrid::from_range(0.0, t_final, dt);

    const dynamics::LindbladSpec spec(DynamicOperator::from_constant(sigma_x(), grid), {sigma_x()},
                                      {gamma});
    const DensityMatrix rho0 = get_density_matrix(QuantumState::basis(2)[0]);
    const auto direct = dynamics::lindblad_integrate(rho0, spec, grid);
    const auto fls = dynamics::fls_propagate(rho0, spec, grid);

    const auto sy_direct = expect_val_dm(direct.values, sigma_y());
    const auto sy_fls = expect_val_dm(fls.values, sigma_y());

    Table table;
    table.columns = {"t", "P1", "P2", "P1_fls", "P2_fls", "sy", "sy_fls"};
    double max_pop_dev = 0.0, max_sy_dev = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double p1 = direct.values[k].matrix()(0, 0).real();
        const double p2 = direct.values[k].matrix()(1, 1).real();
        const double p1f = fls.values[k].matrix()(0, 0).real();
        const double p2f = fls.values[k].matrix()(1, 1).real();
        table.rows.push_back({grid.at(k), p1, p2, p1f, p2f, sy_direct[k], sy_fls[k]});
        max_pop_dev = std::max({max_pop_dev, std::abs(p1 - p1f), std::abs(p2 - p2f)});
        max_sy_dev = std::max(max_sy_dev, std::abs(sy_direct[k] - sy_fls[k]));
    }
    write_csv(io.artifact(".csv"), table);
    io.plot({"P1", "P2", "P1_fls", "P2_fls"}, "Integrator vs superoperator propagation");

    Outcome out;
    out.metrics["max_pop_dev"] = max_pop_dev;
    out.metrics["max_sy_dev"] = max_sy_dev;
    out.require(max_pop_dev <= 1e-4, "max_pop_dev");
    out.require(max_sy_dev <= 1e-4, "max_sy_dev");
    return out;
}

// ---------------------------------------------------------------------------
// jaynes-cummings: two-level atom exchanging excitation with a driven-free
// cavity mode prepared in a coherent state; collapse and revival of the
// inversion plus fast parity oscillations mid-collapse.
// ---------------------------------------------------------------------------

Outcome run_jaynes_cummings(const Io& io) {
    const int n_fock = static_cast<int>(io.num("n_fock"));
    const double t_final = io.num("T");
    const double dt = io.num("dt");
    const double g = io.num("g");
    const double wc = io.num("wc");
    const double wa = io.num("wa");
    const double alpha = io.num("alpha");
    const TimeGrid grid = TimeGrid::from_range(0.0, t_final, dt);

    // field first, atom second
    const Operator a = annihilation(n_fock);
    const Operator ad = creation(n_fock);
    const Operator h_atom = tensor_product_ops(eye(n_fock), Operator(-0.5 * wa * sigma_z().matrix()));
    const Operator h_field = tensor_product_ops(Operator(wc * (ad * a).matrix()), eye(2));
    const Operator h_int = Operator(
        g * (tensor_product_ops(a, sigma_plus()) + tensor_product_ops(ad, sigma_minus())).matrix(),
        {n_fock, 2});
    const Operator h_total = h_atom + h_field + h_int;

    const QuantumState psi0 = tensor_product_states(
        QuantumState::coherent(n_fock, Complex(alpha, 0.0)), QuantumState::basis(2)[0]);

    const auto dyn = DynamicOperator::from_constant(h_total, grid);
    const auto traj = dynamics::tdse_analytic(psi0, dyn, grid);

    const ComplexMatrix w_op = tensor_product_ops(eye(n_fock), sigma_z()).matrix();
    const ComplexMatrix parity_op = tensor_product_ops(parity(n_fock), eye(2)).matrix();

    Table table;
    table.columns = {"t", "W", "parity"};
    std::vector<double> w_series(traj.size()), parity_series(traj.size());
    for (std::size_t k = 0; k < traj.size(); ++k) {
        w_series[k] = expectation(traj.values[k], w_op);
        parity_series[k] = expectation(traj.values[k], parity_op);
        table.rows.push_back({traj.times[k], w_series[k], parity_series[k]});
    }
    write_csv(io.artifact(".csv"), table);
    io.plot({"W", "parity"}, "Inversion collapse and revival with field parity");

    // envelope of |W| over a +-1 window, minimized across the collapse span
    const auto envelope_at = [&](std::size_t k) {
        double env = 0.0;
        for (std::size_t j = 0; j < traj.size(); ++j) {
            if (std::abs(traj.times[j] - traj.times[k]) <= 1.0) {
                env = std::max(env, std::abs(w_series[j]));
            }
        }
        return env;
    };
    double collapse_env = std::numeric_limits<double>::infinity();
    double revival_peak = 0.0, revival_time = 0.0;
    int crossings = 0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double t = traj.times[k];
        if (t >= 3.0 && t <= 15.0) collapse_env = std::min(collapse_env, envelope_at(k));
        if (t >= 25.0 && t <= 31.0 && std::abs(w_series[k]) > revival_peak) {
            revival_peak = std::abs(w_series[k]);
            revival_time = t;
        }
        if (k + 1 < traj.size() && t >= 10.0 && traj.times[k + 1] <= 20.0 &&
            parity_series[k] * parity_series[k + 1] < 0.0) {
            crossings += 1;
        }
    }

    Outcome out;
    out.metrics["collapse_envelope_min"] = collapse_env;
    out.metrics["revival_peak"] = revival_peak;
    out.metrics["revival_time"] = revival_time;
    out.metrics["parity_zero_crossings"] = crossings;
    out.require(collapse_env <= 0.15, "collapse_envelope_min");
    out.require(revival_peak >= 0.3, "revival_peak");
    out.require(crossings >= 10, "parity_zero_crossings");
    return out;
}

// ---------------------------------------------------------------------------
// grape-qubit: exact-gradient pulse optimization of the two-channel qubit
// inversion.
// ---------------------------------------------------------------------------

Outcome run_grape_qubit(const Io& io) {
    const double t_final = io.num("T");
    const int n_steps = static_cast<int>(io.num("steps"));
    const double bound = io.num("bound");
    const double l2_weight = io.num("l2_weight");
    const int iterations = static_cast<int>(io.num("iterations"));
    const std::uint64_t seed = io.seed(static_cast<std::uint64_t>(io.num("seed")));

    const auto b = QuantumState::basis(2);
    grape::ControlProblem problem(Operator(ComplexMatrix::Zero(2, 2)), {sigma_x(), sigma_z()},
                                  b[0], b[1],
                                  TimeGrid::from_range(0.0, t_final, t_final / n_steps),
                                  l2_weight);

    grape::OptimizeOptions opts;
    opts.iterations = iterations;
    opts.loss_threshold = io.num("loss_threshold");
    opts.lr = io.num("lr");
    const auto result =
        grape::optimize(problem, grape::random_schedule(n_steps, 2, bound, seed), opts);

    const auto final_loss = grape::loss(problem, result.schedule);
    const auto prop = grape::propagate_piecewise(problem, result.schedule);

    Table table;
    table.columns = {"t", "omega", "delta", "P1", "P2"};
    for (int k = 0; k < n_steps; ++k) {
        const auto pops = prop.trajectory.values[k + 1].populations();
        table.rows.push_back({problem.grid.at(k), result.schedule.clipped(k, 0),
                              result.schedule.clipped(k, 1), pops[0], pops[1]});
    }
    write_csv(io.artifact(".csv"), table);
    io.plot({"omega", "delta"}, "Optimized piecewise-constant controls");

    Outcome out;
    out.seed_used = seed;
    out.metrics["fidelity"] = 1.0 - final_loss.infidelity;
    out.metrics["final_infidelity"] = final_loss.infidelity;
    out.metrics["best_total_loss"] = result.best_total;
    out.metrics["iterations_run"] = static_cast<double>(result.loss_history.size());
    out.require(1.0 - final_loss.infidelity >= 0.999, "fidelity");
    return out;
}

// ---------------------------------------------------------------------------
// rl-qubit: derivative-free policy search over the population-inversion
// process; the optimum is the full-area pulse at the control bound.
// ---------------------------------------------------------------------------

Outcome run_rl_qubit(const Io& io) {
    rl::EnvParams params;
    params.dt = io.num("dt");
    params.max_steps = static_cast<int>(io.num("max_steps"));
    params.fidelity_threshold = io.num("fidelity_threshold");

    rl::CemOptions opts;
    opts.population = static_cast<int>(io.num("population"));
    opts.elite_frac = io.num("elite_frac");
    opts.iterations = static_cast<int>(io.num("iterations"));
    opts.init_std = io.num("init_std");
    opts.noise_init = io.num("noise_init");
    opts.noise_rounds = static_cast<int>(io.num("noise_rounds"));

    const std::uint64_t seed = io.seed(static_cast<std::uint64_t>(io.num("seed")));
    const rl::CemResult search = rl::cem_search(params, opts, seed);
    const rl::RolloutResult best = rl::rollout(params, search.best_actions);

    Table table;
    table.columns = {"step", "omega", "reward", "fidelity"};
    double area = 0.0;
    for (int k = 0; k < best.steps_used; ++k) {
        const auto& tr = best.transitions[k];
        table.rows.push_back({static_cast<double>(k + 1), tr.action, tr.reward, tr.fidelity});
        area += tr.action * params.dt;
    }
    write_csv(io.artifact(".csv"), table);
    io.plot({"omega", "fidelity"}, "Searched pulse and fidelity along the episode");

    const double area_dev = std::abs(area - std::numbers::pi) / std::numbers::pi;

    Outcome out;
    out.seed_used = seed;
    out.metrics["final_fidelity"] = best.final_fidelity;
    out.metrics["steps_used"] = best.steps_used;
    out.metrics["pulse_area"] = area;
    out.metrics["area_dev_frac"] = area_dev;
    out.metrics["elite_mean_abs_action"] = search.elite_mean_abs_active;
    out.metrics["best_return"] = best.total_return;
    out.require(best.final_fidelity >= params.fidelity_threshold, "final_fidelity");
    out.require(area_dev <= 0.05, "area_dev_frac");
    out.require(search.elite_mean_abs_active >= 0.95 * params.max_control,
                "elite_mean_abs_action");
    return out;
}

// ---------------------------------------------------------------------------
// quantum-bus: a neural pulse generator trained end to end through the
// qubit-register/resonator dynamics toward the GHZ state.
// ---------------------------------------------------------------------------

Outcome run_quantum_bus(const Io& io) {
    neural::BusProblem problem;
    problem.n_fock = static_cast<int>(io.num("n_fock"));
    problem.t_final = io.num("T");
    problem.dt = io.num("dt");
    problem.penalty.enabled = io.flag("penalty");
    problem.penalty.weight = io.num("penalty_weight");
    problem.penalty.cutoff = static_cast<int>(io.num("penalty_cutoff"));
    problem.normalize_time = io.flag("normalize_time");

    const double fidelity_target = problem.penalty.enabled ? 0.97 : 0.95;
    const int hidden = static_cast<int>(io.num("hidden"));
    const int depth = static_cast<int>(io.num("depth"));
    const double max_control = io.num("max_control");

    Outcome out;

    neural::Mlp best_net = neural::Mlp::create(1, 0, problem.n_channels(), neural::Activation::Sin,
                                               max_control, 0);
    double best_fidelity = -1.0;
    std::uint64_t best_seed = 0;
    double iterations_total = 0.0;

    const std::string net_file = io.str("net_file");
    if (!net_file.empty()) {
        best_net = neural::Mlp::load(net_file);
        best_fidelity = neural::bus_evaluate(problem, best_net).final_fidelity;
    } else {
        const std::vector<neural::TrainSession> sessions{
            {io.num("session1_lr"), static_cast<int>(io.num("session1_iters"))},
            {io.num("session2_lr"), static_cast<int>(io.num("session2_iters"))}};
        const std::uint64_t shipped[3] = {static_cast<std::uint64_t>(io.num("seed1")),
                                          static_cast<std::uint64_t>(io.num("seed2")),
                                          static_cast<std::uint64_t>(io.num("seed3"))};
        for (std::uint64_t stream = 0; stream < 3; ++stream) {
            const std::uint64_t seed = io.seed(shipped[stream], stream);
            neural::Mlp net = neural::Mlp::create(hidden, depth, problem.n_channels(),
                                                  neural::Activation::Sin, max_control, seed);
            const neural::TrainResult trained =
                train_bbnn(problem, std::move(net), sessions, io.num("loss_threshold"));
            iterations_total += static_cast<double>(trained.loss_history.size());
            const double fid = neural::bus_evaluate(problem, trained.net).final_fidelity;
            if (fid > best_fidelity) {
                best_fidelity = fid;
                best_net = trained.net;
                best_seed = seed;
            }
            if (fid >= fidelity_target) break;  // first passing seed wins
        }
        best_net.save(io.artifact(".net"));
    }

    const neural::BusEval eval = neural::bus_evaluate(problem, best_net);

    Table table;
    table.columns = {"t", "g1", "g2", "g3", "xi", "fidelity"};
    const TimeGrid grid = problem.grid();
    for (std::size_t k = 0; k < grid.size(); ++k) {
        table.rows.push_back({grid.at(k), eval.controls(k, 0), eval.controls(k, 1),
                              eval.controls(k, 2), eval.controls(k, 3),
                              eval.fidelity_series[k]});
    }
    write_csv(io.artifact(".csv"), table);
    io.plot({"g1", "g2", "g3", "xi"}, "Learned coupling and drive waveforms");

    out.seed_used = best_seed;
    out.metrics["final_fidelity"] = eval.final_fidelity;
    out.metrics["final_loss"] = eval.loss;
    out.metrics["penalty_term"] = eval.penalty;
    out.metrics["fidelity_target"] = fidelity_target;
    out.metrics["iterations_total"] = iterations_total;
    out.require(eval.final_fidelity >= fidelity_target, "final_fidelity");
    return out;
}

// ---------------------------------------------------------------------------
// Registry and driver.
// ---------------------------------------------------------------------------

const std::map<std::string, Scenario>& registry() {
    static const std::map<std::string, Scenario> scenarios = [] {
        std::map<std::string, Scenario> r;

        r["rabi"] = {"Resonantly driven qubit: exact population exchange between the two levels",
                     {{"T", number(10.0, 1e-3, 1e3)}, {"dt", number(0.1, 1e-6, 10.0)}},
                     run_rabi};

        r["dissipative-qubit"] = {
            "Driven qubit with dephasing: inversion decays under a damped cosine",
            {{"T", number(5.0, 1e-3, 1e3)},
             {"dt", number(0.02, 1e-6, 10.0)},
             {"gamma", number(0.25, 0.0, 100.0)},
             {"delta", number(2.0 * std::numbers::pi, 0.0, 100.0)}},
            run_dissipative_qubit};

        r["fls-check"] = {
            "Cross-check of direct master-equation integration against superoperator exponentials",
            {{"T", number(10.0, 1e-3, 1e3)},
             {"dt", number(0.1, 1e-6, 10.0)},
             {"gamma", number(0.01 * 2.0 * std::numbers::pi, 0.0, 100.0)}},
            run_fls_check};

        r["jaynes-cummings"] = {
            "Atom-cavity exchange from a coherent field: inversion collapse, revival, parity",
            {{"n_fock", number(50, 2, 200)},
             {"T", number(40.0, 1.0, 200.0)},
             {"dt", number(0.1, 1e-4, 1.0)},
             {"g", number(1.0, 0.0, 10.0)},
             {"wc", number(0.1, 0.0, 10.0)},
             {"wa", number(0.1, 0.0, 10.0)},
             {"alpha", number(std::sqrt(20.0), 0.0, 10.0)}},
            run_jaynes_cummings};

        r["grape-qubit"] = {
            "Exact-gradient optimization of two-channel qubit inversion pulses",
            {{"T", number(3.15, 0.1, 100.0)},
             {"steps", number(100, 2, 10000)},
             {"bound", number(1.0, 1e-3, 100.0)},
             {"l2_weight", number(0.001, 0.0, 10.0)},
             {"lr", number(1e-3, 1e-6, 1.0)},
             {"iterations", number(2000, 0, 100000)},
             {"loss_threshold", number(1e-4, 0.0, 1.0)},
             {"seed", number(12, 0, 1e18)}},
            run_grape_qubit};

        r["rl-qubit"] = {
            "Derivative-free policy search recovering the time-optimal inversion pulse",
            {{"dt", number(0.04, 1e-4, 1.0)},
             {"max_steps", number(100, 1, 10000)},
             {"fidelity_threshold", number(0.999, 0.5, 1.0)},
             {"population", number(64, 8, 4096)},
             {"elite_frac", number(0.125, 0.01, 0.99)},
             {"iterations", number(200, 0, 10000)},
             {"init_std", number(0.5, 1e-3, 10.0)},
             {"noise_init", number(0.3, 0.0, 10.0)},
             {"noise_rounds", number(160, 0, 10000)},
             {"seed", number(2, 0, 1e18)}},
            run_rl_qubit};

        r["quantum-bus"] = {
            "Neural pulse generator driving three qubits through a resonator to the GHZ state",
            {{"n_fock", number(10, 2, 60)},
             {"T", number(8.0, 0.1, 100.0)},
             {"dt", number(0.1, 1e-3, 1.0)},
             {"penalty", boolean(false)},
             {"penalty_weight", number(0.1, 0.0, 10.0)},
             {"penalty_cutoff", number(2, 0, 60)},
             {"normalize_time", boolean(true)},
             {"hidden", number(150, 1, 4096)},
             {"depth", number(4, 0, 16)},
             {"max_control", number(1.0, 1e-3, 100.0)},
             {"session1_lr", number(1e-3, 1e-8, 1.0)},
             {"session1_iters", number(500, 0, 100000)},
             {"session2_lr", number(1e-4, 1e-8, 1.0)},
             {"session2_iters", number(500, 0, 100000)},
             {"loss_threshold", number(1e-4, 0.0, 1.0)},
             {"seed1", number(123, 0, 1e18)},
             {"seed2", number(11, 0, 1e18)},
             {"seed3", number(7, 0, 1e18)},
             {"net_file", text("")}},
            run_quantum_bus};

        return r;
    }();
    return scenarios;
}

json merged_config(const Scenario& scenario, const ScenarioRequest& request) {
    json cfg;
    for (const auto& [key, spec] : scenario.params) cfg[key] = spec.default_value;

    const auto apply = [&](const std::string& key, const json& value, const std::string& where) {
        const auto it = scenario.params.find(key);
        if (it == scenario.params.end()) {
            throw UsageError("unknown configuration key '" + key + "' (" + where + ")");
        }
        const ParamSpec& spec = it->second;
        switch (spec.type) {
            case ParamType::Number: {
                if (!value.is_number()) {
                    throw UsageError("key '" + key + "' expects a number (" + where + ")");
                }
                const double v = value.get<double>();
                if (v < spec.lo || v > spec.hi) {
                    throw UsageError("key '" + key + "' out of range [" + std::to_string(spec.lo) +
                                     ", " + std::to_string(spec.hi) + "]");
                }
                break;
            }
            case ParamType::Boolean:
                if (!value.is_boolean()) {
                    throw UsageError("key '" + key + "' expects true/false (" + where + ")");
                }
                break;
            case ParamType::String:
                if (!value.is_string()) {
                    throw UsageError("key '" + key + "' expects a string (" + where + ")");
                }
                break;
        }
        cfg[key] = value;
    };

    if (request.config_file) {
        std::ifstream in(*request.config_file);
        if (!in) throw UsageError("cannot open config file " + request.config_file->string());
        json file_cfg;
        try {
            in >> file_cfg;
        } catch (const json::exception& e) {
            throw UsageError("config file parse error: " + std::string(e.what()));
        }
        if (!file_cfg.is_object()) throw UsageError("config file must hold a JSON object");
        for (const auto& [key, value] : file_cfg.items()) apply(key, value, "config file");
    }

    for (const auto& [key, raw] : request.overrides) {
        json value;
        try {
            value = json::parse(raw);
        } catch (const json::exception&) {
            value = raw;  // unquoted strings pass through
        }
        apply(key, value, "--set");
    }
    return cfg;
}

double round_significant(double x, int digits) {
    if (x == 0.0 || !std::isfinite(x)) return x;
    const double mag =
        std::pow(10.0, digits - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
    return std::round(x * mag) / mag;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioRequest& request) {
    const auto it = registry().find(request.name);
    if (it == registry().end()) {
        throw UsageError("unknown scenario '" + request.name + "' (try: qdyn list)");
    }

    Io io;
    io.name = request.name;
    io.cfg = merged_config(it->second, request);
    io.root_seed = request.seed;
    io.out_dir = request.out_dir;
    io.plots = request.plots;

    std::error_code ec;
    std::filesystem::create_directories(io.out_dir, ec);
    if (ec) throw UsageError("cannot create output directory " + io.out_dir.string());

    const auto t0 = std::chrono::steady_clock::now();
    const Outcome outcome = it->second.run(io);
    const auto t1 = std::chrono::steady_clock::now();

    ScenarioReport report;
    report.pass = outcome.pass;
    report.failed_metric = outcome.failed_metric;
    report.metrics = outcome.metrics;
    report.seed = outcome.seed_used;
    report.elapsed_s = std::chrono::duration<double>(t1 - t0).count();

    json summary;
    summary["scenario"] = request.name;
    summary["seed"] = report.seed;
    json metrics;
    for (const auto& [key, value] : report.metrics) metrics[key] = round_significant(value, 6);
    summary["metrics"] = metrics;
    summary["pass"] = report.pass;
    summary["elapsed_s"] = round_significant(report.elapsed_s, 6);

    std::ofstream out(io.artifact(".summary.json"));
    out << summary.dump(2) << "\n";
    return report;
}

std::vector<std::pair<std::string, std::string>> list_scenarios() {
    std::vector<std::pair<std::string, std::string>> names;
    for (const auto& [name, scenario] : registry()) names.emplace_back(name, scenario.description);
    return names;
}

}  // namespace qdyn::cli
