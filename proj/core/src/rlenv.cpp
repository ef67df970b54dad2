#include "qdyn/rlenv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "qdyn/dynamics.hpp"
#include "qdyn/operators.hpp"
#include "qdyn/rng.hpp"

namespace qdyn::rl {

namespace {

void check_params(const EnvParams& p) {
    if (p.dims != 2) throw ArgumentError("EnvParams: only the two-level task is defined");
    if (!(p.dt > 0.0)) throw ArgumentError("EnvParams: dt must be positive");
    if (p.max_steps < 1) throw ArgumentError("EnvParams: max_steps must be at least 1");
    if (p.initial_state < 0 || p.initial_state >= p.dims || p.target_state < 0 ||
        p.target_state >= p.dims) {
        throw ArgumentError("EnvParams: state index out of range");
    }
}

// Exact one-step propagator for H = (omega/2) sigma_x acting on vectorized
// density matrices. No dissipation, so the generator is the bare commutator.
ComplexMatrix step_propagator(double omega, double dt) {
    const ComplexMatrix h = 0.5 * omega * sigma_x().matrix();
    const dynamics::Liouvillian l = dynamics::build_liouvillian(h, {}, {});
    return linalg::expm(dt * l.matrix);
}

double fidelity_to_target(const EnvParams& p, const DensityMatrix& rho) {
    // Tr[rho_target rho] for a basis-state target is one diagonal entry.
    return rho.matrix()(p.target_state, p.target_state).real();
}

}  // namespace

Observation encode_observation(const DensityMatrix& rho) {
    Observation obs{};
    const ComplexMatrix& m = rho.matrix();
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            obs[2 * (2 * i + j)] = m(i, j).real();
            obs[2 * (2 * i + j) + 1] = m(i, j).imag();
        }
    }
    return obs;
}

DensityMatrix decode_observation(const Observation& obs) {
    ComplexMatrix m(2, 2);
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            m(i, j) = Complex(obs[2 * (2 * i + j)], obs[2 * (2 * i + j) + 1]);
        }
    }
    return DensityMatrix(std::move(m));
}

EnvState env_reset(const EnvParams& params) {
    check_params(params);
    DensityMatrix rho = get_density_matrix(QuantumState::basis(params.dims)[params.initial_state]);
    Observation obs = encode_observation(rho);
    return EnvState{std::move(rho), obs, 0, false};
}

std::pair<Transition, EnvState> env_step(const EnvParams& params, const EnvState& state,
                                         double action) {
    check_params(params);
    if (state.done) throw StateError("env_step: episode already finished");

    const double omega = std::clamp(action, -params.max_control, params.max_control);
    const ComplexMatrix prop = step_propagator(omega, params.dt);
    ComplexMatrix rho_next = linalg::unvec(prop * linalg::vec(state.rho.matrix()), 2);

    DensityMatrix rho(std::move(rho_next), state.rho.product_dims());
    const double fid = fidelity_to_target(params, rho);
    const int steps = state.step_count + 1;

    const bool reached = fid >= params.fidelity_threshold;
    const bool done = reached || steps >= params.max_steps;

    double reward = 0.0;
    switch (params.reward_shape) {
        case EnvParams::RewardShape::Linear:
            reward = fid - 1.0 + (done && reached ? params.terminal_bonus : 0.0);
            break;
        case EnvParams::RewardShape::Sqrt:
            reward = done ? std::sqrt(fid) + (reached ? params.terminal_bonus : 0.0)
                          : std::sqrt(fid) - 1.0;
            break;
    }

    Observation obs = encode_observation(rho);
    Transition tr{omega, reward, done, obs, fid};
    EnvState next{std::move(rho), obs, steps, done};
    return {std::move(tr), std::move(next)};
}

RolloutResult rollout(const EnvParams& params, std::span<const double> actions) {
    if (actions.size() > static_cast<std::size_t>(params.max_steps)) {
        throw ArgumentError("rollout: action sequence longer than max_steps");
    }
    RolloutResult out;
    EnvState state = env_reset(params);
    for (double action : actions) {
        auto [tr, next] = env_step(params, state, action);
        out.total_return += tr.reward;
        out.final_fidelity = tr.fidelity;
        out.steps_used += 1;
        out.transitions.push_back(std::move(tr));
        state = std::move(next);
        if (state.done) break;
    }
    return out;
}

CemResult cem_search(const EnvParams& params, const CemOptions& opts, std::uint64_t seed) {
    check_params(params);
    if (opts.population < 8) throw ArgumentError("cem_search: population must be at least 8");
    if (!(opts.elite_frac > 0.0 && opts.elite_frac < 1.0)) {
        throw ArgumentError("cem_search: elite_frac must be in (0, 1)");
    }

    const int horizon = params.max_steps;
    const int n_elite =
        std::max(1, static_cast<int>(opts.population * opts.elite_frac));

    Rng rng(seed);
    std::vector<double> mean(horizon, 0.0);
    std::vector<double> stddev(horizon, opts.init_std);

    CemResult result;
    result.best_return = -std::numeric_limits<double>::infinity();

    std::vector<std::vector<double>> samples(opts.population, std::vector<double>(horizon));
    std::vector<double> returns(opts.population);
    std::vector<int> steps_used(opts.population);
    std::vector<int> order(opts.population);

    for (int round = 0; round <= opts.iterations; ++round) {
        result.std_history.push_back(
            std::accumulate(stddev.begin(), stddev.end(), 0.0) / horizon);

        for (int p = 0; p < opts.population; ++p) {
            for (int k = 0; k < horizon; ++k) {
                samples[p][k] = std::clamp(mean[k] + stddev[k] * rng.normal(),
                                           -params.max_control, params.max_control);
            }
            const RolloutResult r = rollout(params, samples[p]);
            returns[p] = r.total_return;
            steps_used[p] = r.steps_used;
            if (r.total_return > result.best_return) {
                result.best_return = r.total_return;
                result.best_actions = samples[p];
            }
        }
        result.return_history.push_back(result.best_return);

        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return returns[a] > returns[b]; });

        if (round == opts.iterations) {
            double acc = 0.0;
            long count = 0;
            for (int e = 0; e < n_elite; ++e) {
                for (int k = 0; k < steps_used[order[e]]; ++k) {
                    acc += std::abs(samples[order[e]][k]);
                    count += 1;
                }
            }
            result.elite_mean_abs_active = count > 0 ? acc / count : 0.0;
            break;
        }

        const double noise =
            opts.noise_rounds > 0
                ? opts.noise_init * std::max(0.0, 1.0 - static_cast<double>(round) /
                                                            opts.noise_rounds)
                : 0.0;
        for (int k = 0; k < horizon; ++k) {
            double m = 0.0;
            for (int e = 0; e < n_elite; ++e) m += samples[order[e]][k];
            m /= n_elite;
            double var = 0.0;
            for (int e = 0; e < n_elite; ++e) {
                const double d = samples[order[e]][k] - m;
                var += d * d;
            }
            mean[k] = m;
            stddev[k] = std::max(std::sqrt(var / n_elite) + noise, 1e-6);
        }
    }
    result.final_mean = mean;
    return result;
}

}  // namespace qdyn::rl
