#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qdyn/states.hpp"

namespace qdyn::rl {

/// Qubit population-inversion task: drive |0><0| to |1><1| with a bounded
/// Rabi amplitude, one amplitude value per time step.
struct EnvParams {
    double max_control = 1.0;
    int dims = 2;
    double dt = 0.04;
    double horizon = 4.0;  // informational; episodes cap on max_steps alone
    int initial_state = 0;
    int target_state = 1;
    int max_steps = 100;
    double fidelity_threshold = 0.999;
    double terminal_bonus = 10.0;

    /// linear: reward F - 1 with a flat bonus on reaching the threshold.
    /// sqrt:   reward sqrt(F) - 1, terminal reward sqrt(F) + bonus step.
    enum class RewardShape { Linear, Sqrt } reward_shape = RewardShape::Linear;
};

using Observation = std::array<double, 8>;  // re/im of each 2x2 entry, row-major

struct EnvState {
    DensityMatrix rho;
    Observation observation;
    int step_count = 0;
    bool done = false;
};

struct Transition {
    double action = 0.0;  // the executed (clipped) Rabi amplitude
    double reward = 0.0;
    bool done = false;
    Observation next_observation{};
    double fidelity = 0.0;
};

Observation encode_observation(const DensityMatrix& rho);
DensityMatrix decode_observation(const Observation& obs);

EnvState env_reset(const EnvParams& params);

/// One time step under H = (Omega/2) sigma_x (closed-system evolution,
/// exact per step). Stepping a finished episode is an error.
std::pair<Transition, EnvState> env_step(const EnvParams& params, const EnvState& state,
                                         double action);

struct RolloutResult {
    double total_return = 0.0;  // undiscounted reward sum
    double final_fidelity = 0.0;
    int steps_used = 0;
    std::vector<Transition> transitions;
};

/// Applies actions in order until the episode ends or the sequence runs out.
RolloutResult rollout(const EnvParams& params, std::span<const double> actions);

struct CemOptions {
    int population = 64;
    double elite_frac = 0.125;
    int iterations = 200;  // number of distribution refits
    double init_std = 0.5;
    /// Exploration noise added to the refit std, decaying linearly to zero
    /// over noise_rounds refits. Without it the sampling distribution
    /// collapses around an early mediocre pulse and never reaches the bang
    /// profile.
    double noise_init = 0.3;
    int noise_rounds = 160;
};

struct CemResult {
    std::vector<double> best_actions;
    double best_return = 0.0;
    std::vector<double> return_history;  // best return seen up to each sampling round
    std::vector<double> std_history;     // mean per-step std before each sampling round
    std::vector<double> final_mean;      // converged distribution center
    /// Mean |action| over the executed (pre-done) steps of the last round's
    /// elite episodes; close to max_control once the bang profile is found.
    double elite_mean_abs_active = 0.0;
};

/// Cross-entropy search over length-max_steps action sequences: sample a
/// Gaussian per step, clip to the control bound, rank by rollout return and
/// refit mean/std on the elite fraction. Deterministic for a given seed.
CemResult cem_search(const EnvParams& params, const CemOptions& opts, std::uint64_t seed);

}  // namespace qdyn::rl
