#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "marlex/adam.hpp"
#include "marlex/env.hpp"
#include "marlex/gae.hpp"
#include "marlex/network.hpp"
#include "marlex/rng.hpp"
#include "marlex/trace.hpp"

namespace marlex {

struct NonFiniteLoss : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainConfig {
    int n_agents = 4;
    long n_iterations = 10000;     // n_e
    int steps_per_episode = 200;   // n_s, mirrored into EnvConfig::step_cap
    int batch_episodes = 1;        // n_b
    double clip_eps = 0.2;
    int epochs = 5;
    double lr = 5e-4;
    double gamma = 0.99;
    double gae_lambda = 0.95;
    bool normalize_advantages = true;
    double entropy_coef = 0.0;
    bool critic_discounted_returns = false;  // default: GAE returns A + V
    std::uint64_t seed = 0;
    long checkpoint_interval = 0;  // iterations between periodic checkpoints; 0 = none

    void validate() const {
        if (n_agents < 1) throw std::invalid_argument("TrainConfig: n_agents must be >= 1");
        if (clip_eps <= 0.0 || clip_eps >= 1.0)
            throw std::invalid_argument("TrainConfig: clip_eps must be in (0,1)");
        if (gamma <= 0.0 || gamma > 1.0) throw std::invalid_argument("TrainConfig: gamma must be in (0,1]");
        if (gae_lambda <= 0.0 || gae_lambda > 1.0)
            throw std::invalid_argument("TrainConfig: lambda must be in (0,1]");
        if (steps_per_episode < 1) throw std::invalid_argument("TrainConfig: n_s must be >= 1");
        if (batch_episodes < 1) throw std::invalid_argument("TrainConfig: n_b must be >= 1");
        if (epochs < 1) throw std::invalid_argument("TrainConfig: epochs must be >= 1");
    }
};

struct Transition {
    Tensor critic_input;
    std::vector<Tensor> obs;           // per agent
    std::vector<int> actions;
    std::vector<double> log_prob_old;  // collection-time log probs
    std::vector<double> rewards;
    double team_reward = 0.0;          // mean over agents; drives GAE
    double value = 0.0;                // V(s_t) at collection time
    bool done = false;
};

struct TrajectoryBatch {
    std::vector<Transition> transitions;  // episodes back to back; done marks the ends
    std::vector<double> advantages;       // normalized when the config says so
    std::vector<double> returns;          // critic regression targets
    std::vector<double> multiplier;       // M, reset to advantages by happo_update
    int episodes = 0;
    double mean_episode_reward = 0.0;     // per-agent mean of summed step rewards
    double mean_episode_length = 0.0;
};

// Critic state tensor: [union of collaborative maps / 2, agent-position
// plane, constant t / n_s].
Tensor build_critic_input(const JointState& state, const EnvConfig& cfg);

// Runs batch_episodes episodes under the stochastic joint policy and fills
// advantages/returns via GAE over the per-step team reward.
TrajectoryBatch collect_trajectories(const std::function<JointState(std::uint64_t)>& episode_factory,
                                     std::uint64_t& episode_counter,
                                     const std::vector<NetworkParams>& actors,
                                     const NetworkParams& critic, const EnvConfig& env_cfg,
                                     const RewardConfig& reward_cfg, const TrainConfig& cfg,
                                     Rng& sample_rng, std::vector<EpisodeTrace>* traces = nullptr);

struct UpdateResult {
    std::vector<int> agent_order;
    std::vector<double> actor_loss;   // final-epoch surrogate loss per agent id
    double critic_loss_first = 0.0;
    double critic_loss_last = 0.0;
    double ratio_min = 1.0;           // unclipped importance ratios seen in the last epochs
    double ratio_max = 1.0;
};

// Algorithm: draw a random agent permutation, set M := A, then per agent run
// `epochs` full-batch ascent steps on the clipped surrogate and fold the
// post-update ratio into M; finally regress the critic on the returns.
// `on_agent_updated` (when given) observes M after each agent's fold.
UpdateResult happo_update(std::vector<NetworkParams>& actors, std::vector<AdamState>& actor_opt,
                          NetworkParams& critic, AdamState& critic_opt, TrajectoryBatch& batch,
                          const TrainConfig& cfg, Rng& perm_rng,
                          const std::function<void(int, const std::vector<double>&)>& on_agent_updated = {});

struct IterationStats {
    long iteration = 0;
    int episodes = 0;
    double mean_episode_reward = 0.0;
    double mean_episode_length = 0.0;
    std::vector<double> actor_loss;
    double critic_loss_first = 0.0;
    double critic_loss_last = 0.0;
};

// Owns the actors, shared critic, optimizer state, and RNG streams; one
// run_iteration() is one outer-loop step (collect, GAE, sequential update).
class Trainer {
public:
    Trainer(EnvConfig env_cfg, RewardConfig reward_cfg, TrainConfig train_cfg);

    IterationStats run_iteration();
    TrajectoryBatch collect(std::vector<EpisodeTrace>* traces = nullptr);

    long iteration() const { return iteration_; }
    const std::vector<NetworkParams>& actors() const { return actors_; }
    const NetworkParams& critic() const { return critic_; }
    const EnvConfig& env_config() const { return env_; }
    const TrainConfig& train_config() const { return cfg_; }

    // Full training state (64-bit tensors, optimizer moments, RNG streams),
    // for exact resume; distinct from the 32-bit inference checkpoints.
    void save_state(const std::string& path) const;
    void load_state(const std::string& path);

    JointState make_episode(std::uint64_t episode_index) const;

private:
    EnvConfig env_;
    RewardConfig reward_;
    TrainConfig cfg_;
    std::vector<NetworkParams> actors_;
    std::vector<AdamState> actor_opt_;
    NetworkParams critic_;
    AdamState critic_opt_;
    Rng sample_rng_;
    Rng perm_rng_;
    long iteration_ = 0;
    std::uint64_t episode_counter_ = 0;
};

// Seed-stream tags for deriving independent RNG streams from the run seed.
namespace seed_stream {
constexpr std::uint64_t kActorInit = 0x41435452;
constexpr std::uint64_t kCriticInit = 0x43524954;
constexpr std::uint64_t kSampling = 0x53414d50;
constexpr std::uint64_t kPermutation = 0x5045524d;
constexpr std::uint64_t kArena = 0x4152454e;
constexpr std::uint64_t kSpawn = 0x5350574e;
constexpr std::uint64_t kEvalArena = 0x4556414c;
}  // namespace seed_stream

}  // namespace marlex
