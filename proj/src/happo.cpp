#include "marlex/happo.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "marlex/arena.hpp"
#include "marlex/comms.hpp"

namespace marlex {

Tensor build_critic_input(const JointState& state, const EnvConfig& cfg) {
    const int n = cfg.n;
    const std::size_t plane = static_cast<std::size_t>(n) * n;
    Tensor input({3, static_cast<std::size_t>(n), static_cast<std::size_t>(n)});

    std::vector<const GridMap*> collab;
    collab.reserve(state.agents.size());
    for (const AgentState& a : state.agents) collab.push_back(&a.maps.collaborative);
    const GridMap merged = merge_network(collab, MergeRule::Strict);
    for (std::size_t i = 0; i < plane; ++i)
        input.data[i] = static_cast<double>(merged.cells()[i]) / 2.0;

    for (const AgentState& a : state.agents)
        input.data[plane + static_cast<std::size_t>(a.position.row) * n + a.position.col] = 1.0;

    const double progress = static_cast<double>(state.t) / static_cast<double>(cfg.step_cap);
    for (std::size_t i = 0; i < plane; ++i) input.data[2 * plane + i] = progress;
    return input;
}

TrajectoryBatch collect_trajectories(const std::function<JointState(std::uint64_t)>& episode_factory,
                                     std::uint64_t& episode_counter,
                                     const std::vector<NetworkParams>& actors,
                                     const NetworkParams& critic, const EnvConfig& env_cfg,
                                     const RewardConfig& reward_cfg, const TrainConfig& cfg,
                                     Rng& sample_rng, std::vector<EpisodeTrace>* traces) {
    TrajectoryBatch batch;
    const std::size_t n_agents = actors.size();

    std::vector<double> episode_rewards;
    std::vector<double> episode_lengths;

    for (int e = 0; e < cfg.batch_episodes; ++e) {
        JointState state = episode_factory(episode_counter++);
        EpisodeTrace* trace = nullptr;
        if (traces) {
            traces->push_back({});
            trace = &traces->back();
            trace->env = env_cfg;
            trace->reward = reward_cfg;
            trace->arena_seed = state.arena.seed;
            trace->arena_map = state.arena.map;
            trace->spawn = state.positions();
            trace->initial_coverage = best_free_coverage(state);
            trace->initial_hash = joint_map_hash(state);
        }

        double ep_reward = 0.0;
        int ep_len = 0;
        while (state.terminal == Terminal::None) {
            Transition tr;
            tr.critic_input = build_critic_input(state, env_cfg);
            tr.value = critic_forward(critic, tr.critic_input);
            tr.obs.reserve(n_agents);
            tr.actions.resize(n_agents);
            tr.log_prob_old.resize(n_agents);
            std::vector<Action> joint(n_agents);
            for (std::size_t k = 0; k < n_agents; ++k) {
                tr.obs.push_back(encode_observation(state.agents[k]));
                const PolicyOutput out = actor_forward(actors[k], tr.obs.back());
                const auto [action, logp] = sample_action(out, sample_rng);
                tr.actions[k] = action;
                tr.log_prob_old[k] = logp;
                joint[k] = static_cast<Action>(action);
            }

            auto [next, events] = step(state, joint, env_cfg);
            tr.rewards.resize(n_agents);
            double sum = 0.0;
            for (std::size_t k = 0; k < n_agents; ++k) {
                tr.rewards[k] = step_reward(events.agents[k].reward_ctx, reward_cfg);
                sum += tr.rewards[k];
            }
            tr.team_reward = sum / static_cast<double>(n_agents);
            tr.done = next.terminal != Terminal::None;

            if (trace) {
                EpisodeTrace::StepRecord rec;
                rec.actions = joint;
                rec.positions = next.positions();
                for (std::size_t k = 0; k < n_agents; ++k) {
                    rec.gain.push_back(events.agents[k].knowledge_gain);
                    rec.comm_gain.push_back(events.agents[k].comm_gain);
                    rec.rewards.push_back(tr.rewards[k]);
                }
                for (const auto& net : events.networks)
                    if (net.members.size() >= 2) rec.networks.push_back(net.members);
                rec.coverage = best_free_coverage(next);
                rec.terminal = events.terminal;
                rec.map_hash = joint_map_hash(next);
                trace->steps.push_back(std::move(rec));
            }

            ep_reward += tr.team_reward;
            ++ep_len;
            batch.transitions.push_back(std::move(tr));
            state = std::move(next);
        }
        episode_rewards.push_back(ep_reward);
        episode_lengths.push_back(static_cast<double>(ep_len));
        ++batch.episodes;
    }

    // GAE over the concatenated transitions; done flags stop the recursion
    // at episode boundaries.
    std::vector<double> values, rewards;
    std::vector<bool> dones;
    for (const Transition& tr : batch.transitions) {
        values.push_back(tr.value);
        rewards.push_back(tr.team_reward);
        dones.push_back(tr.done);
    }
    GaeResult gae = compute_gae(values, rewards, dones, cfg.gamma, cfg.gae_lambda);
    batch.returns = std::move(gae.returns);
    if (cfg.critic_discounted_returns) {
        double carry = 0.0;
        for (std::size_t i = batch.transitions.size(); i-- > 0;) {
            carry = rewards[i] + (dones[i] ? 0.0 : cfg.gamma * carry);
            batch.returns[i] = carry;
        }
    }
    batch.advantages = std::move(gae.advantages);
    if (cfg.normalize_advantages && !batch.advantages.empty()) {
        double mean = std::accumulate(batch.advantages.begin(), batch.advantages.end(), 0.0) /
                      static_cast<double>(batch.advantages.size());
        double var = 0.0;
        for (double a : batch.advantages) var += (a - mean) * (a - mean);
        var /= static_cast<double>(batch.advantages.size());
        const double scale = 1.0 / (std::sqrt(var) + 1e-8);
        for (double& a : batch.advantages) a = (a - mean) * scale;
    }
    batch.multiplier = batch.advantages;

    batch.mean_episode_reward =
        std::accumulate(episode_rewards.begin(), episode_rewards.end(), 0.0) /
        static_cast<double>(std::max<std::size_t>(1, episode_rewards.size()));
    batch.mean_episode_length =
        std::accumulate(episode_lengths.begin(), episode_lengths.end(), 0.0) /
        static_cast<double>(std::max<std::size_t>(1, episode_lengths.size()));
    return batch;
}

UpdateResult happo_update(std::vector<NetworkParams>& actors, std::vector<AdamState>& actor_opt,
                          NetworkParams& critic, AdamState& critic_opt, TrajectoryBatch& batch,
                          const TrainConfig& cfg, Rng& perm_rng,
                          const std::function<void(int, const std::vector<double>&)>& on_agent_updated) {
    const std::size_t T = batch.transitions.size();
    if (T == 0) throw std::invalid_argument("happo_update: empty batch");
    const double inv_T = 1.0 / static_cast<double>(T);
    const double lo = 1.0 - cfg.clip_eps;
    const double hi = 1.0 + cfg.clip_eps;

    UpdateResult result;
    result.actor_loss.assign(actors.size(), 0.0);

    result.agent_order.resize(actors.size());
    std::iota(result.agent_order.begin(), result.agent_order.end(), 0);
    perm_rng.shuffle(result.agent_order);

    batch.multiplier = batch.advantages;

    const AdamConfig adam_cfg{cfg.lr, 0.9, 0.999, 1e-8};
    for (int k : result.agent_order) {
        NetworkParams& actor = actors[static_cast<std::size_t>(k)];
        for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
            NetworkParams grads = actor.zeros_like();
            double loss = 0.0;
            for (std::size_t t = 0; t < T; ++t) {
                const Transition& tr = batch.transitions[t];
                const Tensor& obs = tr.obs[static_cast<std::size_t>(k)];
                const int action = tr.actions[static_cast<std::size_t>(k)];
                ForwardCache cache;
                const PolicyOutput out = actor_forward(actor, obs, nullptr, &cache);
                const double logp_new = std::log(out.probs[static_cast<std::size_t>(action)]);
                const double w = std::exp(logp_new - tr.log_prob_old[static_cast<std::size_t>(k)]);
                result.ratio_min = std::min(result.ratio_min, w);
                result.ratio_max = std::max(result.ratio_max, w);
                const double M = batch.multiplier[t];
                const double unclipped = w * M;
                const double clipped = std::clamp(w, lo, hi) * M;

                std::vector<double> dlogits;
                if (unclipped <= clipped) {
                    loss -= unclipped * inv_T;
                    dlogits = nll_grad(out, action, unclipped * inv_T);
                } else {
                    loss -= clipped * inv_T;  // clip saturated: zero gradient
                    dlogits.assign(10, 0.0);
                }
                if (cfg.entropy_coef > 0.0) {
                    double entropy = 0.0;
                    for (double p : out.probs)
                        if (p > 0.0) entropy -= p * std::log(p);
                    loss -= cfg.entropy_coef * entropy * inv_T;
                    const std::vector<double> de = entropy_grad(out, cfg.entropy_coef * inv_T);
                    for (int a = 0; a < 10; ++a) dlogits[static_cast<std::size_t>(a)] += de[static_cast<std::size_t>(a)];
                }
                backward(actor, obs, cache, dlogits, grads);
            }
            if (!std::isfinite(loss))
                throw NonFiniteLoss("happo_update: non-finite actor loss (agent " + std::to_string(k) +
                                    ", epoch " + std::to_string(epoch) + ")");
            adam_step(actor, grads, adam_cfg, actor_opt[static_cast<std::size_t>(k)]);
            if (epoch == cfg.epochs - 1) result.actor_loss[static_cast<std::size_t>(k)] = loss;
        }

        // Fold the post-update ratio into the multiplier for the next agent.
        for (std::size_t t = 0; t < T; ++t) {
            const Transition& tr = batch.transitions[t];
            const PolicyOutput out = actor_forward(actor, tr.obs[static_cast<std::size_t>(k)]);
            const double logp_new =
                std::log(out.probs[static_cast<std::size_t>(tr.actions[static_cast<std::size_t>(k)])]);
            batch.multiplier[t] *= std::exp(logp_new - tr.log_prob_old[static_cast<std::size_t>(k)]);
        }
        if (on_agent_updated) on_agent_updated(k, batch.multiplier);
    }

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        NetworkParams grads = critic.zeros_like();
        double loss = 0.0;
        for (std::size_t t = 0; t < T; ++t) {
            const Transition& tr = batch.transitions[t];
            ForwardCache cache;
            const double v = critic_forward(critic, tr.critic_input, &cache);
            const double err = v - batch.returns[t];
            loss += err * err * inv_T;
            backward(critic, tr.critic_input, cache, {2.0 * err * inv_T}, grads);
        }
        if (!std::isfinite(loss))
            throw NonFiniteLoss("happo_update: non-finite critic loss (epoch " + std::to_string(epoch) + ")");
        if (epoch == 0) result.critic_loss_first = loss;
        if (epoch == cfg.epochs - 1) result.critic_loss_last = loss;
        adam_step(critic, grads, adam_cfg, critic_opt);
    }
    return result;
}

Trainer::Trainer(EnvConfig env_cfg, RewardConfig reward_cfg, TrainConfig train_cfg)
    : env_(env_cfg),
      reward_(reward_cfg),
      cfg_(train_cfg),
      critic_(init_params(derive_seed(train_cfg.seed, seed_stream::kCriticInit), env_cfg.n, 1)),
      critic_opt_(critic_),
      sample_rng_(derive_seed(train_cfg.seed, seed_stream::kSampling)),
      perm_rng_(derive_seed(train_cfg.seed, seed_stream::kPermutation)) {
    cfg_.validate();
    reward_.validate();
    env_.step_cap = cfg_.steps_per_episode;
    actors_.reserve(static_cast<std::size_t>(cfg_.n_agents));
    for (int k = 0; k < cfg_.n_agents; ++k) {
        actors_.push_back(init_params(
            derive_seed(cfg_.seed, seed_stream::kActorInit, static_cast<std::uint64_t>(k)), env_.n, 10));
        actor_opt_.emplace_back(actors_.back());
    }
}

JointState Trainer::make_episode(std::uint64_t episode_index) const {
    const Arena arena =
        generate_arena(env_.n, env_.cell_len, env_.obstacle_count, env_.max_obstacle_side,
                       derive_seed(cfg_.seed, seed_stream::kArena, episode_index));
    const std::vector<Cell> spawn = sample_initial_positions(
        arena, cfg_.n_agents, derive_seed(cfg_.seed, seed_stream::kSpawn, episode_index));
    return make_initial_state(arena, spawn, env_);
}

TrajectoryBatch Trainer::collect(std::vector<EpisodeTrace>* traces) {
    return collect_trajectories([this](std::uint64_t e) { return make_episode(e); }, episode_counter_,
                                actors_, critic_, env_, reward_, cfg_, sample_rng_, traces);
}

IterationStats Trainer::run_iteration() {
    TrajectoryBatch batch = collect();
    const UpdateResult upd =
        happo_update(actors_, actor_opt_, critic_, critic_opt_, batch, cfg_, perm_rng_);
    ++iteration_;
    IterationStats stats;
    stats.iteration = iteration_;
    stats.episodes = batch.episodes;
    stats.mean_episode_reward = batch.mean_episode_reward;
    stats.mean_episode_length = batch.mean_episode_length;
    stats.actor_loss = upd.actor_loss;
    stats.critic_loss_first = upd.critic_loss_first;
    stats.critic_loss_last = upd.critic_loss_last;
    return stats;
}

namespace {

constexpr char kStateMagic[4] = {'D', 'M', 'T', 'S'};

void write_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t read_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw std::runtime_error("trainer state: truncated file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void write_params_f64(std::ostream& os, const NetworkParams& p) {
    for (const Tensor* t : p.tensors()) {
        write_u64(os, t->size());
        for (double v : t->data) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, 8);
            write_u64(os, bits);
        }
    }
}

void read_params_f64(std::istream& is, NetworkParams& p) {
    for (Tensor* t : p.tensors()) {
        if (read_u64(is) != t->size()) throw std::runtime_error("trainer state: tensor size mismatch");
        for (double& v : t->data) {
            const std::uint64_t bits = read_u64(is);
            std::memcpy(&v, &bits, 8);
        }
    }
}

void write_string(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& is) {
    std::string s(read_u64(is), '\0');
    is.read(s.data(), static_cast<std::streamsize>(s.size()));
    if (!is) throw std::runtime_error("trainer state: truncated string");
    return s;
}

}  // namespace

void Trainer::save_state(const std::string& path) const {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("trainer state: cannot open " + path);
    os.write(kStateMagic, 4);
    write_u64(os, 1);  // version
    write_u64(os, static_cast<std::uint64_t>(iteration_));
    write_u64(os, episode_counter_);
    write_u64(os, static_cast<std::uint64_t>(actors_.size()));
    for (std::size_t k = 0; k < actors_.size(); ++k) {
        write_params_f64(os, actors_[k]);
        write_params_f64(os, actor_opt_[k].m);
        write_params_f64(os, actor_opt_[k].v);
        write_u64(os, static_cast<std::uint64_t>(actor_opt_[k].step_count));
    }
    write_params_f64(os, critic_);
    write_params_f64(os, critic_opt_.m);
    write_params_f64(os, critic_opt_.v);
    write_u64(os, static_cast<std::uint64_t>(critic_opt_.step_count));
    write_string(os, sample_rng_.save_state());
    write_string(os, perm_rng_.save_state());
    if (!os) throw std::runtime_error("trainer state: write failed for " + path);
}

void Trainer::load_state(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("trainer state: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kStateMagic, 4) != 0)
        throw std::runtime_error("trainer state: bad magic in " + path);
    if (read_u64(is) != 1) throw std::runtime_error("trainer state: unsupported version");
    iteration_ = static_cast<long>(read_u64(is));
    episode_counter_ = read_u64(is);
    if (read_u64(is) != actors_.size())
        throw std::runtime_error("trainer state: agent count mismatch");
    for (std::size_t k = 0; k < actors_.size(); ++k) {
        read_params_f64(is, actors_[k]);
        read_params_f64(is, actor_opt_[k].m);
        read_params_f64(is, actor_opt_[k].v);
        actor_opt_[k].step_count = static_cast<long>(read_u64(is));
    }
    read_params_f64(is, critic_);
    read_params_f64(is, critic_opt_.m);
    read_params_f64(is, critic_opt_.v);
    critic_opt_.step_count = static_cast<long>(read_u64(is));
    sample_rng_.load_state(read_string(is));
    perm_rng_.load_state(read_string(is));
}

}  // namespace marlex
