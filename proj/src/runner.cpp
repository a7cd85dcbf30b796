#include "marlex/runner.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "marlex/checkpoint.hpp"

namespace fs = std::filesystem;

namespace marlex {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string zero_pad(long v, int width) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%0*ld", width, v);
    return buf;
}

}  // namespace

std::uint64_t file_hash(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("file_hash: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[4096];
    while (is.read(buf, sizeof(buf)) || is.gcount() > 0) {
        const std::streamsize got = is.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x00000100000001b3ull;
        }
        if (!is) break;
    }
    return h;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write failed for " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

void write_manifest(const RunConfig& cfg, const std::string& out_dir, const std::string& command,
                    const std::vector<std::string>& input_files) {
    IniDoc doc = parse_ini(config_to_text(cfg));
    auto& run = doc["run"];
    run["command"] = command;
    for (std::size_t i = 0; i < input_files.size(); ++i) {
        char hash[32];
        std::snprintf(hash, sizeof(hash), "%016llx",
                      static_cast<unsigned long long>(file_hash(input_files[i])));
        run["input_" + zero_pad(static_cast<long>(i), 4)] =
            fs::path(input_files[i]).filename().string() + ":" + hash;
    }
    write_text_file((fs::path(out_dir) / "manifest.ini").string(), serialize_ini(doc));
}

EvalEpisode run_greedy_episode(const std::vector<NetworkParams>& actors, const Arena& arena,
                               const std::vector<Cell>& spawn, const EnvConfig& env_cfg,
                               const RewardConfig& reward_cfg, bool mask_invalid) {
    EvalEpisode out;
    JointState state = make_initial_state(arena, spawn, env_cfg);

    out.trace.env = env_cfg;
    out.trace.reward = reward_cfg;
    out.trace.arena_seed = arena.seed;
    out.trace.arena_map = arena.map;
    out.trace.spawn = spawn;
    out.trace.initial_coverage = best_free_coverage(state);
    out.trace.initial_hash = joint_map_hash(state);

    std::vector<double> coverage_series{out.trace.initial_coverage};
    while (state.terminal == Terminal::None) {
        std::vector<Action> joint(state.agents.size(), Action::Stay);
        std::vector<Cell> claimed;
        const std::vector<Cell> positions = state.positions();
        for (std::size_t k = 0; k < state.agents.size(); ++k) {
            const Tensor obs = encode_observation(state.agents[k]);
            std::array<bool, kNumActions> mask;
            const std::array<bool, kNumActions>* mask_ptr = nullptr;
            if (mask_invalid) {
                std::vector<Cell> peers;
                for (std::size_t j = 0; j < positions.size(); ++j)
                    if (j != k) peers.push_back(positions[j]);
                mask = action_mask(state.agents[k].maps.collaborative, positions[k], peers, claimed);
                mask_ptr = &mask;
            }
            const PolicyOutput pol = actor_forward(actors[k], obs, mask_ptr);
            joint[k] = static_cast<Action>(argmax_action(pol));
            if (is_movement(joint[k])) {
                const Cell d = action_delta(joint[k]);
                claimed.push_back({positions[k].row + d.row, positions[k].col + d.col});
            }
        }

        auto [next, events] = step(state, joint, env_cfg);
        EpisodeTrace::StepRecord rec;
        rec.actions = joint;
        rec.positions = next.positions();
        for (std::size_t k = 0; k < state.agents.size(); ++k) {
            rec.gain.push_back(events.agents[k].knowledge_gain);
            rec.comm_gain.push_back(events.agents[k].comm_gain);
            rec.rewards.push_back(step_reward(events.agents[k].reward_ctx, reward_cfg));
        }
        for (const auto& net : events.networks)
            if (net.members.size() >= 2) rec.networks.push_back(net.members);
        rec.coverage = best_free_coverage(next);
        rec.terminal = events.terminal;
        rec.map_hash = joint_map_hash(next);
        coverage_series.push_back(rec.coverage);
        out.trace.steps.push_back(std::move(rec));
        state = std::move(next);
    }

    out.report.n_steps = steps_to_coverage(coverage_series, env_cfg.p_threshold);
    out.report.success = state.terminal == Terminal::Success;
    out.report.d_shared = shared_data(out.trace);
    if (state.agents.size() >= 2) {
        std::vector<GridMap> maps;
        for (const AgentState& a : state.agents) maps.push_back(a.maps.agent_specific);
        out.report.jaccard = jaccard_aggregate(maps);
        for (std::size_t k = 0; k < maps.size(); ++k)
            for (std::size_t j = k + 1; j < maps.size(); ++j)
                out.report.jaccard_pairs.push_back(jaccard_pair(maps[k], maps[j]));
    } else {
        out.report.jaccard = 1.0;
    }
    return out;
}

GenEnvResult cmd_gen_env(const RunConfig& cfg, int count, const std::string& out_dir) {
    if (count < 0) throw ConfigError("gen-env: count must be >= 0");
    fs::create_directories(out_dir);
    GenEnvResult result;
    std::string index = "file,seed,n,l,free_cells\n";
    for (int i = 0; i < count; ++i) {
        const std::uint64_t seed =
            derive_seed(cfg.train.seed, seed_stream::kEvalArena, static_cast<std::uint64_t>(i));
        const Arena arena = generate_arena(cfg.env.n, cfg.env.cell_len, cfg.env.obstacle_count,
                                           cfg.env.max_obstacle_side, seed);
        const std::string name = "arena_" + zero_pad(i, 4) + ".txt";
        const std::string path = (fs::path(out_dir) / name).string();
        write_text_file(path, grid_to_text(arena.map));
        index += name + "," + std::to_string(seed) + "," + std::to_string(cfg.env.n) + "," +
                 fmt(cfg.env.cell_len) + "," + std::to_string(arena.map.count(CellState::Free)) + "\n";
        result.files.push_back(path);
    }
    result.index_path = (fs::path(out_dir) / "index.csv").string();
    write_text_file(result.index_path, index);
    write_manifest(cfg, out_dir, "gen-env", {});
    return result;
}

namespace {

std::string curve_header(int n_agents) {
    std::string h = "iteration,mean_episode_reward,mean_episode_length,critic_loss_first,critic_loss_last";
    for (int k = 0; k < n_agents; ++k) h += ",actor_loss_" + std::to_string(k);
    return h;
}

std::string curve_row(const IterationStats& s) {
    std::string row = std::to_string(s.iteration) + "," + fmt(s.mean_episode_reward) + "," +
                      fmt(s.mean_episode_length) + "," + fmt(s.critic_loss_first) + "," +
                      fmt(s.critic_loss_last);
    for (double l : s.actor_loss) row += "," + fmt(l);
    return row;
}

void write_checkpoints(const Trainer& trainer, const std::string& out_dir, const std::string& suffix) {
    for (std::size_t k = 0; k < trainer.actors().size(); ++k)
        save_params(trainer.actors()[k],
                    (fs::path(out_dir) / ("actor_" + std::to_string(k) + suffix + ".nn")).string());
    save_params(trainer.critic(), (fs::path(out_dir) / ("critic" + suffix + ".nn")).string());
}

}  // namespace

TrainResult cmd_train(const RunConfig& cfg, const std::string& out_dir, bool resume) {
    fs::create_directories(out_dir);
    Trainer trainer(cfg.env, cfg.reward, cfg.train);

    const std::string state_path = (fs::path(out_dir) / "trainer_state.bin").string();
    const std::string curve_path = (fs::path(out_dir) / "curve.csv").string();

    std::string curve;
    if (resume) {
        trainer.load_state(state_path);
        curve = read_text_file(curve_path);
    } else {
        write_manifest(cfg, out_dir, "train", {});
        curve = curve_header(cfg.train.n_agents) + "\n";
    }

    try {
        while (trainer.iteration() < cfg.train.n_iterations) {
            const IterationStats stats = trainer.run_iteration();
            curve += curve_row(stats) + "\n";
            if (cfg.train.checkpoint_interval > 0 &&
                stats.iteration % cfg.train.checkpoint_interval == 0 &&
                stats.iteration < cfg.train.n_iterations) {
                write_checkpoints(trainer, out_dir, "_it" + zero_pad(stats.iteration, 6));
                trainer.save_state(state_path);
                write_text_file(curve_path, curve);
            }
        }
    } catch (...) {
        // Keep whatever progress exists so the run can be inspected or resumed.
        write_text_file(curve_path, curve);
        write_checkpoints(trainer, out_dir, "_abort");
        trainer.save_state(state_path);
        throw;
    }

    write_text_file(curve_path, curve);
    write_checkpoints(trainer, out_dir, "");
    trainer.save_state(state_path);

    TrainResult result;
    result.curve_path = curve_path;
    for (std::size_t k = 0; k < trainer.actors().size(); ++k)
        result.actor_paths.push_back((fs::path(out_dir) / ("actor_" + std::to_string(k) + ".nn")).string());
    result.critic_path = (fs::path(out_dir) / "critic.nn").string();
    result.iterations = trainer.iteration();
    return result;
}

std::vector<NetworkParams> load_actor_set(const std::string& checkpoint_dir, int n_agents,
                                          int grid_side) {
    std::vector<NetworkParams> actors;
    actors.reserve(static_cast<std::size_t>(n_agents));
    for (int k = 0; k < n_agents; ++k) {
        const std::string path =
            (fs::path(checkpoint_dir) / ("actor_" + std::to_string(k) + ".nn")).string();
        actors.push_back(load_params(path, grid_side, 10));
    }
    return actors;
}

EvalResult cmd_eval(const RunConfig& cfg, const std::string& checkpoint_dir,
                    const std::vector<std::string>& arena_files, const std::string& out_dir,
                    const std::string& label, bool write_traces) {
    if (arena_files.empty() && cfg.eval_episodes == 0)
        throw ConfigError("eval: empty arena set");
    fs::create_directories(out_dir);

    EnvConfig env_cfg = cfg.env;
    env_cfg.step_cap = cfg.eval_step_cap;
    if (!arena_files.empty()) {
        const GridMap first = grid_from_text(read_text_file(arena_files.front()));
        env_cfg.n = first.size();
        env_cfg.cell_len = first.cell_len();
    }

    const std::vector<NetworkParams> actors =
        load_actor_set(checkpoint_dir, cfg.train.n_agents, env_cfg.n);

    EvalResult result;
    std::string metrics = metrics_csv_header() + "\n";
    std::string dist = "episode,n_steps\n";
    const int episodes =
        arena_files.empty() ? cfg.eval_episodes : static_cast<int>(arena_files.size());
    for (int e = 0; e < episodes; ++e) {
        Arena arena;
        if (arena_files.empty()) {
            arena = generate_arena(env_cfg.n, env_cfg.cell_len, env_cfg.obstacle_count,
                                   env_cfg.max_obstacle_side,
                                   derive_seed(cfg.train.seed, seed_stream::kEvalArena,
                                               static_cast<std::uint64_t>(e)));
        } else {
            arena.map = grid_from_text(read_text_file(arena_files[static_cast<std::size_t>(e)]));
            arena.seed = file_hash(arena_files[static_cast<std::size_t>(e)]);
            if (arena.map.count(CellState::Unknown) > 0)
                throw ConfigError("eval: arena file contains unknown cells: " +
                                  arena_files[static_cast<std::size_t>(e)]);
            if (arena.map.size() != env_cfg.n)
                throw CheckpointMismatch("eval: arena size differs from the checkpoint network");
        }
        const std::vector<Cell> spawn = sample_initial_positions(
            arena, cfg.train.n_agents,
            derive_seed(cfg.train.seed, seed_stream::kSpawn, static_cast<std::uint64_t>(e)));
        EvalEpisode ep =
            run_greedy_episode(actors, arena, spawn, env_cfg, cfg.reward, cfg.eval_mask_invalid);
        metrics += metrics_csv_row(e, ep.report) + "\n";
        dist += std::to_string(e) + "," +
                (ep.report.n_steps ? std::to_string(*ep.report.n_steps) : std::string("")) + "\n";
        if (write_traces)
            write_text_file((fs::path(out_dir) / ("trace_" + zero_pad(e, 4) + ".txt")).string(),
                            trace_to_text(ep.trace));
        result.reports.push_back(std::move(ep.report));
    }

    result.summary = summarize(result.reports);
    result.metrics_path = (fs::path(out_dir) / "metrics.csv").string();
    result.summary_path = (fs::path(out_dir) / "summary.csv").string();
    write_text_file(result.metrics_path, metrics);
    write_text_file(result.summary_path,
                    summary_csv_header() + "\n" + summary_csv_row(label, result.summary) + "\n");
    write_text_file((fs::path(out_dir) / "n_steps_distribution.csv").string(), dist);
    write_manifest(cfg, out_dir, "eval", arena_files);
    return result;
}

DeployRunResult cmd_deploy(const RunConfig& cfg, const std::string& checkpoint_dir, int setup_id,
                           const std::string& arena_file, const std::string& out_dir) {
    fs::create_directories(out_dir);

    Arena arena;
    std::vector<std::string> inputs;
    if (arena_file.empty()) {
        arena = generate_arena(cfg.env.n, cfg.env.cell_len, cfg.env.obstacle_count,
                               cfg.env.max_obstacle_side,
                               derive_seed(cfg.train.seed, seed_stream::kArena, 0));
    } else {
        arena.map = grid_from_text(read_text_file(arena_file));
        arena.seed = file_hash(arena_file);
        inputs.push_back(arena_file);
    }
    EnvConfig env_cfg = cfg.env;
    env_cfg.n = arena.map.size();
    env_cfg.cell_len = arena.map.cell_len();

    const std::vector<Pose> poses = setup_poses(setup_id);
    if (cfg.train.n_agents > static_cast<int>(poses.size()))
        throw ConfigError("deploy: setup provides fewer poses than agents");
    const std::vector<Pose> start(poses.begin(), poses.begin() + cfg.train.n_agents);

    const std::vector<NetworkParams> actors =
        load_actor_set(checkpoint_dir, cfg.train.n_agents, env_cfg.n);

    DeployRunResult result;
    result.run = run_deployment(actors, arena, start, env_cfg, cfg.deploy);

    std::string trace = "step,agent,x,y,theta,action,command_count,gain,comm_gain,timed_out\n";
    for (const DeployStepRow& r : result.run.trace) {
        trace += std::to_string(r.step) + "," + std::to_string(r.agent) + "," + fmt(r.pose.x) + "," +
                 fmt(r.pose.y) + "," + fmt(r.pose.theta) + "," + std::to_string(r.action) + "," +
                 std::to_string(r.command_count) + "," + std::to_string(r.gain) + "," +
                 std::to_string(r.comm_gain) + "," + (r.timed_out ? "1" : "0") + "\n";
    }
    result.trace_path = (fs::path(out_dir) / "deploy_trace.csv").string();
    write_text_file(result.trace_path, trace);

    // Table-6-shaped report: coverage plus the pairwise Jaccard table.
    std::string report = "metric,value\n";
    report += "outcome," + std::string(deploy_outcome_name(result.run.outcome)) + "\n";
    report += "steps," + std::to_string(result.run.steps) + "\n";
    report += "map_coverage_free," + fmt(result.run.free_coverage) + "\n";
    report += "map_coverage_total," + fmt(result.run.total_coverage) + "\n";
    report += "d_shared," + std::to_string(result.run.d_shared) + "\n";
    for (std::size_t k = 0; k < result.run.agent_specific.size(); ++k) {
        for (std::size_t j = k + 1; j < result.run.agent_specific.size(); ++j) {
            report += "jaccard_" + std::to_string(k + 1) + "_" + std::to_string(j + 1) + "," +
                      fmt(jaccard_pair(result.run.agent_specific[k], result.run.agent_specific[j])) + "\n";
        }
    }
    result.report_path = (fs::path(out_dir) / "deploy_report.csv").string();
    write_text_file(result.report_path, report);

    for (std::size_t k = 0; k < result.run.agent_specific.size(); ++k) {
        write_text_file((fs::path(out_dir) / ("map_agent_" + std::to_string(k) + ".txt")).string(),
                        grid_to_text(result.run.agent_specific[k]));
        write_text_file(
            (fs::path(out_dir) / ("map_collaborative_" + std::to_string(k) + ".txt")).string(),
            grid_to_text(result.run.collaborative[k]));
    }

    write_manifest(cfg, out_dir, "deploy", inputs);
    return result;
}

ReplayResult cmd_replay(const std::string& trace_path, const std::string& render_dir) {
    const EpisodeTrace trace = trace_from_text(read_text_file(trace_path));
    ReplayResult result;

    if (!render_dir.empty()) {
        fs::create_directories(render_dir);
        Arena arena{trace.arena_map, trace.arena_seed};
        JointState state = make_initial_state(arena, trace.spawn, trace.env);
        int step_no = 0;
        auto render = [&](const JointState& s) {
            for (std::size_t k = 0; k < s.agents.size(); ++k) {
                const std::string path =
                    (fs::path(render_dir) /
                     ("step_" + zero_pad(step_no, 4) + "_agent_" + std::to_string(k) + ".pgm"))
                        .string();
                write_text_file(path, map_to_pgm(s.agents[k].maps.collaborative));
                result.rendered.push_back(path);
            }
        };
        render(state);
        for (const auto& rec : trace.steps) {
            auto [next, events] = step(state, rec.actions, trace.env);
            state = std::move(next);
            ++step_no;
            render(state);
            if (state.terminal != Terminal::None) break;
        }
    }

    const JointState final_state = replay_trace(trace);
    result.steps = static_cast<int>(trace.steps.size());
    result.terminal = final_state.terminal;
    return result;
}

std::string cmd_report(const std::string& metrics_csv_path, const std::string& out_path,
                       const std::string& label) {
    std::istringstream is(read_text_file(metrics_csv_path));
    std::string line;
    if (!std::getline(is, line) || line != metrics_csv_header())
        throw std::runtime_error("report: unexpected metrics header in " + metrics_csv_path);
    std::vector<MetricsReport> reports;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::istringstream ls(line);
        std::string col;
        while (std::getline(ls, col, ',')) cols.push_back(col);
        while (cols.size() < 5) cols.push_back("");
        MetricsReport r;
        if (!cols[1].empty()) r.n_steps = std::stoi(cols[1]);
        r.jaccard = std::stod(cols[2]);
        r.d_shared = std::stol(cols[3]);
        r.success = cols[4] == "1";
        reports.push_back(std::move(r));
    }
    const MetricsSummary summary = summarize(reports);
    write_text_file(out_path, summary_csv_header() + "\n" + summary_csv_row(label, summary) + "\n");
    return out_path;
}

}  // namespace marlex
