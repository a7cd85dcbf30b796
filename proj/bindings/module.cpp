// Python bindings for the exploration core: arena generation, the grid
// environment, reward evaluation, HAPPO training, greedy evaluation, and the
// continuous deployment simulator. Exposed as marlex._core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "marlex/checkpoint.hpp"
#include "marlex/config.hpp"
#include "marlex/deploy.hpp"
#include "marlex/metrics.hpp"
#include "marlex/runner.hpp"

namespace py = pybind11;
using namespace marlex;

namespace {

py::array_t<std::uint8_t> grid_to_array(const GridMap& g) {
    py::array_t<std::uint8_t> arr({g.size(), g.size()});
    auto buf = arr.mutable_unchecked<2>();
    for (int r = 0; r < g.size(); ++r)
        for (int c = 0; c < g.size(); ++c) buf(r, c) = static_cast<std::uint8_t>(g.at(r, c));
    return arr;
}

GridMap grid_from_array(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> arr,
                        double cell_len) {
    if (arr.ndim() != 2 || arr.shape(0) != arr.shape(1))
        throw std::invalid_argument("grid array must be square");
    GridMap g(static_cast<int>(arr.shape(0)), cell_len);
    auto buf = arr.unchecked<2>();
    for (int r = 0; r < g.size(); ++r)
        for (int c = 0; c < g.size(); ++c) {
            const std::uint8_t v = buf(r, c);
            if (v > 2) throw std::invalid_argument("grid values must be 0, 1 or 2");
            g.set(r, c, static_cast<CellState>(v));
        }
    return g;
}

py::array_t<double> tensor_to_array(const Tensor& t) {
    std::vector<py::ssize_t> shape(t.shape.begin(), t.shape.end());
    py::array_t<double> arr(shape);
    std::copy(t.data.begin(), t.data.end(), arr.mutable_data());
    return arr;
}

std::pair<int, int> to_cell_pair(Cell c) { return {c.row, c.col}; }

// Gymnasium-flavored wrapper around the deterministic joint transition.
class Environment {
public:
    Environment(EnvConfig cfg, RewardConfig reward, int n_agents)
        : cfg_(cfg), reward_(reward), n_agents_(n_agents) {
        reward_.e_max = cfg_.e_max();
        reward_.p_threshold = cfg_.p_threshold;
        reward_.validate();
    }

    py::list reset(std::uint64_t seed) {
        const Arena arena = generate_arena(cfg_.n, cfg_.cell_len, cfg_.obstacle_count,
                                           cfg_.max_obstacle_side, derive_seed(seed, seed_stream::kArena));
        const std::vector<Cell> spawn =
            sample_initial_positions(arena, n_agents_, derive_seed(seed, seed_stream::kSpawn));
        state_ = make_initial_state(arena, spawn, cfg_);
        return observations();
    }

    py::list reset_with(py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> grid,
                        const std::vector<std::pair<int, int>>& spawn) {
        Arena arena{grid_from_array(grid, cfg_.cell_len), 0};
        if (arena.map.size() != cfg_.n) throw std::invalid_argument("grid size differs from config n");
        std::vector<Cell> cells;
        for (auto [r, c] : spawn) cells.push_back({r, c});
        state_ = make_initial_state(std::move(arena), cells, cfg_);
        return observations();
    }

    py::tuple step_env(const std::vector<int>& actions) {
        std::vector<Action> joint;
        joint.reserve(actions.size());
        for (int a : actions) {
            if (a < 0 || a >= kNumActions) throw std::invalid_argument("action index out of range");
            joint.push_back(static_cast<Action>(a));
        }
        auto [next, events] = step(state_, joint, cfg_);
        state_ = std::move(next);

        py::list rewards;
        py::list infos;
        for (const auto& ev : events.agents) {
            rewards.append(step_reward(ev.reward_ctx, reward_));
            py::dict info;
            info["moved"] = ev.moved;
            info["collided"] = ev.collided;
            info["communicated"] = ev.communicated;
            info["knowledge_gain"] = ev.knowledge_gain;
            info["comm_gain"] = ev.comm_gain;
            infos.append(info);
        }
        return py::make_tuple(observations(), rewards, state_.terminal != Terminal::None,
                              terminal_name(state_.terminal), infos);
    }

    py::list observations() const {
        py::list obs;
        for (const AgentState& a : state_.agents) obs.append(tensor_to_array(encode_observation(a)));
        return obs;
    }

    py::list masks() const {
        py::list out;
        const std::vector<Cell> positions = state_.positions();
        for (std::size_t k = 0; k < state_.agents.size(); ++k) {
            std::vector<Cell> peers;
            for (std::size_t j = 0; j < positions.size(); ++j)
                if (j != k) peers.push_back(positions[j]);
            const auto mask = action_mask(state_.agents[k].maps.collaborative, positions[k], peers);
            py::list row;
            for (bool b : mask) row.append(b);
            out.append(row);
        }
        return out;
    }

    std::vector<std::pair<int, int>> positions() const {
        std::vector<std::pair<int, int>> out;
        for (const AgentState& a : state_.agents) out.push_back(to_cell_pair(a.position));
        return out;
    }

    double coverage() const { return best_free_coverage(state_); }
    int t() const { return state_.t; }
    std::string terminal() const { return terminal_name(state_.terminal); }
    py::array_t<std::uint8_t> arena() const { return grid_to_array(state_.arena.map); }
    py::array_t<std::uint8_t> collaborative_map(int agent) const {
        return grid_to_array(state_.agents.at(static_cast<std::size_t>(agent)).maps.collaborative);
    }
    py::array_t<std::uint8_t> agent_specific_map(int agent) const {
        return grid_to_array(state_.agents.at(static_cast<std::size_t>(agent)).maps.agent_specific);
    }

private:
    EnvConfig cfg_;
    RewardConfig reward_;
    int n_agents_;
    JointState state_;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Decentralized multi-agent exploration core";

    py::class_<EnvConfig>(m, "EnvConfig")
        .def(py::init<>())
        .def_readwrite("n", &EnvConfig::n)
        .def_readwrite("cell_len", &EnvConfig::cell_len)
        .def_readwrite("r_d", &EnvConfig::r_d)
        .def_readwrite("r_c", &EnvConfig::r_c)
        .def_readwrite("obstacle_count", &EnvConfig::obstacle_count)
        .def_readwrite("max_obstacle_side", &EnvConfig::max_obstacle_side)
        .def_readwrite("step_cap", &EnvConfig::step_cap)
        .def_readwrite("p_threshold", &EnvConfig::p_threshold)
        .def_readwrite("collision_terminates", &EnvConfig::collision_terminates)
        .def("e_max", &EnvConfig::e_max);

    py::class_<RewardConfig>(m, "RewardConfig")
        .def(py::init<>())
        .def_readwrite("study_case", &RewardConfig::study_case)
        .def_readwrite("r_rep", &RewardConfig::r_rep)
        .def_readwrite("r_bou", &RewardConfig::r_bou)
        .def_readwrite("r_col", &RewardConfig::r_col)
        .def_readwrite("r_ndi", &RewardConfig::r_ndi)
        .def_readwrite("r_exp_min", &RewardConfig::r_exp_min)
        .def_readwrite("e_max", &RewardConfig::e_max);

    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("n_agents", &TrainConfig::n_agents)
        .def_readwrite("n_iterations", &TrainConfig::n_iterations)
        .def_readwrite("steps_per_episode", &TrainConfig::steps_per_episode)
        .def_readwrite("batch_episodes", &TrainConfig::batch_episodes)
        .def_readwrite("clip_eps", &TrainConfig::clip_eps)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("lr", &TrainConfig::lr)
        .def_readwrite("gamma", &TrainConfig::gamma)
        .def_readwrite("gae_lambda", &TrainConfig::gae_lambda)
        .def_readwrite("normalize_advantages", &TrainConfig::normalize_advantages)
        .def_readwrite("entropy_coef", &TrainConfig::entropy_coef)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("checkpoint_interval", &TrainConfig::checkpoint_interval);

    py::class_<DeploymentConfig>(m, "DeploymentConfig")
        .def(py::init<>())
        .def_readwrite("dt", &DeploymentConfig::dt)
        .def_readwrite("step_time_budget", &DeploymentConfig::step_time_budget)
        .def_readwrite("sensor_range", &DeploymentConfig::sensor_range)
        .def_readwrite("rho", &DeploymentConfig::rho)
        .def_readwrite("step_cap", &DeploymentConfig::step_cap)
        .def_readwrite("mask_invalid", &DeploymentConfig::mask_invalid);

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init(&default_config))
        .def_readwrite("env", &RunConfig::env)
        .def_readwrite("reward", &RunConfig::reward)
        .def_readwrite("train", &RunConfig::train)
        .def_readwrite("deploy", &RunConfig::deploy)
        .def_readwrite("eval_episodes", &RunConfig::eval_episodes)
        .def_readwrite("eval_step_cap", &RunConfig::eval_step_cap)
        .def_readwrite("eval_mask_invalid", &RunConfig::eval_mask_invalid)
        .def("finalize", &RunConfig::finalize);

    m.def("default_config", &default_config);
    m.def("load_config", &load_config_file, py::arg("path"));
    m.def("save_config", &save_config_file, py::arg("config"), py::arg("path"));

    m.def(
        "generate_arena",
        [](int n, double cell_len, int obstacle_count, int max_obstacle_side, std::uint64_t seed) {
            const Arena a = generate_arena(n, cell_len, obstacle_count, max_obstacle_side, seed);
            return grid_to_array(a.map);
        },
        py::arg("n"), py::arg("cell_len"), py::arg("obstacle_count"), py::arg("max_obstacle_side"),
        py::arg("seed"));
    m.def(
        "sample_initial_positions",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> grid, double cell_len,
           int n_agents, std::uint64_t seed) {
            const Arena a{grid_from_array(grid, cell_len), 0};
            std::vector<std::pair<int, int>> out;
            for (Cell c : sample_initial_positions(a, n_agents, seed)) out.push_back(to_cell_pair(c));
            return out;
        },
        py::arg("grid"), py::arg("cell_len"), py::arg("n_agents"), py::arg("seed"));
    m.def(
        "arena_to_text",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> grid, double cell_len) {
            return grid_to_text(grid_from_array(grid, cell_len));
        },
        py::arg("grid"), py::arg("cell_len"));
    m.def("arena_from_text", [](const std::string& text) { return grid_to_array(grid_from_text(text)); },
          py::arg("text"));

    py::class_<Environment>(m, "Environment")
        .def(py::init<EnvConfig, RewardConfig, int>(), py::arg("env_config"), py::arg("reward_config"),
             py::arg("n_agents"))
        .def("reset", &Environment::reset, py::arg("seed"))
        .def("reset_with", &Environment::reset_with, py::arg("grid"), py::arg("spawn"))
        .def("step", &Environment::step_env, py::arg("actions"))
        .def("observations", &Environment::observations)
        .def("masks", &Environment::masks)
        .def("positions", &Environment::positions)
        .def("coverage", &Environment::coverage)
        .def("t", &Environment::t)
        .def("terminal", &Environment::terminal)
        .def("arena", &Environment::arena)
        .def("collaborative_map", &Environment::collaborative_map, py::arg("agent"))
        .def("agent_specific_map", &Environment::agent_specific_map, py::arg("agent"));

    m.def(
        "jaccard_pair",
        [](py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> a,
           py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast> b) {
            return jaccard_pair(grid_from_array(a, 1.0), grid_from_array(b, 1.0));
        },
        py::arg("map_a"), py::arg("map_b"));
    m.def(
        "jaccard_aggregate",
        [](const std::vector<py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>>& maps) {
            std::vector<GridMap> gs;
            for (const auto& a : maps) gs.push_back(grid_from_array(a, 1.0));
            return jaccard_aggregate(gs);
        },
        py::arg("maps"));

    m.def(
        "train",
        [](const RunConfig& cfg, const std::string& out_dir, bool resume) {
            const TrainResult r = cmd_train(cfg, out_dir, resume);
            py::dict out;
            out["curve"] = r.curve_path;
            out["actors"] = r.actor_paths;
            out["critic"] = r.critic_path;
            out["iterations"] = r.iterations;
            return out;
        },
        py::arg("config"), py::arg("out_dir"), py::arg("resume") = false);
    m.def(
        "evaluate",
        [](const RunConfig& cfg, const std::string& checkpoints,
           const std::vector<std::string>& arenas, const std::string& out_dir) {
            const EvalResult r = cmd_eval(cfg, checkpoints, arenas, out_dir);
            py::dict out;
            out["episodes"] = r.summary.episodes;
            out["robustness"] = r.summary.robustness;
            out["n_steps_mean"] = r.summary.n_steps_mean;
            out["jaccard_mean"] = r.summary.jaccard_mean;
            out["d_shared_mean"] = r.summary.d_shared_mean;
            out["metrics_csv"] = r.metrics_path;
            out["summary_csv"] = r.summary_path;
            return out;
        },
        py::arg("config"), py::arg("checkpoints"), py::arg("arenas") = std::vector<std::string>{},
        py::arg("out_dir") = std::string("out"));
    m.def(
        "deploy",
        [](const RunConfig& cfg, const std::string& checkpoints, int setup_id,
           const std::string& arena_file, const std::string& out_dir) {
            const DeployRunResult r = cmd_deploy(cfg, checkpoints, setup_id, arena_file, out_dir);
            py::dict out;
            out["outcome"] = deploy_outcome_name(r.run.outcome);
            out["steps"] = r.run.steps;
            out["free_coverage"] = r.run.free_coverage;
            out["total_coverage"] = r.run.total_coverage;
            out["trace_csv"] = r.trace_path;
            out["report_csv"] = r.report_path;
            return out;
        },
        py::arg("config"), py::arg("checkpoints"), py::arg("setup_id") = 1,
        py::arg("arena_file") = std::string(), py::arg("out_dir") = std::string("out"));
    m.def("gen_env",
          [](const RunConfig& cfg, int count, const std::string& out_dir) {
              return cmd_gen_env(cfg, count, out_dir).files;
          },
          py::arg("config"), py::arg("count"), py::arg("out_dir"));
    m.def("replay",
          [](const std::string& trace_path) {
              const ReplayResult r = cmd_replay(trace_path);
              return py::make_tuple(r.steps, terminal_name(r.terminal));
          },
          py::arg("trace_path"));

    m.def(
        "controller_step",
        [](double x, double y, double theta, double x_d, double y_d) {
            const auto [v, omega] = controller_step({x, y, theta}, x_d, y_d, ControllerGains{});
            return py::make_tuple(v, omega);
        },
        py::arg("x"), py::arg("y"), py::arg("theta"), py::arg("x_d"), py::arg("y_d"));
    m.def("setup_poses", [](int setup_id) {
        std::vector<std::tuple<double, double, double>> out;
        for (const Pose& p : setup_poses(setup_id)) out.emplace_back(p.x, p.y, p.theta);
        return out;
    });

    py::register_exception<GenerationFailed>(m, "GenerationFailed");
    py::register_exception<TooManyAgents>(m, "TooManyAgents");
    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<CheckpointMismatch>(m, "CheckpointMismatch");
}
