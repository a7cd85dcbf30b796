#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "marlex/config.hpp"
#include "marlex/deploy.hpp"
#include "marlex/happo.hpp"
#include "marlex/metrics.hpp"
#include "marlex/trace.hpp"

namespace marlex {

std::uint64_t file_hash(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Greedy (argmax) rollout used by evaluation: agents act in id order; with
// masking on, each agent is also masked away from cells already claimed this
// step, so masked runs cannot terminate by collision.
struct EvalEpisode {
    EpisodeTrace trace;
    MetricsReport report;
};
EvalEpisode run_greedy_episode(const std::vector<NetworkParams>& actors, const Arena& arena,
                               const std::vector<Cell>& spawn, const EnvConfig& env_cfg,
                               const RewardConfig& reward_cfg, bool mask_invalid);

// gen-env: `count` arena files plus an index manifest; deterministic per seed.
struct GenEnvResult {
    std::vector<std::string> files;
    std::string index_path;
};
GenEnvResult cmd_gen_env(const RunConfig& cfg, int count, const std::string& out_dir);

// train: n_e iterations of collect / GAE / update; writes curve.csv,
// manifest.ini, trainer_state.bin, and actor/critic checkpoints. Resumes
// from trainer_state.bin when `resume` is set.
struct TrainResult {
    std::string curve_path;
    std::vector<std::string> actor_paths;
    std::string critic_path;
    long iterations = 0;
};
TrainResult cmd_train(const RunConfig& cfg, const std::string& out_dir, bool resume = false);

// eval: greedy episodes over an arena set (files, or generated from the seed
// when none are given); per-episode metrics, a Table-4-shaped summary row,
// the n_steps distribution, and per-episode traces.
struct EvalResult {
    MetricsSummary summary;
    std::vector<MetricsReport> reports;
    std::string metrics_path;
    std::string summary_path;
};
EvalResult cmd_eval(const RunConfig& cfg, const std::string& checkpoint_dir,
                    const std::vector<std::string>& arena_files, const std::string& out_dir,
                    const std::string& label = "eval", bool write_traces = false);

// deploy: trained actors on the continuous simulator with a Table-5 setup.
struct DeployRunResult {
    DeployResult run;
    std::string trace_path;
    std::string report_path;
};
DeployRunResult cmd_deploy(const RunConfig& cfg, const std::string& checkpoint_dir, int setup_id,
                           const std::string& arena_file, const std::string& out_dir);

// replay: re-simulates a stored trace, asserts bit-equality, and renders
// per-step collaborative maps as PGM when requested.
struct ReplayResult {
    int steps = 0;
    Terminal terminal = Terminal::None;
    std::vector<std::string> rendered;
};
ReplayResult cmd_replay(const std::string& trace_path, const std::string& render_dir = "");

// report: per-episode metrics CSV -> summary CSV.
std::string cmd_report(const std::string& metrics_csv_path, const std::string& out_path,
                       const std::string& label = "report");

// Loads actor_0.nn .. actor_{k-1}.nn (and critic.nn if present).
std::vector<NetworkParams> load_actor_set(const std::string& checkpoint_dir, int n_agents,
                                          int grid_side);

void write_manifest(const RunConfig& cfg, const std::string& out_dir, const std::string& command,
                    const std::vector<std::string>& input_files);

}  // namespace marlex
