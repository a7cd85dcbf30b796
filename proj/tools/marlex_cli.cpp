// marlex command line: environment generation, training, evaluation
// campaigns, continuous-deployment runs, trace replay, and report emission.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "marlex/config.hpp"
#include "marlex/runner.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    long seed = -1;
    int study_case = 0;
    std::string mask_invalid;  // "on" / "off" / empty = config value
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "Configuration file (sectioned key = value)");
    cmd->add_option("--out", opts.out_dir, "Output directory");
    cmd->add_option("--seed", opts.seed, "Run seed (overrides the config)");
    cmd->add_option("--study-case", opts.study_case, "Reward study case 1..4")
        ->check(CLI::Range(1, 4));
    cmd->add_option("--mask-invalid", opts.mask_invalid, "Invalid-move masking at inference")
        ->check(CLI::IsMember({"on", "off"}));
}

marlex::RunConfig make_config(const CommonOpts& opts) {
    marlex::RunConfig cfg =
        opts.config_path.empty() ? marlex::default_config() : marlex::load_config_file(opts.config_path);
    if (opts.seed >= 0) cfg.train.seed = static_cast<std::uint64_t>(opts.seed);
    if (opts.study_case > 0) cfg.reward.study_case = opts.study_case;
    if (opts.mask_invalid == "on") {
        cfg.eval_mask_invalid = true;
        cfg.deploy.mask_invalid = true;
    } else if (opts.mask_invalid == "off") {
        cfg.eval_mask_invalid = false;
        cfg.deploy.mask_invalid = false;
    }
    cfg.finalize();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized multi-agent exploration: grid training and continuous deployment"};
    app.require_subcommand(1);

    CommonOpts opts;

    auto* gen = app.add_subcommand("gen-env", "Generate arena files and an index manifest");
    int gen_count = 10;
    gen->add_option("--count", gen_count, "Number of arenas");
    add_common(gen, opts);

    auto* train = app.add_subcommand("train", "Train actors and the shared critic");
    bool resume = false;
    train->add_flag("--resume", resume, "Continue from trainer_state.bin in the output directory");
    add_common(train, opts);

    auto* eval = app.add_subcommand("eval", "Greedy evaluation over an arena set");
    std::string checkpoints;
    std::vector<std::string> arena_files;
    std::string label = "eval";
    bool save_traces = false;
    eval->add_option("--checkpoints", checkpoints, "Directory with actor_k.nn files")->required();
    eval->add_option("--arenas", arena_files, "Arena text files (generated from the seed when absent)");
    eval->add_option("--label", label, "Summary row label");
    eval->add_flag("--save-traces", save_traces, "Write a replayable trace per episode");
    add_common(eval, opts);

    auto* deploy = app.add_subcommand("deploy", "Run trained actors on the continuous simulator");
    int setup_id = 1;
    std::string deploy_arena;
    deploy->add_option("--checkpoints", checkpoints, "Directory with actor_k.nn files")->required();
    deploy->add_option("--setup", setup_id, "Starting-pose setup 1..4")->check(CLI::Range(1, 4));
    deploy->add_option("--arena", deploy_arena, "Arena text file (generated when absent)");
    add_common(deploy, opts);

    auto* replay = app.add_subcommand("replay", "Re-simulate a stored trace and verify bit-equality");
    std::string trace_path;
    std::string render_dir;
    replay->add_option("trace", trace_path, "Trace file")->required();
    replay->add_option("--render", render_dir, "Directory for per-step PGM map renders");

    auto* report = app.add_subcommand("report", "Summarize a per-episode metrics CSV");
    std::string metrics_path;
    std::string report_out = "summary.csv";
    report->add_option("metrics", metrics_path, "metrics.csv from an eval run")->required();
    report->add_option("--out-file", report_out, "Summary CSV path");
    report->add_option("--label", label, "Summary row label");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*gen) {
            const marlex::RunConfig cfg = make_config(opts);
            const auto result = marlex::cmd_gen_env(cfg, gen_count, opts.out_dir);
            std::printf("wrote %zu arenas and %s\n", result.files.size(), result.index_path.c_str());
        } else if (*train) {
            const marlex::RunConfig cfg = make_config(opts);
            const auto result = marlex::cmd_train(cfg, opts.out_dir, resume);
            std::printf("trained %ld iterations; curve at %s\n", result.iterations,
                        result.curve_path.c_str());
        } else if (*eval) {
            const marlex::RunConfig cfg = make_config(opts);
            const auto result =
                marlex::cmd_eval(cfg, checkpoints, arena_files, opts.out_dir, label, save_traces);
            std::printf("evaluated %d episodes; robustness %.4f; summary at %s\n",
                        result.summary.episodes, result.summary.robustness,
                        result.summary_path.c_str());
        } else if (*deploy) {
            const marlex::RunConfig cfg = make_config(opts);
            const auto result =
                marlex::cmd_deploy(cfg, checkpoints, setup_id, deploy_arena, opts.out_dir);
            std::printf("deployment %s after %d steps; free coverage %.4f; report at %s\n",
                        marlex::deploy_outcome_name(result.run.outcome), result.run.steps,
                        result.run.free_coverage, result.report_path.c_str());
        } else if (*replay) {
            const auto result = marlex::cmd_replay(trace_path, render_dir);
            std::printf("replayed %d steps, terminal %s, %zu images rendered\n", result.steps,
                        marlex::terminal_name(result.terminal), result.rendered.size());
        } else if (*report) {
            const std::string out = marlex::cmd_report(metrics_path, report_out, label);
            std::printf("summary written to %s\n", out.c_str());
        }
    } catch (const marlex::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
