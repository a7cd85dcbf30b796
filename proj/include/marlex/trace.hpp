#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "marlex/env.hpp"
#include "marlex/rewards.hpp"

namespace marlex {

struct ReplayDivergence : std::runtime_error {
    int step;
    ReplayDivergence(int s, const std::string& what) : std::runtime_error(what), step(s) {}
};

// Replayable record of one grid episode: environment config, arena, spawn
// cells, and a per-step digest (actions, positions, gains, rewards, coverage,
// map hash). Re-simulating from the header must reproduce every digest line.
struct EpisodeTrace {
    EnvConfig env;
    RewardConfig reward;
    std::uint64_t arena_seed = 0;
    GridMap arena_map;
    std::vector<Cell> spawn;

    struct StepRecord {
        std::vector<Action> actions;
        std::vector<Cell> positions;
        std::vector<long> gain;       // detection gain per agent
        std::vector<long> comm_gain;  // merge gain per agent
        std::vector<double> rewards;
        std::vector<std::vector<int>> networks;  // only networks with >= 2 members
        double coverage = 0.0;        // best free-cell coverage after the step
        Terminal terminal = Terminal::None;
        std::uint64_t map_hash = 0;   // FNV over all collaborative maps
    };

    double initial_coverage = 0.0;
    std::uint64_t initial_hash = 0;
    std::vector<StepRecord> steps;

    Terminal final_terminal() const {
        return steps.empty() ? Terminal::None : steps.back().terminal;
    }
};

std::uint64_t joint_map_hash(const JointState& state);

std::string trace_to_text(const EpisodeTrace& trace);
EpisodeTrace trace_from_text(const std::string& text);

// Re-simulates the stored actions through the deterministic transition and
// compares every digest field; throws ReplayDivergence at the first
// mismatching step (-1 for the initial record). Returns the final state.
JointState replay_trace(const EpisodeTrace& trace);

// Portable graymap (P2) render of a map: Free 255, Occupied 0, Unknown 127.
std::string map_to_pgm(const GridMap& m);

}  // namespace marlex
