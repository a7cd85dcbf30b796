#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "marlex/arena.hpp"
#include "marlex/comms.hpp"
#include "marlex/maps.hpp"
#include "marlex/rewards.hpp"

namespace marlex {

struct ActionCountMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SteppedTerminalState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// 8 moves, stay, communicate. Up decreases the row; row 0 is the top edge.
enum class Action : std::uint8_t {
    Up = 0, UpRight, Right, DownRight, Down, DownLeft, Left, UpLeft, Stay, Comm
};
constexpr int kNumActions = 10;

inline bool is_movement(Action a) { return static_cast<int>(a) < 8; }
Cell action_delta(Action a);
char action_char(Action a);
Action action_from_char(char c);

enum class Terminal : std::uint8_t { None = 0, Success, Collision, StepCap };
const char* terminal_name(Terminal t);

struct EnvConfig {
    int n = 50;
    double cell_len = 0.5;
    double r_d = 1.0;  // detection range, meters
    double r_c = 5.0;  // communication range, meters
    int obstacle_count = 6;
    int max_obstacle_side = 10;
    int step_cap = 200;            // n_s
    double p_threshold = 0.9;      // success coverage fraction over Free cells
    bool collision_terminates = true;
    MergeRule merge_rule = MergeRule::Strict;

    int detect_pad() const { return range_to_cells(r_d, cell_len); }
    int comm_pad() const { return range_to_cells(r_c, cell_len); }
    double e_max() const { return 4.0 * detect_pad() + 1.0; }
};

struct JointState {
    Arena arena;
    std::vector<AgentState> agents;
    int t = 0;
    Terminal terminal = Terminal::None;

    std::vector<Cell> positions() const {
        std::vector<Cell> out;
        out.reserve(agents.size());
        for (const AgentState& a : agents) out.push_back(a.position);
        return out;
    }
};

struct AgentEvents {
    bool moved = false;
    bool collided = false;
    bool communicated = false;   // exchanged data: chose Comm in a network >= 2
    long knowledge_gain = 0;     // detection gain this step
    long comm_gain = 0;
    RewardContext reward_ctx;    // everything rewards::step_reward needs
};

struct StepEvents {
    std::vector<AgentEvents> agents;
    std::vector<CommNetwork> networks;
    Terminal terminal = Terminal::None;
};

// Fraction of ground-truth Free cells known in the collaborative map.
double free_coverage(const GridMap& collaborative, const Arena& arena);
// Fraction over all n^2 cells (the all-grids variant reported by deploy).
double total_coverage(const GridMap& collaborative);
// max over agents of free_coverage.
double best_free_coverage(const JointState& state);

// Spawns agents, performs the initial detection at each spawn cell, resets
// prev_step_gain to 0 (the spawn reveal is not a step gain), and refreshes
// transmission maps.
JointState make_initial_state(Arena arena, const std::vector<Cell>& positions,
                              const EnvConfig& cfg);

// Deterministic joint transition: resolve movement conflicts, detect,
// communicate, refresh transmission maps, evaluate terminal causes.
// Returns the successor state and per-agent events.
std::pair<JointState, StepEvents> step(const JointState& state, const std::vector<Action>& joint_action,
                                       const EnvConfig& cfg);

// Allowed actions for inference masking: movement into out-of-bounds cells,
// cells known Occupied in the collaborative map, cells holding another agent,
// or cells in `claimed` is masked. Stay and Comm are always allowed.
std::array<bool, kNumActions> action_mask(const GridMap& collaborative, Cell position,
                                          const std::vector<Cell>& peer_positions,
                                          const std::vector<Cell>& claimed = {});

}  // namespace marlex
