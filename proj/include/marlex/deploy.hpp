#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "marlex/env.hpp"
#include "marlex/network.hpp"

namespace marlex {

// World frame: x right, y up, origin at the arena's bottom-left corner.
// Grid row 0 is the top edge, so row = n - 1 - floor(y / l).
struct Pose {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;  // radians, kept in [-pi, pi)
};

double normalize_angle(double theta);
Cell pose_cell(const Pose& p, int n, double cell_len);
Pose cell_center(Cell c, int n, double cell_len);

struct ControllerGains {
    double zeta = 0.01;    // distance threshold, meters
    double gamma = 0.1;    // orientation threshold, radians
    double k_v = 1.0;      // linear gain
    double k_omega = 0.4;  // angular gain
};

// Rotate-then-translate waypoint law; the final orientation is irrelevant.
// Returns (v, omega).
std::pair<double, double> controller_step(const Pose& q, double x_d, double y_d,
                                          const ControllerGains& gains);

// Unicycle kinematics, theta renormalized.
Pose integrate(const Pose& p, double v, double omega, double dt);

// Occupancy probabilities: -1 unknown, else percent in [0, 100].
struct OccProbGrid {
    int n = 0;
    std::vector<double> values;

    OccProbGrid() = default;
    explicit OccProbGrid(int side) : n(side), values(static_cast<std::size_t>(side) * side, -1.0) {}
    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * n + c]; }
    void set(int r, int c, double v) { values[static_cast<std::size_t>(r) * n + c] = v; }
};

// 360 rays at 1 degree spacing; traversed cells before the first hit get
// occProb 0, the first Occupied cell 100, everything else stays -1. Only
// cells within the detection window (Chebyshev padding window_pad around the
// robot's cell) are reported.
OccProbGrid raycast_sense(const Pose& pose, const Arena& arena, double range, int window_pad);

// Occupancy-probability bridge into the tri-state maps: -1 < p < 50 means
// Free, p >= 50 means Occupied unless the cell holds another agent, -1 leaves
// the cell untouched. agent_specific and collaborative update identically.
void update_agent_specific(const OccProbGrid& slam, AgentMaps& maps,
                           const std::vector<Cell>& peer_cells);

struct DeploymentConfig {
    double dt = 0.05;               // integration step, seconds
    double step_time_budget = 30.0; // controller budget per RL step, seconds
    double sensor_range = 3.5;      // meters
    double rho = 0.9;               // free-cell discovery ratio that ends the run
    int step_cap = 1000;
    bool mask_invalid = true;
    ControllerGains gains;
};

// Table of starting poses per setup id (1..4); theta = 0.
std::vector<Pose> setup_poses(int setup_id);

enum class DeployOutcome : std::uint8_t { ReachedRho, Collision, StepCap };
const char* deploy_outcome_name(DeployOutcome o);

struct DeployStepRow {
    int step = 0;
    int agent = 0;
    Pose pose;            // pose after the step
    int action = 8;
    int command_count = 0;  // velocity commands issued while navigating
    long gain = 0;          // new collaborative cells from this step's sensing
    long comm_gain = 0;
    bool timed_out = false;
};

struct DeployResult {
    DeployOutcome outcome = DeployOutcome::StepCap;
    int steps = 0;
    double free_coverage = 0.0;   // best per-agent ratio over Free cells
    double total_coverage = 0.0;  // best per-agent ratio over all n^2 cells
    std::vector<DeployStepRow> trace;
    std::vector<GridMap> agent_specific;
    std::vector<GridMap> collaborative;
    std::vector<std::vector<Cell>> cell_track;  // [step][agent] cells after each step
    long d_shared = 0;
};

// Lockstep execution of trained actors on the continuous simulator: all
// agents sense, then choose actions, then navigate or communicate, and no
// agent starts step j+1 before every agent finished step j.
DeployResult run_deployment(const std::vector<NetworkParams>& actors, const Arena& arena,
                            const std::vector<Pose>& start_poses, const EnvConfig& env_cfg,
                            const DeploymentConfig& cfg);

}  // namespace marlex
