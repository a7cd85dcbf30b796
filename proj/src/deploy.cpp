#include "marlex/deploy.hpp"

#include <algorithm>
#include <cmath>

#include "marlex/comms.hpp"

namespace marlex {

double normalize_angle(double theta) {
    const double two_pi = 2.0 * M_PI;
    theta -= two_pi * std::floor((theta + M_PI) / two_pi);
    return theta;
}

Cell pose_cell(const Pose& p, int n, double cell_len) {
    const int col = static_cast<int>(std::floor(p.x / cell_len));
    const int row = n - 1 - static_cast<int>(std::floor(p.y / cell_len));
    return {row, col};
}

Pose cell_center(Cell c, int n, double cell_len) {
    Pose p;
    p.x = (static_cast<double>(c.col) + 0.5) * cell_len;
    p.y = (static_cast<double>(n - 1 - c.row) + 0.5) * cell_len;
    p.theta = 0.0;
    return p;
}

std::pair<double, double> controller_step(const Pose& q, double x_d, double y_d,
                                          const ControllerGains& gains) {
    const double e_x = x_d - q.x;
    const double e_y = y_d - q.y;
    const double dist = std::sqrt(e_x * e_x + e_y * e_y);
    if (dist <= gains.zeta) return {0.0, 0.0};
    const double e_theta = normalize_angle(std::atan2(e_y, e_x) - q.theta);
    if (std::fabs(e_theta) > gains.gamma) return {0.0, gains.k_omega * e_theta};
    return {gains.k_v * dist, 0.0};
}

Pose integrate(const Pose& p, double v, double omega, double dt) {
    Pose out;
    out.x = p.x + v * std::cos(p.theta) * dt;
    out.y = p.y + v * std::sin(p.theta) * dt;
    out.theta = normalize_angle(p.theta + omega * dt);
    return out;
}

OccProbGrid raycast_sense(const Pose& pose, const Arena& arena, double range, int window_pad) {
    const int n = arena.map.size();
    const double l = arena.map.cell_len();
    OccProbGrid marks(n);
    const Cell robot_cell = pose_cell(pose, n, l);
    if (arena.map.in_bounds(robot_cell)) marks.set(robot_cell.row, robot_cell.col, 0.0);

    const double step = l / 20.0;
    for (int deg = 0; deg < 360; ++deg) {
        const double angle = static_cast<double>(deg) * M_PI / 180.0;
        const double dx = std::cos(angle);
        const double dy = std::sin(angle);
        for (double d = step; d <= range; d += step) {
            const double x = pose.x + d * dx;
            const double y = pose.y + d * dy;
            const int col = static_cast<int>(std::floor(x / l));
            const int row = n - 1 - static_cast<int>(std::floor(y / l));
            if (row < 0 || row >= n || col < 0 || col >= n) break;
            if (arena.map.at(row, col) == CellState::Occupied) {
                marks.set(row, col, 100.0);
                break;
            }
            marks.set(row, col, 0.0);
        }
    }

    // Report only the detection window around the robot.
    OccProbGrid out(n);
    const int r0 = std::max(0, robot_cell.row - window_pad);
    const int r1 = std::min(n - 1, robot_cell.row + window_pad);
    const int c0 = std::max(0, robot_cell.col - window_pad);
    const int c1 = std::min(n - 1, robot_cell.col + window_pad);
    for (int r = r0; r <= r1; ++r)
        for (int c = c0; c <= c1; ++c) out.set(r, c, marks.at(r, c));
    return out;
}

void update_agent_specific(const OccProbGrid& slam, AgentMaps& maps,
                           const std::vector<Cell>& peer_cells) {
    const int n = slam.n;
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < n; ++c) {
            const double prob = slam.at(r, c);
            if (prob <= -1.0) continue;
            CellState value;
            if (prob < 50.0) {
                value = CellState::Free;
            } else {
                bool peer = false;
                for (const Cell& p : peer_cells)
                    if (p.row == r && p.col == c) { peer = true; break; }
                value = peer ? CellState::Free : CellState::Occupied;
            }
            maps.agent_specific.set(r, c, value);
            maps.collaborative.set(r, c, value);
        }
    }
}

std::vector<Pose> setup_poses(int setup_id) {
    auto poses = [](std::initializer_list<std::pair<double, double>> xs) {
        std::vector<Pose> out;
        for (auto [x, y] : xs) out.push_back({x, y, 0.0});
        return out;
    };
    switch (setup_id) {
        case 1: return poses({{1.25, 1.25}, {1.25, 23.75}, {23.75, 1.25}, {23.75, 23.75}});
        case 2: return poses({{16.75, 6.25}, {11.75, 23.25}, {11.75, 4.25}, {5.75, 2.25}});
        case 3: return poses({{10.25, 20.75}, {6.75, 15.25}, {4.25, 14.75}, {3.75, 2.25}});
        case 4: return poses({{15.25, 23.25}, {0.75, 7.75}, {17.75, 10.75}, {7.25, 21.75}});
        default:
            throw std::invalid_argument("setup_poses: setup id must be in 1..4");
    }
}

const char* deploy_outcome_name(DeployOutcome o) {
    switch (o) {
        case DeployOutcome::ReachedRho: return "reached_rho";
        case DeployOutcome::Collision: return "collision";
        case DeployOutcome::StepCap: return "step_cap";
    }
    return "step_cap";
}

namespace {

struct DeployAgent {
    Pose pose;
    AgentState state;  // position mirrors the pose's cell
    bool collided = false;
};

bool pose_collides(const Pose& p, const Arena& arena) {
    const Cell c = pose_cell(p, arena.map.size(), arena.map.cell_len());
    if (!arena.map.in_bounds(c)) return true;
    return arena.map.at(c) == CellState::Occupied;
}

}  // namespace

DeployResult run_deployment(const std::vector<NetworkParams>& actors, const Arena& arena,
                            const std::vector<Pose>& start_poses, const EnvConfig& env_cfg,
                            const DeploymentConfig& cfg) {
    const int n = arena.map.size();
    const double l = arena.map.cell_len();
    const int n_agents = static_cast<int>(start_poses.size());
    if (static_cast<int>(actors.size()) != n_agents)
        throw std::invalid_argument("run_deployment: one actor per starting pose required");

    std::vector<DeployAgent> agents;
    agents.reserve(static_cast<std::size_t>(n_agents));
    for (int k = 0; k < n_agents; ++k) {
        DeployAgent a;
        a.pose = start_poses[static_cast<std::size_t>(k)];
        if (pose_collides(a.pose, arena))
            throw std::invalid_argument("run_deployment: starting pose " + std::to_string(k) +
                                        " is not in free space");
        a.state = AgentState(k, pose_cell(a.pose, n, l), n, l, n_agents);
        agents.push_back(std::move(a));
    }

    DeployResult result;
    const int window_pad = env_cfg.detect_pad();

    auto coverage_now = [&]() {
        double best_free = 0.0;
        double best_total = 0.0;
        for (const DeployAgent& a : agents) {
            best_free = std::max(best_free, free_coverage(a.state.maps.collaborative, arena));
            best_total = std::max(best_total, total_coverage(a.state.maps.collaborative));
        }
        return std::pair{best_free, best_total};
    };

    double rho_j = 0.0;
    int j = 0;
    bool collision = false;
    while (rho_j < cfg.rho && !collision && j < cfg.step_cap) {
        ++j;

        // Phase a: every agent senses and bridges the window into its maps.
        std::vector<Cell> cells;
        cells.reserve(agents.size());
        for (const DeployAgent& a : agents) cells.push_back(pose_cell(a.pose, n, l));
        std::vector<long> gains(agents.size(), 0);
        for (std::size_t k = 0; k < agents.size(); ++k) {
            DeployAgent& a = agents[k];
            a.state.position = cells[k];
            std::vector<Cell> peers;
            for (std::size_t x = 0; x < cells.size(); ++x)
                if (x != k) peers.push_back(cells[x]);
            const OccProbGrid slam = raycast_sense(a.pose, arena, cfg.sensor_range, window_pad);
            const int known_before = a.state.maps.collaborative.known_count();
            update_agent_specific(slam, a.state.maps, peers);
            gains[k] = a.state.maps.collaborative.known_count() - known_before;
            a.state.maps.transmission = build_transmission_map(cells, a.state.id, env_cfg.r_c, n, l);
        }

        // Phase b: actions from the current observations, agents in id order.
        std::vector<Action> actions(agents.size(), Action::Stay);
        std::vector<Cell> claimed;
        for (std::size_t k = 0; k < agents.size(); ++k) {
            const Tensor obs = encode_observation(agents[k].state);
            std::array<bool, kNumActions> mask;
            const std::array<bool, kNumActions>* mask_ptr = nullptr;
            if (cfg.mask_invalid) {
                std::vector<Cell> peers;
                for (std::size_t x = 0; x < cells.size(); ++x)
                    if (x != k) peers.push_back(cells[x]);
                mask = action_mask(agents[k].state.maps.collaborative, cells[k], peers, claimed);
                mask_ptr = &mask;
            }
            const PolicyOutput out = actor_forward(actors[k], obs, mask_ptr);
            actions[k] = static_cast<Action>(argmax_action(out));
            if (is_movement(actions[k])) {
                const Cell d = action_delta(actions[k]);
                claimed.push_back({cells[k].row + d.row, cells[k].col + d.col});
            }
        }

        // Phase c: movement actions run the waypoint controller.
        std::vector<DeployStepRow> rows(agents.size());
        for (std::size_t k = 0; k < agents.size(); ++k) {
            DeployAgent& a = agents[k];
            DeployStepRow& row = rows[k];
            row.step = j;
            row.agent = static_cast<int>(k);
            row.action = static_cast<int>(actions[k]);
            row.gain = gains[k];
            if (is_movement(actions[k])) {
                const Cell d = action_delta(actions[k]);
                const Cell target{cells[k].row + d.row, cells[k].col + d.col};
                if (!arena.map.in_bounds(target)) {
                    a.collided = true;
                    collision = true;
                } else {
                    const Pose goal = cell_center(target, n, l);
                    double elapsed = 0.0;
                    bool arrived = false;
                    while (elapsed < cfg.step_time_budget) {
                        const auto [v, omega] = controller_step(a.pose, goal.x, goal.y, cfg.gains);
                        ++row.command_count;
                        if (v == 0.0 && omega == 0.0) {
                            arrived = true;
                            break;
                        }
                        a.pose = integrate(a.pose, v, omega, cfg.dt);
                        elapsed += cfg.dt;
                        if (pose_collides(a.pose, arena)) {
                            a.collided = true;
                            collision = true;
                            break;
                        }
                    }
                    if (!arrived && !a.collided) row.timed_out = true;  // treated as Stay
                }
            }
            row.pose = a.pose;
        }

        // Phase d: chain-based map exchange among the agents that chose Comm.
        std::vector<bool> comm_choices(agents.size(), false);
        for (std::size_t k = 0; k < agents.size(); ++k)
            comm_choices[k] = actions[k] == Action::Comm;
        std::vector<AgentState> states;
        states.reserve(agents.size());
        for (DeployAgent& a : agents) {
            a.state.position = pose_cell(a.pose, n, l);
            states.push_back(std::move(a.state));
        }
        const CommOutcome comm =
            resolve_communication(states, comm_choices, env_cfg.r_c, MergeRule::OccupiedWins);
        for (std::size_t k = 0; k < agents.size(); ++k) {
            agents[k].state = std::move(states[k]);
            rows[k].comm_gain = comm.gain[k];
            result.d_shared += comm.gain[k];
        }

        for (auto& row : rows) result.trace.push_back(row);
        std::vector<Cell> after;
        for (const DeployAgent& a : agents) after.push_back(pose_cell(a.pose, n, l));
        result.cell_track.push_back(std::move(after));

        // Phase e: discovery ratio over Free cells decides termination.
        const auto [best_free, best_total] = coverage_now();
        rho_j = best_free;
        result.free_coverage = best_free;
        result.total_coverage = best_total;
    }

    result.steps = j;
    if (collision) result.outcome = DeployOutcome::Collision;
    else if (rho_j >= cfg.rho) result.outcome = DeployOutcome::ReachedRho;
    else result.outcome = DeployOutcome::StepCap;

    for (const DeployAgent& a : agents) {
        result.agent_specific.push_back(a.state.maps.agent_specific);
        result.collaborative.push_back(a.state.maps.collaborative);
    }
    return result;
}

}  // namespace marlex
