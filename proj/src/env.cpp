#include "marlex/env.hpp"

#include <algorithm>

namespace marlex {

Cell action_delta(Action a) {
    switch (a) {
        case Action::Up: return {-1, 0};
        case Action::UpRight: return {-1, 1};
        case Action::Right: return {0, 1};
        case Action::DownRight: return {1, 1};
        case Action::Down: return {1, 0};
        case Action::DownLeft: return {1, -1};
        case Action::Left: return {0, -1};
        case Action::UpLeft: return {-1, -1};
        default: return {0, 0};
    }
}

char action_char(Action a) { return static_cast<char>('0' + static_cast<int>(a)); }

Action action_from_char(char c) {
    if (c < '0' || c > '9') throw std::invalid_argument("action_from_char: bad action char");
    return static_cast<Action>(c - '0');
}

const char* terminal_name(Terminal t) {
    switch (t) {
        case Terminal::None: return "none";
        case Terminal::Success: return "success";
        case Terminal::Collision: return "collision";
        case Terminal::StepCap: return "step_cap";
    }
    return "none";
}

double free_coverage(const GridMap& collaborative, const Arena& arena) {
    int free_total = 0;
    int free_known = 0;
    const auto& truth = arena.map.cells();
    const auto& known = collaborative.cells();
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] != CellState::Free) continue;
        ++free_total;
        if (known[i] != CellState::Unknown) ++free_known;
    }
    if (free_total == 0) return 1.0;
    return static_cast<double>(free_known) / static_cast<double>(free_total);
}

double total_coverage(const GridMap& collaborative) {
    const int n = collaborative.size();
    return static_cast<double>(collaborative.known_count()) / (static_cast<double>(n) * n);
}

double best_free_coverage(const JointState& state) {
    double best = 0.0;
    for (const AgentState& a : state.agents)
        best = std::max(best, free_coverage(a.maps.collaborative, state.arena));
    return best;
}

namespace {

void refresh_transmission_maps(JointState& state, const EnvConfig& cfg) {
    const std::vector<Cell> positions = state.positions();
    for (AgentState& a : state.agents)
        a.maps.transmission = build_transmission_map(positions, a.id, cfg.r_c, cfg.n, cfg.cell_len);
}

// Movement conflict resolution. Colliding agents stay in place; blocking
// propagates to followers until a fixpoint.
void resolve_movement(const JointState& state, const std::vector<Action>& actions,
                      std::vector<Cell>& final_pos, std::vector<bool>& collided) {
    const std::size_t n_agents = state.agents.size();
    std::vector<Cell> target(n_agents);
    std::vector<bool> moving(n_agents, false);
    collided.assign(n_agents, false);

    for (std::size_t k = 0; k < n_agents; ++k) {
        const Cell pos = state.agents[k].position;
        if (is_movement(actions[k])) {
            const Cell d = action_delta(actions[k]);
            target[k] = {pos.row + d.row, pos.col + d.col};
            moving[k] = true;
        } else {
            target[k] = pos;
        }
    }

    // Static obstacles and bounds.
    for (std::size_t k = 0; k < n_agents; ++k) {
        if (!moving[k]) continue;
        if (!state.arena.map.in_bounds(target[k]) || state.arena.map.at(target[k]) == CellState::Occupied)
            collided[k] = true;
    }

    // Two agents claiming the same cell: every mover in the group collides.
    for (std::size_t k = 0; k < n_agents; ++k) {
        if (!moving[k]) continue;
        for (std::size_t j = 0; j < n_agents; ++j) {
            if (j != k && target[j] == target[k]) collided[k] = true;
        }
    }

    // Swaps.
    for (std::size_t k = 0; k < n_agents; ++k) {
        if (!moving[k]) continue;
        for (std::size_t j = k + 1; j < n_agents; ++j) {
            if (!moving[j]) continue;
            if (target[k] == state.agents[j].position && target[j] == state.agents[k].position) {
                collided[k] = true;
                collided[j] = true;
            }
        }
    }

    // Followers of blocked or stationary agents.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t k = 0; k < n_agents; ++k) {
            if (!moving[k] || collided[k]) continue;
            for (std::size_t j = 0; j < n_agents; ++j) {
                if (j == k) continue;
                const bool j_stays = !moving[j] || collided[j];
                if (j_stays && target[k] == state.agents[j].position) {
                    collided[k] = true;
                    changed = true;
                    break;
                }
            }
        }
    }

    final_pos.resize(n_agents);
    for (std::size_t k = 0; k < n_agents; ++k)
        final_pos[k] = (moving[k] && !collided[k]) ? target[k] : state.agents[k].position;
}

}  // namespace

JointState make_initial_state(Arena arena, const std::vector<Cell>& positions, const EnvConfig& cfg) {
    JointState state;
    state.arena = std::move(arena);
    const int n_agents = static_cast<int>(positions.size());
    state.agents.reserve(positions.size());
    for (int k = 0; k < n_agents; ++k)
        state.agents.emplace_back(k, positions[static_cast<std::size_t>(k)], cfg.n, cfg.cell_len, n_agents);
    for (AgentState& a : state.agents) {
        detect_and_update(a, state.arena, cfg.r_d);
        a.prev_step_gain = 0;
    }
    refresh_transmission_maps(state, cfg);
    return state;
}

std::pair<JointState, StepEvents> step(const JointState& state, const std::vector<Action>& joint_action,
                                       const EnvConfig& cfg) {
    if (joint_action.size() != state.agents.size())
        throw ActionCountMismatch("step: expected " + std::to_string(state.agents.size()) + " actions, got " +
                                  std::to_string(joint_action.size()));
    if (state.terminal != Terminal::None)
        throw SteppedTerminalState("step: state is already terminal");

    JointState next = state;
    StepEvents events;
    events.agents.resize(state.agents.size());
    const std::size_t n_agents = state.agents.size();

    std::vector<long> prev_gain(n_agents);
    for (std::size_t k = 0; k < n_agents; ++k) prev_gain[k] = state.agents[k].prev_step_gain;

    std::vector<Cell> final_pos;
    std::vector<bool> collided;
    resolve_movement(state, joint_action, final_pos, collided);
    for (std::size_t k = 0; k < n_agents; ++k) {
        next.agents[k].position = final_pos[k];
        events.agents[k].moved = !(final_pos[k] == state.agents[k].position);
        events.agents[k].collided = collided[k];
    }

    std::vector<long> detect_gain(n_agents, 0);
    std::vector<long> n_unknown(n_agents, 0);
    for (std::size_t k = 0; k < n_agents; ++k) {
        detect_gain[k] = detect_and_update(next.agents[k], next.arena, cfg.r_d);
        n_unknown[k] = next.agents[k].maps.collaborative.count(CellState::Unknown);
    }

    // Counter snapshot before the merge resets it; Case 4 reads these.
    std::vector<std::vector<long>> d_snapshot(n_agents);
    for (std::size_t k = 0; k < n_agents; ++k) d_snapshot[k] = next.agents[k].discoveries_since_comm;

    std::vector<bool> comm_choices(n_agents, false);
    for (std::size_t k = 0; k < n_agents; ++k) comm_choices[k] = joint_action[k] == Action::Comm;
    const CommOutcome comm = resolve_communication(next.agents, comm_choices, cfg.r_c, cfg.merge_rule);

    std::vector<int> w(n_agents, 0);
    std::vector<int> net_of(n_agents, -1);
    for (std::size_t i = 0; i < comm.networks.size(); ++i) {
        if (comm.networks[i].members.size() < 2) continue;
        for (int id : comm.networks[i].members) {
            w[static_cast<std::size_t>(id)] = 1;
            net_of[static_cast<std::size_t>(id)] = static_cast<int>(i);
        }
    }

    for (std::size_t k = 0; k < n_agents; ++k) {
        next.agents[k].prev_step_gain = detect_gain[k] + comm.gain[k];

        AgentEvents& ev = events.agents[k];
        ev.knowledge_gain = detect_gain[k];
        ev.comm_gain = comm.gain[k];
        ev.communicated = w[k] == 1;

        RewardContext& ctx = ev.reward_ctx;
        ctx.action = static_cast<int>(joint_action[k]);
        ctx.collided = collided[k];
        ctx.knowledge_gain = detect_gain[k];
        ctx.comm_gain = comm.gain[k];
        ctx.comm_indicator = w[k];
        ctx.n_unknown = n_unknown[k];
        ctx.prev_step_gain = prev_gain[k];
        ctx.n_agents = static_cast<int>(n_agents);
        ctx.grid_side = cfg.n;
        ctx.position_changed = ev.moved;
        const Cell p = final_pos[k];
        ctx.near_boundary = p.row == 0 || p.row == cfg.n - 1 || p.col == 0 || p.col == cfg.n - 1;
        ctx.peers.clear();
        for (std::size_t j = 0; j < n_agents; ++j) {
            if (j == k) continue;
            PeerCommTerm term;
            term.w = w[j];
            term.q = (net_of[k] >= 0 && net_of[j] == net_of[k]) ? 1 : 0;
            term.d_kj = d_snapshot[k][j];
            ctx.peers.push_back(term);
        }
    }

    refresh_transmission_maps(next, cfg);
    events.networks = comm.networks;

    next.t = state.t + 1;
    const bool any_collision = std::any_of(collided.begin(), collided.end(), [](bool b) { return b; });
    if (any_collision && cfg.collision_terminates) {
        next.terminal = Terminal::Collision;
    } else if (best_free_coverage(next) >= cfg.p_threshold) {
        next.terminal = Terminal::Success;
    } else if (next.t >= cfg.step_cap) {
        next.terminal = Terminal::StepCap;
    }
    events.terminal = next.terminal;
    return {std::move(next), std::move(events)};
}

std::array<bool, kNumActions> action_mask(const GridMap& collaborative, Cell position,
                                          const std::vector<Cell>& peer_positions,
                                          const std::vector<Cell>& claimed) {
    std::array<bool, kNumActions> mask;
    mask.fill(true);
    for (int a = 0; a < 8; ++a) {
        const Cell d = action_delta(static_cast<Action>(a));
        const Cell t{position.row + d.row, position.col + d.col};
        bool ok = collaborative.in_bounds(t) && collaborative.at(t) != CellState::Occupied;
        if (ok) {
            for (const Cell& p : peer_positions)
                if (p == t) { ok = false; break; }
        }
        if (ok) {
            for (const Cell& p : claimed)
                if (p == t) { ok = false; break; }
        }
        mask[static_cast<std::size_t>(a)] = ok;
    }
    return mask;
}

}  // namespace marlex
