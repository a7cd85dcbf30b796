#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "marlex/arena.hpp"
#include "marlex/grid.hpp"
#include "marlex/tensor.hpp"

namespace marlex {

// Range in meters -> window padding in cells.
inline int range_to_cells(double range_m, double cell_len) {
    return static_cast<int>(std::lround(range_m / cell_len));
}

// The three per-agent world representations. agent_specific holds only the
// agent's own discoveries; collaborative additionally absorbs communicated
// knowledge; transmission marks reachable peers (0 empty, 1 peer, 2 self).
struct AgentMaps {
    GridMap agent_specific;
    GridMap collaborative;
    std::vector<std::uint8_t> transmission;

    AgentMaps() = default;
    AgentMaps(int n, double cell_len)
        : agent_specific(n, cell_len),
          collaborative(n, cell_len),
          transmission(static_cast<std::size_t>(n) * n, 0) {}
};

struct AgentState {
    int id = 0;
    Cell position;
    AgentMaps maps;
    // d_{i_k,i_j}: discoveries since the last communication with peer j,
    // indexed by peer id (own slot stays 0).
    std::vector<long> discoveries_since_comm;
    long prev_step_gain = 0;

    AgentState() = default;
    AgentState(int agent_id, Cell pos, int n, double cell_len, int n_agents)
        : id(agent_id), position(pos), maps(n, cell_len),
          discoveries_since_comm(static_cast<std::size_t>(n_agents), 0) {}
};

// Copies ground truth into agent_specific and collaborative for every cell
// within Chebyshev distance round(r_d/l) of the agent; clips at grid edges.
// Returns the number of collaborative cells that left Unknown. Peer counters
// and prev_step_gain are updated with the gain.
long detect_and_update(AgentState& agent, const Arena& arena, double r_d);

// 2 at the agent's own cell, 1 at every peer within round(r_c/l), 0 elsewhere.
std::vector<std::uint8_t> build_transmission_map(const std::vector<Cell>& positions, int self_id,
                                                 double r_c, int n, double cell_len);

// 3 x n x n observation tensor, channels [agent_specific, collaborative,
// transmission], raw values divided by 2. Pure function.
Tensor encode_observation(const AgentState& agent);

// Inverse of the map channels of encode_observation (test and tooling aid).
GridMap decode_map_channel(const Tensor& obs, int channel, double cell_len);

// Map snapshot in the arena text format, '?' for Unknown.
std::string map_to_text(const GridMap& m);

}  // namespace marlex
