#include "marlex/maps.hpp"

#include <algorithm>

namespace marlex {

long detect_and_update(AgentState& agent, const Arena& arena, double r_d) {
    const int n = arena.map.size();
    const int pad = range_to_cells(r_d, arena.map.cell_len());
    const int r0 = std::max(0, agent.position.row - pad);
    const int r1 = std::min(n - 1, agent.position.row + pad);
    const int c0 = std::max(0, agent.position.col - pad);
    const int c1 = std::min(n - 1, agent.position.col + pad);

    long gain = 0;
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const CellState truth = arena.map.at(r, c);
            if (agent.maps.collaborative.at(r, c) == CellState::Unknown) ++gain;
            agent.maps.agent_specific.set(r, c, truth);
            agent.maps.collaborative.set(r, c, truth);
        }
    }
    for (long& d : agent.discoveries_since_comm) d += gain;
    agent.discoveries_since_comm[static_cast<std::size_t>(agent.id)] = 0;
    agent.prev_step_gain = gain;
    return gain;
}

std::vector<std::uint8_t> build_transmission_map(const std::vector<Cell>& positions, int self_id,
                                                 double r_c, int n, double cell_len) {
    std::vector<std::uint8_t> field(static_cast<std::size_t>(n) * n, 0);
    const int pad = range_to_cells(r_c, cell_len);
    const Cell self = positions[static_cast<std::size_t>(self_id)];
    for (std::size_t j = 0; j < positions.size(); ++j) {
        if (static_cast<int>(j) == self_id) continue;
        if (chebyshev(self, positions[j]) <= pad)
            field[static_cast<std::size_t>(positions[j].row) * n + positions[j].col] = 1;
    }
    field[static_cast<std::size_t>(self.row) * n + self.col] = 2;
    return field;
}

Tensor encode_observation(const AgentState& agent) {
    const int n = agent.maps.agent_specific.size();
    const std::size_t plane = static_cast<std::size_t>(n) * n;
    Tensor obs({3, static_cast<std::size_t>(n), static_cast<std::size_t>(n)});
    for (std::size_t i = 0; i < plane; ++i) {
        obs.data[i] = static_cast<double>(agent.maps.agent_specific.cells()[i]) / 2.0;
        obs.data[plane + i] = static_cast<double>(agent.maps.collaborative.cells()[i]) / 2.0;
        obs.data[2 * plane + i] = static_cast<double>(agent.maps.transmission[i]) / 2.0;
    }
    return obs;
}

GridMap decode_map_channel(const Tensor& obs, int channel, double cell_len) {
    const int n = static_cast<int>(obs.shape.at(1));
    const std::size_t plane = static_cast<std::size_t>(n) * n;
    GridMap m(n, cell_len);
    for (std::size_t i = 0; i < plane; ++i) {
        const double v = obs.data[static_cast<std::size_t>(channel) * plane + i];
        m.cells()[i] = static_cast<CellState>(static_cast<std::uint8_t>(v * 2.0 + 0.5));
    }
    return m;
}

std::string map_to_text(const GridMap& m) { return grid_to_text(m); }

}  // namespace marlex
