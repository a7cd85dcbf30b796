#include "marlex/comms.hpp"

#include <algorithm>
#include <numeric>

namespace marlex {

namespace {

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    int find(int x) {
        while (parent[static_cast<std::size_t>(x)] != x) {
            parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
            x = parent[static_cast<std::size_t>(x)];
        }
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
    }
};

}  // namespace

std::vector<CommNetwork> form_networks(const std::vector<Cell>& positions,
                                       const std::vector<bool>& comm_choices, double r_c,
                                       double cell_len) {
    const int n_agents = static_cast<int>(positions.size());
    const int pad = range_to_cells(r_c, cell_len);
    UnionFind uf(n_agents);
    for (int a = 0; a < n_agents; ++a) {
        if (!comm_choices[static_cast<std::size_t>(a)]) continue;
        for (int b = a + 1; b < n_agents; ++b) {
            if (!comm_choices[static_cast<std::size_t>(b)]) continue;
            if (chebyshev(positions[static_cast<std::size_t>(a)], positions[static_cast<std::size_t>(b)]) <= pad)
                uf.unite(a, b);
        }
    }
    std::vector<CommNetwork> nets;
    std::vector<int> net_of(static_cast<std::size_t>(n_agents), -1);
    for (int a = 0; a < n_agents; ++a) {
        if (!comm_choices[static_cast<std::size_t>(a)]) continue;
        const int root = uf.find(a);
        if (net_of[static_cast<std::size_t>(root)] < 0) {
            net_of[static_cast<std::size_t>(root)] = static_cast<int>(nets.size());
            nets.push_back({});
        }
        nets[static_cast<std::size_t>(net_of[static_cast<std::size_t>(root)])].members.push_back(a);
    }
    return nets;
}

GridMap merge_network(const std::vector<const GridMap*>& maps, MergeRule rule) {
    if (maps.empty()) throw std::invalid_argument("merge_network: no maps");
    const int n = maps.front()->size();
    for (const GridMap* m : maps) {
        if (m->size() != n || m->cell_len() != maps.front()->cell_len())
            throw std::invalid_argument("merge_network: maps must share (n, l)");
    }
    GridMap merged(n, maps.front()->cell_len());
    const std::size_t total = merged.cells().size();
    for (std::size_t i = 0; i < total; ++i) {
        CellState acc = CellState::Unknown;
        for (const GridMap* m : maps) {
            const CellState v = m->cells()[i];
            if (v == CellState::Unknown) continue;
            if (acc == CellState::Unknown) {
                acc = v;
            } else if (acc != v) {
                if (rule == MergeRule::Strict)
                    throw ConflictingKnownStates("merge_network: maps disagree at cell " + std::to_string(i));
                acc = CellState::Occupied;
            }
        }
        merged.cells()[i] = acc;
    }
    return merged;
}

CommOutcome resolve_communication(std::vector<AgentState>& agents,
                                  const std::vector<bool>& comm_choices, double r_c,
                                  MergeRule rule) {
    std::vector<Cell> positions;
    positions.reserve(agents.size());
    for (const AgentState& a : agents) positions.push_back(a.position);
    const double cell_len = agents.empty() ? 1.0 : agents.front().maps.collaborative.cell_len();

    CommOutcome out;
    out.gain.assign(agents.size(), 0);
    out.networks = form_networks(positions, comm_choices, r_c, cell_len);

    for (const CommNetwork& net : out.networks) {
        if (net.members.size() < 2) continue;
        std::vector<const GridMap*> member_maps;
        member_maps.reserve(net.members.size());
        for (int id : net.members)
            member_maps.push_back(&agents[static_cast<std::size_t>(id)].maps.collaborative);
        GridMap merged = merge_network(member_maps, rule);

        const int merged_known = merged.known_count();
        for (int id : net.members) {
            AgentState& a = agents[static_cast<std::size_t>(id)];
            const long gain = merged_known - a.maps.collaborative.known_count();
            out.gain[static_cast<std::size_t>(id)] = gain;
            a.maps.collaborative = merged;
            a.prev_step_gain += gain;
        }
        for (std::size_t x = 0; x < net.members.size(); ++x) {
            for (std::size_t y = x + 1; y < net.members.size(); ++y) {
                const int i = net.members[x];
                const int j = net.members[y];
                agents[static_cast<std::size_t>(i)].discoveries_since_comm[static_cast<std::size_t>(j)] = 0;
                agents[static_cast<std::size_t>(j)].discoveries_since_comm[static_cast<std::size_t>(i)] = 0;
            }
        }
    }
    return out;
}

}  // namespace marlex
