#include <doctest.h>

#include "marlex/maps.hpp"
#include "marlex/rng.hpp"

using namespace marlex;

namespace {

Arena all_free(int n, double l = 0.5) { return Arena{GridMap(n, l, CellState::Free), 0}; }

AgentState make_agent(int id, Cell pos, const Arena& arena, int n_agents = 1) {
    return AgentState(id, pos, arena.map.size(), arena.map.cell_len(), n_agents);
}

}  // namespace

TEST_CASE("detection copies the clipped window and counts new cells") {
    // r_d / l = 2 at the corner of a fully unknown 5x5: 3x3 clipped window.
    const Arena arena = all_free(5);
    AgentState agent = make_agent(0, {0, 0}, arena);
    const long gain = detect_and_update(agent, arena, 1.0);
    CHECK(gain == 9);
    CHECK(agent.maps.agent_specific.known_count() == 9);
    CHECK(agent.maps.collaborative.known_count() == 9);
    CHECK(agent.prev_step_gain == 9);
}

TEST_CASE("detection in a fully known region gains nothing") {
    const Arena arena = all_free(5);
    AgentState agent = make_agent(0, {2, 2}, arena);
    detect_and_update(agent, arena, 1.0);  // reveals the whole 5x5
    CHECK(agent.maps.collaborative.known_count() == 25);
    const long second = detect_and_update(agent, arena, 1.0);
    CHECK(second == 0);
}

TEST_CASE("detection window copies occupied cells too") {
    Arena arena = all_free(5);
    arena.map.set(1, 1, CellState::Occupied);
    AgentState agent = make_agent(0, {0, 0}, arena);
    detect_and_update(agent, arena, 1.0);
    CHECK(agent.maps.agent_specific.at(1, 1) == CellState::Occupied);
    CHECK(agent.maps.collaborative.at(1, 1) == CellState::Occupied);
}

TEST_CASE("detection increments peer discovery counters") {
    const Arena arena = all_free(6);
    AgentState agent = make_agent(1, {3, 3}, arena, 3);
    const long gain = detect_and_update(agent, arena, 1.0);
    CHECK(gain == 25);
    CHECK(agent.discoveries_since_comm[0] == 25);
    CHECK(agent.discoveries_since_comm[2] == 25);
    CHECK(agent.discoveries_since_comm[1] == 0);  // own slot stays zero
}

TEST_CASE("random walks: gain sums equal the final known-cell count") {
    // Counting oracle over trajectories without communication.
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Rng rng(derive_seed(99, 1, seed));
        Arena arena = all_free(10);
        for (int i = 0; i < 8; ++i)
            arena.map.set(static_cast<int>(rng.uniform_int(0, 9)),
                          static_cast<int>(rng.uniform_int(0, 9)), CellState::Occupied);

        Cell pos;
        do {
            pos = {static_cast<int>(rng.uniform_int(0, 9)), static_cast<int>(rng.uniform_int(0, 9))};
        } while (arena.map.at(pos) != CellState::Free);

        AgentState agent = make_agent(0, pos, arena);
        long total = detect_and_update(agent, arena, 1.0);
        for (int move = 0; move < 60; ++move) {
            const int dr = static_cast<int>(rng.uniform_int(-1, 1));
            const int dc = static_cast<int>(rng.uniform_int(-1, 1));
            const Cell next{pos.row + dr, pos.col + dc};
            if (!arena.map.in_bounds(next) || arena.map.at(next) != CellState::Free) continue;
            pos = next;
            agent.position = pos;
            total += detect_and_update(agent, arena, 1.0);
        }
        CHECK(total == agent.maps.agent_specific.known_count());
        CHECK(total == agent.maps.collaborative.known_count());
    }
}

TEST_CASE("known cells never return to unknown and the subset invariant holds") {
    Rng rng(7);
    Arena arena = all_free(8);
    AgentState agent = make_agent(0, {4, 4}, arena);
    GridMap before = agent.maps.agent_specific;
    for (int move = 0; move < 40; ++move) {
        const Cell next{static_cast<int>(rng.uniform_int(0, 7)), static_cast<int>(rng.uniform_int(0, 7))};
        agent.position = next;
        detect_and_update(agent, arena, 1.0);
        for (std::size_t i = 0; i < before.cells().size(); ++i) {
            if (before.cells()[i] != CellState::Unknown)
                CHECK(agent.maps.agent_specific.cells()[i] == before.cells()[i]);
            if (agent.maps.agent_specific.cells()[i] != CellState::Unknown)
                CHECK(agent.maps.collaborative.cells()[i] == agent.maps.agent_specific.cells()[i]);
        }
        before = agent.maps.agent_specific;
    }
}

TEST_CASE("transmission map marks self and in-range peers") {
    // Table 3 ranges: r_c = 5, l = 0.5, so the padding is 10 cells.
    const int n = 25;
    const std::vector<Cell> positions{{12, 12}, {12, 2}, {2, 12}, {0, 0}};
    const auto field = build_transmission_map(positions, 0, 5.0, n, 0.5);
    CHECK(field[12 * n + 12] == 2);
    CHECK(field[12 * n + 2] == 1);   // distance 10, exactly in range
    CHECK(field[2 * n + 12] == 1);
    CHECK(field[0 * n + 0] == 0);    // distance 12, out of range
}

TEST_CASE("single agent marks only its own cell") {
    const auto field = build_transmission_map({{3, 4}}, 0, 5.0, 8, 0.5);
    int nonzero = 0;
    for (std::uint8_t v : field)
        if (v != 0) ++nonzero;
    CHECK(nonzero == 1);
    CHECK(field[3 * 8 + 4] == 2);
}

TEST_CASE("transmission boundary is exact at round(r_c/l)") {
    const int n = 30;
    const int pad = range_to_cells(5.0, 0.5);
    CHECK(pad == 10);
    const std::vector<Cell> at_range{{0, 0}, {0, pad}};
    CHECK(build_transmission_map(at_range, 0, 5.0, n, 0.5)[static_cast<std::size_t>(pad)] == 1);
    const std::vector<Cell> beyond{{0, 0}, {0, pad + 1}};
    CHECK(build_transmission_map(beyond, 0, 5.0, n, 0.5)[static_cast<std::size_t>(pad + 1)] == 0);
}

TEST_CASE("transmission map matches a pairwise distance oracle") {
    Rng rng(31);
    const int n = 50;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Cell> positions;
        for (int k = 0; k < 4; ++k)
            positions.push_back({static_cast<int>(rng.uniform_int(0, n - 1)),
                                 static_cast<int>(rng.uniform_int(0, n - 1))});
        const auto field = build_transmission_map(positions, 0, 5.0, n, 0.5);
        for (int k = 1; k < 4; ++k) {
            const Cell p = positions[static_cast<std::size_t>(k)];
            if (p == positions[0]) continue;  // self cell wins
            const bool in_range = chebyshev(positions[0], p) <= 10;
            const std::uint8_t want = in_range ? 1 : 0;
            CHECK(field[static_cast<std::size_t>(p.row) * n + p.col] == want);
        }
    }
}

TEST_CASE("observation encoding halves raw values in fixed channel order") {
    const Arena arena = all_free(4);
    AgentState agent = make_agent(0, {0, 0}, arena, 2);
    const Tensor obs0 = encode_observation(agent);
    // All-unknown maps: channels 0 and 1 constant 1.0.
    const std::size_t plane = 16;
    for (std::size_t i = 0; i < plane; ++i) {
        CHECK(obs0.data[i] == 1.0);
        CHECK(obs0.data[plane + i] == 1.0);
    }

    agent.maps.agent_specific.set(1, 2, CellState::Occupied);
    agent.maps.collaborative.set(1, 2, CellState::Occupied);
    agent.maps.transmission[0] = 2;
    agent.maps.transmission[5] = 1;
    const Tensor obs = encode_observation(agent);
    CHECK(obs.data[1 * 4 + 2] == 0.5);
    CHECK(obs.data[plane + 1 * 4 + 2] == 0.5);
    CHECK(obs.data[2 * plane + 0] == 1.0);
    CHECK(obs.data[2 * plane + 5] == 0.5);
    CHECK(obs.shape == std::vector<std::size_t>{3, 4, 4});
}

TEST_CASE("map channels decode back to the original maps") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 6;
        Arena arena = all_free(n);
        AgentState agent = make_agent(0, {0, 0}, arena);
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                agent.maps.agent_specific.set(r, c, static_cast<CellState>(rng.uniform_int(0, 2)));
                agent.maps.collaborative.set(r, c, static_cast<CellState>(rng.uniform_int(0, 2)));
            }
        const Tensor obs = encode_observation(agent);
        CHECK(decode_map_channel(obs, 0, arena.map.cell_len()) == agent.maps.agent_specific);
        CHECK(decode_map_channel(obs, 1, arena.map.cell_len()) == agent.maps.collaborative);
    }
}
