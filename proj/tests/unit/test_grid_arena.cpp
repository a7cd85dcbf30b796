#include <doctest.h>

#include <set>

#include "marlex/arena.hpp"
#include "marlex/rng.hpp"

using namespace marlex;

TEST_CASE("grid text round trip") {
    GridMap g(4, 0.5, CellState::Free);
    g.set(1, 2, CellState::Occupied);
    g.set(3, 0, CellState::Unknown);
    const std::string text = grid_to_text(g);
    const GridMap back = grid_from_text(text);
    CHECK(back == g);
    CHECK(back.cell_len() == 0.5);
}

TEST_CASE("grid text rejects malformed input") {
    CHECK_THROWS(grid_from_text("not a grid"));
    CHECK_THROWS(grid_from_text("2 0.5\n..\n.x\n"));
    CHECK_THROWS(grid_from_text("3 0.5\n...\n..\n"));
}

TEST_CASE("zero obstacles give an all-free arena") {
    const Arena a = generate_arena(3, 0.5, 0, 1, 7);
    CHECK(a.map.size() == 3);
    CHECK(a.map.count(CellState::Free) == 9);
    CHECK(a.map.count(CellState::Unknown) == 0);
}

TEST_CASE("paper-scale arena generates") {
    const Arena a = generate_arena(50, 0.5, 6, 10, 1);
    CHECK(a.map.size() == 50);
    CHECK(free_cells_connected(a.map));
    CHECK(a.map.count(CellState::Occupied) > 0);
}

TEST_CASE("generated free space is one flood-fill component") {
    const Arena a = generate_arena(8, 0.5, 3, 2, 42);
    const int total_free = a.map.count(CellState::Free);
    Cell start{-1, -1};
    for (int r = 0; r < 8 && start.row < 0; ++r)
        for (int c = 0; c < 8; ++c)
            if (a.map.at(r, c) == CellState::Free) {
                start = {r, c};
                break;
            }
    CHECK(flood_fill_free_count(a.map, start) == total_free);
}

TEST_CASE("generation is deterministic per seed") {
    const Arena a = generate_arena(12, 0.5, 5, 3, 99);
    const Arena b = generate_arena(12, 0.5, 5, 3, 99);
    const Arena c = generate_arena(12, 0.5, 5, 3, 100);
    CHECK(a.map == b.map);
    CHECK(a.map.cells() != c.map.cells());
}

TEST_CASE("generation fails when constraints are unsatisfiable") {
    // Nine 1x1 obstacles cannot fit into a 3x3 grid while a free cell remains.
    CHECK_THROWS_AS(generate_arena(3, 0.5, 9, 1, 5), GenerationFailed);
}

TEST_CASE("connectivity holds across many seeds") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const Arena a = generate_arena(10, 0.5, 4, 3, seed);
        CHECK(free_cells_connected(a.map));
        CHECK(a.map.count(CellState::Unknown) == 0);
    }
}

TEST_CASE("spawn sampling covers an all-free 2x2 exactly") {
    Arena a{GridMap(3, 0.5, CellState::Occupied), 0};
    a.map.set(0, 0, CellState::Free);
    a.map.set(0, 1, CellState::Free);
    a.map.set(1, 0, CellState::Free);
    a.map.set(1, 1, CellState::Free);
    const auto cells = sample_initial_positions(a, 4, 3);
    std::set<std::pair<int, int>> got;
    for (Cell c : cells) got.insert({c.row, c.col});
    CHECK(got == std::set<std::pair<int, int>>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
}

TEST_CASE("spawn sampling with one free cell is forced") {
    Arena a{GridMap(3, 0.5, CellState::Occupied), 0};
    a.map.set(2, 1, CellState::Free);
    const auto cells = sample_initial_positions(a, 1, 11);
    REQUIRE(cells.size() == 1);
    CHECK(cells[0] == Cell{2, 1});
}

TEST_CASE("spawn sampling rejects too many agents") {
    Arena a{GridMap(3, 0.5, CellState::Occupied), 0};
    a.map.set(0, 0, CellState::Free);
    CHECK_THROWS_AS(sample_initial_positions(a, 2, 1), TooManyAgents);
}

TEST_CASE("spawn sampling is uniform over free cells") {
    // 8x8 all-free arena, 4 agents, many seeds: per-cell frequency within
    // 3 sigma of the binomial expectation.
    Arena a{GridMap(8, 0.5, CellState::Free), 0};
    const int trials = 10000;
    const int n_agents = 4;
    std::vector<int> hits(64, 0);
    for (int s = 0; s < trials; ++s) {
        for (Cell c : sample_initial_positions(a, n_agents, static_cast<std::uint64_t>(s)))
            ++hits[static_cast<std::size_t>(c.row * 8 + c.col)];
    }
    const double p = static_cast<double>(n_agents) / 64.0;
    const double mean = trials * p;
    const double sigma = std::sqrt(trials * p * (1.0 - p));
    for (int i = 0; i < 64; ++i) {
        CHECK(std::abs(hits[static_cast<std::size_t>(i)] - mean) <= 3.0 * sigma);
    }
}

TEST_CASE("rng uniform_int covers range deterministically") {
    Rng a(5), b(5);
    for (int i = 0; i < 100; ++i) {
        const long long x = a.uniform_int(-3, 3);
        CHECK(x == b.uniform_int(-3, 3));
        CHECK(x >= -3);
        CHECK(x <= 3);
    }
}

TEST_CASE("rng state save and load resumes the stream") {
    Rng a(123);
    a.next_u64();
    const std::string state = a.save_state();
    Rng b(0);
    b.load_state(state);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
}
