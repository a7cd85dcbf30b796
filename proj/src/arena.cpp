#include "marlex/arena.hpp"

#include "marlex/rng.hpp"

namespace marlex {

namespace {

constexpr int kMaxPlacementAttempts = 1000;

}  // namespace

Arena generate_arena(int n, double cell_len, int obstacle_count, int max_obstacle_side,
                     std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("generate_arena: n must be >= 3");
    if (obstacle_count < 0) throw std::invalid_argument("generate_arena: obstacle_count must be >= 0");
    if (obstacle_count > 0 && max_obstacle_side < 1)
        throw std::invalid_argument("generate_arena: max_obstacle_side must be >= 1");

    Rng rng(seed);
    GridMap map(n, cell_len, CellState::Free);

    for (int placed = 0; placed < obstacle_count; ++placed) {
        bool ok = false;
        for (int attempt = 0; attempt < kMaxPlacementAttempts; ++attempt) {
            const int h = static_cast<int>(rng.uniform_int(1, max_obstacle_side));
            const int w = static_cast<int>(rng.uniform_int(1, max_obstacle_side));
            if (h >= n || w >= n) continue;
            const int r0 = static_cast<int>(rng.uniform_int(0, n - h));
            const int c0 = static_cast<int>(rng.uniform_int(0, n - w));

            bool covers_free = false;
            for (int r = r0; r < r0 + h && !covers_free; ++r)
                for (int c = c0; c < c0 + w; ++c)
                    if (map.at(r, c) == CellState::Free) {
                        covers_free = true;
                        break;
                    }
            if (!covers_free) continue;

            GridMap candidate = map;
            for (int r = r0; r < r0 + h; ++r)
                for (int c = c0; c < c0 + w; ++c) candidate.set(r, c, CellState::Occupied);

            if (candidate.count(CellState::Free) == 0) continue;
            if (!free_cells_connected(candidate)) continue;
            map = std::move(candidate);
            ok = true;
            break;
        }
        if (!ok)
            throw GenerationFailed("generate_arena: no connectivity-preserving placement found for obstacle " +
                                   std::to_string(placed) + " (seed " + std::to_string(seed) + ")");
    }
    return Arena{std::move(map), seed};
}

std::vector<Cell> sample_initial_positions(const Arena& arena, int n_agents, std::uint64_t seed) {
    std::vector<Cell> free_cells;
    for (int r = 0; r < arena.map.size(); ++r)
        for (int c = 0; c < arena.map.size(); ++c)
            if (arena.map.at(r, c) == CellState::Free) free_cells.push_back({r, c});

    if (n_agents > static_cast<int>(free_cells.size()))
        throw TooManyAgents("sample_initial_positions: " + std::to_string(n_agents) + " agents but only " +
                            std::to_string(free_cells.size()) + " free cells");

    // Partial Fisher-Yates: the first n_agents slots are a uniform draw
    // without replacement.
    Rng rng(seed);
    std::vector<Cell> out;
    out.reserve(static_cast<std::size_t>(n_agents));
    for (int i = 0; i < n_agents; ++i) {
        const std::size_t j =
            static_cast<std::size_t>(i) + static_cast<std::size_t>(rng.next_below(free_cells.size() - i));
        std::swap(free_cells[static_cast<std::size_t>(i)], free_cells[j]);
        out.push_back(free_cells[static_cast<std::size_t>(i)]);
    }
    return out;
}

}  // namespace marlex
