#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "marlex/grid.hpp"

namespace marlex {

struct GenerationFailed : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct TooManyAgents : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Ground-truth arena: no Unknown cells, all Free cells 4-connected.
struct Arena {
    GridMap map;
    std::uint64_t seed = 0;
};

// Places `obstacle_count` axis-aligned rectangular blobs with sides in
// [1, max_obstacle_side]. A placement that disconnects the free space is
// rejected and resampled; gives up after 1000 attempts per obstacle.
Arena generate_arena(int n, double cell_len, int obstacle_count, int max_obstacle_side,
                     std::uint64_t seed);

// Distinct positions drawn uniformly without replacement from the Free cells.
std::vector<Cell> sample_initial_positions(const Arena& arena, int n_agents, std::uint64_t seed);

}  // namespace marlex
