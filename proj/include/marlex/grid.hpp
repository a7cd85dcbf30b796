#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace marlex {

enum class CellState : std::uint8_t { Free = 0, Occupied = 1, Unknown = 2 };

struct Cell {
    int row = 0;
    int col = 0;
    bool operator==(const Cell&) const = default;
};

// Chebyshev (square-window) distance; both detection and communication use it.
inline int chebyshev(Cell a, Cell b) {
    const int dr = a.row > b.row ? a.row - b.row : b.row - a.row;
    const int dc = a.col > b.col ? a.col - b.col : b.col - a.col;
    return dr > dc ? dr : dc;
}

// Square n x n occupancy grid with cell side length in meters.
class GridMap {
public:
    GridMap() = default;
    GridMap(int n, double cell_len, CellState fill = CellState::Unknown);

    int size() const { return n_; }
    double cell_len() const { return cell_len_; }

    bool in_bounds(int r, int c) const { return r >= 0 && r < n_ && c >= 0 && c < n_; }
    bool in_bounds(Cell p) const { return in_bounds(p.row, p.col); }

    CellState at(int r, int c) const { return cells_[static_cast<std::size_t>(r) * n_ + c]; }
    CellState at(Cell p) const { return at(p.row, p.col); }
    void set(int r, int c, CellState s) { cells_[static_cast<std::size_t>(r) * n_ + c] = s; }
    void set(Cell p, CellState s) { set(p.row, p.col, s); }

    const std::vector<CellState>& cells() const { return cells_; }
    std::vector<CellState>& cells() { return cells_; }

    int count(CellState s) const;
    int known_count() const { return n_ * n_ - count(CellState::Unknown); }

    bool operator==(const GridMap&) const = default;

private:
    int n_ = 0;
    double cell_len_ = 0.0;
    std::vector<CellState> cells_;
};

// Plain-text grid format: header line "n l", then n lines of n characters
// from {'.' free, '#' occupied, '?' unknown}.
std::string grid_to_text(const GridMap& g);
GridMap grid_from_text(const std::string& text);

// Number of Free cells reachable from `start` by 4-connected moves.
int flood_fill_free_count(const GridMap& g, Cell start);

// True when every Free cell belongs to one 4-connected component.
bool free_cells_connected(const GridMap& g);

// FNV-1a over the raw cell bytes; used by trace digests.
std::uint64_t grid_hash(const GridMap& g);

}  // namespace marlex
