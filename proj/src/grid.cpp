#include "marlex/grid.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

namespace marlex {

GridMap::GridMap(int n, double cell_len, CellState fill)
    : n_(n), cell_len_(cell_len), cells_(static_cast<std::size_t>(n) * n, fill) {
    if (n < 1) throw std::invalid_argument("GridMap: n must be >= 1");
    if (cell_len <= 0.0) throw std::invalid_argument("GridMap: cell_len must be > 0");
}

int GridMap::count(CellState s) const {
    return static_cast<int>(std::count(cells_.begin(), cells_.end(), s));
}

std::string grid_to_text(const GridMap& g) {
    char header[64];
    std::snprintf(header, sizeof(header), "%d %.17g\n", g.size(), g.cell_len());
    std::string out(header);
    out.reserve(out.size() + static_cast<std::size_t>(g.size()) * (g.size() + 1));
    for (int r = 0; r < g.size(); ++r) {
        for (int c = 0; c < g.size(); ++c) {
            switch (g.at(r, c)) {
                case CellState::Free: out += '.'; break;
                case CellState::Occupied: out += '#'; break;
                case CellState::Unknown: out += '?'; break;
            }
        }
        out += '\n';
    }
    return out;
}

GridMap grid_from_text(const std::string& text) {
    std::istringstream is(text);
    int n = 0;
    double l = 0.0;
    if (!(is >> n >> l)) throw std::runtime_error("grid_from_text: bad header");
    std::string line;
    std::getline(is, line);  // rest of header line
    GridMap g(n, l);
    for (int r = 0; r < n; ++r) {
        if (!std::getline(is, line) || static_cast<int>(line.size()) < n)
            throw std::runtime_error("grid_from_text: truncated row " + std::to_string(r));
        for (int c = 0; c < n; ++c) {
            switch (line[static_cast<std::size_t>(c)]) {
                case '.': g.set(r, c, CellState::Free); break;
                case '#': g.set(r, c, CellState::Occupied); break;
                case '?': g.set(r, c, CellState::Unknown); break;
                default:
                    throw std::runtime_error("grid_from_text: bad cell char at row " + std::to_string(r));
            }
        }
    }
    return g;
}

int flood_fill_free_count(const GridMap& g, Cell start) {
    if (!g.in_bounds(start) || g.at(start) != CellState::Free) return 0;
    std::vector<std::uint8_t> seen(static_cast<std::size_t>(g.size()) * g.size(), 0);
    std::vector<Cell> stack{start};
    seen[static_cast<std::size_t>(start.row) * g.size() + start.col] = 1;
    int found = 0;
    while (!stack.empty()) {
        const Cell p = stack.back();
        stack.pop_back();
        ++found;
        constexpr int dr[] = {-1, 1, 0, 0};
        constexpr int dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4; ++k) {
            const int r = p.row + dr[k];
            const int c = p.col + dc[k];
            if (!g.in_bounds(r, c) || g.at(r, c) != CellState::Free) continue;
            auto& mark = seen[static_cast<std::size_t>(r) * g.size() + c];
            if (mark) continue;
            mark = 1;
            stack.push_back({r, c});
        }
    }
    return found;
}

bool free_cells_connected(const GridMap& g) {
    const int total_free = g.count(CellState::Free);
    if (total_free == 0) return true;
    for (int r = 0; r < g.size(); ++r)
        for (int c = 0; c < g.size(); ++c)
            if (g.at(r, c) == CellState::Free) return flood_fill_free_count(g, {r, c}) == total_free;
    return true;
}

std::uint64_t grid_hash(const GridMap& g) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (CellState s : g.cells()) {
        h ^= static_cast<std::uint64_t>(s);
        h *= 0x00000100000001b3ull;
    }
    return h;
}

}  // namespace marlex
