#include "avalanche/lattice/grid.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>
#include <string>

namespace avalanche::lattice {

Grid::Grid(int side, std::uint64_t seed, CellState fill)
    : side_(side), seed_(seed) {
    if (side <= 0) {
        throw std::invalid_argument("grid side must be positive, got " +
                                    std::to_string(side));
    }
    cells_.assign(static_cast<std::size_t>(side) * side, fill);
}

void Grid::fill(CellState s) { std::fill(cells_.begin(), cells_.end(), s); }

std::size_t Grid::index(Coord c) const {
    if (!contains(c)) {
        throw std::out_of_range("cell (" + std::to_string(c.row) + ", " +
                                std::to_string(c.col) + ") outside " +
                                std::to_string(side_) + "x" + std::to_string(side_) +
                                " grid");
    }
    return static_cast<std::size_t>(c.row) * side_ + c.col;
}

StateCounts count_states(const Grid& grid) {
    std::array<std::size_t, 3> n{};
    for (CellState s : grid.cells()) ++n[static_cast<std::size_t>(s)];
    return {n[1], n[2], n[0]};
}

Fractions counts(const Grid& grid) {
    const StateCounts c = count_states(grid);
    const auto total = static_cast<double>(grid.size());
    return {static_cast<double>(c.susceptible) / total,
            static_cast<double>(c.infected) / total,
            static_cast<double>(c.depleted) / total};
}

std::vector<Coord> moore_neighbors(Coord c, int side) {
    if (side <= 0 || c.row < 0 || c.col < 0 || c.row >= side || c.col >= side) {
        throw std::out_of_range("moore_neighbors: (" + std::to_string(c.row) + ", " +
                                std::to_string(c.col) + ") not inside side " +
                                std::to_string(side));
    }
    std::vector<Coord> out;
    out.reserve(8);
    for (int dr = -1; dr <= 1; ++dr) {
        for (int dc = -1; dc <= 1; ++dc) {
            if (dr == 0 && dc == 0) continue;
            const Coord n{c.row + dr, c.col + dc};
            if (n.row >= 0 && n.col >= 0 && n.row < side && n.col < side) out.push_back(n);
        }
    }
    return out;
}

}  // namespace avalanche::lattice
