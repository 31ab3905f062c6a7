#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace avalanche::lattice {

/// Discrete state of one lattice cell. The numeric values are the ones
/// written to PGM snapshots.
enum class CellState : std::uint8_t {
    Depleted = 0,     ///< ground state / immune, absorbing
    Susceptible = 1,  ///< non-interacting Rydberg population
    Infected = 2,     ///< interacting Rydberg population
};

struct Coord {
    int row = 0;
    int col = 0;

    friend constexpr auto operator<=>(const Coord&, const Coord&) = default;
};

enum class BoundaryPolicy : std::uint8_t { AbsorbingEdge, Periodic };

/// m x m lattice of cell states, row-major. Carries the master seed and the
/// number of steps applied so far; together with the cell coordinates these
/// fully determine the random draws of the next step.
class Grid {
public:
    Grid(int side, std::uint64_t seed, CellState fill = CellState::Susceptible);

    int side() const noexcept { return side_; }
    std::size_t size() const noexcept { return cells_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t iteration() const noexcept { return iteration_; }

    bool contains(Coord c) const noexcept {
        return c.row >= 0 && c.col >= 0 && c.row < side_ && c.col < side_;
    }

    CellState at(Coord c) const { return cells_[index(c)]; }
    CellState at(int row, int col) const { return at(Coord{row, col}); }
    void set(Coord c, CellState s) { cells_[index(c)] = s; }
    void set(int row, int col, CellState s) { set(Coord{row, col}, s); }
    void fill(CellState s);

    std::span<const CellState> cells() const noexcept { return cells_; }
    std::span<CellState> cells() noexcept { return cells_; }
    std::span<const CellState> row(int r) const noexcept {
        return std::span<const CellState>(cells_).subspan(
            static_cast<std::size_t>(r) * side_, side_);
    }

    /// Overrides the iteration counter; used when restoring snapshots.
    void set_iteration(std::uint64_t it) noexcept { iteration_ = it; }

    bool operator==(const Grid&) const = default;

private:
    std::size_t index(Coord c) const;

    int side_;
    std::uint64_t seed_;
    std::uint64_t iteration_ = 0;
    std::vector<CellState> cells_;
};

struct StateCounts {
    std::size_t susceptible = 0;
    std::size_t infected = 0;
    std::size_t depleted = 0;

    std::size_t total() const noexcept { return susceptible + infected + depleted; }
};

struct Fractions {
    double susceptible = 0.0;
    double infected = 0.0;
    double depleted = 0.0;
};

StateCounts count_states(const Grid& grid);

/// Fractions of N in each state, each a correctly rounded count / N. The
/// underlying integer counts always sum to N.
Fractions counts(const Grid& grid);

/// In-grid cells at Chebyshev distance 1, row-major order. Throws
/// std::out_of_range when `c` lies outside an m x m grid.
std::vector<Coord> moore_neighbors(Coord c, int side);

}  // namespace avalanche::lattice
