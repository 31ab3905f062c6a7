#pragma once

// Test-only reference models for the lattice. Nothing here calls into the
// stepping code; the oracles work from the rules directly.

#include <cstdint>
#include <deque>
#include <limits>
#include <random>
#include <vector>

#include "avalanche/lattice/grid.hpp"

namespace avalanche::testing {

using lattice::BoundaryPolicy;
using lattice::CellState;
using lattice::Grid;

/// Deterministic limit (beta = 1, gamma = mu = 0) after `steps` steps.
///
/// Breadth-first search from the initially infected cells through
/// susceptible cells. A cell reached at distance d is infected during step
/// d. Under absorbing edges a reached ring cell is depleted in the same
/// step, so it never transmits; an initially infected ring cell transmits
/// in step 1 and is depleted afterwards.
inline Grid bfs_deterministic_limit(const Grid& initial, int steps, BoundaryPolicy boundary) {
    const int m = initial.side();
    const int inf = std::numeric_limits<int>::max();
    std::vector<int> dist(static_cast<std::size_t>(m) * m, inf);
    std::deque<std::pair<int, int>> queue;
    auto on_ring = [&](int r, int c) { return r == 0 || c == 0 || r == m - 1 || c == m - 1; };
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            if (initial.at(r, c) == CellState::Infected) {
                dist[r * m + c] = 0;
                queue.emplace_back(r, c);
            }
        }
    }
    while (!queue.empty()) {
        const auto [r, c] = queue.front();
        queue.pop_front();
        const int d = dist[r * m + c];
        if (d >= steps) continue;
        const bool transmits = boundary == BoundaryPolicy::Periodic || d == 0 || !on_ring(r, c);
        if (!transmits) continue;
        for (int dr = -1; dr <= 1; ++dr) {
            for (int dc = -1; dc <= 1; ++dc) {
                if (!dr && !dc) continue;
                int nr = r + dr, nc = c + dc;
                if (boundary == BoundaryPolicy::Periodic) {
                    nr = (nr + m) % m;
                    nc = (nc + m) % m;
                } else if (nr < 0 || nc < 0 || nr >= m || nc >= m) {
                    continue;
                }
                if (initial.at(nr, nc) != CellState::Susceptible) continue;
                if (dist[nr * m + nc] != inf) continue;
                dist[nr * m + nc] = d + 1;
                queue.emplace_back(nr, nc);
            }
        }
    }
    Grid out = initial;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const int d = dist[r * m + c];
            if (d == inf || d > steps) continue;
            const bool absorbed = boundary == BoundaryPolicy::AbsorbingEdge && on_ring(r, c) &&
                                  steps >= 1;
            out.set(r, c, absorbed ? CellState::Depleted : CellState::Infected);
        }
    }
    out.set_iteration(initial.iteration() + static_cast<std::uint64_t>(steps));
    return out;
}

/// Grid with independent per-cell states drawn with the given weights.
inline Grid random_grid(std::mt19937_64& rng, int side, double p_depleted, double p_infected,
                        std::uint64_t seed) {
    Grid g(side, seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int r = 0; r < side; ++r) {
        for (int c = 0; c < side; ++c) {
            const double x = u(rng);
            g.set(r, c, x < p_depleted ? CellState::Depleted
                         : x < p_depleted + p_infected ? CellState::Infected
                                                       : CellState::Susceptible);
        }
    }
    return g;
}

/// Allowed one-step transitions. A ring cell under absorbing edges may go
/// S -> D in one step: it is infected and then removed by the edge rule.
inline bool legal_transition(CellState from, CellState to, bool absorbing_ring = false) {
    if (from == to) return true;
    switch (from) {
        case CellState::Susceptible:
            return to == CellState::Infected || (absorbing_ring && to == CellState::Depleted);
        case CellState::Infected: return true;
        case CellState::Depleted: return false;
    }
    return false;
}

}  // namespace avalanche::testing
