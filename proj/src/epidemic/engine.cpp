#include "avalanche/epidemic/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

#include <fmt/format.h>

#include "avalanche/lattice/counter_rng.hpp"

namespace avalanche::epidemic {

using lattice::CellState;
using lattice::derive_seed;
using lattice::uniform01;

namespace {

// Stream tags for initialisation draws; stepping uses its own key schedule.
constexpr std::uint64_t kOccupancyStream = 0x4F43435550ull;
constexpr std::uint64_t kSeedingStream = 0x5345454453ull;
constexpr std::uint64_t kReplicateStream = 0x5245504Cull;

void check_landscape(const DensityLandscape& land, int m) {
    if (const auto* layout = std::get_if<DomainLayout>(&land)) layout->validate(m);
    if (const auto* g = std::get_if<DensityGradient>(&land)) {
        if (!(g->start >= 0.0 && g->start <= 1.0 && g->end >= 0.0 && g->end <= 1.0)) {
            throw std::invalid_argument(
                fmt::format("gradient ({}, {}) must lie in [0, 1]", g->start, g->end));
        }
    }
}

// Searches Chebyshev rings outward from `centre`; row-major within a ring.
std::optional<Coord> nearest_occupied(const Grid& g, Coord centre) {
    const int m = g.side();
    for (int d = 0; d < m; ++d) {
        for (int r = centre.row - d; r <= centre.row + d; ++r) {
            for (int c = centre.col - d; c <= centre.col + d; ++c) {
                if (std::max(std::abs(r - centre.row), std::abs(c - centre.col)) != d) continue;
                if (g.contains({r, c}) && g.at(r, c) == CellState::Susceptible) return Coord{r, c};
            }
        }
    }
    return std::nullopt;
}

}  // namespace

Grid init_grid(const EpidemicParams& params, const DensityLandscape& landscape) {
    params.validate();
    check_landscape(landscape, params.m);
    const int m = params.m;
    Grid g(m, params.seed, CellState::Depleted);
    const std::uint64_t occ = derive_seed(params.seed, kOccupancyStream);
    const std::uint64_t seeding = derive_seed(params.seed, kSeedingStream);
    const double excess_span = 1.0 - params.f_Rc;

    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            const double f = local_fraction(landscape, params.f_R, m, r, c);
            if (!(uniform01(occ, r, c) < f)) continue;
            g.set(r, c, CellState::Susceptible);
            bool infect = false;
            switch (params.seeding.kind) {
                case SeedKind::LeftEdge: infect = c == 0; break;
                case SeedKind::ThresholdExcess: {
                    const double p =
                        excess_span > 0.0 ? std::clamp((f - params.f_Rc) / excess_span, 0.0, 1.0) : 0.0;
                    infect = uniform01(seeding, r, c) < p;
                    break;
                }
                case SeedKind::Explicit:
                case SeedKind::Centre: break;
            }
            if (infect) g.set(r, c, CellState::Infected);
        }
    }
    if (params.seeding.kind == SeedKind::Explicit) {
        for (const Coord& c : params.seeding.cells) {
            if (g.at(c) == CellState::Depleted) {
                throw std::invalid_argument(
                    fmt::format("explicit seed ({}, {}) lands on an unoccupied cell", c.row, c.col));
            }
            g.set(c, CellState::Infected);
        }
    }
    if (params.seeding.kind == SeedKind::Centre) {
        if (const auto c = nearest_occupied(g, {m / 2, m / 2})) g.set(*c, CellState::Infected);
    }
    return g;
}

std::pair<TimeSeries, Grid> run(const EpidemicParams& params, Grid grid, const ExecOptions& exec) {
    params.validate();
    TimeSeries ts;
    ts.params = params;
    ts.seed = grid.seed();
    ts.records.reserve(static_cast<std::size_t>(params.iterations) + 1);
    auto record = [&](const Grid& g) {
        const auto f = lattice::counts(g);
        ts.records.push_back({g.iteration(), f.susceptible, f.infected, f.depleted});
    };
    record(grid);
    Grid scratch(grid.side(), grid.seed());
    const auto step_params = params.step_params();
    for (int i = 0; i < params.iterations; ++i) {
        lattice::step_in_place(grid, scratch, step_params, exec);
        record(grid);
    }
    return {std::move(ts), std::move(grid)};
}

std::uint64_t replicate_seed(std::uint64_t master, double f_R, int replicate) {
    return derive_seed(derive_seed(master, kReplicateStream), std::bit_cast<std::uint64_t>(f_R),
                       static_cast<std::uint64_t>(replicate));
}

namespace {

std::vector<ScanPoint> scan(const EpidemicParams& params, const DensityLandscape& landscape,
                            std::span<const double> f_R_values, int replicates,
                            const ExecOptions& exec) {
    if (f_R_values.empty()) throw std::invalid_argument("scan: f_R_values is empty");
    if (replicates <= 0) throw std::invalid_argument("scan: replicates must be positive");
    for (double f : f_R_values) {
        if (!(f >= 0.0 && f <= 1.0)) throw std::invalid_argument(fmt::format("scan: f_R = {} not in [0, 1]", f));
    }
    params.validate();
    check_landscape(landscape, params.m);

    std::vector<double> values(f_R_values.begin(), f_R_values.end());
    std::sort(values.begin(), values.end());

    const int n_jobs = static_cast<int>(values.size()) * replicates;
    std::vector<double> final_f_I(static_cast<std::size_t>(n_jobs));
    // Replicates are the parallel unit; each run steps serially.
    const ExecOptions inner{exec.kernel, 1};

#pragma omp parallel for schedule(dynamic) num_threads(exec.threads) if (exec.threads > 1)
    for (int job = 0; job < n_jobs; ++job) {
        EpidemicParams p = params;
        p.f_R = values[job / replicates];
        p.seed = replicate_seed(params.seed, p.f_R, job % replicates);
        Grid g = init_grid(p, landscape);
        const auto initial = lattice::count_states(g);
        const std::size_t occupied = initial.susceptible + initial.infected;
        Grid scratch(g.side(), g.seed());
        const auto sp = p.step_params();
        for (int i = 0; i < p.iterations; ++i) lattice::step_in_place(g, scratch, sp, inner);
        final_f_I[job] = occupied ? static_cast<double>(lattice::count_states(g).infected) / occupied : 0.0;
    }

    std::vector<ScanPoint> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const auto first = final_f_I.begin() + static_cast<std::ptrdiff_t>(i) * replicates;
        const double mean = std::accumulate(first, first + replicates, 0.0) / replicates;
        double ss = 0.0;
        for (auto it = first; it != first + replicates; ++it) ss += (*it - mean) * (*it - mean);
        const double sd = replicates > 1 ? std::sqrt(ss / (replicates - 1)) : 0.0;
        out.push_back({values[i], mean, sd});
    }
    return out;
}

}  // namespace

std::vector<ScanPoint> threshold_scan(const EpidemicParams& params, std::span<const double> f_R_values,
                                      int replicates, const ExecOptions& exec) {
    return scan(params, UniformDensity{}, f_R_values, replicates, exec);
}

std::vector<ScanPoint> multi_domain_scan(const EpidemicParams& params, const DomainLayout& layout,
                                         std::span<const double> f_R_values, const ExecOptions& exec) {
    return scan(params, layout, f_R_values, params.replicates, exec);
}

std::vector<Coord> detect_domain_wall(const Grid& grid) {
    const int m = grid.side();
    std::vector<Coord> wall;
    for (int r = 0; r < m; ++r) {
        for (int c = 0; c < m; ++c) {
            if (grid.at(r, c) == CellState::Infected) continue;
            bool touches = false;
            for (int dr = -1; dr <= 1 && !touches; ++dr) {
                for (int dc = -1; dc <= 1 && !touches; ++dc) {
                    const Coord n{r + dr, c + dc};
                    touches = (dr || dc) && grid.contains(n) && grid.at(n) == CellState::Infected;
                }
            }
            if (touches) wall.push_back({r, c});
        }
    }
    return wall;
}

std::vector<Coord> interface_band(const Grid& grid) {
    const int m = grid.side();
    if (m < 3) return {};
    // Label 4-connected components of non-infected interior cells.
    std::vector<int> label(static_cast<std::size_t>(m) * m, -1);
    std::vector<std::size_t> sizes;
    std::vector<Coord> stack;
    auto interior = [m](int r, int c) { return r > 0 && c > 0 && r < m - 1 && c < m - 1; };
    for (int r = 1; r < m - 1; ++r) {
        for (int c = 1; c < m - 1; ++c) {
            if (grid.at(r, c) == CellState::Infected || label[r * m + c] >= 0) continue;
            const int id = static_cast<int>(sizes.size());
            std::size_t size = 0;
            label[r * m + c] = id;
            stack.push_back({r, c});
            while (!stack.empty()) {
                const Coord p = stack.back();
                stack.pop_back();
                ++size;
                const Coord next[4] = {{p.row - 1, p.col}, {p.row + 1, p.col}, {p.row, p.col - 1}, {p.row, p.col + 1}};
                for (const Coord& n : next) {
                    if (!interior(n.row, n.col) || grid.at(n) == CellState::Infected) continue;
                    int& l = label[n.row * m + n.col];
                    if (l >= 0) continue;
                    l = id;
                    stack.push_back(n);
                }
            }
            sizes.push_back(size);
        }
    }
    if (sizes.empty()) return {};
    const int main = static_cast<int>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
    std::vector<Coord> band;
    for (const Coord& c : detect_domain_wall(grid)) {
        if (interior(c.row, c.col) && label[c.row * m + c.col] == main) band.push_back(c);
    }
    return band;
}

double mean_column(std::span<const Coord> cells) {
    if (cells.empty()) return std::nan("");
    double sum = 0.0;
    for (const Coord& c : cells) sum += c.col;
    return sum / static_cast<double>(cells.size());
}

std::vector<double> linspace(double first, double last, int count) {
    if (count < 1) throw std::invalid_argument("linspace: count must be >= 1");
    if (count == 1) return {first};
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out[i] = first + (last - first) * static_cast<double>(i) / (count - 1);
    }
    out.back() = last;
    return out;
}

}  // namespace avalanche::epidemic
