#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "avalanche/epidemic/params.hpp"
#include "avalanche/lattice/grid.hpp"
#include "avalanche/lattice/step.hpp"

namespace avalanche::epidemic {

using lattice::ExecOptions;
using lattice::Grid;

struct TimeSeriesRecord {
    std::uint64_t iteration = 0;
    double f_S = 0.0;
    double f_I = 0.0;
    double f_D = 0.0;
};

struct TimeSeries {
    std::vector<TimeSeriesRecord> records;
    EpidemicParams params;
    std::uint64_t seed = 0;
};

/// Occupancy with the local fill fraction, then seeding. Uses params.seed.
Grid init_grid(const EpidemicParams& params, const DensityLandscape& landscape = UniformDensity{});

/// Applies `params.iterations` steps, recording fractions before the first
/// step and after every step.
std::pair<TimeSeries, Grid> run(const EpidemicParams& params, Grid grid,
                                const ExecOptions& exec = {});

struct ScanPoint {
    double f_R = 0.0;
    double mean_f_I = 0.0;
    double stddev = 0.0;  ///< sample standard deviation across replicates
};

/// Seed of replicate `replicate` at fill fraction `f_R`. Depends on the
/// value of f_R, not its position in the scan list.
std::uint64_t replicate_seed(std::uint64_t master, double f_R, int replicate);

/// Final infected fraction averaged over replicates, one point per f_R,
/// sorted by f_R. `exec.threads` parallelises over (f_R, replicate) pairs.
std::vector<ScanPoint> threshold_scan(const EpidemicParams& params,
                                      std::span<const double> f_R_values, int replicates,
                                      const ExecOptions& exec = {});

/// threshold_scan with each domain at f_R + offset.
std::vector<ScanPoint> multi_domain_scan(const EpidemicParams& params, const DomainLayout& layout,
                                         std::span<const double> f_R_values,
                                         const ExecOptions& exec = {});

/// Susceptible or depleted cells with at least one infected Moore
/// neighbour, row-major.
std::vector<Coord> detect_domain_wall(const Grid& grid);

/// The part of the domain wall bordering the main non-infected region:
/// wall cells that are not on the absorbing ring and lie in the largest
/// 4-connected component of non-infected interior cells. Pockets enclosed by
/// the infected phase are excluded.
std::vector<Coord> interface_band(const Grid& grid);

double mean_column(std::span<const Coord> cells);

/// `count` evenly spaced values from `first` to `last` inclusive.
std::vector<double> linspace(double first, double last, int count);

}  // namespace avalanche::epidemic
