#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "avalanche/lattice/grid.hpp"
#include "avalanche/lattice/step.hpp"

namespace avalanche::epidemic {

using lattice::BoundaryPolicy;
using lattice::Coord;

enum class SeedKind : std::uint8_t {
    LeftEdge,         ///< occupied cells of column 0 start infected
    ThresholdExcess,  ///< occupied cell infected w.p. clamp((f - f_Rc) / (1 - f_Rc), 0, 1)
    Explicit,         ///< listed coordinates; each must be in-grid and occupied
    Centre,           ///< the single occupied cell nearest (m/2, m/2)
};

struct SeedPolicy {
    SeedKind kind = SeedKind::LeftEdge;
    std::vector<Coord> cells;  ///< only for Explicit

    static SeedPolicy left_edge() { return {}; }
    static SeedPolicy threshold_excess() { return {SeedKind::ThresholdExcess, {}}; }
    static SeedPolicy explicit_cells(std::vector<Coord> c) { return {SeedKind::Explicit, std::move(c)}; }
    static SeedPolicy centre() { return {SeedKind::Centre, {}}; }
};

/// Per-contact infection probability of the SIS preset, picked with
/// scripts/calibrate_sis_beta.sh: the 200-iteration threshold curve on a
/// 100x100 lattice centres inside [0.55, 0.65], and invasion of a neighbouring
/// sub-threshold domain is slow enough that multi-domain scans show one step
/// per domain. Larger values merge the steps of adjacent domains.
inline constexpr double kSisBeta = 0.05;

struct EpidemicParams {
    int m = 100;
    double f_R = 0.5;   ///< global fill fraction
    double f_Rc = 0.6;  ///< critical fraction, used by ThresholdExcess seeding
    double beta = kSisBeta;
    double mu = 0.01;
    double gamma = 0.0;
    BoundaryPolicy boundary = BoundaryPolicy::AbsorbingEdge;
    int iterations = 200;
    SeedPolicy seeding{};
    int replicates = 1;
    std::uint64_t seed = 1;

    /// beta >> gamma, gamma = 0, mu = 0.01, threshold-excess seeding.
    static EpidemicParams sis_preset();
    /// beta = 0.95, gamma = 0.2, mu = 0, left-edge seeding.
    static EpidemicParams sir_preset();

    lattice::StepParams step_params() const { return {beta, mu, gamma, boundary}; }

    /// Collects every violated constraint; empty when valid.
    std::vector<std::string> problems() const;
    /// Throws std::invalid_argument listing all problems.
    void validate() const;
};

struct Rect {
    int row = 0;
    int col = 0;
    int rows = 0;
    int cols = 0;

    bool contains(int r, int c) const noexcept {
        return r >= row && r < row + rows && c >= col && c < col + cols;
    }
    bool overlaps(const Rect& o) const noexcept {
        return row < o.row + o.rows && o.row < row + rows && col < o.col + o.cols &&
               o.col < col + cols;
    }
};

struct Domain {
    Rect region;
    double f_R_offset = 0.0;
};

/// Disjoint rectangular regions with a density offset each; cells outside
/// every region use the base fill fraction.
struct DomainLayout {
    std::vector<Domain> domains;

    /// Equal-width full-height column stripes, left to right in the given
    /// order. The last stripe absorbs the remainder columns.
    static DomainLayout stripes(int m, const std::vector<double>& offsets);

    /// Throws std::invalid_argument on overlapping or out-of-grid regions.
    void validate(int m) const;
    double local_fraction(double base, int row, int col) const noexcept;
};

struct UniformDensity {};

/// Linear left-to-right ramp: column j gets start + (end - start) * j / (m - 1).
struct DensityGradient {
    double start = 0.0;
    double end = 0.9;
};

using DensityLandscape = std::variant<UniformDensity, DomainLayout, DensityGradient>;

double local_fraction(const DensityLandscape& land, double base, int m, int row, int col);

}  // namespace avalanche::epidemic
