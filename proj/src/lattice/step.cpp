#include "avalanche/lattice/step.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <vector>

#include "avalanche/lattice/counter_rng.hpp"

namespace avalanche::lattice {

std::int32_t probability_threshold(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw std::invalid_argument("probability outside [0, 1]: " + std::to_string(p));
    }
    return static_cast<std::int32_t>(std::llround(std::ldexp(p, kUniformBits)));
}

void StepParams::validate() const {
    std::string errors;
    auto check_unit = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) {
            errors += std::string(errors.empty() ? "" : "; ") + name + "=" +
                      std::to_string(v) + " not in [0, 1]";
        }
    };
    check_unit(beta, "beta");
    check_unit(mu, "mu");
    check_unit(gamma, "gamma");
    if (errors.empty() && gamma + mu > 1.0) {
        errors = "gamma + mu = " + std::to_string(gamma + mu) +
                 " exceeds 1 (gamma and mu share one categorical draw)";
    }
    if (!errors.empty()) throw std::invalid_argument("StepParams: " + errors);
}

StepTables StepTables::from(const StepParams& p) {
    p.validate();
    StepTables t;
    // Independent contacts: 1 - (1 - beta)^k for k infected neighbours.
    for (int k = 1; k <= 8; ++k) {
        t.infect[k] = probability_threshold(1.0 - std::pow(1.0 - p.beta, k));
    }
    t.deplete = probability_threshold(p.gamma);
    t.leave = probability_threshold(std::min(1.0, p.gamma + p.mu));
    return t;
}

std::string_view to_string(KernelKind k) noexcept {
    switch (k) {
        case KernelKind::Scalar: return "scalar";
        case KernelKind::Avx2: return "avx2";
    }
    return "unknown";
}

bool kernel_available(KernelKind k) noexcept {
    switch (k) {
        case KernelKind::Scalar: return true;
        case KernelKind::Avx2:
#if defined(AVALANCHE_HAVE_AVX2)
            return __builtin_cpu_supports("avx2");
#else
            return false;
#endif
    }
    return false;
}

KernelKind default_kernel() {
    if (const char* env = std::getenv("AVALANCHE_KERNEL")) {
        if (std::string_view(env) == "scalar") return KernelKind::Scalar;
    }
    return kernel_available(KernelKind::Avx2) ? KernelKind::Avx2 : KernelKind::Scalar;
}

void step_row_scalar(const RowJob& job) noexcept {
    const StepTables& t = *job.tables;
    const StepKey key{0, job.col_key};
    for (int c = job.first_col; c < job.side; ++c) {
        const std::uint8_t state = job.src[c];
        std::uint8_t next = 0;
        if (state != 0) {
            const std::int32_t u =
                uniform30(cell_hash(job.row_hash, key, static_cast<std::uint32_t>(c)));
            if (state == 1) {
                const int k = job.above[c] + job.above[c + 1] + job.above[c + 2] +
                              job.here[c] + job.here[c + 2] +
                              job.below[c] + job.below[c + 1] + job.below[c + 2];
                next = u < t.infect[k] ? 2 : 1;
            } else {
                next = u < t.deplete ? 0 : (u < t.leave ? 1 : 2);
            }
        }
        job.dst[c] = next;
    }
}

#if !defined(AVALANCHE_HAVE_AVX2)
void step_row_avx2(const RowJob& job) noexcept { step_row_scalar(job); }
#endif

namespace {

// Infected-indicator plane with a one-cell halo. The halo is zero for
// absorbing edges and a wrapped copy for periodic ones.
void build_indicator(const Grid& g, BoundaryPolicy boundary, std::vector<std::uint8_t>& plane) {
    const int m = g.side();
    const int w = m + 2;
    plane.assign(static_cast<std::size_t>(w) * w, 0);
    const auto cells = g.cells();
    for (int r = 0; r < m; ++r) {
        std::uint8_t* dst = plane.data() + static_cast<std::size_t>(r + 1) * w + 1;
        const CellState* src = cells.data() + static_cast<std::size_t>(r) * m;
        for (int c = 0; c < m; ++c) dst[c] = src[c] == CellState::Infected ? 1 : 0;
    }
    if (boundary == BoundaryPolicy::Periodic) {
        for (int r = 1; r <= m; ++r) {
            std::uint8_t* row = plane.data() + static_cast<std::size_t>(r) * w;
            row[0] = row[m];
            row[m + 1] = row[1];
        }
        std::copy_n(plane.data() + static_cast<std::size_t>(m) * w, w, plane.data());
        std::copy_n(plane.data() + static_cast<std::size_t>(w), w,
                    plane.data() + static_cast<std::size_t>(m + 1) * w);
    }
}

}  // namespace

void step_in_place(Grid& grid, Grid& scratch, const StepParams& params, const ExecOptions& exec) {
    const StepTables tables = StepTables::from(params);
    if (!kernel_available(exec.kernel)) {
        throw std::invalid_argument("kernel '" + std::string(to_string(exec.kernel)) +
                                    "' not available on this machine");
    }
    const int m = grid.side();
    if (scratch.side() != m || scratch.seed() != grid.seed()) scratch = Grid(m, grid.seed());

    thread_local std::vector<std::uint8_t> plane;
    build_indicator(grid, params.boundary, plane);

    const StepKey key = step_key(grid.seed(), grid.iteration());
    const auto kernel = exec.kernel == KernelKind::Avx2 ? &step_row_avx2 : &step_row_scalar;
    const int w = m + 2;
    const auto* src = reinterpret_cast<const std::uint8_t*>(grid.cells().data());
    auto* dst = reinterpret_cast<std::uint8_t*>(scratch.cells().data());
    const std::uint8_t* pl = plane.data();

#pragma omp parallel for schedule(static) num_threads(exec.threads) if (exec.threads > 1)
    for (int r = 0; r < m; ++r) {
        RowJob job;
        job.above = pl + static_cast<std::size_t>(r) * w;
        job.here = job.above + w;
        job.below = job.here + w;
        job.src = src + static_cast<std::size_t>(r) * m;
        job.dst = dst + static_cast<std::size_t>(r) * m;
        job.side = m;
        job.row_hash = row_hash(key, static_cast<std::uint32_t>(r));
        job.col_key = key.k1;
        job.tables = &tables;
        kernel(job);
    }

    if (params.boundary == BoundaryPolicy::AbsorbingEdge) {
        // Infected cells on the outer ring leave the excitation volume.
        auto edge = [&](int r, int c) {
            if (scratch.at(r, c) == CellState::Infected) scratch.set(r, c, CellState::Depleted);
        };
        for (int i = 0; i < m; ++i) {
            edge(0, i);
            edge(m - 1, i);
            edge(i, 0);
            edge(i, m - 1);
        }
    }
    scratch.set_iteration(grid.iteration() + 1);
    std::swap(grid, scratch);
}

Grid step(const Grid& grid, const StepParams& params, const ExecOptions& exec) {
    Grid current = grid;
    Grid scratch(grid.side(), grid.seed());
    step_in_place(current, scratch, params, exec);
    return current;
}

}  // namespace avalanche::lattice
