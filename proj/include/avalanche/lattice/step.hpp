#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "avalanche/lattice/grid.hpp"

namespace avalanche::lattice {

/// Per-step transition probabilities.
///   beta  per-contact infection probability (S -> I)
///   mu    I -> S probability
///   gamma I -> D probability
/// mu and gamma share one categorical draw, so gamma + mu must not exceed 1.
struct StepParams {
    double beta = 0.0;
    double mu = 0.0;
    double gamma = 0.0;
    BoundaryPolicy boundary = BoundaryPolicy::AbsorbingEdge;

    /// Throws std::invalid_argument naming the offending field(s).
    void validate() const;
};

enum class KernelKind : std::uint8_t { Scalar, Avx2 };

std::string_view to_string(KernelKind k) noexcept;

/// True when the CPU (and the build) supports the kernel.
bool kernel_available(KernelKind k) noexcept;

/// Widest available kernel, unless AVALANCHE_KERNEL=scalar is set.
KernelKind default_kernel();

struct ExecOptions {
    KernelKind kernel = default_kernel();
    int threads = 1;
};

/// Thresholds on the 30-bit uniform lattice, precomputed once per parameter
/// set. infect[k] is the threshold for k infected neighbours.
struct StepTables {
    alignas(32) std::array<std::int32_t, 16> infect{};
    std::int32_t deplete = 0;  ///< u < deplete            -> Depleted
    std::int32_t leave = 0;    ///< deplete <= u < leave    -> Susceptible

    static StepTables from(const StepParams& p);
};

/// Synchronous update of one grid row, columns [first_col, side). `above`,
/// `here` and `below` point at the padded infected-indicator rows (m + 2
/// bytes each, column -1 at index 0).
struct RowJob {
    const std::uint8_t* above = nullptr;
    const std::uint8_t* here = nullptr;
    const std::uint8_t* below = nullptr;
    const std::uint8_t* src = nullptr;
    std::uint8_t* dst = nullptr;
    int side = 0;
    int first_col = 0;
    std::uint32_t row_hash = 0;
    std::uint32_t col_key = 0;
    const StepTables* tables = nullptr;
};

void step_row_scalar(const RowJob& job) noexcept;
void step_row_avx2(const RowJob& job) noexcept;

/// Applies one synchronous step and returns the new grid; the input is
/// untouched. The result is identical for every kernel and thread count.
Grid step(const Grid& grid, const StepParams& params, const ExecOptions& exec = {});

/// In-place variant reusing `scratch` for the next state.
void step_in_place(Grid& grid, Grid& scratch, const StepParams& params,
                   const ExecOptions& exec = {});

}  // namespace avalanche::lattice
