#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace avalanche::optics {

/// Rates and detunings share one angular unit; the defaults read as
/// 2π·MHz. Ladder: |g> -Ω_p- |e> -Ω_c- |r>.
struct MeanFieldParams {
    double Omega_p = 2.0;
    double Omega_c = 8.0;
    double Delta_p = 0.0;
    double Delta_c = 0.0;
    double Gamma_e = 6.0;    ///< |e> -> |g>
    double Gamma_r = 0.1;    ///< |r> -> |e>
    double gamma_deph = 0.2; ///< extra decay of the |r> coherences
    double V = -1000.0;      ///< shift per unit Rydberg population; sign is the shift direction
    double OD = 2.0;
    double f_R = 0.33;

    std::vector<std::string> problems() const;
    void validate() const;  ///< throws std::invalid_argument listing all problems

    /// Δ_c − V·f_R·ρ_rr
    double effective_delta_c(double rho_rr) const { return Delta_c - V * f_R * rho_rr; }
};

/// Experiment-side Rabi frequencies of the perturbing beams (Fig. 4). Not
/// used by any computation.
inline constexpr double kOmegaPert1 = 3.7;
inline constexpr double kOmegaPert2 = 2.2;

/// Lindblad steady state at a fixed coupling detuning, no feedback.
struct LadderState {
    double rho_rr = 0.0;
    double rho_ee = 0.0;
    std::complex<double> rho_ge;  ///< <g|ρ|e>; Im > 0 means absorption
};

/// Solves the 9x9 linear steady-state problem with Δ_c replaced by
/// `delta_c` (V and f_R are ignored).
LadderState ladder_steady_state(const MeanFieldParams& p, double delta_c);

struct SteadyState {
    double rho_rr = 0.0;
    double rho_ge_imag = 0.0;
    bool converged = false;
    double residual = 0.0;  ///< |ρ_rr − ρ_rr^ss(Δ_eff(ρ_rr))|
    int iterations = 0;
    bool used_bisection = false;
};

struct SolverOptions {
    double damping = 0.5;
    int max_iterations = 500;
    double tolerance = 1e-10;
};

/// Self-consistent steady state on the branch reachable from `rho_rr_seed`:
/// damped fixed-point iteration, falling back to bisection on
/// g(x) = x − ρ_rr^ss(Δ_eff(x)) towards the nearest root in the direction
/// the iteration moves from the seed.
SteadyState steady_state(const MeanFieldParams& p, double rho_rr_seed, const SolverOptions& opt = {});

/// All roots of g on [0, 1] located by sign changes on a uniform grid of
/// `grid` intervals and refined by bisection, ascending.
std::vector<double> self_consistent_roots(const MeanFieldParams& p, int grid = 2000);

/// Im ρ_ge of the resonant two-level system (Ω_c = 0, Δ_p = 0) at the same
/// Ω_p and Γ_e.
double reference_absorption(const MeanFieldParams& p);

/// exp(−OD·Im ρ_ge / reference), clamped to [0, 1]. With no probe drive the
/// reference vanishes and T = 1. Throws std::invalid_argument when the state
/// is not converged.
double transmission(const SteadyState& s, const MeanFieldParams& p);

enum class ScanDirection : std::uint8_t { Positive, Negative };
std::string to_string(ScanDirection d);

struct CurvePoint {
    double delta_c = 0.0;
    double T = 0.0;
    double rho_rr = 0.0;
};

struct HysteresisCurve {
    ScanDirection direction = ScanDirection::Positive;
    std::vector<CurvePoint> points;  ///< in scan order
};

struct DetuningRange {
    double start = -40.0;
    double stop = 10.0;
    int steps = 501;

    /// Ascending grid of `steps` points between the two ends.
    std::vector<double> grid() const;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(std::size_t index, double delta_c, double residual);
    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Branch-following sweep. Positive runs up from the lowest Δ_c seeded with
/// ρ_rr = 0; Negative runs down from the highest Δ_c seeded with the largest
/// self-consistent root there. Each later point is seeded with the previous
/// point's ρ_rr.
HysteresisCurve scan_hysteresis(const MeanFieldParams& p, const DetuningRange& range,
                                ScanDirection direction, const SolverOptions& opt = {});

enum class Composition : std::uint8_t {
    Geometric,  ///< T = Π T_i^{w_i}, optical depths add
    Arithmetic, ///< T = Σ w_i T_i
};

struct WeightedDomain {
    MeanFieldParams params;
    double weight = 1.0;
};

/// Per-domain sweeps combined pointwise. Weights must be positive and sum to 1.
HysteresisCurve compose_domains(const std::vector<WeightedDomain>& domains, const DetuningRange& range,
                                ScanDirection direction, Composition mode = Composition::Geometric,
                                const SolverOptions& opt = {});

/// T₊ − T₋ on ascending Δ_c; both curves must share the grid.
std::vector<double> direction_difference(const HysteresisCurve& plus, const HysteresisCurve& minus);

struct MultistabilityMap {
    std::vector<double> f_R2;     ///< rows
    std::vector<double> delta_c;  ///< columns, ascending
    std::vector<double> diff;     ///< row-major T₊ − T₋

    double at(std::size_t row, std::size_t col) const { return diff[row * delta_c.size() + col]; }
};

struct MapOptions {
    double f_R1 = 0.33;
    double weight1 = 0.5;
    Composition mode = Composition::Geometric;
    int threads = 1;
};

/// Two-domain composition for each f_R2; rows are independent and may run
/// in parallel without changing the result.
MultistabilityMap multistability_map(const MeanFieldParams& base, const std::vector<double>& f_R2_values,
                                     const DetuningRange& range, const MapOptions& options = {},
                                     const SolverOptions& opt = {});

/// Δ_c intervals (on the range grid) with at least three self-consistent
/// roots, i.e. two stable branches. Roots are counted along the parametric
/// curve Δ_c(δ) = δ + V·f_R·ρ_rr(δ) sampled at `grid` + 1 effective
/// detunings. Each entry is [first, last] grid value.
std::vector<std::pair<double, double>> bistable_windows(const MeanFieldParams& p, const DetuningRange& range,
                                                        int grid = 20000);

/// Smallest f_R in [0, 1] at which `bistable_windows` over `range` is
/// nonempty, by bisection to `tol`; NaN when even f_R = 1 is monostable.
/// Assumes the window only opens once as f_R grows.
double bistability_onset(const MeanFieldParams& p, const DetuningRange& range, double tol = 1e-3,
                         int grid = 20000);

/// Maximal runs of columns with |diff| > threshold, as [first, last] column
/// indices.
std::vector<std::pair<std::size_t, std::size_t>> bands(const std::vector<double>& diff, double threshold);

}  // namespace avalanche::optics
