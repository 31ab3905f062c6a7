#include "avalanche/optics/meanfield.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <fmt/format.h>

namespace avalanche::optics {

namespace {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix<cplx, 3, 3>;
using Mat9 = Eigen::Matrix<cplx, 9, 9>;
using Vec9 = Eigen::Matrix<cplx, 9, 1>;

constexpr int G = 0, E = 1, R = 2;

// Adds the superoperator of dρ/dt = C ρ C† − ½{C†C, ρ} to L, with ρ
// vectorised row-major (index 3i + j).
void add_dissipator(Mat9& L, const Mat3& C) {
    const Mat3 CdC = C.adjoint() * C;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                for (int l = 0; l < 3; ++l) {
                    cplx v = C(i, k) * std::conj(C(j, l));
                    if (j == l) v -= 0.5 * CdC(i, k);
                    if (i == k) v -= 0.5 * CdC(l, j);
                    L(3 * i + j, 3 * k + l) += v;
                }
            }
        }
    }
}

Mat3 density_matrix(const MeanFieldParams& p, double delta_c) {
    Mat3 H = Mat3::Zero();
    H(E, E) = -p.Delta_p;
    H(R, R) = -(p.Delta_p + delta_c);
    H(G, E) = H(E, G) = 0.5 * p.Omega_p;
    H(E, R) = H(R, E) = 0.5 * p.Omega_c;

    Mat9 L = Mat9::Zero();
    const cplx I(0.0, 1.0);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            for (int k = 0; k < 3; ++k) {
                L(3 * i + j, 3 * k + j) += -I * H(i, k);
                L(3 * i + j, 3 * i + k) += I * H(k, j);
            }
        }
    }
    Mat3 C = Mat3::Zero();
    C(G, E) = std::sqrt(p.Gamma_e);
    add_dissipator(L, C);
    C.setZero();
    C(E, R) = std::sqrt(p.Gamma_r);
    add_dissipator(L, C);
    C.setZero();
    C(R, R) = std::sqrt(2.0 * p.gamma_deph);
    add_dissipator(L, C);

    // Replace the ρ_gg equation by the trace condition.
    Vec9 rhs = Vec9::Zero();
    L.row(0).setZero();
    L(0, 0) = L(0, 4) = L(0, 8) = 1.0;
    rhs(0) = 1.0;
    const Vec9 x = L.partialPivLu().solve(rhs);
    Mat3 rho;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) rho(i, j) = x(3 * i + j);
    }
    return rho;
}

double rho_rr_at(const MeanFieldParams& p, double x) {
    return std::clamp(ladder_steady_state(p, p.effective_delta_c(x)).rho_rr, 0.0, 1.0);
}

double g_at(const MeanFieldParams& p, double x) { return x - rho_rr_at(p, x); }

constexpr double kMarchStep = 1e-3;

// Root of g in [lo, hi] with g(lo) and g(hi) of opposite sign.
double bisect(const MeanFieldParams& p, double lo, double hi, double tol) {
    double glo = g_at(p, lo);
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double gm = g_at(p, mid);
        if (std::abs(gm) < 0.01 * tol) return mid;
        if ((gm > 0) == (glo > 0)) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Nearest root of g from `seed` in the direction −sign(g(seed)).
double march_to_root(const MeanFieldParams& p, double seed, double tol) {
    const double g0 = g_at(p, seed);
    if (g0 == 0.0) return seed;
    const double dir = g0 > 0 ? -1.0 : 1.0;
    double x = seed;
    for (;;) {
        const double next = std::clamp(x + dir * kMarchStep, 0.0, 1.0);
        const double gn = g_at(p, next);
        if (gn == 0.0) return next;
        if ((gn > 0) != (g0 > 0)) return dir < 0 ? bisect(p, next, x, tol) : bisect(p, x, next, tol);
        if (next == x) return x;
        x = next;
    }
}

// True when g keeps the sign of g(seed) on a grid strictly between seed and x.
bool reached_without_crossing(const MeanFieldParams& p, double seed, double x) {
    const double g0 = g_at(p, seed);
    const int n = static_cast<int>(std::ceil(std::abs(x - seed) / kMarchStep));
    for (int i = 1; i < n; ++i) {
        const double y = seed + (x - seed) * i / n;
        if ((g_at(p, y) > 0) != (g0 > 0)) return false;
    }
    return true;
}

}  // namespace

std::vector<std::string> MeanFieldParams::problems() const {
    std::vector<std::string> out;
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) out.push_back(fmt::format("{} = {} is not finite", name, v));
    };
    auto nonneg = [&](double v, const char* name) {
        if (!(v >= 0.0) || !std::isfinite(v)) out.push_back(fmt::format("{} = {} must be >= 0", name, v));
    };
    finite(Omega_p, "Omega_p");
    finite(Omega_c, "Omega_c");
    finite(Delta_p, "Delta_p");
    finite(Delta_c, "Delta_c");
    finite(V, "V");
    nonneg(Gamma_e, "Gamma_e");
    nonneg(Gamma_r, "Gamma_r");
    nonneg(gamma_deph, "gamma_deph");
    nonneg(OD, "OD");
    if (!(f_R >= 0.0 && f_R <= 1.0)) out.push_back(fmt::format("f_R = {} not in [0, 1]", f_R));
    if (Gamma_e <= 0.0) out.push_back("Gamma_e must be positive for a unique steady state");
    return out;
}

void MeanFieldParams::validate() const {
    const auto p = problems();
    if (p.empty()) return;
    std::string msg = "invalid mean-field parameters:";
    for (const auto& s : p) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

LadderState ladder_steady_state(const MeanFieldParams& p, double delta_c) {
    const Mat3 rho = density_matrix(p, delta_c);
    return {rho(R, R).real(), rho(E, E).real(), rho(G, E)};
}

SteadyState steady_state(const MeanFieldParams& p, double rho_rr_seed, const SolverOptions& opt) {
    p.validate();
    if (!(rho_rr_seed >= 0.0 && rho_rr_seed <= 1.0)) {
        throw std::invalid_argument(fmt::format("rho_rr seed {} not in [0, 1]", rho_rr_seed));
    }
    SteadyState s;
    double x = rho_rr_seed;
    double best_x = x, best_g = std::abs(g_at(p, x));
    for (int it = 0; it < opt.max_iterations; ++it) {
        const double g = g_at(p, x);
        s.iterations = it + 1;
        if (std::abs(g) < best_g) {
            best_g = std::abs(g);
            best_x = x;
        }
        if (std::abs(g) < opt.tolerance) {
            s.converged = true;
            break;
        }
        x = std::clamp(x - opt.damping * g, 0.0, 1.0);
    }
    if (!s.converged || !reached_without_crossing(p, rho_rr_seed, x)) {
        s.used_bisection = true;
        x = march_to_root(p, rho_rr_seed, opt.tolerance);
        const double g = std::abs(g_at(p, x));
        s.converged = g < opt.tolerance;
        if (!s.converged && g > best_g) x = best_x;
    }
    // One undamped step; it moves x by at most the residual.
    if (s.converged) {
        const double polished = rho_rr_at(p, x);
        if (std::abs(g_at(p, polished)) <= std::abs(g_at(p, x))) x = polished;
    }
    const auto ladder = ladder_steady_state(p, p.effective_delta_c(x));
    s.rho_rr = x;
    s.rho_ge_imag = ladder.rho_ge.imag();
    s.residual = std::abs(g_at(p, x));
    return s;
}

std::vector<double> self_consistent_roots(const MeanFieldParams& p, int grid) {
    p.validate();
    std::vector<double> roots;
    double prev_x = 0.0, prev_g = g_at(p, 0.0);
    if (prev_g == 0.0) roots.push_back(0.0);
    for (int i = 1; i <= grid; ++i) {
        const double x = static_cast<double>(i) / grid;
        const double g = g_at(p, x);
        if (g == 0.0) {
            roots.push_back(x);
        } else if (prev_g != 0.0 && (g > 0) != (prev_g > 0)) {
            roots.push_back(bisect(p, prev_x, x, 1e-13));
        }
        prev_x = x;
        prev_g = g;
    }
    return roots;
}

double reference_absorption(const MeanFieldParams& p) {
    MeanFieldParams two = p;
    two.Omega_c = 0.0;
    two.Delta_p = 0.0;
    return ladder_steady_state(two, 0.0).rho_ge.imag();
}

double transmission(const SteadyState& s, const MeanFieldParams& p) {
    if (!s.converged) throw std::invalid_argument("transmission of a non-converged state");
    const double ref = reference_absorption(p);
    if (ref <= 0.0 || p.OD == 0.0) return 1.0;
    return std::clamp(std::exp(-p.OD * s.rho_ge_imag / ref), 0.0, 1.0);
}

std::string to_string(ScanDirection d) { return d == ScanDirection::Positive ? "+" : "-"; }

std::vector<double> DetuningRange::grid() const {
    if (steps < 2) throw std::invalid_argument(fmt::format("steps = {} must be >= 2", steps));
    if (!(start != stop) || !std::isfinite(start) || !std::isfinite(stop)) {
        throw std::invalid_argument("detuning range needs two distinct finite ends");
    }
    const double lo = std::min(start, stop), hi = std::max(start, stop);
    std::vector<double> out(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) out[i] = lo + (hi - lo) * static_cast<double>(i) / (steps - 1);
    out.back() = hi;
    return out;
}

ConvergenceError::ConvergenceError(std::size_t index, double delta_c, double residual)
    : std::runtime_error(fmt::format("no converged steady state at point {} (Delta_c = {}, residual {})",
                                     index, delta_c, residual)),
      index_(index) {}

HysteresisCurve scan_hysteresis(const MeanFieldParams& p, const DetuningRange& range, ScanDirection direction,
                                const SolverOptions& opt) {
    p.validate();
    auto grid = range.grid();
    if (direction == ScanDirection::Negative) std::reverse(grid.begin(), grid.end());
    HysteresisCurve curve{direction, {}};
    curve.points.reserve(grid.size());
    double seed = 0.0;
    if (direction == ScanDirection::Negative) {
        MeanFieldParams first = p;
        first.Delta_c = grid.front();
        const auto roots = self_consistent_roots(first);
        seed = roots.empty() ? 1.0 : roots.back();
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        MeanFieldParams q = p;
        q.Delta_c = grid[i];
        const SteadyState s = steady_state(q, seed, opt);
        if (!s.converged) throw ConvergenceError(i, grid[i], s.residual);
        curve.points.push_back({grid[i], transmission(s, q), s.rho_rr});
        seed = s.rho_rr;
    }
    return curve;
}

HysteresisCurve compose_domains(const std::vector<WeightedDomain>& domains, const DetuningRange& range,
                                ScanDirection direction, Composition mode, const SolverOptions& opt) {
    if (domains.empty()) throw std::invalid_argument("compose_domains: no domains");
    double total = 0.0;
    for (const auto& d : domains) {
        if (!(d.weight > 0.0)) throw std::invalid_argument(fmt::format("domain weight {} must be positive", d.weight));
        total += d.weight;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(fmt::format("domain weights sum to {}, not 1", total));

    HysteresisCurve out = scan_hysteresis(domains.front().params, range, direction, opt);
    if (domains.size() == 1) return out;
    std::vector<double> acc(out.points.size());
    for (std::size_t d = 0; d < domains.size(); ++d) {
        const HysteresisCurve c = d == 0 ? out : scan_hysteresis(domains[d].params, range, direction, opt);
        const double w = domains[d].weight;
        for (std::size_t i = 0; i < acc.size(); ++i) {
            const double T = c.points[i].T;
            if (mode == Composition::Geometric) {
                acc[i] += w * (T > 0.0 ? std::log(T) : -INFINITY);
            } else {
                acc[i] += w * T;
            }
        }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) {
        out.points[i].T = mode == Composition::Geometric ? std::exp(acc[i]) : acc[i];
        out.points[i].rho_rr = std::nan("");
    }
    return out;
}

std::vector<double> direction_difference(const HysteresisCurve& plus, const HysteresisCurve& minus) {
    const std::size_t n = plus.points.size();
    if (minus.points.size() != n) throw std::invalid_argument("curves have different lengths");
    auto ascending = [](const HysteresisCurve& c) {
        std::vector<CurvePoint> pts = c.points;
        if (c.direction == ScanDirection::Negative) std::reverse(pts.begin(), pts.end());
        return pts;
    };
    const auto a = ascending(plus), b = ascending(minus);
    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (a[i].delta_c != b[i].delta_c) throw std::invalid_argument("curves are on different grids");
        diff[i] = a[i].T - b[i].T;
    }
    return diff;
}

MultistabilityMap multistability_map(const MeanFieldParams& base, const std::vector<double>& f_R2_values,
                                     const DetuningRange& range, const MapOptions& options,
                                     const SolverOptions& opt) {
    if (!(options.weight1 > 0.0 && options.weight1 < 1.0)) {
        throw std::invalid_argument(fmt::format("weight1 = {} must lie in (0, 1)", options.weight1));
    }
    MultistabilityMap map;
    map.f_R2 = f_R2_values;
    map.delta_c = range.grid();
    const std::size_t cols = map.delta_c.size();
    map.diff.assign(f_R2_values.size() * cols, 0.0);
    MeanFieldParams d1 = base;
    d1.f_R = options.f_R1;
    d1.validate();
    const int rows = static_cast<int>(f_R2_values.size());
    std::vector<std::string> errors(f_R2_values.size());

#pragma omp parallel for schedule(dynamic) num_threads(options.threads) if (options.threads > 1)
    for (int row = 0; row < rows; ++row) {
        try {
            MeanFieldParams d2 = base;
            d2.f_R = f_R2_values[row];
            const std::vector<WeightedDomain> doms{{d1, options.weight1}, {d2, 1.0 - options.weight1}};
            const auto plus = compose_domains(doms, range, ScanDirection::Positive, options.mode, opt);
            const auto minus = compose_domains(doms, range, ScanDirection::Negative, options.mode, opt);
            const auto diff = direction_difference(plus, minus);
            std::copy(diff.begin(), diff.end(), map.diff.begin() + static_cast<std::ptrdiff_t>(row * cols));
        } catch (const std::exception& e) {
            errors[row] = fmt::format("f_R2 = {}: {}", f_R2_values[row], e.what());
        }
    }
    for (const auto& e : errors) {
        if (!e.empty()) throw std::runtime_error(e);
    }
    return map;
}

std::vector<std::pair<double, double>> bistable_windows(const MeanFieldParams& p, const DetuningRange& range,
                                                        int grid) {
    p.validate();
    if (grid < 2) throw std::invalid_argument("bistable_windows: grid must be >= 2");
    const auto targets = range.grid();
    // Every root x at Δ_c has effective detuning δ = Δ_c − V f_R x with
    // x = ρ_rr(δ), so Δ_c(δ) = δ + V f_R ρ_rr(δ) traces all roots once.
    const double reach = std::abs(p.V * p.f_R);
    const double lo = targets.front() - reach - 1.0, hi = targets.back() + reach + 1.0;
    std::vector<double> dc(static_cast<std::size_t>(grid) + 1);
    for (int k = 0; k <= grid; ++k) {
        const double delta = lo + (hi - lo) * k / grid;
        dc[k] = delta + p.V * p.f_R * std::clamp(ladder_steady_state(p, delta).rho_rr, 0.0, 1.0);
    }
    std::vector<std::pair<double, double>> out;
    bool open = false;
    for (double t : targets) {
        int crossings = 0;
        for (int k = 0; k < grid; ++k) {
            if ((dc[k] - t) * (dc[k + 1] - t) < 0.0 || dc[k] == t) ++crossings;
        }
        const bool multi = crossings >= 3;
        if (multi && !open) out.push_back({t, t});
        if (multi) out.back().second = t;
        open = multi;
    }
    return out;
}

double bistability_onset(const MeanFieldParams& p, const DetuningRange& range, double tol, int grid) {
    auto bistable = [&](double f) {
        MeanFieldParams q = p;
        q.f_R = f;
        return !bistable_windows(q, range, grid).empty();
    };
    if (!bistable(1.0)) return std::nan("");
    double lo = 0.0, hi = 1.0;
    if (bistable(lo)) return 0.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (bistable(mid) ? hi : lo) = mid;
    }
    return hi;
}

std::vector<std::pair<std::size_t, std::size_t>> bands(const std::vector<double>& diff, double threshold) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    bool open = false;
    for (std::size_t i = 0; i < diff.size(); ++i) {
        const bool on = std::abs(diff[i]) > threshold;
        if (on && !open) out.push_back({i, i});
        if (on) out.back().second = i;
        open = on;
    }
    return out;
}

}  // namespace avalanche::optics
