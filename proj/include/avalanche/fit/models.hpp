#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace avalanche::fit {

/// A + B·tanh((x − C)/ω)
struct Tanh {
    double A = 0.0, B = 0.0, C = 0.0, omega = 1.0;
};

struct TanhComponent {
    double B = 0.0, C = 0.0, omega = 1.0;
};

/// A + Σ B_i·tanh((x − C_i)/ω_i); components sorted by C ascending after a fit.
struct MultiTanh {
    double A = 0.0;
    std::vector<TanhComponent> components;
};

/// B·exp(−ω (t − C)²)
struct Gaussian {
    double B = 0.0, C = 0.0, omega = 1.0;
};

using FitModel = std::variant<Tanh, MultiTanh, Gaussian>;

enum class ModelKind : std::uint8_t { Tanh, MultiTanh, Gaussian };
std::string to_string(ModelKind k);
ModelKind kind_of(const FitModel& m);

/// Natural-unit parameter vector: Tanh [A, B, C, ω]; MultiTanh
/// [A, B_1, C_1, ω_1, ...]; Gaussian [B, C, ω].
std::vector<double> to_vector(const FitModel& m);
/// Inverse of to_vector; throws std::invalid_argument on a bad length.
FitModel from_vector(ModelKind kind, std::span<const double> p);
std::vector<std::string> parameter_names(const FitModel& m);

double evaluate(const FitModel& m, double x);
/// d model / d parameter in natural units, same order as to_vector.
std::vector<double> gradient(const FitModel& m, double x);

struct FitResult {
    FitModel model;
    double residual_norm = 0.0;  ///< sqrt(Σ r²)
    int iterations = 0;
    bool converged = false;
    std::vector<double> covariance_diag;  ///< +inf where the data do not pin a parameter
    std::string diagnostics;
    std::size_t points = 0;
    std::vector<double> residual_history;  ///< residual norm at start and after each accepted step

    double rms() const;  ///< residual_norm / sqrt(points)
};

struct FitOptions {
    double initial_damping = 1e-3;
    double damping_factor = 10.0;
    int max_iterations = 200;
    double tolerance = 1e-10;  ///< relative cost change and gradient norm
};

/// Levenberg–Marquardt with analytic Jacobians; ω is fitted as log ω.
/// Never throws on numerical trouble: returns converged = false with
/// diagnostics. Throws std::invalid_argument on malformed input
/// (length mismatch, too few points, non-finite x, ω ≤ 0 in `init`).
FitResult fit(ModelKind kind, std::span<const double> xs, std::span<const double> ys,
              std::span<const double> init, const FitOptions& opt = {});

/// Heuristic starting point. `components` only applies to MultiTanh.
/// Throws std::invalid_argument when fewer derivative peaks than
/// components are found.
std::vector<double> auto_init(ModelKind kind, std::span<const double> xs, std::span<const double> ys,
                              int components = 1);

struct Susceptibility {
    double x = 0.0;
    double value = 0.0;  ///< max |dy/dx|
};

/// Central differences inside, one-sided at the ends; ties go to the
/// smallest x. Needs ≥ 3 points with strictly monotone x.
Susceptibility susceptibility(std::span<const double> xs, std::span<const double> ys);

/// Numerical derivative used by `susceptibility`, in input order.
std::vector<double> derivative(std::span<const double> xs, std::span<const double> ys);

/// "key = value" lines: model, parameters, variances, residual, convergence.
void write_fit_block(std::ostream& os, const FitResult& r);

}  // namespace avalanche::fit
