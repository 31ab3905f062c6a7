#include "avalanche/fit/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "avalanche/io/csv.hpp"

namespace avalanche::fit {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Positions of ω in the natural parameter vector.
std::vector<std::size_t> omega_slots(ModelKind kind, std::size_t n) {
    switch (kind) {
        case ModelKind::Tanh: return {3};
        case ModelKind::Gaussian: return {2};
        case ModelKind::MultiTanh: {
            std::vector<std::size_t> out;
            for (std::size_t i = 3; i < n; i += 3) out.push_back(i);
            return out;
        }
    }
    return {};
}

void check_length(ModelKind kind, std::size_t n) {
    const bool ok = kind == ModelKind::Tanh       ? n == 4
                    : kind == ModelKind::Gaussian ? n == 3
                                                  : n >= 4 && (n - 1) % 3 == 0;
    if (!ok) throw std::invalid_argument(fmt::format("{} takes a different parameter count than {}", to_string(kind), n));
}

}  // namespace

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Tanh: return "tanh";
        case ModelKind::MultiTanh: return "multi_tanh";
        case ModelKind::Gaussian: return "gaussian";
    }
    return "?";
}

ModelKind kind_of(const FitModel& m) { return static_cast<ModelKind>(m.index()); }

std::vector<double> to_vector(const FitModel& m) {
    return std::visit(overloaded{
                          [](const Tanh& t) { return std::vector<double>{t.A, t.B, t.C, t.omega}; },
                          [](const Gaussian& g) { return std::vector<double>{g.B, g.C, g.omega}; },
                          [](const MultiTanh& mt) {
                              std::vector<double> v{mt.A};
                              for (const auto& c : mt.components) v.insert(v.end(), {c.B, c.C, c.omega});
                              return v;
                          },
                      },
                      m);
}

FitModel from_vector(ModelKind kind, std::span<const double> p) {
    check_length(kind, p.size());
    switch (kind) {
        case ModelKind::Tanh: return Tanh{p[0], p[1], p[2], p[3]};
        case ModelKind::Gaussian: return Gaussian{p[0], p[1], p[2]};
        case ModelKind::MultiTanh: {
            MultiTanh m{p[0], {}};
            for (std::size_t i = 1; i < p.size(); i += 3) m.components.push_back({p[i], p[i + 1], p[i + 2]});
            return m;
        }
    }
    throw std::invalid_argument("unknown model kind");
}

std::vector<std::string> parameter_names(const FitModel& m) {
    switch (kind_of(m)) {
        case ModelKind::Tanh: return {"A", "B", "C", "omega"};
        case ModelKind::Gaussian: return {"B", "C", "omega"};
        case ModelKind::MultiTanh: {
            std::vector<std::string> out{"A"};
            const auto n = std::get<MultiTanh>(m).components.size();
            for (std::size_t i = 1; i <= n; ++i) {
                out.push_back(fmt::format("B{}", i));
                out.push_back(fmt::format("C{}", i));
                out.push_back(fmt::format("omega{}", i));
            }
            return out;
        }
    }
    return {};
}

double evaluate(const FitModel& m, double x) {
    return std::visit(overloaded{
                          [x](const Tanh& t) { return t.A + t.B * std::tanh((x - t.C) / t.omega); },
                          [x](const Gaussian& g) { return g.B * std::exp(-g.omega * (x - g.C) * (x - g.C)); },
                          [x](const MultiTanh& mt) {
                              double y = mt.A;
                              for (const auto& c : mt.components) y += c.B * std::tanh((x - c.C) / c.omega);
                              return y;
                          },
                      },
                      m);
}

std::vector<double> gradient(const FitModel& m, double x) {
    auto tanh_terms = [x](double B, double C, double w, std::vector<double>& out) {
        const double u = (x - C) / w;
        const double th = std::tanh(u);
        const double sech2 = 1.0 - th * th;
        out.push_back(th);
        out.push_back(-B * sech2 / w);
        out.push_back(-B * sech2 * u / w);
    };
    return std::visit(overloaded{
                          [&](const Tanh& t) {
                              std::vector<double> g{1.0};
                              tanh_terms(t.B, t.C, t.omega, g);
                              return g;
                          },
                          [&](const Gaussian& ga) {
                              const double d = x - ga.C;
                              const double e = std::exp(-ga.omega * d * d);
                              return std::vector<double>{e, 2.0 * ga.B * ga.omega * d * e, -ga.B * d * d * e};
                          },
                          [&](const MultiTanh& mt) {
                              std::vector<double> g{1.0};
                              for (const auto& c : mt.components) tanh_terms(c.B, c.C, c.omega, g);
                              return g;
                          },
                      },
                      m);
}

double FitResult::rms() const {
    return points ? residual_norm / std::sqrt(static_cast<double>(points)) : 0.0;
}

namespace {

void sort_components(FitModel& m) {
    if (auto* mt = std::get_if<MultiTanh>(&m)) {
        std::stable_sort(mt->components.begin(), mt->components.end(),
                         [](const TanhComponent& a, const TanhComponent& b) { return a.C < b.C; });
    }
}

struct Problem {
    ModelKind kind;
    std::span<const double> xs, ys;
    std::vector<std::size_t> omegas;

    // Internal vector q has log ω in the ω slots.
    std::vector<double> natural(const Eigen::VectorXd& q) const {
        std::vector<double> p(q.data(), q.data() + q.size());
        for (auto i : omegas) p[i] = std::exp(q[i]);
        return p;
    }

    bool evaluate(const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
        const auto p = natural(q);
        const FitModel m = from_vector(kind, p);
        const auto n = static_cast<Eigen::Index>(xs.size());
        r.resize(n);
        if (J) J->resize(n, q.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            r[i] = fit::evaluate(m, xs[i]) - ys[i];
            if (!std::isfinite(r[i])) return false;
            if (J) {
                const auto g = gradient(m, xs[i]);
                for (Eigen::Index j = 0; j < q.size(); ++j) (*J)(i, j) = g[j];
                for (auto k : omegas) (*J)(i, k) *= p[k];
            }
        }
        return std::isfinite(r.squaredNorm());
    }
};

// σ² V S⁻² Vᵀ from the SVD of J; directions with negligible singular
// values get infinite variance on every parameter they involve.
std::vector<double> covariance_diagonal(const Eigen::MatrixXd& J, double ssr) {
    const auto n = J.rows(), p = J.cols();
    const double dof = n > p ? static_cast<double>(n - p) : 1.0;
    const double sigma2 = ssr / dof;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(J, Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    const auto& V = svd.matrixV();
    const double cutoff = (s.size() ? s[0] : 0.0) * 1e-10;
    std::vector<double> diag(static_cast<std::size_t>(p), 0.0);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
        for (Eigen::Index j = 0; j < p; ++j) {
            const double v = V(j, k);
            if (s[k] <= cutoff || s[k] == 0.0) {
                if (std::abs(v) > 1e-6) diag[j] = std::numeric_limits<double>::infinity();
            } else {
                diag[j] += sigma2 * v * v / (s[k] * s[k]);
            }
        }
    }
    return diag;
}

}  // namespace

FitResult fit(ModelKind kind, std::span<const double> xs, std::span<const double> ys, std::span<const double> init,
              const FitOptions& opt) {
    check_length(kind, init.size());
    if (xs.size() != ys.size()) {
        throw std::invalid_argument(fmt::format("fit: {} x values but {} y values", xs.size(), ys.size()));
    }
    if (xs.size() < init.size()) {
        throw std::invalid_argument(fmt::format("fit: {} points for {} parameters", xs.size(), init.size()));
    }
    for (double x : xs) {
        if (!std::isfinite(x)) throw std::invalid_argument("fit: non-finite x value");
    }
    Problem prob{kind, xs, ys, omega_slots(kind, init.size())};
    Eigen::VectorXd q = Eigen::Map<const Eigen::VectorXd>(init.data(), static_cast<Eigen::Index>(init.size()));
    for (double v : init) {
        if (!std::isfinite(v)) throw std::invalid_argument("fit: non-finite initial parameter");
    }
    for (auto i : prob.omegas) {
        if (!(init[i] > 0.0)) throw std::invalid_argument(fmt::format("fit: initial omega {} must be positive", init[i]));
        q[i] = std::log(init[i]);
    }

    FitResult res;
    res.points = xs.size();
    Eigen::VectorXd r, r_try;
    Eigen::MatrixXd J;
    if (!prob.evaluate(q, r, &J)) {
        res.model = from_vector(kind, prob.natural(q));
        res.residual_norm = std::numeric_limits<double>::infinity();
        res.covariance_diag.assign(init.size(), std::numeric_limits<double>::infinity());
        res.diagnostics = "residual is not finite at the initial parameters";
        return res;
    }
    double cost = r.squaredNorm();
    res.residual_history.push_back(std::sqrt(cost));
    double lambda = opt.initial_damping;
    std::string stop = "iteration limit reached";
    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd grad = J.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() < opt.tolerance) {
            stop = "gradient below tolerance";
            break;
        }
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        bool accepted = false;
        while (lambda < 1e16) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal() += lambda * JtJ.diagonal();
            const Eigen::VectorXd step = A.completeOrthogonalDecomposition().solve(-grad);
            const Eigen::VectorXd q_try = q + step;
            if (step.allFinite() && prob.evaluate(q_try, r_try, nullptr)) {
                const double cost_try = r_try.squaredNorm();
                if (cost_try <= cost) {
                    const double rel = cost > 0.0 ? (cost - cost_try) / cost : 0.0;
                    q = q_try;
                    cost = cost_try;
                    res.residual_history.push_back(std::sqrt(cost));
                    prob.evaluate(q, r, &J);
                    lambda = std::max(lambda / opt.damping_factor, 1e-12);
                    accepted = true;
                    if (rel < opt.tolerance) stop = "relative cost change below tolerance";
                    break;
                }
            }
            lambda *= opt.damping_factor;
        }
        if (!accepted) {
            stop = "damping limit reached without an improving step";
            break;
        }
        if (stop == "relative cost change below tolerance") break;
    }

    auto p = prob.natural(q);
    res.model = from_vector(kind, p);
    res.residual_norm = std::sqrt(cost);
    const double gnorm = (J.transpose() * r).lpNorm<Eigen::Infinity>();
    res.converged = gnorm < opt.tolerance || stop == "relative cost change below tolerance";
    res.diagnostics = fmt::format("{}; gradient norm {:.3g}", stop, gnorm);

    // Covariance in natural units.
    Eigen::MatrixXd Jn = J;
    for (auto k : prob.omegas) Jn.col(static_cast<Eigen::Index>(k)) /= p[k];
    res.covariance_diag = covariance_diagonal(Jn, cost);

    // Sorting MultiTanh components permutes the variances the same way.
    if (kind == ModelKind::MultiTanh) {
        const std::size_t k = (p.size() - 1) / 3;
        std::vector<std::size_t> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return p[1 + 3 * a + 1] < p[1 + 3 * b + 1]; });
        std::vector<double> cov{res.covariance_diag[0]};
        for (auto i : order) {
            for (int j = 0; j < 3; ++j) cov.push_back(res.covariance_diag[1 + 3 * i + j]);
        }
        res.covariance_diag = std::move(cov);
        sort_components(res.model);
    }
    return res;
}

std::vector<double> derivative(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("derivative: length mismatch");
    if (xs.size() < 3) throw std::invalid_argument("derivative: needs at least 3 points");
    const bool up = xs[1] > xs[0];
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        if (xs[i + 1] == xs[i]) throw std::invalid_argument(fmt::format("duplicate x value {} at index {}", xs[i], i + 1));
        if ((xs[i + 1] > xs[i]) != up) throw std::invalid_argument("x values are not strictly monotone");
    }
    const std::size_t n = xs.size();
    std::vector<double> d(n);
    d[0] = (ys[1] - ys[0]) / (xs[1] - xs[0]);
    d[n - 1] = (ys[n - 1] - ys[n - 2]) / (xs[n - 1] - xs[n - 2]);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (ys[i + 1] - ys[i - 1]) / (xs[i + 1] - xs[i - 1]);
    return d;
}

Susceptibility susceptibility(std::span<const double> xs, std::span<const double> ys) {
    const auto d = derivative(xs, ys);
    const std::size_t n = d.size();
    const bool up = xs[1] > xs[0];
    Susceptibility best{0.0, -1.0};
    for (std::size_t k = 0; k < n; ++k) {
        const std::size_t i = up ? k : n - 1 - k;
        if (std::abs(d[i]) > best.value) best = {xs[i], std::abs(d[i])};
    }
    return best;
}

namespace {

double mean_of(std::span<const double> v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> auto_init(ModelKind kind, std::span<const double> xs, std::span<const double> ys, int components) {
    if (xs.size() != ys.size()) throw std::invalid_argument("auto_init: length mismatch");
    const std::size_t n = xs.size();
    // Sort by x so the heuristics can walk left to right.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return xs[a] < xs[b]; });
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = xs[idx[i]];
        y[i] = ys[idx[i]];
    }
    const auto d = derivative(x, y);
    const double span = x.back() - x.front();
    const double spacing = span / static_cast<double>(n - 1);
    const auto [ymin_it, ymax_it] = std::minmax_element(y.begin(), y.end());

    if (kind == ModelKind::Gaussian) {
        const auto peak = static_cast<std::size_t>(
            std::max_element(y.begin(), y.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }) - y.begin());
        const double B = y[peak];
        // Full width at half maximum: ω = ln 2 / (w/2)².
        std::size_t lo = peak, hi = peak;
        while (lo > 0 && std::abs(y[lo]) > 0.5 * std::abs(B)) --lo;
        while (hi + 1 < n && std::abs(y[hi]) > 0.5 * std::abs(B)) ++hi;
        const double half = std::max(0.5 * (x[hi] - x[lo]), spacing);
        return {B, x[peak], std::log(2.0) / (half * half)};
    }

    const std::size_t edge = std::max<std::size_t>(1, n / 10);
    const double left = mean_of(std::span(y).first(edge));
    const double right = mean_of(std::span(y).last(edge));

    if (kind == ModelKind::Tanh) {
        const double A = 0.5 * (*ymax_it + *ymin_it);
        const double B = (right >= left ? 0.5 : -0.5) * (*ymax_it - *ymin_it);
        const auto steep = susceptibility(x, y);
        // Width between the A ∓ B/2 crossings equals 2·atanh(1/2)·ω.
        auto crossing = [&](double level) {
            for (std::size_t i = 0; i + 1 < n; ++i) {
                if ((y[i] - level) * (y[i + 1] - level) <= 0.0 && y[i] != y[i + 1]) {
                    return x[i] + (level - y[i]) * (x[i + 1] - x[i]) / (y[i + 1] - y[i]);
                }
            }
            return std::nan("");
        };
        double omega = std::abs(crossing(A + 0.5 * B) - crossing(A - 0.5 * B)) / (2.0 * std::atanh(0.5));
        if (!(omega > 0.0) || !std::isfinite(omega)) omega = span / 10.0;
        return {A, B, steep.x, std::max(omega, 0.25 * spacing)};
    }

    if (components < 1) throw std::invalid_argument("auto_init: components must be >= 1");
    // Local maxima of |dy/dx| at least 10% of the largest, two samples apart.
    std::vector<std::size_t> peaks;
    const double dmax = std::abs(*std::max_element(d.begin(), d.end(), [](double a, double b) { return std::abs(a) < std::abs(b); }));
    for (std::size_t i = 0; i < n; ++i) {
        const double v = std::abs(d[i]);
        const bool left_ok = i == 0 || v > std::abs(d[i - 1]);
        const bool right_ok = i + 1 == n || v >= std::abs(d[i + 1]);
        if (left_ok && right_ok && v >= 0.1 * dmax && v > 0.0) peaks.push_back(i);
    }
    std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return std::abs(d[a]) > std::abs(d[b]); });
    std::vector<std::size_t> chosen;
    for (auto p : peaks) {
        if (static_cast<int>(chosen.size()) == components) break;
        const bool separated = std::all_of(chosen.begin(), chosen.end(), [&](auto c) {
            return (p > c ? p - c : c - p) >= 2;
        });
        if (separated) chosen.push_back(p);
    }
    if (static_cast<int>(chosen.size()) < components) {
        throw std::invalid_argument(fmt::format("auto_init: found {} derivative peaks for {} components ({} missing)",
                                                chosen.size(), components, components - static_cast<int>(chosen.size())));
    }
    std::sort(chosen.begin(), chosen.end());
    std::vector<double> out{0.0};
    double sum_B = 0.0;
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        // Each step's rise is measured between the midpoints to its neighbours.
        const std::size_t a = k == 0 ? 0 : (chosen[k - 1] + chosen[k]) / 2;
        const std::size_t b = k + 1 == chosen.size() ? n - 1 : (chosen[k] + chosen[k + 1]) / 2;
        const double B = 0.5 * (y[b] - y[a]);
        const double slope = std::abs(d[chosen[k]]);
        const double omega = slope > 0.0 ? std::max(std::abs(B) / slope, 0.25 * spacing) : span / 10.0;
        out.insert(out.end(), {B, x[chosen[k]], omega});
        sum_B += B;
    }
    out[0] = left + sum_B;
    return out;
}

void write_fit_block(std::ostream& os, const FitResult& r) {
    os << "model = " << to_string(kind_of(r.model)) << '\n';
    const auto names = parameter_names(r.model);
    const auto values = to_vector(r.model);
    for (std::size_t i = 0; i < names.size(); ++i) os << names[i] << " = " << io::format_double(values[i]) << '\n';
    for (std::size_t i = 0; i < names.size() && i < r.covariance_diag.size(); ++i) {
        os << "var_" << names[i] << " = " << io::format_double(r.covariance_diag[i]) << '\n';
    }
    os << "residual_norm = " << io::format_double(r.residual_norm) << '\n';
    os << "rms = " << io::format_double(r.rms()) << '\n';
    os << "points = " << r.points << '\n';
    os << "iterations = " << r.iterations << '\n';
    os << "converged = " << (r.converged ? "true" : "false") << '\n';
    os << "diagnostics = " << r.diagnostics << '\n';
}

}  // namespace avalanche::fit
