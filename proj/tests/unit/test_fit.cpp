#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "avalanche/fit/models.hpp"

using namespace avalanche::fit;

namespace {

std::vector<double> grid(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
    return v;
}

std::vector<double> sample(const FitModel& m, const std::vector<double>& xs) {
    std::vector<double> ys;
    for (double x : xs) ys.push_back(evaluate(m, x));
    return ys;
}

void check_recovered(const FitResult& r, const FitModel& truth, double rel) {
    CHECK(r.converged);
    const auto got = to_vector(r.model);
    const auto want = to_vector(truth);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(std::abs(got[i] - want[i]) <= rel * std::abs(want[i]));
    }
}

}  // namespace

TEST_CASE("parameter vectors round-trip") {
    const FitModel m = MultiTanh{0.1, {{0.2, 0.3, 0.04}, {0.5, 0.6, 0.07}}};
    const auto v = to_vector(m);
    CHECK(v == std::vector<double>{0.1, 0.2, 0.3, 0.04, 0.5, 0.6, 0.07});
    CHECK(to_vector(from_vector(ModelKind::MultiTanh, v)) == v);
    CHECK(parameter_names(m).back() == "omega2");
    CHECK_THROWS_AS(from_vector(ModelKind::Tanh, std::vector<double>{1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(from_vector(ModelKind::MultiTanh, std::vector<double>{1, 2, 3, 4, 5}), std::invalid_argument);
}

TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        const std::vector<FitModel> models{
            Tanh{u(rng), u(rng), u(rng), 0.05 + std::abs(u(rng))},
            MultiTanh{u(rng), {{u(rng), u(rng), 0.05 + std::abs(u(rng))}, {u(rng), u(rng), 0.05 + std::abs(u(rng))}}},
            Gaussian{u(rng), 10 * u(rng), 0.01 + 0.1 * std::abs(u(rng))},
        };
        for (const auto& m : models) {
            const double x = kind_of(m) == ModelKind::Gaussian ? 10 * u(rng) : u(rng);
            const auto analytic = gradient(m, x);
            const auto p = to_vector(m);
            for (std::size_t j = 0; j < p.size(); ++j) {
                const double h = 1e-6 * std::max(1.0, std::abs(p[j]));
                auto hi = p, lo = p;
                hi[j] += h;
                lo[j] -= h;
                const double fd = (evaluate(from_vector(kind_of(m), hi), x) - evaluate(from_vector(kind_of(m), lo), x)) / (2 * h);
                CHECK(std::abs(fd - analytic[j]) <= 1e-6 * std::max(1.0, std::abs(analytic[j])));
            }
        }
    }
}

TEST_CASE("noiseless recovery of the published parameter sets") {
    const auto xs = grid(0.0, 1.0, 50);
    const Tanh t{0.47, 0.47, 0.6, 0.05};
    const auto ys = sample(t, xs);
    check_recovered(fit(ModelKind::Tanh, xs, ys, auto_init(ModelKind::Tanh, xs, ys)), t, 1e-6);

    const auto ts = grid(0.0, 100.0, 101);
    const Gaussian g{0.98, 27.6, 0.0041};
    const auto gs = sample(g, ts);
    check_recovered(fit(ModelKind::Gaussian, ts, gs, auto_init(ModelKind::Gaussian, ts, gs)), g, 1e-6);

    const MultiTanh mt{0.4, {{0.2, 0.4, 0.03}, {0.25, 0.7, 0.05}}};
    const auto ms = sample(mt, xs);
    check_recovered(fit(ModelKind::MultiTanh, xs, ms, auto_init(ModelKind::MultiTanh, xs, ms, 2)), mt, 1e-6);
}

TEST_CASE("accepted steps never increase the residual") {
    const auto xs = grid(0.0, 1.0, 40);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0.0, 0.02);
    auto ys = sample(Tanh{0.3, 0.4, 0.55, 0.08}, xs);
    for (auto& y : ys) y += noise(rng);
    const std::vector<double> bad_init{0.0, 1.0, 0.2, 0.5};
    const auto r = fit(ModelKind::Tanh, xs, ys, bad_init);
    REQUIRE(r.residual_history.size() >= 2);
    for (std::size_t i = 1; i < r.residual_history.size(); ++i) {
        CHECK(r.residual_history[i] <= r.residual_history[i - 1]);
    }
    CHECK(r.residual_history.back() == r.residual_norm);
}

TEST_CASE("one-component multi-tanh equals the tanh fit") {
    const auto xs = grid(0.0, 1.0, 30);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.01);
    auto ys = sample(Tanh{0.2, 0.3, 0.45, 0.07}, xs);
    for (auto& y : ys) y += noise(rng);
    const auto init = auto_init(ModelKind::Tanh, xs, ys);
    const auto a = fit(ModelKind::Tanh, xs, ys, init);
    const auto b = fit(ModelKind::MultiTanh, xs, ys, init);
    const auto pa = to_vector(a.model), pb = to_vector(b.model);
    for (std::size_t i = 0; i < 4; ++i) CHECK(pb[i] == doctest::Approx(pa[i]).epsilon(1e-7));
}

TEST_CASE("flat data: B vanishes and C is flagged") {
    const auto xs = grid(0.0, 1.0, 25);
    const std::vector<double> ys(25, 0.5);
    const auto r = fit(ModelKind::Tanh, xs, ys, auto_init(ModelKind::Tanh, xs, ys));
    CHECK(r.converged);
    const auto& t = std::get<Tanh>(r.model);
    CHECK(t.A == doctest::Approx(0.5));
    CHECK(std::abs(t.B) < 1e-9);
    CHECK(r.covariance_diag[2] > 1e6);

    // A start away from B = 0 must not abort either.
    const std::vector<double> init{0.4, 0.1, 0.5, 0.1};
    const auto r2 = fit(ModelKind::Tanh, xs, ys, init);
    CHECK(std::get<Tanh>(r2.model).A + std::get<Tanh>(r2.model).B * std::tanh(0.0) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(r2.residual_norm < 1e-4);
}

TEST_CASE("fit argument errors") {
    const auto xs = grid(0.0, 1.0, 5);
    const std::vector<double> ys(4, 0.0);
    const std::vector<double> init{0, 1, 0.5, 0.1};
    CHECK_THROWS_AS(fit(ModelKind::Tanh, xs, ys, init), std::invalid_argument);
    const std::vector<double> three{0.0, 0.5, 1.0}, y3(3, 0.0);
    CHECK_THROWS_AS(fit(ModelKind::Tanh, three, y3, init), std::invalid_argument);
    const std::vector<double> y5(5, 0.0), neg{0, 1, 0.5, -0.1};
    CHECK_THROWS_AS(fit(ModelKind::Tanh, xs, y5, neg), std::invalid_argument);
    const std::vector<double> xnan{0.0, 0.1, NAN, 0.3, 0.4};
    CHECK_THROWS_AS(fit(ModelKind::Tanh, xnan, y5, init), std::invalid_argument);
    const std::vector<double> nan_init{0, NAN, 0.5, 0.1};
    CHECK_THROWS_AS(fit(ModelKind::Tanh, xs, y5, nan_init), std::invalid_argument);
}

TEST_CASE("non-finite model values give a diagnostic, not an abort") {
    const auto xs = grid(0.0, 1.0, 10);
    const std::vector<double> ys(10, 1.0);
    const std::vector<double> init{1e200, 0.0, 1e-3};
    const auto r = fit(ModelKind::Gaussian, xs, ys, init);
    CHECK_FALSE(r.converged);
    CHECK(!r.diagnostics.empty());
}

TEST_CASE("noise robustness of the tanh centre") {
    const auto xs = grid(0.0, 1.0, 21);
    const Tanh truth{0.47, 0.47, 0.6, 0.05};
    const auto clean = sample(truth, xs);
    int good = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(1000 + trial);
        std::normal_distribution<double> noise(0.0, 0.01);
        auto ys = clean;
        for (auto& y : ys) y += noise(rng);
        const auto r = fit(ModelKind::Tanh, xs, ys, auto_init(ModelKind::Tanh, xs, ys));
        good += std::abs(std::get<Tanh>(r.model).C - 0.6) < 0.02;
    }
    CHECK(good >= 95);
}

TEST_CASE("auto_init heuristics") {
    const auto xs = grid(0.0, 1.0, 41);
    const auto step = sample(Tanh{0.0, 1.0, 0.5, 0.1}, xs);
    const auto ti = auto_init(ModelKind::Tanh, xs, step);
    CHECK(std::abs(ti[2] - 0.5) <= 0.025);
    CHECK(ti[3] > 0.0);

    const auto two = sample(MultiTanh{0.5, {{0.2, 0.4, 0.03}, {0.2, 0.7, 0.03}}}, xs);
    const auto mi = auto_init(ModelKind::MultiTanh, xs, two, 2);
    CHECK(std::abs(mi[2] - 0.4) <= 0.05);
    CHECK(std::abs(mi[5] - 0.7) <= 0.05);

    const auto ts = grid(0.0, 100.0, 101);
    const auto gs = sample(Gaussian{0.98, 27.6, 0.0041}, ts);
    const auto gi = auto_init(ModelKind::Gaussian, ts, gs);
    CHECK(std::abs(gi[1] - 27.6) <= 1.0);

    try {
        auto_init(ModelKind::MultiTanh, xs, two, 4);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("found 2") != std::string::npos);
        CHECK(msg.find("2 missing") != std::string::npos);
    }
}

TEST_CASE("susceptibility") {
    const auto xs = grid(0.0, 1.0, 11);
    const auto s = susceptibility(xs, xs);
    CHECK(s.value == 1.0);
    CHECK(s.x == 0.0);

    const auto dense = grid(0.0, 1.0, 2001);
    const auto ys = sample(Tanh{0.0, 1.0, 0.5, 0.1}, dense);
    const auto t = susceptibility(dense, ys);
    CHECK(t.x == doctest::Approx(0.5));
    CHECK(t.value == doctest::Approx(10.0).epsilon(1e-5));

    const std::vector<double> rev{1.0, 0.5, 0.0};
    const std::vector<double> ry{2.0, 1.0, 0.0};
    CHECK(susceptibility(rev, ry).x == 0.0);

    const std::vector<double> dup{0.0, 0.5, 0.5, 1.0};
    const std::vector<double> dy{0.0, 1.0, 2.0, 3.0};
    CHECK_THROWS_AS(susceptibility(dup, dy), std::invalid_argument);
    const std::vector<double> zig{0.0, 0.5, 0.2};
    CHECK_THROWS_AS(susceptibility(zig, std::vector<double>{0.0, 1.0, 2.0}), std::invalid_argument);
    CHECK_THROWS_AS(susceptibility(std::vector<double>{0.0, 1.0}, std::vector<double>{0.0, 1.0}), std::invalid_argument);
}

TEST_CASE("derivative peaks of a two-jump curve sit at the fitted centres") {
    const auto xs = grid(-30.0, 0.0, 301);
    const auto ys = sample(MultiTanh{0.5, {{0.15, -20.0, 0.3}, {0.2, -12.0, 0.5}}}, xs);
    const auto init = auto_init(ModelKind::MultiTanh, xs, ys, 2);
    const auto r = fit(ModelKind::MultiTanh, xs, ys, init);
    const auto& comps = std::get<MultiTanh>(r.model).components;
    const double spacing = xs[1] - xs[0];
    for (const auto& c : comps) {
        // Largest |dy/dx| within ±3 of the fitted centre.
        std::vector<double> wx, wy;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (std::abs(xs[i] - c.C) < 3.0) {
                wx.push_back(xs[i]);
                wy.push_back(ys[i]);
            }
        }
        CHECK(std::abs(susceptibility(wx, wy).x - c.C) <= spacing);
    }
}

TEST_CASE("fit block") {
    FitResult r;
    r.model = Tanh{0.5, 0.25, 0.6, 0.05};
    r.residual_norm = 0.0;
    r.points = 4;
    r.iterations = 3;
    r.converged = true;
    r.covariance_diag = {0.0, 0.0, 0.0, 0.0};
    r.diagnostics = "gradient below tolerance";
    std::ostringstream os;
    write_fit_block(os, r);
    const std::string s = os.str();
    CHECK(s.rfind("model = tanh\nA = 0.5\nB = 0.25\nC = 0.59999999999999998\nomega = 0.050000000000000003\n", 0) == 0);
    CHECK(s.find("converged = true\n") != std::string::npos);
}
