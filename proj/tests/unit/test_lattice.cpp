#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "../support/lattice_oracles.hpp"
#include "avalanche/lattice/counter_rng.hpp"
#include "avalanche/lattice/grid.hpp"
#include "avalanche/lattice/pgm.hpp"
#include "avalanche/lattice/step.hpp"

using namespace avalanche::lattice;
using avalanche::testing::bfs_deterministic_limit;
using avalanche::testing::legal_transition;
using avalanche::testing::random_grid;

namespace {

std::vector<KernelKind> kernels() {
    std::vector<KernelKind> out{KernelKind::Scalar};
    if (kernel_available(KernelKind::Avx2)) out.push_back(KernelKind::Avx2);
    return out;
}

}  // namespace

TEST_CASE("moore_neighbors corner, edge and interior") {
    const auto corner = moore_neighbors({0, 0}, 100);
    CHECK(corner == std::vector<Coord>{{0, 1}, {1, 0}, {1, 1}});
    CHECK(moore_neighbors({0, 5}, 100).size() == 5);
    const auto interior = moore_neighbors({50, 50}, 100);
    CHECK(interior.size() == 8);
    CHECK(std::find(interior.begin(), interior.end(), Coord{50, 50}) == interior.end());
    CHECK(std::set<Coord>(interior.begin(), interior.end()).size() == 8);
    CHECK_THROWS_AS(moore_neighbors({100, 0}, 100), std::out_of_range);
    CHECK_THROWS_AS(moore_neighbors({-1, 3}, 100), std::out_of_range);
}

TEST_CASE("counts on simple grids") {
    Grid g(10, 1);
    auto f = counts(g);
    CHECK(f.susceptible == 1.0);
    CHECK(f.infected == 0.0);
    CHECK(f.depleted == 0.0);

    for (int i = 0; i < 4; ++i) g.set(i, i, CellState::Infected);
    f = counts(g);
    CHECK(f.susceptible == doctest::Approx(0.96).epsilon(1e-15));
    CHECK(f.infected == doctest::Approx(0.04).epsilon(1e-15));
    CHECK(f.depleted == 0.0);
    CHECK(count_states(g).total() == g.size());
}

TEST_CASE("StepParams validation") {
    const StepParams ok{0.5, 0.5, 0.5};
    const StepParams too_much_exit{0.5, 0.6, 0.5};
    const StepParams bad_beta{1.5, 0.0, 0.0};
    CHECK_NOTHROW(ok.validate());
    CHECK_THROWS_AS(too_much_exit.validate(), std::invalid_argument);
    CHECK_THROWS_AS(bad_beta.validate(), std::invalid_argument);
    try {
        too_much_exit.validate();
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("gamma") != std::string::npos);
        CHECK(msg.find("mu") != std::string::npos);
    }
}

TEST_CASE("probability thresholds map the endpoints exactly") {
    CHECK(probability_threshold(0.0) == 0);
    CHECK(probability_threshold(1.0) == kUniformRange);
    CHECK(uniform30(0xFFFFFFFFu) == kUniformRange - 1);
    CHECK_THROWS(probability_threshold(-0.1));
}

TEST_CASE("single interior seed infects its 3x3 block in one step") {
    for (KernelKind k : kernels()) {
        Grid g(5, 7);
        g.set(2, 2, CellState::Infected);
        const Grid next = step(g, {1.0, 0.0, 0.0}, {k, 1});
        CHECK(next.iteration() == 1);
        CHECK(count_states(next).infected == 9);
        for (int r = 1; r <= 3; ++r)
            for (int c = 1; c <= 3; ++c) CHECK(next.at(r, c) == CellState::Infected);
    }
}

TEST_CASE("5x5 deterministic limit with absorbing edge, two steps") {
    // Hand simulation: step 1 infects the 3x3 block around (2,2); step 2
    // reaches all 16 ring cells, which are removed by the absorbing edge.
    for (KernelKind k : kernels()) {
        Grid g(5, 99);
        g.set(2, 2, CellState::Infected);
        Grid two = step(step(g, {1.0, 0.0, 0.0}, {k, 1}), {1.0, 0.0, 0.0}, {k, 1});
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) {
                const bool interior = r >= 1 && r <= 3 && c >= 1 && c <= 3;
                CHECK(two.at(r, c) == (interior ? CellState::Infected : CellState::Depleted));
            }
        }
        CHECK(two == bfs_deterministic_limit(g, 2, BoundaryPolicy::AbsorbingEdge));
    }
}

TEST_CASE("beta = 0 never spreads") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        Grid g = random_grid(rng, 17, 0.2, 0.3, trial);
        const StepParams p{0.0, 0.1, 0.1};
        for (int t = 0; t < 5; ++t) {
            Grid next = step(g, p);
            for (std::size_t i = 0; i < g.size(); ++i) {
                if (g.cells()[i] == CellState::Susceptible)
                    CHECK(next.cells()[i] == CellState::Susceptible);
            }
            CHECK(count_states(next).infected <= count_states(g).infected);
            g = next;
        }
    }
}

TEST_CASE("deterministic limit matches the BFS oracle") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> side(3, 20);
    std::uniform_int_distribution<int> steps(0, 12);
    for (int trial = 0; trial < 60; ++trial) {
        const BoundaryPolicy b = trial % 2 ? BoundaryPolicy::Periodic : BoundaryPolicy::AbsorbingEdge;
        const Grid g = random_grid(rng, side(rng), 0.3, 0.02, rng());
        const int t = steps(rng);
        for (KernelKind k : kernels()) {
            Grid cur = g;
            for (int i = 0; i < t; ++i) cur = step(cur, {1.0, 0.0, 0.0, b}, {k, 1});
            CHECK(cur == bfs_deterministic_limit(g, t, b));
        }
    }
}

TEST_CASE("scalar and AVX2 kernels are bit-identical") {
    if (!kernel_available(KernelKind::Avx2)) return;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int side : {1, 2, 3, 7, 8, 9, 15, 16, 17, 31, 33, 64, 100}) {
        for (int trial = 0; trial < 8; ++trial) {
            const double gamma = 0.5 * u(rng);
            const StepParams p{u(rng), (1.0 - gamma) * u(rng), gamma,
                               trial % 2 ? BoundaryPolicy::Periodic : BoundaryPolicy::AbsorbingEdge};
            Grid a = random_grid(rng, side, 0.2, 0.3, rng());
            Grid b = a;
            for (int t = 0; t < 6; ++t) {
                a = step(a, p, {KernelKind::Scalar, 1});
                b = step(b, p, {KernelKind::Avx2, 1});
                REQUIRE(a == b);
            }
        }
    }
}

TEST_CASE("thread count does not change the result") {
    std::mt19937_64 rng(8);
    Grid a = random_grid(rng, 64, 0.1, 0.05, 1234);
    Grid b = a;
    const StepParams p{0.4, 0.05, 0.1};
    for (int t = 0; t < 20; ++t) {
        a = step(a, p, {KernelKind::Scalar, 1});
        b = step(b, p, {default_kernel(), 4});
    }
    CHECK(a == b);
}

TEST_CASE("conservation, legality and SIR monotonicity over random steps") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 40; ++trial) {
        const double gamma = u(rng);
        const bool sir = trial % 3 == 0;
        const StepParams p{u(rng), sir ? 0.0 : (1.0 - gamma) * u(rng), gamma,
                           trial % 2 ? BoundaryPolicy::Periodic : BoundaryPolicy::AbsorbingEdge};
        Grid g = random_grid(rng, 12 + trial % 9, 0.25, 0.25, rng());
        for (int t = 0; t < 10; ++t) {
            const Grid next = step(g, p);
            CHECK(count_states(next).total() == next.size());
            const int m = g.side();
            for (int r = 0; r < m; ++r) {
                for (int c = 0; c < m; ++c) {
                    const bool ring = p.boundary == BoundaryPolicy::AbsorbingEdge &&
                                      (r == 0 || c == 0 || r == m - 1 || c == m - 1);
                    CHECK(legal_transition(g.at(r, c), next.at(r, c), ring));
                }
            }
            if (sir) {
                CHECK(count_states(next).susceptible <= count_states(g).susceptible);
                CHECK(count_states(next).depleted >= count_states(g).depleted);
            }
            g = next;
        }
    }
}

TEST_CASE("absorbing edge leaves no infected cell on the ring") {
    std::mt19937_64 rng(2);
    Grid g = random_grid(rng, 20, 0.0, 0.5, 77);
    g = step(g, {0.9, 0.0, 0.0});
    for (int i = 0; i < 20; ++i) {
        CHECK(g.at(0, i) != CellState::Infected);
        CHECK(g.at(19, i) != CellState::Infected);
        CHECK(g.at(i, 0) != CellState::Infected);
        CHECK(g.at(i, 19) != CellState::Infected);
    }
}

TEST_CASE("per-contact infection and exit probabilities") {
    // Periodic grid of 3x3 tiles: centre S, k of the 8 surrounding cells I.
    const int tiles = 60;
    const int m = 3 * tiles;
    for (int k : {1, 2, 5}) {
        Grid g(m, 1000 + k, CellState::Depleted);
        const Coord ring[8] = {{0, 0}, {0, 1}, {0, 2}, {1, 0}, {1, 2}, {2, 0}, {2, 1}, {2, 2}};
        for (int tr = 0; tr < tiles; ++tr) {
            for (int tc = 0; tc < tiles; ++tc) {
                g.set(3 * tr + 1, 3 * tc + 1, CellState::Susceptible);
                for (int j = 0; j < k; ++j)
                    g.set(3 * tr + ring[j].row, 3 * tc + ring[j].col, CellState::Infected);
            }
        }
        const double beta = 0.3;
        const Grid next = step(g, {beta, 0.0, 0.0, BoundaryPolicy::Periodic});
        int infected = 0;
        for (int tr = 0; tr < tiles; ++tr)
            for (int tc = 0; tc < tiles; ++tc)
                infected += next.at(3 * tr + 1, 3 * tc + 1) == CellState::Infected;
        const double n = tiles * tiles;
        const double p = 1.0 - std::pow(1.0 - beta, k);
        CHECK(std::abs(infected / n - p) < 5.0 * std::sqrt(p * (1 - p) / n));
    }

    Grid g(150, 4, CellState::Infected);
    const Grid next = step(g, {0.0, 0.3, 0.2, BoundaryPolicy::Periodic});
    const auto f = counts(next);
    const double n = 150.0 * 150.0;
    CHECK(std::abs(f.depleted - 0.2) < 5.0 * std::sqrt(0.2 * 0.8 / n));
    CHECK(std::abs(f.susceptible - 0.3) < 5.0 * std::sqrt(0.3 * 0.7 / n));
}

TEST_CASE("PGM snapshot round trip") {
    std::mt19937_64 rng(9);
    Grid g = random_grid(rng, 13, 0.3, 0.3, 4242);
    g.set_iteration(17);
    std::ostringstream out;
    write_pgm(out, g);
    CHECK(out.str().rfind("P2\n13 13\n2\n", 0) == 0);
    std::istringstream in(out.str());
    CHECK(read_pgm(in, sidecar_line(g)) == g);

    std::istringstream bad("P2\n2 2\n2\n0 1 3 1\n");
    CHECK_THROWS_AS(read_pgm(bad, "m 2 iteration 0 seed 1"), std::runtime_error);
}
