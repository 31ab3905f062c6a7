#include "avalanche/epidemic/params.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace avalanche::epidemic {

EpidemicParams EpidemicParams::sis_preset() {
    EpidemicParams p;
    p.beta = kSisBeta;
    p.mu = 0.01;
    p.gamma = 0.0;
    p.seeding = SeedPolicy::threshold_excess();
    return p;
}

EpidemicParams EpidemicParams::sir_preset() {
    EpidemicParams p;
    p.beta = 0.95;
    p.mu = 0.0;
    p.gamma = 0.2;
    p.seeding = SeedPolicy::left_edge();
    return p;
}

std::vector<std::string> EpidemicParams::problems() const {
    std::vector<std::string> out;
    auto unit = [&](double v, const char* name) {
        if (!(v >= 0.0 && v <= 1.0)) out.push_back(fmt::format("{} = {} not in [0, 1]", name, v));
    };
    if (m <= 0) out.push_back(fmt::format("m = {} must be positive", m));
    unit(f_R, "f_R");
    unit(f_Rc, "f_Rc");
    unit(beta, "beta");
    unit(mu, "mu");
    unit(gamma, "gamma");
    if (gamma + mu > 1.0) {
        out.push_back(fmt::format("gamma + mu = {} exceeds 1 (gamma = {}, mu = {})", gamma + mu,
                                  gamma, mu));
    }
    if (iterations < 0) out.push_back(fmt::format("iterations = {} must be >= 0", iterations));
    if (replicates <= 0) out.push_back(fmt::format("replicates = {} must be positive", replicates));
    if (seeding.kind == SeedKind::Explicit) {
        for (const Coord& c : seeding.cells) {
            if (c.row < 0 || c.col < 0 || c.row >= m || c.col >= m) {
                out.push_back(fmt::format("explicit seed ({}, {}) outside {}x{} grid", c.row,
                                          c.col, m, m));
            }
        }
    }
    return out;
}

void EpidemicParams::validate() const {
    const auto p = problems();
    if (p.empty()) return;
    std::string msg = "invalid epidemic parameters:";
    for (const auto& s : p) msg += "\n  " + s;
    throw std::invalid_argument(msg);
}

DomainLayout DomainLayout::stripes(int m, const std::vector<double>& offsets) {
    DomainLayout layout;
    const int n = static_cast<int>(offsets.size());
    if (n == 0) return layout;
    if (n > m) throw std::invalid_argument("more stripes than columns");
    const int width = m / n;
    for (int i = 0; i < n; ++i) {
        const int col = i * width;
        const int cols = i + 1 == n ? m - col : width;
        layout.domains.push_back({Rect{0, col, m, cols}, offsets[i]});
    }
    return layout;
}

void DomainLayout::validate(int m) const {
    for (std::size_t i = 0; i < domains.size(); ++i) {
        const Rect& r = domains[i].region;
        if (r.rows <= 0 || r.cols <= 0 || r.row < 0 || r.col < 0 || r.row + r.rows > m ||
            r.col + r.cols > m) {
            throw std::invalid_argument(fmt::format("domain {} region outside the {}x{} grid", i, m, m));
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (r.overlaps(domains[j].region)) {
                throw std::invalid_argument(fmt::format("domains {} and {} overlap", j, i));
            }
        }
    }
}

double DomainLayout::local_fraction(double base, int row, int col) const noexcept {
    for (const Domain& d : domains) {
        if (d.region.contains(row, col)) return std::clamp(base + d.f_R_offset, 0.0, 1.0);
    }
    return base;
}

double local_fraction(const DensityLandscape& land, double base, int m, int row, int col) {
    if (const auto* layout = std::get_if<DomainLayout>(&land)) {
        return layout->local_fraction(base, row, col);
    }
    if (const auto* g = std::get_if<DensityGradient>(&land)) {
        if (m == 1) return g->start;
        return g->start + (g->end - g->start) * static_cast<double>(col) / (m - 1);
    }
    return base;
}

}  // namespace avalanche::epidemic
