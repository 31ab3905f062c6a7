#include "avalanche/cli/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "avalanche/epidemic/engine.hpp"
#include "avalanche/io/csv.hpp"

namespace avalanche::cli {

namespace {

using Kinds = std::vector<ExperimentKind>;
using Errors = std::vector<std::string>;

const Kinds kEpidemicKinds{ExperimentKind::SisScan, ExperimentKind::SirRun, ExperimentKind::GradientSnapshot,
                           ExperimentKind::MultiDomainScan};
const Kinds kScanKinds{ExperimentKind::SisScan, ExperimentKind::MultiDomainScan};
const Kinds kOpticsKinds{ExperimentKind::Hysteresis, ExperimentKind::MultistabilityMap};

struct Key {
    std::string section;  ///< empty for top-level keys
    std::string name;
    std::string range;
    Kinds kinds;  ///< empty: every kind
    std::function<void(ExperimentConfig&, const YAML::Node&, const std::string& path, Errors&)> set;
    std::function<std::string(const ExperimentConfig&)> get;

    std::string path() const { return section.empty() ? name : section + "." + name; }
    bool applies(ExperimentKind k) const {
        return kinds.empty() || std::find(kinds.begin(), kinds.end(), k) != kinds.end();
    }
};

std::string num(double v) { return io::format_double(v); }

std::string yaml_quoted(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + '"';
}

std::string num_list(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + num(v[i]);
    return out + "]";
}

std::string scalar_text(const YAML::Node& n) {
    if (n.IsScalar()) return n.Scalar();
    std::ostringstream os;
    os << n;
    return os.str();
}

template <class T>
std::optional<T> convert(const YAML::Node& n, const std::string& path, const char* what, Errors& errors) {
    if (n.IsScalar()) {
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
        }
    }
    errors.push_back(fmt::format("{}: expected {}, got '{}'", path, what, scalar_text(n)));
    return std::nullopt;
}

using DoubleRef = std::function<double&(ExperimentConfig&)>;
using IntRef = std::function<int&(ExperimentConfig&)>;

Key number(std::string section, std::string name, Kinds kinds, DoubleRef ref, double lo, double hi,
           std::string range) {
    Key k{std::move(section), std::move(name), std::move(range), std::move(kinds), {}, {}};
    k.set = [ref, lo, hi, range = k.range](ExperimentConfig& c, const YAML::Node& n, const std::string& path,
                                           Errors& e) {
        const auto v = convert<double>(n, path, "a number", e);
        if (!v) return;
        if (!std::isfinite(*v) || *v < lo || *v > hi) {
            e.push_back(fmt::format("{} = {} out of range {}", path, *v, range));
            return;
        }
        ref(c) = *v;
    };
    k.get = [ref](const ExperimentConfig& c) { return num(ref(const_cast<ExperimentConfig&>(c))); };
    return k;
}

Key integer(std::string section, std::string name, Kinds kinds, IntRef ref, long long lo, long long hi) {
    const std::string range = hi == std::numeric_limits<int>::max() ? fmt::format("integer >= {}", lo)
                                                                    : fmt::format("integer in [{}, {}]", lo, hi);
    Key k{std::move(section), std::move(name), range, std::move(kinds), {}, {}};
    k.set = [ref, lo, hi, range](ExperimentConfig& c, const YAML::Node& n, const std::string& path, Errors& e) {
        const auto v = convert<long long>(n, path, "an integer", e);
        if (!v) return;
        if (*v < lo || *v > hi) {
            e.push_back(fmt::format("{} = {} out of range {}", path, *v, range));
            return;
        }
        ref(c) = static_cast<int>(*v);
    };
    k.get = [ref](const ExperimentConfig& c) { return std::to_string(ref(const_cast<ExperimentConfig&>(c))); };
    return k;
}

template <class T>
Key choice(std::string section, std::string name, Kinds kinds, std::function<T&(ExperimentConfig&)> ref,
           std::vector<std::pair<std::string, T>> options) {
    std::string range = "one of";
    for (std::size_t i = 0; i < options.size(); ++i) range += (i ? ", " : " ") + options[i].first;
    Key k{std::move(section), std::move(name), range, std::move(kinds), {}, {}};
    k.set = [ref, options, range](ExperimentConfig& c, const YAML::Node& n, const std::string& path, Errors& e) {
        const auto v = convert<std::string>(n, path, "a name", e);
        if (!v) return;
        for (const auto& [label, value] : options) {
            if (label == *v) {
                ref(c) = value;
                return;
            }
        }
        e.push_back(fmt::format("{} = '{}' is not {}", path, *v, range));
    };
    k.get = [ref, options](const ExperimentConfig& c) {
        const T& v = ref(const_cast<ExperimentConfig&>(c));
        for (const auto& [label, value] : options) {
            if (value == v) return label;
        }
        return std::string("?");
    };
    return k;
}

Key text(std::string section, std::string name, Kinds kinds, std::function<std::string&(ExperimentConfig&)> ref,
         std::string range) {
    Key k{std::move(section), std::move(name), std::move(range), std::move(kinds), {}, {}};
    k.set = [ref](ExperimentConfig& c, const YAML::Node& n, const std::string& path, Errors& e) {
        if (const auto v = convert<std::string>(n, path, "a string", e)) ref(c) = *v;
    };
    k.get = [ref](const ExperimentConfig& c) { return yaml_quoted(ref(const_cast<ExperimentConfig&>(c))); };
    return k;
}

Key number_list(std::string section, std::string name, Kinds kinds,
                std::function<std::vector<double>&(ExperimentConfig&)> ref, double lo, double hi, std::string range) {
    Key k{std::move(section), std::move(name), "list of numbers in " + range, std::move(kinds), {}, {}};
    k.set = [ref, lo, hi, range](ExperimentConfig& c, const YAML::Node& n, const std::string& path, Errors& e) {
        if (!n.IsSequence()) {
            e.push_back(fmt::format("{}: expected a list, got '{}'", path, scalar_text(n)));
            return;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const std::string item = fmt::format("{}[{}]", path, i);
            const auto v = convert<double>(n[i], item, "a number", e);
            if (!v) {
                ok = false;
            } else if (!std::isfinite(*v) || *v < lo || *v > hi) {
                e.push_back(fmt::format("{} = {} out of range {}", item, *v, range));
                ok = false;
            } else {
                out.push_back(*v);
            }
        }
        if (ok) ref(c) = std::move(out);
    };
    k.get = [ref](const ExperimentConfig& c) { return num_list(ref(const_cast<ExperimentConfig&>(c))); };
    return k;
}

Key seed_key() {
    Key k{"", "seed", "unsigned 64-bit integer", {}, {}, {}};
    k.set = [](ExperimentConfig& c, const YAML::Node& n, const std::string& path, Errors& e) {
        const std::string s = n.IsScalar() ? n.Scalar() : scalar_text(n);
        try {
            std::size_t used = 0;
            if (s.empty() || s[0] == '-') throw std::invalid_argument(s);
            const auto v = std::stoull(s, &used, 10);
            if (used != s.size()) throw std::invalid_argument(s);
            c.seed = v;
        } catch (const std::exception&) {
            e.push_back(fmt::format("{}: expected an unsigned 64-bit integer, got '{}'", path, s));
        }
    };
    k.get = [](const ExperimentConfig& c) { return std::to_string(c.seed); };
    return k;
}

Key seed_cells_key() {
    Key k{"epidemic", "seed_cells", "list of [row, col] inside the grid (seeding = explicit)", kEpidemicKinds, {}, {}};
    k.set = [](ExperimentConfig& c, const YAML::Node& n, const std::string& path, Errors& e) {
        if (!n.IsSequence()) {
            e.push_back(fmt::format("{}: expected a list of [row, col]", path));
            return;
        }
        std::vector<lattice::Coord> cells;
        for (std::size_t i = 0; i < n.size(); ++i) {
            const std::string item = fmt::format("{}[{}]", path, i);
            if (!n[i].IsSequence() || n[i].size() != 2) {
                e.push_back(fmt::format("{}: expected [row, col]", item));
                continue;
            }
            const auto r = convert<int>(n[i][0], item, "an integer row", e);
            const auto col = convert<int>(n[i][1], item, "an integer column", e);
            if (r && col) cells.push_back({*r, *col});
        }
        c.epidemic.seeding.cells = std::move(cells);
    };
    k.get = [](const ExperimentConfig& c) {
        std::string out = "[";
        const auto& cells = c.epidemic.seeding.cells;
        for (std::size_t i = 0; i < cells.size(); ++i) {
            out += fmt::format("{}[{}, {}]", i ? ", " : "", cells[i].row, cells[i].col);
        }
        return out + "]";
    };
    return k;
}

void apply_preset(ExperimentConfig& c, const std::string& preset) {
    c.preset = preset;
    if (preset == "custom") return;
    const auto p = preset == "sir" ? epidemic::EpidemicParams::sir_preset() : epidemic::EpidemicParams::sis_preset();
    c.epidemic.beta = p.beta;
    c.epidemic.mu = p.mu;
    c.epidemic.gamma = p.gamma;
    c.epidemic.seeding = p.seeding;
}

const std::vector<Key>& registry() {
    static const std::vector<Key> keys = [] {
        using epidemic::SeedKind;
        using lattice::BoundaryPolicy;
        const double inf = std::numeric_limits<double>::infinity();
        std::vector<Key> k;
        k.push_back(seed_key());
        k.push_back(text("", "output", {}, [](ExperimentConfig& c) -> std::string& { return c.output; }, "directory path"));
        k.push_back(integer("", "threads", {}, [](ExperimentConfig& c) -> int& { return c.threads; }, 1, 1024));
        k.push_back(choice<std::string>("", "kernel", {}, [](ExperimentConfig& c) -> std::string& { return c.kernel; },
                                        {{"auto", "auto"}, {"scalar", "scalar"}, {"avx2", "avx2"}}));

        const Kinds& ep = kEpidemicKinds;
        k.push_back(choice<std::string>("epidemic", "preset", ep, [](ExperimentConfig& c) -> std::string& { return c.preset; },
                                        {{"sis", "sis"}, {"sir", "sir"}, {"custom", "custom"}}));
        k.push_back(integer("epidemic", "m", ep, [](ExperimentConfig& c) -> int& { return c.epidemic.m; }, 1, 4096));
        k.push_back(number("epidemic", "f_R", ep, [](ExperimentConfig& c) -> double& { return c.epidemic.f_R; }, 0, 1, "[0, 1]"));
        k.push_back(number("epidemic", "f_Rc", ep, [](ExperimentConfig& c) -> double& { return c.epidemic.f_Rc; }, 0, 1, "[0, 1]"));
        k.push_back(number("epidemic", "beta", ep, [](ExperimentConfig& c) -> double& { return c.epidemic.beta; }, 0, 1, "[0, 1]"));
        k.push_back(number("epidemic", "mu", ep, [](ExperimentConfig& c) -> double& { return c.epidemic.mu; }, 0, 1, "[0, 1], gamma + mu <= 1"));
        k.push_back(number("epidemic", "gamma", ep, [](ExperimentConfig& c) -> double& { return c.epidemic.gamma; }, 0, 1, "[0, 1], gamma + mu <= 1"));
        k.push_back(choice<BoundaryPolicy>("epidemic", "boundary", ep,
                                           [](ExperimentConfig& c) -> BoundaryPolicy& { return c.epidemic.boundary; },
                                           {{"absorbing", BoundaryPolicy::AbsorbingEdge}, {"periodic", BoundaryPolicy::Periodic}}));
        k.push_back(integer("epidemic", "iterations", ep, [](ExperimentConfig& c) -> int& { return c.epidemic.iterations; }, 1, 10'000'000));
        k.push_back(choice<SeedKind>("epidemic", "seeding", ep, [](ExperimentConfig& c) -> SeedKind& { return c.epidemic.seeding.kind; },
                                     {{"left_edge", SeedKind::LeftEdge},
                                      {"threshold_excess", SeedKind::ThresholdExcess},
                                      {"explicit", SeedKind::Explicit},
                                      {"centre", SeedKind::Centre}}));
        k.push_back(seed_cells_key());
        k.push_back(integer("epidemic", "replicates", ep, [](ExperimentConfig& c) -> int& { return c.epidemic.replicates; }, 1, 100000));

        const Kinds& sc = kScanKinds;
        k.push_back(number("scan", "f_R_start", sc, [](ExperimentConfig& c) -> double& { return c.scan.f_R_start; }, 0, 1, "[0, 1]"));
        k.push_back(number("scan", "f_R_stop", sc, [](ExperimentConfig& c) -> double& { return c.scan.f_R_stop; }, 0, 1, "[0, 1], >= f_R_start"));
        k.push_back(integer("scan", "f_R_count", sc, [](ExperimentConfig& c) -> int& { return c.scan.f_R_count; }, 1, 100000));
        k.push_back(number_list("scan", "f_R_values", sc, [](ExperimentConfig& c) -> std::vector<double>& { return c.scan.f_R_values; }, 0, 1,
                                "[0, 1]; overrides the grid when nonempty"));

        k.push_back(integer("sir", "runs", {ExperimentKind::SirRun}, [](ExperimentConfig& c) -> int& { return c.sir.runs; }, 1, 100000));

        const Kinds gr{ExperimentKind::GradientSnapshot};
        k.push_back(number("gradient", "start", gr, [](ExperimentConfig& c) -> double& { return c.gradient.start; }, 0, 1, "[0, 1]"));
        k.push_back(number("gradient", "end", gr, [](ExperimentConfig& c) -> double& { return c.gradient.end; }, 0, 1, "[0, 1]"));

        const Kinds md{ExperimentKind::MultiDomainScan};
        k.push_back(number_list("stripes", "offsets", md, [](ExperimentConfig& c) -> std::vector<double>& { return c.stripes.offsets; }, -1, 1,
                                "[-1, 1], one column stripe each, left to right"));
        k.push_back(integer("stripes", "fit_components", md, [](ExperimentConfig& c) -> int& { return c.stripes.fit_components; }, 0, 100));

        const Kinds& op = kOpticsKinds;
        auto o = [&](const char* name, double optics::MeanFieldParams::*field, double lo, double hi, const char* range) {
            k.push_back(number("optics", name, op, [field](ExperimentConfig& c) -> double& { return c.optics.*field; }, lo, hi, range));
        };
        o("Omega_p", &optics::MeanFieldParams::Omega_p, -inf, inf, "finite");
        o("Omega_c", &optics::MeanFieldParams::Omega_c, -inf, inf, "finite");
        o("Delta_p", &optics::MeanFieldParams::Delta_p, -inf, inf, "finite");
        o("Gamma_e", &optics::MeanFieldParams::Gamma_e, 0, inf, "> 0");
        o("Gamma_r", &optics::MeanFieldParams::Gamma_r, 0, inf, ">= 0");
        o("gamma_deph", &optics::MeanFieldParams::gamma_deph, 0, inf, ">= 0");
        o("V", &optics::MeanFieldParams::V, -inf, inf, "finite; sign sets the shift direction");
        o("OD", &optics::MeanFieldParams::OD, 0, inf, ">= 0");
        o("f_R", &optics::MeanFieldParams::f_R, 0, 1, "[0, 1]");

        k.push_back(number("solver", "damping", op, [](ExperimentConfig& c) -> double& { return c.solver.damping; }, 1e-6, 1, "(0, 1]"));
        k.push_back(integer("solver", "max_iterations", op, [](ExperimentConfig& c) -> int& { return c.solver.max_iterations; }, 1, 1000000));
        k.push_back(number("solver", "tolerance", op, [](ExperimentConfig& c) -> double& { return c.solver.tolerance; }, 1e-16, 1, "[1e-16, 1]"));

        k.push_back(number("detuning", "start", op, [](ExperimentConfig& c) -> double& { return c.detuning.start; }, -inf, inf, "finite, != stop"));
        k.push_back(number("detuning", "stop", op, [](ExperimentConfig& c) -> double& { return c.detuning.stop; }, -inf, inf, "finite, != start"));
        k.push_back(integer("detuning", "steps", op, [](ExperimentConfig& c) -> int& { return c.detuning.steps; }, 2, 1000000));

        const Kinds hy{ExperimentKind::Hysteresis};
        k.push_back(number_list("composition", "f_R", hy, [](ExperimentConfig& c) -> std::vector<double>& { return c.composition.f_R; }, 0, 1,
                                "[0, 1]; empty means one domain at optics.f_R"));
        k.push_back(number_list("composition", "weights", hy, [](ExperimentConfig& c) -> std::vector<double>& { return c.composition.weights; }, 0, 1,
                                "(0, 1], summing to 1; empty means equal"));
        k.push_back(choice<optics::Composition>("composition", "mode", op,
                                                [](ExperimentConfig& c) -> optics::Composition& { return c.composition.mode; },
                                                {{"geometric", optics::Composition::Geometric}, {"arithmetic", optics::Composition::Arithmetic}}));

        const Kinds mp{ExperimentKind::MultistabilityMap};
        k.push_back(number("map", "f_R1", mp, [](ExperimentConfig& c) -> double& { return c.map.f_R1; }, 0, 1, "[0, 1]"));
        k.push_back(number("map", "weight1", mp, [](ExperimentConfig& c) -> double& { return c.map.weight1; }, 0, 1, "(0, 1)"));
        k.push_back(number("map", "f_R2_start", mp, [](ExperimentConfig& c) -> double& { return c.map.f_R2_start; }, 0, 1, "[0, 1]"));
        k.push_back(number("map", "f_R2_stop", mp, [](ExperimentConfig& c) -> double& { return c.map.f_R2_stop; }, 0, 1, "[0, 1], >= f_R2_start"));
        k.push_back(integer("map", "f_R2_count", mp, [](ExperimentConfig& c) -> int& { return c.map.f_R2_count; }, 1, 100000));

        const Kinds ft{ExperimentKind::Fit};
        k.push_back(text("fit", "input", ft, [](ExperimentConfig& c) -> std::string& { return c.fit.input; }, "CSV path (required)"));
        k.push_back(text("fit", "x_column", ft, [](ExperimentConfig& c) -> std::string& { return c.fit.x_column; }, "column name"));
        k.push_back(text("fit", "y_column", ft, [](ExperimentConfig& c) -> std::string& { return c.fit.y_column; }, "column name"));
        k.push_back(choice<fit::ModelKind>("fit", "model", ft, [](ExperimentConfig& c) -> fit::ModelKind& { return c.fit.model; },
                                           {{"tanh", fit::ModelKind::Tanh},
                                            {"multi_tanh", fit::ModelKind::MultiTanh},
                                            {"gaussian", fit::ModelKind::Gaussian}}));
        k.push_back(integer("fit", "components", ft, [](ExperimentConfig& c) -> int& { return c.fit.components; }, 1, 100));
        return k;
    }();
    return keys;
}

const Key* find_key(const std::string& section, const std::string& name) {
    for (const Key& k : registry()) {
        if (k.section == section && k.name == name) return &k;
    }
    return nullptr;
}

bool known_section(const std::string& s) {
    return std::any_of(registry().begin(), registry().end(), [&](const Key& k) { return !s.empty() && k.section == s; });
}

}  // namespace

std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SisScan: return "sis_scan";
        case ExperimentKind::SirRun: return "sir_run";
        case ExperimentKind::GradientSnapshot: return "gradient_snapshot";
        case ExperimentKind::MultiDomainScan: return "multi_domain_scan";
        case ExperimentKind::Hysteresis: return "hysteresis";
        case ExperimentKind::MultistabilityMap: return "multistability_map";
        case ExperimentKind::Fit: return "fit";
    }
    return "?";
}

std::string subcommand_name(ExperimentKind k) {
    std::string s = to_string(k);
    std::replace(s.begin(), s.end(), '_', '-');
    return s;
}

std::optional<ExperimentKind> parse_kind(const std::string& s) {
    for (auto k : kAllKinds) {
        if (to_string(k) == s || subcommand_name(k) == s) return k;
    }
    return std::nullopt;
}

std::vector<double> ScanSettings::values() const {
    if (!f_R_values.empty()) return f_R_values;
    return epidemic::linspace(f_R_start, f_R_stop, f_R_count);
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
    return kind == o.kind && serialize_config(*this) == serialize_config(o);
}

ExperimentConfig default_config(ExperimentKind kind) {
    ExperimentConfig c;
    c.kind = kind;
    switch (kind) {
        case ExperimentKind::SisScan:
            apply_preset(c, "sis");
            c.epidemic.replicates = 20;
            break;
        case ExperimentKind::SirRun:
            apply_preset(c, "sir");
            c.epidemic.f_R = 0.7;
            c.epidemic.iterations = 500;
            c.epidemic.seeding = epidemic::SeedPolicy::centre();
            break;
        case ExperimentKind::GradientSnapshot: apply_preset(c, "sis"); break;
        case ExperimentKind::MultiDomainScan:
            apply_preset(c, "sis");
            c.epidemic.replicates = 5;
            c.scan.f_R_count = 41;
            break;
        case ExperimentKind::Hysteresis:
        case ExperimentKind::MultistabilityMap:
        case ExperimentKind::Fit: break;
    }
    return c;
}

ConfigError::ConfigError(std::vector<std::string> problems)
    : std::runtime_error([&] {
          std::string msg = "invalid configuration:";
          for (const auto& p : problems) msg += "\n  " + p;
          return msg;
      }()),
      problems_(std::move(problems)) {}

std::vector<std::string> validate(const ExperimentConfig& c) {
    Errors e;
    const bool epidemic_kind =
        std::find(kEpidemicKinds.begin(), kEpidemicKinds.end(), c.kind) != kEpidemicKinds.end();
    if (epidemic_kind) {
        for (auto& p : c.epidemic.problems()) e.push_back("epidemic: " + p);
        const auto& ep = c.epidemic;
        if (c.preset == "sis" && !(ep.gamma == 0.0 && ep.mu == 0.01 && ep.beta > ep.gamma)) {
            e.push_back(fmt::format("epidemic: preset sis requires gamma = 0, mu = 0.01 and beta > gamma "
                                    "(gamma = {}, mu = {}, beta = {}); use preset: custom to lift this",
                                    ep.gamma, ep.mu, ep.beta));
        }
        if (c.preset == "sir" && !(ep.mu == 0.0 && ep.gamma > 0.0 && ep.beta > ep.gamma)) {
            e.push_back(fmt::format("epidemic: preset sir requires mu = 0 and beta / gamma > 1 "
                                    "(beta = {}, gamma = {}, mu = {}); use preset: custom to lift this",
                                    ep.beta, ep.gamma, ep.mu));
        }
        if (ep.seeding.kind != epidemic::SeedKind::Explicit && !ep.seeding.cells.empty()) {
            e.push_back("epidemic.seed_cells is only used with seeding: explicit");
        }
    }
    if (std::find(kScanKinds.begin(), kScanKinds.end(), c.kind) != kScanKinds.end()) {
        if (c.scan.f_R_values.empty() && c.scan.f_R_start > c.scan.f_R_stop) {
            e.push_back(fmt::format("scan: f_R_start = {} exceeds f_R_stop = {}", c.scan.f_R_start, c.scan.f_R_stop));
        }
    }
    if (c.kind == ExperimentKind::MultiDomainScan) {
        if (c.stripes.offsets.empty()) e.push_back("stripes.offsets must list at least one offset");
        if (static_cast<int>(c.stripes.offsets.size()) > c.epidemic.m) e.push_back("stripes.offsets: more stripes than columns");
    }
    if (c.kind == ExperimentKind::Hysteresis || c.kind == ExperimentKind::MultistabilityMap) {
        for (auto& p : c.optics.problems()) e.push_back("optics: " + p);
        if (c.detuning.start == c.detuning.stop) e.push_back("detuning: start and stop must differ");
    }
    if (c.kind == ExperimentKind::Hysteresis) {
        const auto& comp = c.composition;
        if (!comp.weights.empty()) {
            const std::size_t domains = comp.f_R.empty() ? 1 : comp.f_R.size();
            if (comp.weights.size() != domains) {
                e.push_back(fmt::format("composition: {} weights for {} domains", comp.weights.size(), domains));
            }
            double sum = 0.0;
            for (double w : comp.weights) {
                if (!(w > 0.0)) e.push_back(fmt::format("composition.weights: {} must be positive", w));
                sum += w;
            }
            if (std::abs(sum - 1.0) > 1e-9) e.push_back(fmt::format("composition.weights sum to {}, not 1", sum));
        }
    }
    if (c.kind == ExperimentKind::MultistabilityMap) {
        if (!(c.map.weight1 > 0.0 && c.map.weight1 < 1.0)) e.push_back(fmt::format("map.weight1 = {} must lie in (0, 1)", c.map.weight1));
        if (c.map.f_R2_start > c.map.f_R2_stop) e.push_back("map: f_R2_start exceeds f_R2_stop");
    }
    if (c.kind == ExperimentKind::Fit) {
        if (c.fit.input.empty()) e.push_back("missing required key 'fit.input'");
        if (c.fit.model != fit::ModelKind::MultiTanh && c.fit.components != 1) {
            e.push_back("fit.components applies to model multi_tanh only");
        }
    }
    return e;
}

ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> expected) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& ex) {
        throw ConfigError({fmt::format("line {}: {}", ex.mark.line + 1, ex.msg)});
    }
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (!root.IsMap()) throw ConfigError({"top level must be a mapping of keys"});

    Errors e;
    std::optional<ExperimentKind> kind = expected;
    if (const auto node = root["experiment"]) {
        const std::string name = node.IsScalar() ? node.Scalar() : scalar_text(node);
        const auto parsed = parse_kind(name);
        if (!parsed) {
            std::string known;
            for (auto k : kAllKinds) known += (known.empty() ? "" : ", ") + to_string(k);
            throw ConfigError({fmt::format("unknown experiment kind '{}' (expected one of {})", name, known)});
        }
        if (expected && *expected != *parsed) {
            throw ConfigError({fmt::format("config is for experiment '{}' but the subcommand runs '{}'",
                                           to_string(*parsed), to_string(*expected))});
        }
        kind = parsed;
    }
    if (!kind) throw ConfigError({"missing required key 'experiment'"});

    ExperimentConfig c = default_config(*kind);
    // The preset sets rate defaults that the other epidemic keys may override.
    if (const auto ep = root["epidemic"]; ep && ep.IsMap() && ep["preset"] && find_key("epidemic", "preset")->applies(*kind)) {
        const std::string p = ep["preset"].IsScalar() ? ep["preset"].Scalar() : "";
        if (p == "sis" || p == "sir" || p == "custom") apply_preset(c, p);
    }

    auto handle = [&](const std::string& section, const std::string& name, const YAML::Node& value) {
        const std::string path = section.empty() ? name : section + "." + name;
        const Key* key = find_key(section, name);
        if (!key) {
            e.push_back(fmt::format("unknown key '{}'", path));
        } else if (!key->applies(*kind)) {
            e.push_back(fmt::format("key '{}' does not apply to experiment '{}'", path, to_string(*kind)));
        } else {
            key->set(c, value, path, e);
        }
    };
    for (const auto& entry : root) {
        const std::string name = entry.first.as<std::string>();
        if (name == "experiment") continue;
        if (entry.second.IsMap()) {
            if (!known_section(name)) {
                e.push_back(fmt::format("unknown section '{}'", name));
                continue;
            }
            for (const auto& sub : entry.second) handle(name, sub.first.as<std::string>(), sub.second);
        } else if (known_section(name)) {
            e.push_back(fmt::format("section '{}' must be a mapping", name));
        } else {
            handle("", name, entry.second);
        }
    }
    for (auto& p : validate(c)) e.push_back(std::move(p));
    if (!e.empty()) throw ConfigError(std::move(e));
    return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<ExperimentKind> expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({fmt::format("cannot read config file '{}'", path.string())});
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), expected);
}

std::string serialize_config(const ExperimentConfig& c) {
    std::string out = "experiment: " + to_string(c.kind) + "\n";
    std::string section;
    for (const Key& k : registry()) {
        if (!k.applies(c.kind)) continue;
        if (k.section != section) {
            section = k.section;
            out += section + ":\n";
        }
        out += (section.empty() ? "" : "  ") + k.name + ": " + k.get(c) + "\n";
    }
    return out;
}

std::string key_help(ExperimentKind kind) {
    const ExperimentConfig d = default_config(kind);
    std::size_t width = 0;
    for (const Key& k : registry()) {
        if (k.applies(kind)) width = std::max(width, k.path().size());
    }
    std::string out = fmt::format("Config keys for experiment: {}\n", to_string(kind));
    for (const Key& k : registry()) {
        if (!k.applies(kind)) continue;
        out += fmt::format("  {:<{}}  {}  (default: {})\n", k.path(), width, k.range, k.get(d));
    }
    return out;
}

}  // namespace avalanche::cli
