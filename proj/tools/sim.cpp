#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "avalanche/cli/config.hpp"
#include "avalanche/cli/run.hpp"

namespace {

using avalanche::cli::ExperimentKind;

const char* describe(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SisScan: return "SIS threshold scan with tanh fit (Fig. 2a)";
        case ExperimentKind::SirRun: return "SIR epidemic time series with Gaussian fit (Fig. 2c)";
        case ExperimentKind::GradientSnapshot: return "density-gradient snapshot and domain wall (Fig. 1c)";
        case ExperimentKind::MultiDomainScan: return "striped multi-domain scan with multi-tanh fit (Fig. 4e-h)";
        case ExperimentKind::Hysteresis: return "mean-field transmission sweeps in both directions (Fig. 3c)";
        case ExperimentKind::MultistabilityMap: return "two-domain transmission-difference map (Fig. 3a)";
        case ExperimentKind::Fit: return "fit a tanh, multi-tanh or Gaussian model to a CSV";
    }
    return "";
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> threads;
};

std::optional<std::uint64_t> env_seed() {
    const char* v = std::getenv("SIM_SEED");
    if (!v || !*v) return std::nullopt;
    try {
        std::size_t used = 0;
        const std::string s(v);
        if (s[0] == '-') throw std::invalid_argument(s);
        const auto n = std::stoull(s, &used, 10);
        if (used != s.size()) throw std::invalid_argument(s);
        return n;
    } catch (const std::exception&) {
        throw avalanche::cli::ConfigError({fmt::format("SIM_SEED='{}' is not an unsigned 64-bit integer", v)});
    }
}

int run(ExperimentKind kind, const Options& opt) {
    using namespace avalanche::cli;
    ExperimentConfig cfg;
    try {
        cfg = load_config(opt.config, kind);
        // Precedence: command-line flag, then environment, then config file.
        if (const auto s = env_seed()) cfg.seed = *s;
        if (const char* o = std::getenv("SIM_OUT"); o && *o) cfg.output = o;
        if (opt.seed) cfg.seed = *opt.seed;
        if (opt.out) cfg.output = *opt.out;
        if (opt.threads) cfg.threads = *opt.threads;
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    }
    try {
        const auto outcome = run_experiment(cfg);
        if (!outcome.ok()) {
            std::cerr << "experiment failed: " << outcome.manifest.error << "\npartial outputs listed in "
                      << outcome.manifest_path.string() << '\n';
            return 1;
        }
        std::cout << "wrote " << outcome.manifest_path.string() << '\n';
        for (const auto& [k, v] : outcome.manifest.results) std::cout << "  " << k << " = " << v << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    using namespace avalanche::cli;
    CLI::App app{"Epidemic-avalanche lattice and mean-field optics experiments"};
    app.require_subcommand(1);
    app.footer("Environment: SIM_SEED and SIM_OUT override the config; command-line flags override both.");

    Options opt;
    std::map<CLI::App*, ExperimentKind> kinds;
    for (auto kind : kAllKinds) {
        auto* sub = app.add_subcommand(subcommand_name(kind), describe(kind));
        sub->add_option("--config", opt.config, "YAML experiment config")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "master seed (overrides SIM_SEED and the config)");
        sub->add_option("--out", opt.out, "output directory (overrides SIM_OUT and the config)");
        sub->add_option("--threads", opt.threads, "worker threads; outputs do not depend on it")
            ->check(CLI::Range(1, 1024));
        sub->footer(key_help(kind));
        kinds[sub] = kind;
    }

    CLI11_PARSE(app, argc, argv);
    for (auto* sub : app.get_subcommands()) return run(kinds.at(sub), opt);
    return 2;
}
