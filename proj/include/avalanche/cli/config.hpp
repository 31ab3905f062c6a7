#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "avalanche/epidemic/params.hpp"
#include "avalanche/fit/models.hpp"
#include "avalanche/optics/meanfield.hpp"

namespace avalanche::cli {

enum class ExperimentKind : std::uint8_t {
    SisScan,
    SirRun,
    GradientSnapshot,
    MultiDomainScan,
    Hysteresis,
    MultistabilityMap,
    Fit,
};

inline constexpr ExperimentKind kAllKinds[] = {
    ExperimentKind::SisScan,         ExperimentKind::SirRun,     ExperimentKind::GradientSnapshot,
    ExperimentKind::MultiDomainScan, ExperimentKind::Hysteresis, ExperimentKind::MultistabilityMap,
    ExperimentKind::Fit,
};

/// Config spelling, e.g. "sis_scan".
std::string to_string(ExperimentKind k);
/// Subcommand spelling, e.g. "sis-scan".
std::string subcommand_name(ExperimentKind k);
std::optional<ExperimentKind> parse_kind(const std::string& s);

struct ScanSettings {
    double f_R_start = 0.0;
    double f_R_stop = 1.0;
    int f_R_count = 21;
    std::vector<double> f_R_values;  ///< overrides the grid when nonempty

    std::vector<double> values() const;
};

struct SirSettings {
    int runs = 1;
};

struct GradientSettings {
    double start = 0.0;
    double end = 0.9;
};

struct StripeSettings {
    std::vector<double> offsets{0.2, 0.3};
    int fit_components = 0;  ///< 0: one per stripe
};

struct CompositionSettings {
    std::vector<double> f_R;      ///< empty: single domain at optics.f_R
    std::vector<double> weights;  ///< empty: equal weights
    optics::Composition mode = optics::Composition::Geometric;
};

struct MapSettings {
    double f_R1 = 0.33;
    double weight1 = 0.5;
    double f_R2_start = 0.0;
    double f_R2_stop = 0.6;
    int f_R2_count = 31;
};

struct FitSettings {
    std::string input;
    std::string x_column = "f_R";
    std::string y_column = "mean_f_I";
    fit::ModelKind model = fit::ModelKind::Tanh;
    int components = 1;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::SisScan;
    std::uint64_t seed = 1;
    std::string output = "out";
    int threads = 1;
    std::string kernel = "auto";

    std::string preset = "sis";
    epidemic::EpidemicParams epidemic;
    ScanSettings scan;
    SirSettings sir;
    GradientSettings gradient;
    StripeSettings stripes;

    optics::MeanFieldParams optics;
    optics::SolverOptions solver;
    optics::DetuningRange detuning;
    CompositionSettings composition;
    MapSettings map;

    FitSettings fit;

    bool operator==(const ExperimentConfig& o) const;
};

/// Defaults for one experiment kind (presets applied).
ExperimentConfig default_config(ExperimentKind kind);

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> problems);
    const std::vector<std::string>& problems() const noexcept { return problems_; }

private:
    std::vector<std::string> problems_;
};

/// Parses YAML text. `expected` fills in a missing `experiment` key and
/// must agree with it when present. Throws ConfigError listing every
/// problem found.
ExperimentConfig parse_config(const std::string& text, std::optional<ExperimentKind> expected = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<ExperimentKind> expected = std::nullopt);

/// Every key that applies to the kind, with its current value; parses back
/// to an equal config.
std::string serialize_config(const ExperimentConfig& config);

/// One line per key: name, type and range, default for this kind.
std::string key_help(ExperimentKind kind);

/// Cross-field checks on an assembled config; empty when valid.
std::vector<std::string> validate(const ExperimentConfig& config);

}  // namespace avalanche::cli
