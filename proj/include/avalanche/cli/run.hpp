#pragma once

#include <filesystem>
#include <string>

#include "avalanche/cli/config.hpp"
#include "avalanche/cli/manifest.hpp"

namespace avalanche::cli {

struct RunOutcome {
    Manifest manifest;
    std::filesystem::path manifest_path;
    bool ok() const noexcept { return manifest.complete; }
};

/// Creates config.output, writes every output plus manifest.txt. Module
/// errors do not escape: the manifest is written with status failed and
/// the files produced so far are listed as partial.
RunOutcome run_experiment(const ExperimentConfig& config);

}  // namespace avalanche::cli
