#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace avalanche::cli {

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

struct FileEntry {
    std::string name;  ///< relative to the output directory
    std::uintmax_t bytes = 0;
    std::string sha256;
};

/// Writes files into one output directory and remembers their hashes.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);

    const std::filesystem::path& dir() const noexcept { return dir_; }
    /// Writes the content in binary mode; throws std::runtime_error on failure.
    void write(const std::string& name, const std::string& content);
    const std::vector<FileEntry>& files() const noexcept { return files_; }

private:
    std::filesystem::path dir_;
    std::vector<FileEntry> files_;
};

struct Manifest {
    bool complete = false;
    std::string error;  ///< set when the run failed
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> versions;
    std::string kernel;
    int threads = 1;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, std::string>> results;
    std::vector<FileEntry> files;
    std::vector<std::pair<std::string, std::string>> fit_blocks;  ///< (label, block text)
    std::string config;  ///< serialized config, every key
};

std::string render_manifest(const Manifest& m);

/// The [files] section of a rendered manifest.
std::vector<FileEntry> manifest_files(const std::string& text);

/// Library and build versions recorded in manifests.
std::vector<std::pair<std::string, std::string>> build_versions();

}  // namespace avalanche::cli
