#include "avalanche/cli/manifest.hpp"

#include <array>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <Eigen/Core>
#include <fmt/format.h>
#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include "avalanche/lattice/step.hpp"

#ifndef AVALANCHE_VERSION
#define AVALANCHE_VERSION "0.0.0"
#endif
#ifndef AVALANCHE_YAML_CPP_VERSION
#define AVALANCHE_YAML_CPP_VERSION "unknown"
#endif

namespace avalanche::cli {

namespace {

class Sha256 {
public:
    Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
        if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1) {
            throw std::runtime_error("SHA-256 initialisation failed");
        }
    }
    void update(const char* data, std::size_t n) {
        if (EVP_DigestUpdate(ctx_.get(), data, n) != 1) throw std::runtime_error("SHA-256 update failed");
    }
    std::string hex() {
        std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
        unsigned int len = 0;
        if (EVP_DigestFinal_ex(ctx_.get(), md.data(), &len) != 1) throw std::runtime_error("SHA-256 final failed");
        std::string out;
        for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", md[i]);
        return out;
    }

private:
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
    Sha256 h;
    h.update(data.data(), data.size());
    return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    Sha256 h;
    std::array<char, 1 << 16> buf{};
    while (in) {
        in.read(buf.data(), buf.size());
        h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
    }
    return h.hex();
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
}

void OutputSet::write(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.close();
    if (!out) throw std::runtime_error("cannot write " + path.string());
    files_.push_back({name, content.size(), sha256_hex(content)});
}

std::string render_manifest(const Manifest& m) {
    std::ostringstream os;
    os << "status = " << (m.complete ? "complete" : "failed") << '\n';
    if (!m.complete) os << "error = " << m.error << '\n';
    os << "experiment = " << m.experiment << '\n';
    os << "seed = " << m.seed << '\n';
    for (const auto& [k, v] : m.versions) os << "version." << k << " = " << v << '\n';
    os << "kernel = " << m.kernel << '\n';
    os << "threads = " << m.threads << '\n';
    os << fmt::format("wall_time_s = {:.3f}\n", m.wall_seconds);

    os << "\n[results]\n";
    for (const auto& [k, v] : m.results) os << k << " = " << v << '\n';

    os << "\n[files]\n";
    if (!m.complete) os << "# partial: the run stopped early; these files may be incomplete\n";
    for (const auto& f : m.files) {
        os << f.sha256 << "  " << f.bytes << "  " << f.name << (m.complete ? "" : "  partial") << '\n';
    }
    for (const auto& [label, block] : m.fit_blocks) {
        os << "\n[fit " << label << "]\n" << block;
        if (!block.empty() && block.back() != '\n') os << '\n';
    }
    os << "\n[config]\n" << m.config;
    return os.str();
}

std::vector<FileEntry> manifest_files(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    bool inside = false;
    std::vector<FileEntry> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.front() == '[') {
            inside = line == "[files]";
            continue;
        }
        if (!inside || line.empty() || line.front() == '#') continue;
        std::istringstream ls(line);
        FileEntry f;
        ls >> f.sha256 >> f.bytes >> f.name;
        if (!ls) throw std::runtime_error("malformed manifest file line: " + line);
        out.push_back(std::move(f));
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> build_versions() {
    return {
        {"sim", AVALANCHE_VERSION},
        {"compiler", fmt::format("gcc {}.{}.{}", __GNUC__, __GNUC_MINOR__, __GNUC_PATCHLEVEL__)},
        {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
        {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
        {"yaml-cpp", AVALANCHE_YAML_CPP_VERSION},
        {"openssl", OPENSSL_VERSION_TEXT},
        {"avx2_available", lattice::kernel_available(lattice::KernelKind::Avx2) ? "yes" : "no"},
    };
}

}  // namespace avalanche::cli
