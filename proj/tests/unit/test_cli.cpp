#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "avalanche/cli/config.hpp"
#include "avalanche/cli/manifest.hpp"
#include "avalanche/cli/run.hpp"
#include "avalanche/io/csv.hpp"

using namespace avalanche::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "avalanche_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<std::string> problems_of(const std::string& text, std::optional<ExperimentKind> kind = std::nullopt) {
    try {
        parse_config(text, kind);
    } catch (const ConfigError& e) {
        return e.problems();
    }
    return {};
}

bool any_contains(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every output except the manifest, which records wall time and threads.
std::map<std::string, std::string> outputs(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().filename() != "manifest.txt") out[e.path().filename().string()] = slurp(e.path());
    }
    return out;
}

const char* kFig2a = R"(experiment: sis_scan
seed: 42
output: out/fig2a
epidemic:
  preset: sis
  m: 100
  iterations: 200
  replicates: 20
scan:
  f_R_start: 0
  f_R_stop: 1
  f_R_count: 21
)";

ExperimentConfig small_scan(const fs::path& out) {
    auto c = default_config(ExperimentKind::SisScan);
    c.output = out.string();
    c.epidemic.m = 24;
    c.epidemic.iterations = 40;
    c.epidemic.replicates = 2;
    c.epidemic.beta = 0.3;
    c.scan.f_R_count = 11;
    return c;
}

}  // namespace

TEST_CASE("kind names") {
    for (auto k : kAllKinds) {
        CHECK(parse_kind(to_string(k)) == k);
        CHECK(parse_kind(subcommand_name(k)) == k);
    }
    CHECK(subcommand_name(ExperimentKind::MultistabilityMap) == "multistability-map");
    CHECK_FALSE(parse_kind("sis"));
}

TEST_CASE("minimal config takes the kind defaults") {
    const auto c = parse_config("experiment: sis_scan\n");
    CHECK(c == default_config(ExperimentKind::SisScan));
    CHECK(c.epidemic.m == 100);
    CHECK(c.epidemic.iterations == 200);
    CHECK(c.epidemic.replicates == 20);
    CHECK(c.scan.values().size() == 21);
    CHECK(c.epidemic.gamma == 0.0);
    CHECK(c.epidemic.mu == 0.01);
    CHECK(c.epidemic.seeding.kind == avalanche::epidemic::SeedKind::ThresholdExcess);

    const auto sir = parse_config("", ExperimentKind::SirRun);
    CHECK(sir.kind == ExperimentKind::SirRun);
    CHECK(sir.epidemic.beta == 0.95);
    CHECK(sir.epidemic.gamma == 0.2);
    CHECK(sir.epidemic.mu == 0.0);
    CHECK(sir.epidemic.iterations == 500);
}

TEST_CASE("gamma + mu > 1 names both fields and the constraint") {
    const auto p = problems_of("experiment: sis_scan\nepidemic:\n  preset: custom\n  gamma: 0.6\n  mu: 0.5\n");
    REQUIRE(p.size() == 1);
    CHECK(p[0].find("gamma") != std::string::npos);
    CHECK(p[0].find("mu") != std::string::npos);
    CHECK(p[0].find("exceeds 1") != std::string::npos);
}

TEST_CASE("presets pin their rates") {
    auto p = problems_of("experiment: sis_scan\nepidemic:\n  gamma: 0.1\n");
    CHECK(any_contains(p, "preset sis requires gamma = 0"));
    p = problems_of("experiment: sir_run\nepidemic:\n  beta: 0.1\n");
    CHECK(any_contains(p, "beta / gamma > 1"));
    // The preset key picks the defaults the remaining keys override.
    const auto c = parse_config("experiment: sis_scan\nepidemic:\n  preset: sir\n  f_R: 0.7\n");
    CHECK(c.epidemic.beta == 0.95);
    CHECK(c.epidemic.gamma == 0.2);
}

TEST_CASE("unknown and inapplicable keys are named") {
    CHECK(any_contains(problems_of("experiment: sis_scan\nepidemic:\n  betta: 0.1\n"), "unknown key 'epidemic.betta'"));
    CHECK(any_contains(problems_of("experiment: sis_scan\ncolour: red\n"), "unknown key 'colour'"));
    CHECK(any_contains(problems_of("experiment: sis_scan\nplotting:\n  dpi: 3\n"), "unknown section 'plotting'"));
    CHECK(any_contains(problems_of("experiment: hysteresis\nepidemic:\n  m: 10\n"),
                       "key 'epidemic.m' does not apply to experiment 'hysteresis'"));
}

TEST_CASE("every error is reported, not just the first") {
    const auto p = problems_of(R"(experiment: multi_domain_scan
seed: -3
threads: 0
epidemic:
  m: 0
  f_R: 1.5
  boundary: twisted
  bogus: 1
scan:
  f_R_values: [0.1, 2, x]
stripes:
  offsets: []
)");
    CHECK(p.size() >= 8);
    for (const char* needle : {"seed", "threads", "epidemic.m", "epidemic.f_R", "epidemic.boundary",
                               "epidemic.bogus", "scan.f_R_values[1]", "scan.f_R_values[2]", "stripes.offsets"}) {
        CHECK_MESSAGE(any_contains(p, needle), needle);
    }
}

TEST_CASE("missing and mismatched experiment kinds") {
    CHECK(any_contains(problems_of("seed: 3\n"), "missing required key 'experiment'"));
    CHECK(any_contains(problems_of("experiment: sis\n"), "unknown experiment kind 'sis'"));
    CHECK(any_contains(problems_of("experiment: sir_run\n", ExperimentKind::SisScan), "subcommand runs 'sis_scan'"));
    CHECK(any_contains(problems_of("experiment: fit\n"), "missing required key 'fit.input'"));
    CHECK(any_contains(problems_of("experiment: sis_scan\nseed: [1\n"), "line "));
    CHECK(any_contains(problems_of("experiment: sis_scan\nepidemic: 3\n"), "section 'epidemic' must be a mapping"));
}

TEST_CASE("composition and map cross-field checks") {
    CHECK(any_contains(problems_of("experiment: hysteresis\ncomposition:\n  f_R: [0.3, 0.6]\n  weights: [0.5, 0.4]\n"),
                       "sum to"));
    CHECK(any_contains(problems_of("experiment: hysteresis\ncomposition:\n  f_R: [0.3, 0.6]\n  weights: [1]\n"),
                       "1 weights for 2 domains"));
    CHECK(any_contains(problems_of("experiment: multistability_map\nmap:\n  weight1: 1\n"), "map.weight1"));
    CHECK(any_contains(problems_of("experiment: hysteresis\noptics:\n  Gamma_e: 0\n"), "optics"));
}

TEST_CASE("Fig. 2(a) config round-trips through serialize and parse") {
    const auto c = parse_config(kFig2a);
    CHECK(c.epidemic.m == 100);
    CHECK(c.seed == 42);
    const auto text = serialize_config(c);
    const auto back = parse_config(text);
    CHECK(back == c);
    CHECK(serialize_config(back) == text);
}

TEST_CASE("every kind round-trips, including awkward values") {
    for (auto k : kAllKinds) {
        auto c = default_config(k);
        c.seed = 18446744073709551615ull;
        c.output = "dir with \"quotes\" and \\ slashes: yes";
        c.epidemic.f_R = 0.1 + 0.2;
        c.scan.f_R_values = {0.1, 1.0 / 3.0};
        c.optics.V = -1000.0 / 7.0;
        c.composition.f_R = {0.33, 0.6};
        c.composition.weights = {0.25, 0.75};
        c.epidemic.seeding = avalanche::epidemic::SeedPolicy::explicit_cells({{1, 2}, {3, 4}});
        c.preset = "custom";
        c.fit.input = "data.csv";
        const auto back = parse_config(serialize_config(c));
        CHECK(serialize_config(back) == serialize_config(c));
        CHECK(back.seed == c.seed);
        CHECK(back.output == c.output);
    }
}

TEST_CASE("help lists every key with its range and default") {
    for (auto k : kAllKinds) {
        const auto help = key_help(k);
        std::istringstream in(serialize_config(default_config(k)));
        std::string line, section;
        while (std::getline(in, line)) {
            if (line.rfind("experiment:", 0) == 0) continue;
            const bool nested = line.rfind("  ", 0) == 0;
            const auto colon = line.find(':');
            const std::string name = line.substr(nested ? 2 : 0, colon - (nested ? 2 : 0));
            if (!nested && colon + 1 == line.size()) {
                section = name;
                continue;
            }
            const std::string path = nested ? section + "." + name : name;
            CHECK_MESSAGE(help.find("  " + path + " ") != std::string::npos, path);
        }
        CHECK(help.find("default:") != std::string::npos);
    }
    const auto help = key_help(ExperimentKind::SisScan);
    CHECK(help.find("[0, 1], gamma + mu <= 1") != std::string::npos);
    CHECK(help.find("optics.") == std::string::npos);
}

TEST_CASE("sha256 matches the FIPS 180-2 vectors") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("csv reader handles quoting") {
    std::istringstream in("a,\"b,c\"\r\n1,\"say \"\"hi\"\"\"\n2,\"two\nlines\"\n");
    const auto t = avalanche::io::read_csv(in);
    REQUIRE(t.header.size() == 2);
    CHECK(t.header[1] == "b,c");
    REQUIRE(t.rows.size() == 2);
    CHECK(t.rows[0][1] == "say \"hi\"");
    CHECK(t.rows[1][1] == "two\nlines");
    CHECK(t.numbers("a") == std::vector<double>{1, 2});
    CHECK_THROWS(t.numbers("b,c"));
    CHECK_THROWS(t.column("z"));
    std::istringstream ragged("a,b\n1\n");
    CHECK_THROWS(avalanche::io::read_csv(ragged));
}

TEST_CASE("manifest lists every emitted file with its hash and the defaults") {
    const auto dir = scratch("manifest");
    const auto outcome = run_experiment(small_scan(dir));
    REQUIRE(outcome.ok());
    const auto text = slurp(outcome.manifest_path);
    CHECK(text.rfind("status = complete\n", 0) == 0);
    CHECK(text.find("seed = 1\n") != std::string::npos);
    CHECK(text.find("version.sim = ") != std::string::npos);
    CHECK(text.find("wall_time_s = ") != std::string::npos);
    CHECK(text.find("[fit tanh]\nmodel = tanh\n") != std::string::npos);
    CHECK(text.find("  f_Rc: 0.59999999999999998\n") != std::string::npos);

    const auto files = manifest_files(text);
    std::vector<std::string> listed;
    for (const auto& f : files) {
        listed.push_back(f.name);
        CHECK(f.sha256 == sha256_file(dir / f.name));
        CHECK(f.bytes == fs::file_size(dir / f.name));
    }
    std::vector<std::string> on_disk;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.path().filename() != "manifest.txt") on_disk.push_back(e.path().filename().string());
    }
    std::sort(listed.begin(), listed.end());
    std::sort(on_disk.begin(), on_disk.end());
    CHECK(listed == on_disk);
    CHECK(listed == std::vector<std::string>{"fit.txt", "scan.csv"});
}

TEST_CASE("a failing run marks its partial outputs") {
    const auto dir = scratch("partial");
    auto c = default_config(ExperimentKind::MultiDomainScan);
    c.output = dir.string();
    c.epidemic.m = 20;
    c.epidemic.iterations = 20;
    c.epidemic.replicates = 1;
    c.scan.f_R_count = 6;
    c.stripes.fit_components = 6;  // more components than the data can carry
    const auto outcome = run_experiment(c);
    CHECK_FALSE(outcome.ok());
    const auto text = slurp(outcome.manifest_path);
    CHECK(text.rfind("status = failed\nerror = ", 0) == 0);
    CHECK(text.find("# partial:") != std::string::npos);
    CHECK(text.find("scan.csv  partial\n") != std::string::npos);

    auto f = default_config(ExperimentKind::Fit);
    f.output = (dir / "fit").string();
    f.fit.input = (dir / "missing.csv").string();
    const auto fo = run_experiment(f);
    CHECK_FALSE(fo.ok());
    CHECK(fo.manifest.error.find("missing.csv") != std::string::npos);
}

TEST_CASE("fit subcommand refits a scan") {
    const auto dir = scratch("fit");
    const auto scan = run_experiment(small_scan(dir / "scan"));
    REQUIRE(scan.ok());
    auto c = default_config(ExperimentKind::Fit);
    c.output = (dir / "fit").string();
    c.fit.input = (dir / "scan" / "scan.csv").string();
    const auto fo = run_experiment(c);
    REQUIRE(fo.ok());
    CHECK(slurp(dir / "fit" / "fit.txt") == slurp(dir / "scan" / "fit.txt"));
    std::ifstream in(dir / "fit" / "fitted.csv");
    const auto t = avalanche::io::read_csv(in);
    CHECK(t.header == std::vector<std::string>{"x", "y", "fitted", "residual"});
    CHECK(t.rows.size() == 11);
}

TEST_CASE("outputs are byte-identical across threads and kernels") {
    auto compare = [](ExperimentConfig c, const std::string& name) {
        const auto a = scratch(name + "_serial");
        const auto b = scratch(name + "_parallel");
        c.output = a.string();
        c.threads = 1;
        c.kernel = "scalar";
        REQUIRE(run_experiment(c).ok());
        c.output = b.string();
        c.threads = 3;
        c.kernel = "auto";
        REQUIRE(run_experiment(c).ok());
        const auto x = outputs(a);
        CHECK(!x.empty());
        CHECK(x == outputs(b));
    };
    compare(small_scan("unused"), "scan");

    auto g = default_config(ExperimentKind::GradientSnapshot);
    g.epidemic.m = 30;
    g.epidemic.iterations = 30;
    compare(g, "gradient");

    auto s = default_config(ExperimentKind::SirRun);
    s.epidemic.m = 30;
    s.epidemic.iterations = 120;
    s.sir.runs = 3;
    compare(s, "sir");

    auto m = default_config(ExperimentKind::MultistabilityMap);
    m.detuning = {-40.0, 10.0, 51};
    m.map.f_R2_count = 4;
    compare(m, "map");
}
