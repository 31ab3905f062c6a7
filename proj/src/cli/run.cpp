#include "avalanche/cli/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "avalanche/epidemic/engine.hpp"
#include "avalanche/epidemic/export.hpp"
#include "avalanche/io/csv.hpp"
#include "avalanche/lattice/pgm.hpp"

namespace avalanche::cli {

namespace {

using io::format_double;

constexpr double kBandThreshold = 0.05;

struct Context {
    const ExperimentConfig& cfg;
    OutputSet& out;
    Manifest& manifest;
    lattice::ExecOptions exec;

    void result(const std::string& key, const std::string& value) { manifest.results.emplace_back(key, value); }
    void result(const std::string& key, double value) { result(key, format_double(value)); }
    void result_int(const std::string& key, long long value) { result(key, std::to_string(value)); }

    void fit_block(const std::string& label, const std::string& file, const fit::FitResult& r) {
        std::ostringstream os;
        fit::write_fit_block(os, r);
        out.write(file, os.str());
        manifest.fit_blocks.emplace_back(label, os.str());
    }
};

lattice::KernelKind pick_kernel(const std::string& name) {
    if (name == "scalar") return lattice::KernelKind::Scalar;
    if (name == "avx2") {
        if (!lattice::kernel_available(lattice::KernelKind::Avx2)) {
            throw std::runtime_error("kernel avx2 requested but not available on this machine or build");
        }
        return lattice::KernelKind::Avx2;
    }
    return lattice::default_kernel();
}

epidemic::EpidemicParams epidemic_params(const ExperimentConfig& cfg) {
    auto p = cfg.epidemic;
    p.seed = cfg.seed;
    return p;
}

template <class F>
std::string render(F&& f) {
    std::ostringstream os;
    f(os);
    return os.str();
}

std::string join(const std::vector<std::string>& parts, const char* sep = " ") {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

fit::FitResult fit_scan(Context& ctx, const std::vector<epidemic::ScanPoint>& pts, fit::ModelKind kind,
                        int components) {
    std::vector<double> xs, ys;
    for (const auto& p : pts) {
        xs.push_back(p.f_R);
        ys.push_back(p.mean_f_I);
    }
    const auto init = fit::auto_init(kind, xs, ys, components);
    auto r = fit::fit(kind, xs, ys, init);
    ctx.fit_block(to_string(kind), "fit.txt", r);
    const auto chi = fit::susceptibility(xs, ys);
    ctx.result("susceptibility_f_R", chi.x);
    ctx.result("susceptibility_value", chi.value);
    return r;
}

void run_sis_scan(Context& ctx) {
    const auto p = epidemic_params(ctx.cfg);
    const auto values = ctx.cfg.scan.values();
    const auto pts = epidemic::threshold_scan(p, values, p.replicates, ctx.exec);
    ctx.out.write("scan.csv", render([&](std::ostream& os) { epidemic::write_scan_csv(os, pts); }));
    const auto r = fit_scan(ctx, pts, fit::ModelKind::Tanh, 1);
    const auto& t = std::get<fit::Tanh>(r.model);
    ctx.result("fit_C", t.C);
    ctx.result("fit_omega", t.omega);
    ctx.result("fit_rms", r.rms());
    ctx.result("fit_converged", r.converged ? "true" : "false");
}

void run_multi_domain(Context& ctx) {
    const auto p = epidemic_params(ctx.cfg);
    const auto& offsets = ctx.cfg.stripes.offsets;
    const auto layout = epidemic::DomainLayout::stripes(p.m, offsets);
    const auto values = ctx.cfg.scan.values();
    const auto pts = epidemic::multi_domain_scan(p, layout, values, ctx.exec);
    ctx.out.write("scan.csv", render([&](std::ostream& os) { epidemic::write_scan_csv(os, pts); }));
    const int k = ctx.cfg.stripes.fit_components > 0 ? ctx.cfg.stripes.fit_components
                                                     : static_cast<int>(offsets.size());
    const auto r = fit_scan(ctx, pts, fit::ModelKind::MultiTanh, k);
    const auto& mt = std::get<fit::MultiTanh>(r.model);
    std::vector<std::string> centres, widths;
    for (const auto& c : mt.components) {
        centres.push_back(format_double(c.C));
        widths.push_back(format_double(c.omega));
    }
    ctx.result("fit_centres", join(centres));
    ctx.result("fit_omegas", join(widths));
    ctx.result("fit_rms", r.rms());
    ctx.result("fit_converged", r.converged ? "true" : "false");
}

struct SirSummary {
    std::size_t peak_iteration = 0;
    double peak_f_I = 0.0;
    long long extinct_iteration = -1;
    double final_f_S = 0.0;
    bool single_peak = false;
};

// Single dominant peak: the iterations with f_I above half its maximum form
// one contiguous run.
SirSummary summarise(const epidemic::TimeSeries& ts) {
    SirSummary s;
    const auto& rec = ts.records;
    for (std::size_t i = 0; i < rec.size(); ++i) {
        if (rec[i].f_I > s.peak_f_I) {
            s.peak_f_I = rec[i].f_I;
            s.peak_iteration = rec[i].iteration;
        }
    }
    int runs = 0;
    bool above = false;
    for (const auto& r : rec) {
        const bool now = s.peak_f_I > 0.0 && r.f_I > s.peak_f_I / 2;
        if (now && !above) ++runs;
        above = now;
    }
    s.single_peak = runs == 1;
    for (const auto& r : rec) {
        if (r.iteration > 0 && r.f_I == 0.0) {
            s.extinct_iteration = static_cast<long long>(r.iteration);
            break;
        }
    }
    s.final_f_S = rec.empty() ? 0.0 : rec.back().f_S;
    return s;
}

void run_sir(Context& ctx) {
    const auto base = epidemic_params(ctx.cfg);
    const int runs = ctx.cfg.sir.runs;
    std::ostringstream table;
    io::write_header(table, {"run", "seed", "peak_iteration", "peak_f_I", "extinct_iteration", "final_f_S",
                             "single_peak"});
    int herd = 0;
    double peak_sum = 0.0;
    epidemic::TimeSeries first;
    for (int r = 0; r < runs; ++r) {
        auto p = base;
        p.seed = epidemic::replicate_seed(ctx.cfg.seed, p.f_R, r);
        auto [ts, grid] = epidemic::run(p, epidemic::init_grid(p), ctx.exec);
        const auto s = summarise(ts);
        table << r << ',' << p.seed << ',' << s.peak_iteration << ',' << format_double(s.peak_f_I) << ','
              << s.extinct_iteration << ',' << format_double(s.final_f_S) << ',' << (s.single_peak ? 1 : 0)
              << '\n';
        herd += s.single_peak && s.extinct_iteration >= 0 && s.final_f_S > 0.0;
        peak_sum += static_cast<double>(s.peak_iteration);
        if (r == 0) first = std::move(ts);
    }
    ctx.out.write("timeseries.csv", render([&](std::ostream& os) { epidemic::write_time_series_csv(os, first); }));
    ctx.out.write("runs.csv", table.str());
    ctx.result_int("runs", runs);
    ctx.result_int("runs_single_peak_extinct_with_survivors", herd);
    ctx.result("mean_peak_iteration", peak_sum / runs);

    std::vector<double> xs, ys;
    for (const auto& rec : first.records) {
        xs.push_back(static_cast<double>(rec.iteration));
        ys.push_back(rec.f_I);
    }
    const auto init = fit::auto_init(fit::ModelKind::Gaussian, xs, ys);
    const auto fr = fit::fit(fit::ModelKind::Gaussian, xs, ys, init);
    ctx.fit_block("gaussian (run 0)", "fit.txt", fr);
    const auto& g = std::get<fit::Gaussian>(fr.model);
    ctx.result("fit_C", g.C);
    ctx.result("fit_omega", g.omega);
}

void write_coords(Context& ctx, const std::string& name, const std::string& label,
                  const std::vector<lattice::Coord>& cells, const ExperimentConfig& cfg) {
    ctx.out.write(name, render([&](std::ostream& os) { epidemic::write_coords_csv(os, cells); }));
    ctx.result_int(label + "_cells", static_cast<long long>(cells.size()));
    if (cells.empty()) return;
    const double col = epidemic::mean_column(cells);
    const int m = cfg.epidemic.m;
    const double local = m > 1 ? cfg.gradient.start + (cfg.gradient.end - cfg.gradient.start) * col / (m - 1)
                               : cfg.gradient.start;
    ctx.result(label + "_mean_column", col);
    ctx.result(label + "_local_f_R", local);
}

void run_gradient(Context& ctx) {
    const auto p = epidemic_params(ctx.cfg);
    const epidemic::DensityGradient g{ctx.cfg.gradient.start, ctx.cfg.gradient.end};
    auto [ts, grid] = epidemic::run(p, epidemic::init_grid(p, g), ctx.exec);
    ctx.out.write("snapshot.pgm", render([&](std::ostream& os) { lattice::write_pgm(os, grid); }));
    ctx.out.write("snapshot.pgm.meta", lattice::sidecar_line(grid) + "\n");
    ctx.out.write("timeseries.csv", render([&](std::ostream& os) { epidemic::write_time_series_csv(os, ts); }));
    write_coords(ctx, "wall.csv", "wall", epidemic::detect_domain_wall(grid), ctx.cfg);
    write_coords(ctx, "interface.csv", "interface", epidemic::interface_band(grid), ctx.cfg);
}

std::vector<optics::WeightedDomain> domains(const ExperimentConfig& cfg) {
    const auto& comp = cfg.composition;
    std::vector<optics::WeightedDomain> out;
    const std::size_t n = comp.f_R.empty() ? 1 : comp.f_R.size();
    for (std::size_t i = 0; i < n; ++i) {
        auto p = cfg.optics;
        if (!comp.f_R.empty()) p.f_R = comp.f_R[i];
        out.push_back({p, comp.weights.empty() ? 1.0 / static_cast<double>(n) : comp.weights[i]});
    }
    return out;
}

std::string describe_bands(const std::vector<double>& grid, const std::vector<double>& diff) {
    std::vector<std::string> parts;
    for (auto [a, b] : optics::bands(diff, kBandThreshold)) {
        parts.push_back(fmt::format("[{}, {}]", format_double(grid[a]), format_double(grid[b])));
    }
    return parts.empty() ? "none" : join(parts);
}

void run_hysteresis(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto ds = domains(cfg);
    auto sweep = [&](optics::ScanDirection dir) {
        if (ds.size() == 1) return optics::scan_hysteresis(ds[0].params, cfg.detuning, dir, cfg.solver);
        return optics::compose_domains(ds, cfg.detuning, dir, cfg.composition.mode, cfg.solver);
    };
    const auto plus = sweep(optics::ScanDirection::Positive);
    const auto minus = sweep(optics::ScanDirection::Negative);

    std::ostringstream curve;
    io::write_header(curve, {"Delta_c", "T", "rho_rr", "direction"});
    for (const auto* c : {&plus, &minus}) {
        for (const auto& pt : c->points) {
            curve << format_double(pt.delta_c) << ',' << format_double(pt.T) << ',' << format_double(pt.rho_rr)
                  << ',' << optics::to_string(c->direction) << '\n';
        }
    }
    ctx.out.write("curve.csv", curve.str());

    const auto grid = cfg.detuning.grid();
    const auto diff = optics::direction_difference(plus, minus);
    std::ostringstream dcsv;
    io::write_header(dcsv, {"Delta_c", "T_plus", "T_minus", "T_plus_minus_diff"});
    std::vector<double> t_plus(grid.size()), t_minus(grid.size());
    for (const auto& pt : plus.points) {
        t_plus[static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), pt.delta_c) - grid.begin())] = pt.T;
    }
    for (const auto& pt : minus.points) {
        t_minus[static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), pt.delta_c) - grid.begin())] = pt.T;
    }
    for (std::size_t i = 0; i < grid.size(); ++i) {
        dcsv << format_double(grid[i]) << ',' << format_double(t_plus[i]) << ',' << format_double(t_minus[i]) << ','
             << format_double(diff[i]) << '\n';
    }
    ctx.out.write("difference.csv", dcsv.str());

    double max_abs = 0.0;
    for (double d : diff) max_abs = std::max(max_abs, std::abs(d));
    ctx.result_int("domains", static_cast<long long>(ds.size()));
    ctx.result("max_abs_difference", max_abs);
    ctx.result("difference_bands", describe_bands(grid, diff));
    const auto chi_plus = fit::susceptibility(grid, t_plus);
    const auto chi_minus = fit::susceptibility(grid, t_minus);
    ctx.result("susceptibility_plus_delta_c", chi_plus.x);
    ctx.result("susceptibility_plus_value", chi_plus.value);
    ctx.result("susceptibility_minus_delta_c", chi_minus.x);
    ctx.result("susceptibility_minus_value", chi_minus.value);
    if (ds.size() == 1) {
        std::vector<std::string> windows;
        for (auto [a, b] : optics::bistable_windows(ds[0].params, cfg.detuning)) {
            windows.push_back(fmt::format("[{}, {}]", format_double(a), format_double(b)));
        }
        ctx.result("bistable_windows", windows.empty() ? "none" : join(windows));
        ctx.result("bistability_onset_f_R", optics::bistability_onset(ds[0].params, cfg.detuning));
    }
}

void run_map(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto rows = epidemic::linspace(cfg.map.f_R2_start, cfg.map.f_R2_stop, cfg.map.f_R2_count);
    optics::MapOptions mo;
    mo.f_R1 = cfg.map.f_R1;
    mo.weight1 = cfg.map.weight1;
    mo.mode = cfg.composition.mode;
    mo.threads = cfg.threads;
    const auto map = optics::multistability_map(cfg.optics, rows, cfg.detuning, mo, cfg.solver);

    std::ostringstream longform, matrix, ax_rows, ax_cols;
    io::write_header(longform, {"f_R2", "Delta_c", "T_plus_minus_diff"});
    std::vector<std::string> band_counts;
    for (std::size_t r = 0; r < map.f_R2.size(); ++r) {
        std::vector<double> row(map.delta_c.size());
        for (std::size_t c = 0; c < map.delta_c.size(); ++c) {
            row[c] = map.at(r, c);
            longform << format_double(map.f_R2[r]) << ',' << format_double(map.delta_c[c]) << ','
                     << format_double(row[c]) << '\n';
            matrix << (c ? " " : "") << format_double(row[c]);
        }
        matrix << '\n';
        ax_rows << format_double(map.f_R2[r]) << '\n';
        band_counts.push_back(std::to_string(optics::bands(row, kBandThreshold).size()));
    }
    for (double d : map.delta_c) ax_cols << format_double(d) << '\n';
    ctx.out.write("map.csv", longform.str());
    ctx.out.write("map_matrix.txt", matrix.str());
    ctx.out.write("map_f_R2.txt", ax_rows.str());
    ctx.out.write("map_delta_c.txt", ax_cols.str());
    ctx.result_int("rows", static_cast<long long>(map.f_R2.size()));
    ctx.result_int("columns", static_cast<long long>(map.delta_c.size()));
    ctx.result("bands_per_row", join(band_counts));
}

void run_fit(Context& ctx) {
    const auto& fc = ctx.cfg.fit;
    std::ifstream in(fc.input, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read fit input '" + fc.input + "'");
    const auto table = io::read_csv(in);
    const auto xs = table.numbers(fc.x_column);
    const auto ys = table.numbers(fc.y_column);
    const auto init = fit::auto_init(fc.model, xs, ys, fc.components);
    const auto r = fit::fit(fc.model, xs, ys, init);
    ctx.fit_block(to_string(fc.model), "fit.txt", r);

    std::ostringstream os;
    io::write_header(os, {"x", "y", "fitted", "residual"});
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = fit::evaluate(r.model, xs[i]);
        os << format_double(xs[i]) << ',' << format_double(ys[i]) << ',' << format_double(f) << ','
           << format_double(ys[i] - f) << '\n';
    }
    ctx.out.write("fitted.csv", os.str());
    ctx.result("fit_rms", r.rms());
    ctx.result("fit_converged", r.converged ? "true" : "false");
    ctx.result_int("points", static_cast<long long>(xs.size()));
}

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& config) {
    const auto problems = validate(config);
    if (!problems.empty()) throw ConfigError(problems);

    const auto t0 = std::chrono::steady_clock::now();
    RunOutcome outcome;
    Manifest& m = outcome.manifest;
    m.experiment = to_string(config.kind);
    m.seed = config.seed;
    m.versions = build_versions();
    m.threads = config.threads;
    m.config = serialize_config(config);
    m.kernel = config.kernel;

    OutputSet out(config.output);
    try {
        Context ctx{config, out, m, {pick_kernel(config.kernel), config.threads}};
        m.kernel = std::string(lattice::to_string(ctx.exec.kernel));
        switch (config.kind) {
            case ExperimentKind::SisScan: run_sis_scan(ctx); break;
            case ExperimentKind::SirRun: run_sir(ctx); break;
            case ExperimentKind::GradientSnapshot: run_gradient(ctx); break;
            case ExperimentKind::MultiDomainScan: run_multi_domain(ctx); break;
            case ExperimentKind::Hysteresis: run_hysteresis(ctx); break;
            case ExperimentKind::MultistabilityMap: run_map(ctx); break;
            case ExperimentKind::Fit: run_fit(ctx); break;
        }
        m.complete = true;
    } catch (const std::exception& e) {
        m.complete = false;
        m.error = e.what();
    }
    m.files = out.files();
    m.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    outcome.manifest_path = out.dir() / "manifest.txt";
    std::ofstream mf(outcome.manifest_path, std::ios::binary | std::ios::trunc);
    mf << render_manifest(m);
    if (!mf) throw std::runtime_error("cannot write " + outcome.manifest_path.string());
    return outcome;
}

}  // namespace avalanche::cli
