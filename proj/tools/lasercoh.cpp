// Command-line driver: steady states, beam observables, sweeps and
// verification suites for the three laser-model families. Outputs CSV with
// '#'-prefixed metadata lines or JSON with the same schema.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 numeric
// failure.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lasercoh/analytics.hpp"
#include "lasercoh/correlations.hpp"
#include "lasercoh/io.hpp"
#include "lasercoh/phase_estimation.hpp"
#include "lasercoh/pr_ensemble.hpp"
#include "lasercoh/verify.hpp"

using namespace lasercoh;

namespace {

struct RunConfig {
    std::string subcommand;
    std::string family = "pfamily";
    int mu = -1;
    int dim = -1;
    double p = 4.0;
    double lambda = 0.0;
    double q = 0.0;
    double flux = 1.0;
    std::string variant = "exact";
    double tmin_k = 1e-3;
    double tmax_k = 50.0;
    double omega_max_k = 20.0;
    int points = 0;  // 0 = subcommand default
    std::string out;
    std::string format = "csv";
    unsigned seed = 1;
    int threads = 0;  // 0 = hardware
    bool cross_check = false;
    // sweep controls
    double p_min = 10.0, p_max = 100.0;
    int p_points = 19;
    // filter controls
    double coherence_target = 1e6;
    double dt_factor = 0.01;
    double windows = 2000.0;
    int seeds = 20;
    std::string suite = "quick";

    nlohmann::ordered_json canonical() const {
        nlohmann::ordered_json j;
        j["subcommand"] = subcommand;
        j["family"] = family;
        j["mu"] = mu;
        j["dim"] = dim;
        j["p"] = p;
        j["lambda"] = lambda;
        j["q"] = q;
        j["flux"] = flux;
        j["variant"] = variant;
        j["tmin_k"] = tmin_k;
        j["tmax_k"] = tmax_k;
        j["omega_max_k"] = omega_max_k;
        j["points"] = points;
        j["out"] = out;
        j["format"] = format;
        j["seed"] = seed;
        j["threads"] = threads;
        j["cross_check"] = cross_check;
        j["p_min"] = p_min;
        j["p_max"] = p_max;
        j["p_points"] = p_points;
        j["coherence_target"] = coherence_target;
        j["dt_factor"] = dt_factor;
        j["windows"] = windows;
        j["seeds"] = seeds;
        j["suite"] = suite;
        return j;
    }

    static RunConfig from_canonical(const nlohmann::ordered_json& j) {
        RunConfig c;
        c.subcommand = j.at("subcommand");
        c.family = j.at("family");
        c.mu = j.at("mu");
        c.dim = j.at("dim");
        c.p = j.at("p");
        c.lambda = j.at("lambda");
        c.q = j.at("q");
        c.flux = j.at("flux");
        c.variant = j.at("variant");
        c.tmin_k = j.at("tmin_k");
        c.tmax_k = j.at("tmax_k");
        c.omega_max_k = j.at("omega_max_k");
        c.points = j.at("points");
        c.out = j.at("out");
        c.format = j.at("format");
        c.seed = j.at("seed");
        c.threads = j.at("threads");
        c.cross_check = j.at("cross_check");
        c.p_min = j.at("p_min");
        c.p_max = j.at("p_max");
        c.p_points = j.at("p_points");
        c.coherence_target = j.at("coherence_target");
        c.dt_factor = j.at("dt_factor");
        c.windows = j.at("windows");
        c.seeds = j.at("seeds");
        c.suite = j.at("suite");
        return c;
    }

    int resolved_threads() const {
        if (threads > 0) return threads;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw > 0 ? static_cast<int>(hw) : 1;
    }

    LaserModel model() const {
        int D = dim;
        if ((mu >= 0) == (D >= 0))
            throw CLI::ValidationError("model", "give exactly one of --mu or --D");
        if (D < 0) D = 2 * mu + 1;
        if (family == "plambda") return LaserModel::p_lambda(D, p, lambda, flux);
        if (family == "pq") return LaserModel::p_q(D, p, q, flux);
        if (family == "pfamily") return LaserModel::p_family(D, p, flux);
        throw CLI::ValidationError("family", "unknown family '" + family + "'");
    }

    Variant variant_enum() const {
        if (variant == "exact") return Variant::Exact;
        if (variant == "linearized") return Variant::Linearized;
        throw CLI::ValidationError("variant", "unknown variant '" + variant + "'");
    }

    std::string out_or_default() const {
        if (!out.empty()) return out;
        return subcommand + "." + (format == "json" ? "json" : "csv");
    }
};

void add_all_flags(CLI::App& app, RunConfig& cfg) {
    // one flat flag namespace so plain key=value config files map directly
    app.add_option("--family", cfg.family, "model family: plambda | pq | pfamily")
        ->check(CLI::IsMember({"plambda", "pq", "pfamily"}));
    app.add_option("--mu", cfg.mu, "mean excitation number (D = 2 mu + 1)");
    app.add_option("--D", cfg.dim, "Hilbert-space dimension");
    app.add_option("--p", cfg.p, "sharpness exponent");
    app.add_option("--lambda", cfg.lambda, "gain/loss flatness (plambda family)");
    app.add_option("--q", cfg.q, "pump statistics parameter (pq family)");
    app.add_option("--variant", cfg.variant, "generator coefficients: exact | linearized")
        ->check(CLI::IsMember({"exact", "linearized"}));
    app.add_option("--points", cfg.points, "grid points (0 = per-command default)");
    app.add_option("--tmin-k", cfg.tmin_k, "first time in units of 1/(flux k)");
    app.add_option("--tmax-k", cfg.tmax_k, "last time in units of 1/(flux k)");
    app.add_option("--omega-max-k", cfg.omega_max_k, "last frequency in units of flux k");
    app.add_flag("--cross-check", cfg.cross_check,
                 "add the independent-route column where available");
    app.add_option("--p-min", cfg.p_min, "sweep: first sharpness value");
    app.add_option("--p-max", cfg.p_max, "sweep: last sharpness value");
    app.add_option("--p-points", cfg.p_points, "sweep: number of points");
    app.add_option("--coherence", cfg.coherence_target, "filter: beam coherence 4 flux / ell");
    app.add_option("--dt-factor", cfg.dt_factor, "filter: step size over the filter timescale");
    app.add_option("--windows", cfg.windows, "filter: run length in filter timescales");
    app.add_option("--seeds", cfg.seeds, "filter: number of independent trajectories");
    app.add_option("--suite", cfg.suite, "verify: quick | diffusion | filter | all")
        ->check(CLI::IsMember({"quick", "diffusion", "filter", "all"}));
}

Metadata base_metadata(const RunConfig& cfg) {
    Metadata md;
    md.add("version", std::string(kVersion));
    md.add("command", cfg.subcommand);
    md.add("seed", cfg.seed);
    return md;
}

Metadata run_metadata(const RunConfig& cfg, const LaserModel& m) {
    Metadata md = model_metadata(m);
    md.add("command", cfg.subcommand);
    md.add("variant", cfg.variant);
    md.add("seed", cfg.seed);
    md.add("rel_tol", 1e-10);
    md.add("abs_tol", 1e-13);
    return md;
}

int cmd_steady(const RunConfig& cfg) {
    const auto m = cfg.model();
    SteadySolveReport rep;
    const auto numeric = numeric_steady_state(m, cfg.variant_enum(), &rep);
    const auto exact = exact_steady_state(m.dim, m.p);
    const auto gauss = gaussian_steady_state(m.dim, m.p);

    Metadata md = run_metadata(cfg, m);
    md.add("negativity", negativity_diagnostic(numeric));
    md.add("solve_residual", rep.residual);
    md.add("r_prime", rep.r_prime);
    const auto [mean, var] = mean_and_variance(numeric);
    md.add("mean", mean);
    md.add("variance", var);

    Table t;
    t.columns = {"n", "weight_exact", "weight_numeric", "weight_gaussian"};
    for (int n = 0; n < m.dim; ++n)
        t.rows.push_back({double(n), exact.weights[n], numeric.weights[n], gauss.weights[n]});
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_g1(const RunConfig& cfg) {
    const auto m = cfg.model();
    LaserSystem sys(m, cfg.variant_enum());
    const double scale = 1.0 / (m.flux * m.k());
    auto grid = geometric_grid(cfg.tmin_k * scale, cfg.tmax_k * scale,
                               cfg.points > 0 ? cfg.points : 400);
    grid.insert(grid.begin(), 0.0);
    const auto s = g1(sys, grid);
    const auto lp = analytics::LinearizedPrediction::for_model(m);

    Metadata md = run_metadata(cfg, m);
    md.add("ell_analytic", lp.ell());
    Table t;
    t.columns = {"t", "g1_numeric", "g1_analytic"};
    for (size_t i = 0; i < grid.size(); ++i)
        t.rows.push_back({grid[i], s.values[i], lp.g1(grid[i])});
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_g2(const RunConfig& cfg) {
    const auto m = cfg.model();
    LaserSystem sys(m, cfg.variant_enum());
    const double scale = 1.0 / (m.flux * m.k());
    auto grid = geometric_grid(cfg.tmin_k * scale, cfg.tmax_k * scale,
                               cfg.points > 0 ? cfg.points : 400);
    grid.insert(grid.begin(), 0.0);
    const auto s = g2(sys, grid);
    const auto lp = analytics::LinearizedPrediction::for_model(m);

    Metadata md = run_metadata(cfg, m);
    md.add("negativity", negativity_diagnostic(sys.steady()));
    Table t;
    t.columns = {"t", "g2_numeric", "g2_analytic"};
    for (size_t i = 0; i < grid.size(); ++i)
        t.rows.push_back({grid[i], s.values[i], lp.g2(grid[i])});
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_spectrum(const RunConfig& cfg) {
    const auto m = cfg.model();
    LaserSystem sys(m, cfg.variant_enum());
    const int points = cfg.points > 0 ? cfg.points : 200;
    std::vector<double> grid(points);
    for (int i = 0; i < points; ++i)
        grid[i] = cfg.omega_max_k * m.flux * m.k() * i / (points - 1);
    const auto s = intensity_spectrum(sys, grid);
    const auto lp = analytics::LinearizedPrediction::for_model(m);

    Metadata md = run_metadata(cfg, m);
    md.add("negativity", negativity_diagnostic(sys.steady()));
    Table t;
    if (cfg.cross_check) {
        const auto sc = intensity_spectrum_cosine(sys, grid);
        t.columns = {"omega", "s_numeric", "s_analytic", "s_cosine_path"};
        for (int i = 0; i < points; ++i)
            t.rows.push_back({grid[i], s.values[i], lp.spectrum(grid[i]), sc.values[i]});
    } else {
        t.columns = {"omega", "s_numeric", "s_analytic"};
        for (int i = 0; i < points; ++i)
            t.rows.push_back({grid[i], s.values[i], lp.spectrum(grid[i])});
    }
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_mandelq(const RunConfig& cfg) {
    const auto m = cfg.model();
    LaserSystem sys(m, cfg.variant_enum());
    const double scale = 1.0 / (m.flux * m.k());
    const double t_hi = cfg.tmax_k * scale;
    const auto lp = analytics::LinearizedPrediction::for_model(m);

    // one dense pair-correlation series feeds every window length
    const int n_series = 8000;
    const double h = t_hi / n_series;
    std::vector<double> fine(n_series + 1);
    for (int i = 0; i <= n_series; ++i) fine[i] = h * i;
    const auto series = g2(sys, fine);

    // cumulative integrals of (g2-1) and t*(g2-1) by the trapezoid rule
    std::vector<double> c0(n_series + 1, 0.0), c1(n_series + 1, 0.0);
    for (int i = 1; i <= n_series; ++i) {
        const double f0 = series.values[i - 1] - 1.0, f1 = series.values[i] - 1.0;
        c0[i] = c0[i - 1] + 0.5 * (f0 + f1) * h;
        c1[i] = c1[i - 1] + 0.5 * (fine[i - 1] * f0 + fine[i] * f1) * h;
    }

    const int points = cfg.points > 0 ? cfg.points : 60;
    auto grid = geometric_grid(std::max(cfg.tmin_k, 1e-2) * scale, t_hi, points);
    Metadata md = run_metadata(cfg, m);
    Table t;
    t.columns = {"t", "q_numeric", "q_analytic"};
    for (double tw : grid) {
        const int i = std::min<int>(n_series, static_cast<int>(tw / h));
        const double q = 2.0 * m.flux / tw * (tw * c0[i] - c1[i]);
        t.rows.push_back({tw, q, lp.mandel_q(tw)});
    }
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_coherence(const RunConfig& cfg) {
    const auto m = cfg.model();
    LaserSystem sys(m, cfg.variant_enum());
    const double num = coherence_resolvent(sys);
    const auto lp = analytics::LinearizedPrediction::for_model(m);

    Metadata md = run_metadata(cfg, m);
    md.add("bound", analytics::heisenberg_bound(m.mu()));
    md.add("note", "linearized value drops the order-1/k additive correction");
    Table t;
    if (cfg.cross_check) {
        const double integral = coherence_time_integral(sys);
        t.columns = {"coherence_numeric", "coherence_integral", "coherence_analytic", "eps"};
        t.rows.push_back({num, integral, lp.coherence(),
                          std::abs(num - lp.coherence()) / lp.coherence()});
    } else {
        t.columns = {"coherence_numeric", "coherence_analytic", "eps"};
        t.rows.push_back({num, lp.coherence(), std::abs(num - lp.coherence()) / lp.coherence()});
    }
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_coherence_sweep(const RunConfig& cfg) {
    const int mu = cfg.mu >= 0 ? cfg.mu : 250;
    const int D = 2 * mu + 1;
    std::vector<double> ps(cfg.p_points);
    for (int i = 0; i < cfg.p_points; ++i)
        ps[i] = cfg.p_min + (cfg.p_max - cfg.p_min) * i / std::max(1, cfg.p_points - 1);

    // the three reference settings: Poissonian, deepest lambda, regular pump
    struct Setting {
        const char* name;
        int id;
    };
    const std::vector<Setting> settings{{"pfamily", 0}, {"plambda_half", 1}, {"pq_regular", 2}};
    std::vector<std::vector<double>> rows(settings.size() * ps.size());
    parallel_for(static_cast<int>(rows.size()), cfg.resolved_threads(), [&](int idx) {
        const int si = idx / static_cast<int>(ps.size());
        const double p = ps[idx % ps.size()];
        LaserModel m = si == 0   ? LaserModel::p_family(D, p, cfg.flux)
                       : si == 1 ? LaserModel::p_lambda(D, p, 0.5, cfg.flux)
                                 : LaserModel::p_q(D, p, -1.0, cfg.flux);
        LaserSystem sys(m, Variant::Exact);
        const double num = coherence_resolvent(sys);
        const auto lp = analytics::LinearizedPrediction::for_model(m);
        rows[idx] = {double(si), p, num, lp.coherence(),
                     std::abs(num - lp.coherence()) / lp.coherence(),
                     analytics::heisenberg_bound(m.mu())};
    });

    Metadata md = base_metadata(cfg);
    md.add("mu", mu);
    md.add("families", std::string("0=pfamily 1=plambda(0.5) 2=pq(-1)"));
    Table t;
    t.columns = {"family", "p", "coherence_numeric", "coherence_analytic", "eps", "bound"};
    t.rows = rows;
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_diffusion_distance(const RunConfig& cfg) {
    const int mu = cfg.mu >= 0 ? cfg.mu : 500;
    Table t;
    const auto checks = verify_diffusion(mu, cfg.resolved_threads(), &t);
    Metadata md = base_metadata(cfg);
    md.add("mu", mu);
    md.add("families", std::string("0=pfamily 1=plambda(0.5) 2=pq(-1)"));
    for (const auto& c : checks) md.add(c.pass ? "ok" : "FAIL", c.name + ": " + c.detail);
    write_table(cfg.out_or_default(), cfg.format, md, t);
    for (const auto& c : checks)
        std::printf("[%s] %s (%s)\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
    return 0;
}

int cmd_filter_sim(const RunConfig& cfg) {
    FilterConfig base;
    base.flux = cfg.flux;
    base.ell = 4.0 * cfg.flux / cfg.coherence_target;
    const double tau = filter_timescale(base.flux, base.ell);
    base.dt = cfg.dt_factor * tau;
    base.steps = static_cast<long>(cfg.windows * tau / base.dt);

    std::vector<EstimationRun> runs(cfg.seeds);
    parallel_for(cfg.seeds, cfg.resolved_threads(), [&](int i) {
        FilterConfig c = base;
        c.seed = cfg.seed + i;
        runs[i] = simulate_filter(c);
    });
    double sum = 0.0, sum2 = 0.0;
    for (const auto& r : runs) {
        sum += r.mse;
        sum2 += r.mse * r.mse;
    }
    const double mean = sum / cfg.seeds;
    const double sd = cfg.seeds > 1
                          ? std::sqrt((sum2 - cfg.seeds * mean * mean) / (cfg.seeds - 1))
                          : 0.0;

    Metadata md = base_metadata(cfg);
    md.add("coherence", cfg.coherence_target);
    md.add("ell", base.ell);
    md.add("flux", base.flux);
    md.add("dt", base.dt);
    md.add("steps", base.steps);
    md.add("burn_in_steps", runs.front().burn_in_steps);
    md.add("mse_target", 1.0 / std::sqrt(cfg.coherence_target));
    md.add("mse_mean", mean);
    md.add("mse_std_error", sd / std::sqrt(double(cfg.seeds)));
    Table t;
    t.columns = {"seed", "mse", "std_error", "bias"};
    for (const auto& r : runs)
        t.rows.push_back({double(r.config.seed), r.mse, r.std_error, r.bias});
    write_table(cfg.out_or_default(), cfg.format, md, t);
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    std::vector<CheckResult> checks;
    Table table;
    if (cfg.suite == "quick") {
        checks = verify_quick();
    } else if (cfg.suite == "diffusion") {
        checks = verify_diffusion(cfg.mu >= 0 ? cfg.mu : 500, cfg.resolved_threads(), &table);
    } else if (cfg.suite == "filter") {
        checks = verify_filter(cfg.seed, cfg.resolved_threads(), &table);
    } else if (cfg.suite == "all") {
        checks = verify_quick();
        auto d = verify_diffusion(cfg.mu >= 0 ? cfg.mu : 500, cfg.resolved_threads());
        checks.insert(checks.end(), d.begin(), d.end());
        auto f = verify_filter(cfg.seed, cfg.resolved_threads());
        checks.insert(checks.end(), f.begin(), f.end());
    } else {
        throw CLI::ValidationError("suite", "unknown suite '" + cfg.suite + "'");
    }
    int failures = 0;
    for (const auto& c : checks) {
        std::printf("[%s] %s (%s)\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.detail.c_str());
        if (!c.pass) ++failures;
    }
    std::printf("%d/%zu checks passed\n", static_cast<int>(checks.size()) - failures,
                checks.size());
    if (!cfg.out.empty() && !table.columns.empty()) {
        Metadata md = base_metadata(cfg);
        md.add("suite", cfg.suite);
        write_table(cfg.out, cfg.format, md, table);
    }
    return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    RunConfig cfg;
    CLI::App app{"laser-model observables: steady states, beam correlations, sweeps"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key-value configuration file merged under the flags");
    app.add_option("--out", cfg.out, "output file path");
    app.add_option("--format", cfg.format, "output format: csv | json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--seed", cfg.seed, "random seed for stochastic runs");
    app.add_option("--threads", cfg.threads, "worker threads for sweeps (0 = hardware)");
    app.add_option("--flux", cfg.flux, "photon flux (sets the time unit)");
    add_all_flags(app, cfg);

    auto* steady = app.add_subcommand("steady", "stationary number distributions");
    auto* g1c = app.add_subcommand("g1", "first-order coherence function");
    auto* g2c = app.add_subcommand("g2", "second-order coherence function");
    auto* spec = app.add_subcommand("spectrum", "intensity noise spectrum");
    auto* mq = app.add_subcommand("mandelq", "windowed photocount statistic");
    auto* coh = app.add_subcommand("coherence", "beam coherence of one model");
    auto* sweep = app.add_subcommand("coherence-sweep", "coherence over a p grid");
    auto* dd = app.add_subcommand("diffusion-distance", "phase-diffusion distance sweep");
    auto* fs = app.add_subcommand("filter-sim", "stochastic phase-filter experiment");
    auto* ver = app.add_subcommand("verify", "invariant suites");
    for (auto* sub : {steady, g1c, g2c, spec, mq, coh, sweep, dd, fs, ver}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (steady->parsed()) cfg.subcommand = "steady";
        if (g1c->parsed()) cfg.subcommand = "g1";
        if (g2c->parsed()) cfg.subcommand = "g2";
        if (spec->parsed()) cfg.subcommand = "spectrum";
        if (mq->parsed()) cfg.subcommand = "mandelq";
        if (coh->parsed()) cfg.subcommand = "coherence";
        if (sweep->parsed()) cfg.subcommand = "coherence-sweep";
        if (dd->parsed()) cfg.subcommand = "diffusion-distance";
        if (fs->parsed()) cfg.subcommand = "filter-sim";
        if (ver->parsed()) cfg.subcommand = "verify";

        // canonical form must survive a round trip before any work happens
        if (RunConfig::from_canonical(cfg.canonical()).canonical() != cfg.canonical())
            throw NumericError("configuration does not round-trip");

        if (cfg.subcommand == "steady") return cmd_steady(cfg);
        if (cfg.subcommand == "g1") return cmd_g1(cfg);
        if (cfg.subcommand == "g2") return cmd_g2(cfg);
        if (cfg.subcommand == "spectrum") return cmd_spectrum(cfg);
        if (cfg.subcommand == "mandelq") return cmd_mandelq(cfg);
        if (cfg.subcommand == "coherence") return cmd_coherence(cfg);
        if (cfg.subcommand == "coherence-sweep") return cmd_coherence_sweep(cfg);
        if (cfg.subcommand == "diffusion-distance") return cmd_diffusion_distance(cfg);
        if (cfg.subcommand == "filter-sim") return cmd_filter_sim(cfg);
        if (cfg.subcommand == "verify") return cmd_verify(cfg);
        std::fprintf(stderr, "no subcommand given\n");
        return 2;
    } catch (const CLI::Error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "numeric failure: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
