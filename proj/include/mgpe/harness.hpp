#pragma once

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/model.hpp"
#include "mgpe/profiles.hpp"
#include "mgpe/regimes.hpp"
#include "mgpe/solver.hpp"

// Experiment driver: flat key=value configs, parameter sweeps that compare
// computed ground states against the limiting profiles in the rescaled frame,
// and deterministic CSV/summary reports.

namespace mgpe {

struct ExperimentConfig {
    std::string mode = "solve";  // solve | profile | sweep | classify | probe | validate
    int dim = 1;
    double beta = 0.0;
    double delta = 0.0;
    std::string potential = "harmonic";  // harmonic | box | zero
    double gamma = 1.0;
    std::string domain = "truncated";  // truncated | box
    int grid_n = 2049;
    double grid_L = 16.0;  // truncated: [-L, L]; box: (0, L); sweeps: rescaled frame
    double solver_tau = 0.01;
    double solver_tol = 1e-8;
    int solver_max_iter = 200000;
    std::string solver_init = "auto";  // auto | gaussian | uniform | tf_ansatz | random
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string kase;  // sweep template label, config key "case"
    std::vector<double> schedule;

    static ExperimentConfig from_string(const std::string& text);
    static ExperimentConfig from_file(const std::string& path);
    void validate() const;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    const char* begin = v.c_str();
    char* end = nullptr;
    double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw config_error("config: key '" + key + "' has non-numeric value '" + v + "'");
    return x;
}

inline long long parse_int(const std::string& key, const std::string& v) {
    const char* begin = v.c_str();
    char* end = nullptr;
    long long x = std::strtoll(begin, &end, 10);
    if (end == begin || *end != '\0')
        throw config_error("config: key '" + key + "' has non-integer value '" + v + "'");
    return x;
}

inline std::vector<double> parse_schedule(const std::string& key, const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) throw config_error("config: key '" + key + "' has an empty entry");
        out.push_back(parse_double(key, item));
    }
    return out;
}

}  // namespace detail

inline ExperimentConfig ExperimentConfig::from_string(const std::string& text) {
    ExperimentConfig c;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) {
        std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw config_error("config: line is not key=value: '" + t + "'");
        std::string key = detail::trim(t.substr(0, eq));
        std::string val = detail::trim(t.substr(eq + 1));
        if (key == "mode") c.mode = val;
        else if (key == "dim") c.dim = static_cast<int>(detail::parse_int(key, val));
        else if (key == "beta") c.beta = detail::parse_double(key, val);
        else if (key == "delta") c.delta = detail::parse_double(key, val);
        else if (key == "potential") c.potential = val;
        else if (key == "gamma") c.gamma = detail::parse_double(key, val);
        else if (key == "domain") c.domain = val;
        else if (key == "grid.n") c.grid_n = static_cast<int>(detail::parse_int(key, val));
        else if (key == "grid.L") c.grid_L = detail::parse_double(key, val);
        else if (key == "solver.tau") c.solver_tau = detail::parse_double(key, val);
        else if (key == "solver.tol") c.solver_tol = detail::parse_double(key, val);
        else if (key == "solver.max_iter")
            c.solver_max_iter = static_cast<int>(detail::parse_int(key, val));
        else if (key == "solver.init") c.solver_init = val;
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(detail::parse_int(key, val));
        else if (key == "out_dir") c.out_dir = val;
        else if (key == "case") c.kase = val;
        else if (key == "schedule") c.schedule = detail::parse_schedule(key, val);
        else throw config_error("config: unknown key '" + key + "'");
    }
    return c;
}

inline ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("config: cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_string(buf.str());
}

inline void ExperimentConfig::validate() const {
    auto one_of = [](const std::string& v, std::initializer_list<const char*> opts) {
        for (const char* o : opts)
            if (v == o) return true;
        return false;
    };
    if (!one_of(mode, {"solve", "profile", "sweep", "classify", "probe", "validate"}))
        throw config_error("config: bad mode '" + mode + "'");
    if (dim < 1 || dim > 3) throw config_error("config: dim must be 1, 2 or 3");
    if (!one_of(potential, {"harmonic", "box", "zero"}))
        throw config_error("config: bad potential '" + potential + "'");
    if (!one_of(domain, {"truncated", "box"}))
        throw config_error("config: bad domain '" + domain + "'");
    if (grid_n < 8) throw config_error("config: grid.n must be at least 8");
    if (!(grid_L > 0.0)) throw config_error("config: grid.L must be positive");
    if (!(solver_tau > 0.0)) throw config_error("config: solver.tau must be positive");
    if (!(solver_tol > 0.0)) throw config_error("config: solver.tol must be positive");
    if (solver_max_iter < 1) throw config_error("config: solver.max_iter must be positive");
    if (!one_of(solver_init, {"auto", "gaussian", "uniform", "tf_ansatz", "random"}))
        throw config_error("config: bad solver.init '" + solver_init + "'");
}

inline Potential config_potential(const ExperimentConfig& c) {
    if (c.potential == "harmonic") return Potential::harmonic(c.gamma);
    if (c.potential == "box") return Potential::box(0.0, c.grid_L);
    return Potential::zero();
}

inline Grid config_grid(const ExperimentConfig& c) {
    return c.domain == "box" ? box_grid(0.0, c.grid_L, c.grid_n)
                             : truncated_grid(c.grid_L, c.grid_n);
}

inline InitKind parse_init(const std::string& s, InitKind fallback) {
    if (s == "gaussian") return InitKind::gaussian;
    if (s == "uniform") return InitKind::uniform;
    if (s == "tf_ansatz") return InitKind::tf_ansatz;
    if (s == "random") return InitKind::random;
    return fallback;  // "auto"
}

enum class DistanceKind { L2, H1 };

// Distance between two sampled densities; the second argument is resampled
// onto the first argument's grid. H1 adds the first-derivative mismatch.
inline double density_distance(const SampledFunction& a, const SampledFunction& b,
                               DistanceKind kind) {
    std::vector<double> bb = resample_linear(b, a.grid);
    std::vector<double> diff(a.values.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = a.values[i] - bb[i];
    std::vector<double> sq(diff.size());
    for (std::size_t i = 0; i < diff.size(); ++i) sq[i] = diff[i] * diff[i];
    double acc = a.grid.n % 2 == 1 ? integrate_richardson(a.grid, sq)
                                   : integrate(a.grid, sq);
    if (kind == DistanceKind::H1) {
        std::vector<double> dd = derivative(a.grid, diff);
        for (std::size_t i = 0; i < dd.size(); ++i) sq[i] = dd[i] * dd[i];
        acc += a.grid.n % 2 == 1 ? integrate_richardson(a.grid, sq)
                                 : integrate(a.grid, sq);
    }
    return std::sqrt(std::max(acc, 0.0));
}

struct ConvergenceRecord {
    double param = 0.0;  // swept parameter value
    double eps = 1.0;
    std::string label;
    double dist_l2 = std::numeric_limits<double>::quiet_NaN();
    double dist_h1 = std::numeric_limits<double>::quiet_NaN();
    double energy = std::numeric_limits<double>::quiet_NaN();
    double mu = std::numeric_limits<double>::quiet_NaN();
    int iterations = 0;
    bool failed = false;
    std::string note;
};

namespace detail {

struct SweepPlan {
    bool box = false;
    bool blow_up = false;          // concentrating family: compare after blow-up
    bool sweep_is_beta = false;    // otherwise the schedule drives delta
    LimitingProfile profile;
    bool profile_radial = true;    // evaluate profile at |x - center|
};

inline PhysicalParams sweep_params(const ExperimentConfig& cfg, const std::string& label,
                                   double v) {
    PhysicalParams p;
    p.dim = cfg.dim;
    double d = static_cast<double>(cfg.dim);
    double grow = (4.0 + d) / (2.0 + d);
    if (label == "C1") { p.beta = v; p.delta = cfg.delta; }
    else if (label == "C2") { p.beta = v; p.delta = cfg.delta * std::pow(v, grow); }
    else if (label == "C3") { p.beta = cfg.beta; p.delta = v; }
    else if (label == "C1p") { p.beta = -std::abs(v); p.delta = cfg.delta; }
    else if (label == "C2p") { p.beta = -std::abs(v); p.delta = cfg.delta * std::pow(std::abs(v), grow); }
    else if (label == "C3p") { p.beta = cfg.beta; p.delta = v; }
    else if (label == "B1") { p.beta = v; p.delta = cfg.delta; }
    else if (label == "B2") { p.beta = v; p.delta = cfg.delta * v; }
    else if (label == "B3") { p.beta = cfg.beta; p.delta = v; }
    else if (label == "B1p") { p.beta = -std::abs(v); p.delta = cfg.delta; }
    else if (label == "B2p") { p.beta = -std::abs(v); p.delta = cfg.delta * std::abs(v); }
    else if (label == "B3p") { p.beta = cfg.beta; p.delta = v; }
    else throw config_error("sweep: unknown case template '" + label + "'");
    return p;
}

inline SweepPlan sweep_plan(const ExperimentConfig& cfg) {
    const std::string& label = cfg.kase;
    SweepPlan plan;
    plan.box = label.size() > 0 && label[0] == 'B';
    plan.blow_up = label == "C1p" || label == "C2p" || label == "B1p";
    plan.sweep_is_beta = label == "C1" || label == "C2" || label == "C1p" || label == "C2p" ||
                         label == "B1" || label == "B2" || label == "B1p" || label == "B2p";
    Potential harm = Potential::harmonic(cfg.gamma);
    double L = cfg.grid_L;
    if (label == "C1") plan.profile = tf_case1(harm, cfg.dim);
    else if (label == "C2") plan.profile = profile_case2(cfg.delta, harm, cfg.dim);
    else if (label == "C3" || label == "C3p") plan.profile = profile_case3(harm, cfg.dim);
    else if (label == "C1p") plan.profile = profile_case1prime(cfg.dim);
    else if (label == "C2p") plan.profile = profile_case2prime(cfg.delta, harm, cfg.dim);
    else if (label == "B1") plan.profile = profile_box(BoxCase::B1, 0.0, 0.0, L);
    else if (label == "B2") plan.profile = profile_box(BoxCase::B2, cfg.delta, 0.0, L);
    else if (label == "B3" || label == "B3p") plan.profile = profile_box(BoxCase::B3, 0.0, 0.0, L);
    else if (label == "B2p") plan.profile = profile_box(BoxCase::B2prime, cfg.delta, 0.0, L);
    else if (label == "B1p") plan.profile = profile_delta_limit(-1.0, cfg.dim);
    else throw config_error("sweep: unknown case template '" + cfg.kase + "'");
    plan.profile_radial = plan.profile.radial;

    // Parameter sanity for the fixed leg of each template.
    if ((label == "C3p" || label == "B3p") && !(cfg.beta < 0.0))
        throw config_error("sweep: " + label + " needs beta < 0 in the config");
    if ((label == "C1p" || label == "B1p") && !(cfg.delta > 0.0))
        throw config_error("sweep: " + label + " needs delta > 0 in the config");
    if ((label == "C2" || label == "C2p" || label == "B2" || label == "B2p") &&
        !(cfg.delta > 0.0))
        throw config_error("sweep: " + label + " interprets 'delta' as delta_inf > 0");
    return plan;
}

inline InitKind sweep_default_init(const std::string& label) {
    if (label == "C1" || label == "C2") return InitKind::tf_ansatz;
    if (label == "B1" || label == "B2" || label == "B3") return InitKind::uniform;
    return InitKind::gaussian;
}

}  // namespace detail

// Runs the configured case template over the schedule: each point gets a cold
// start, its own seed (config seed + index) and a residual tolerance scaled
// by the expected multiplier size. Points run on a small thread pool
// (MGPE_THREADS caps it); records keep schedule order regardless of timing.
// A solver failure marks the record failed and the sweep continues.
inline std::vector<ConvergenceRecord> run_sweep(const ExperimentConfig& cfg) {
    if (cfg.schedule.empty()) throw config_error("sweep: empty schedule");
    if (cfg.kase.empty()) throw config_error("sweep: missing case template");
    if (cfg.dim != 1) throw config_error("sweep: solver is one dimensional");
    detail::SweepPlan plan = detail::sweep_plan(cfg);

    const std::size_t jobs = cfg.schedule.size();
    std::vector<ConvergenceRecord> records(jobs);

    auto run_point = [&](std::size_t idx) {
        ConvergenceRecord& rec = records[idx];
        double v = cfg.schedule[idx];
        rec.param = v;
        try {
            PhysicalParams p = detail::sweep_params(cfg, cfg.kase, v);
            DomainKind dk = plan.box ? DomainKind::box : DomainKind::truncated;
            RegimeReport regime = classify(p, dk);
            rec.label = regime.label;
            rec.eps = regime.eps;
            if (!regime.exists) throw nonexistence_error("sweep: no ground state at this point");
            if (!(regime.eps > 0.0)) throw config_error("sweep: degenerate rescale at this point");

            Potential pot;
            Grid g;
            if (plan.box) {
                pot = Potential::box(0.0, cfg.grid_L);
                g = box_grid(0.0, cfg.grid_L, cfg.grid_n);
            } else {
                pot = Potential::harmonic(cfg.gamma);
                double L_phys = plan.blow_up ? cfg.grid_L * regime.eps : cfg.grid_L / regime.eps;
                g = truncated_grid(L_phys, cfg.grid_n);
            }

            SolverOptions opts;
            opts.tau = cfg.solver_tau;
            opts.max_iterations = cfg.solver_max_iter;
            opts.seed = cfg.seed + static_cast<std::uint64_t>(idx);
            opts.init = parse_init(cfg.solver_init, detail::sweep_default_init(cfg.kase));
            // Expected multiplier size at this point: the limit's mu carried
            // back through the rescaling (eps^-2 for blow-down families,
            // eps^-(d+2) for the collapsing primed families) or, on a fixed
            // box, through the swept coupling itself.
            double mu_scale;
            if (plan.blow_up)
                mu_scale = std::abs(plan.profile.mu) *
                           std::pow(regime.eps, -static_cast<double>(p.dim + 2));
            else if (plan.box)
                mu_scale = std::abs(plan.profile.mu) * std::abs(v);
            else
                mu_scale = std::abs(plan.profile.mu) / (regime.eps * regime.eps);
            opts.residual_tolerance = cfg.solver_tol * std::max(1.0, mu_scale);

            // The collapsing families concentrate in a well whose curvature
            // grows like mu; flowing a broad seed into that well crawls at
            // the stiffness-limited step. Seed with the limit profile pulled
            // back to the physical frame instead; the flow still owns the
            // converged state, the seed only removes the slow transient.
            std::vector<double> seed_vals;
            const std::vector<double>* phi0 = nullptr;
            if (plan.blow_up && cfg.solver_init == "auto") {
                seed_vals.resize(static_cast<std::size_t>(g.n));
                double mid = plan.box ? 0.5 * (g.a + g.b) : 0.0;
                for (int i = 0; i < g.n; ++i) {
                    double y = std::abs(g.x[static_cast<std::size_t>(i)] - mid) / regime.eps;
                    double rho = std::max(plan.profile.density_at(y), 0.0);
                    seed_vals[static_cast<std::size_t>(i)] = std::sqrt(rho);
                }
                phi0 = &seed_vals;
            }

            GroundStateResult gs = minimize(p, pot, g, opts, phi0);
            rec.energy = gs.energy.total();
            rec.mu = gs.mu;
            rec.iterations = gs.iterations;

            SampledFunction phi_eps =
                plan.box && !plan.blow_up
                    ? gs.field.f
                    : rescale(gs.field.f, regime.eps,
                              plan.blow_up ? RescaleDirection::blow_up
                                           : RescaleDirection::blow_down,
                              p.dim);
            SampledFunction dens;
            dens.grid = phi_eps.grid;
            dens.values.resize(phi_eps.values.size());
            for (std::size_t i = 0; i < dens.values.size(); ++i)
                dens.values[i] = phi_eps.values[i] * phi_eps.values[i];

            double center = plan.profile_radial && plan.box
                                ? 0.5 * (dens.grid.a + dens.grid.b)
                                : 0.0;
            SampledFunction pf;
            pf.grid = dens.grid;
            pf.values.resize(dens.values.size());
            for (int i = 0; i < dens.grid.n; ++i) {
                double x = dens.grid.x[static_cast<std::size_t>(i)];
                double arg = plan.profile_radial ? std::abs(x - center) : x;
                pf.values[static_cast<std::size_t>(i)] = plan.profile.density_at(arg);
            }
            rec.dist_l2 = density_distance(dens, pf, DistanceKind::L2);
            rec.dist_h1 = density_distance(dens, pf, DistanceKind::H1);
        } catch (const std::exception& e) {
            rec.failed = true;
            rec.note = e.what();
        }
    };

    unsigned nt = std::thread::hardware_concurrency();
    if (nt == 0) nt = 1;
    if (const char* env = std::getenv("MGPE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) nt = static_cast<unsigned>(v);
    }
    nt = static_cast<unsigned>(std::min<std::size_t>(nt, jobs));
    if (nt <= 1) {
        for (std::size_t i = 0; i < jobs; ++i) run_point(i);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(nt);
        for (unsigned t = 0; t < nt; ++t)
            pool.emplace_back([&] {
                for (;;) {
                    std::size_t i = next.fetch_add(1);
                    if (i >= jobs) break;
                    run_point(i);
                }
            });
        for (auto& th : pool) th.join();
    }
    return records;
}

// Locale-independent %.17g equivalent; CSV cells must be byte-stable.
inline std::string format_g17(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

inline void ensure_out_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir, ec);
    fs::path probe = fs::path(dir) / ".write_probe";
    std::ofstream f(probe);
    if (!f) throw config_error("out_dir '" + dir + "' is not writable");
    f << "ok\n";
    f.close();
    fs::remove(probe, ec);
}

inline std::string render_csv(const std::vector<ConvergenceRecord>& recs) {
    std::string out = "param,eps,case,dist_l2,dist_h1,energy,mu,iters\n";
    for (const ConvergenceRecord& r : recs) {
        out += format_g17(r.param);
        out += ',';
        out += format_g17(r.eps);
        out += ',';
        out += r.label;
        out += ',';
        out += format_g17(r.dist_l2);
        out += ',';
        out += format_g17(r.dist_h1);
        out += ',';
        out += format_g17(r.energy);
        out += ',';
        out += format_g17(r.mu);
        out += ',';
        out += std::to_string(r.iterations);
        out += '\n';
    }
    return out;
}

// Writes report.csv, summary.txt and plot.gp into out_dir. The CSV is
// byte-identical across runs with the same records.
inline void emit_report(const std::vector<ConvergenceRecord>& recs, const std::string& out_dir) {
    if (recs.empty()) throw config_error("emit_report: no records");
    ensure_out_dir(out_dir);
    namespace fs = std::filesystem;

    {
        std::ofstream csv(fs::path(out_dir) / "report.csv", std::ios::binary);
        if (!csv) throw config_error("emit_report: cannot write report.csv");
        csv << render_csv(recs);
    }

    bool monotone = true;
    bool any_failed = false;
    double prev = std::numeric_limits<double>::infinity();
    for (const ConvergenceRecord& r : recs) {
        if (r.failed) { any_failed = true; monotone = false; continue; }
        if (!(r.dist_l2 <= prev)) monotone = false;
        prev = r.dist_l2;
    }
    {
        std::ofstream sum(fs::path(out_dir) / "summary.txt", std::ios::binary);
        if (!sum) throw config_error("emit_report: cannot write summary.txt");
        sum << "records: " << recs.size() << "\n";
        sum << "case: " << (recs.front().label.empty() ? "?" : recs.front().label) << "\n";
        sum << "failed: " << (any_failed ? "YES" : "none") << "\n";
        sum << "monotone: " << (monotone ? "PASS" : "FAIL") << "\n";
        const ConvergenceRecord& last = recs.back();
        sum << "final dist_l2: " << format_g17(last.dist_l2) << "\n";
        sum << "final dist_h1: " << format_g17(last.dist_h1) << "\n";
        for (const ConvergenceRecord& r : recs)
            if (r.failed)
                sum << "failure at param " << format_g17(r.param) << ": " << r.note << "\n";
    }
    {
        std::ofstream gp(fs::path(out_dir) / "plot.gp", std::ios::binary);
        if (!gp) throw config_error("emit_report: cannot write plot.gp");
        gp << "set datafile separator ','\n"
           << "set logscale xy\n"
           << "set xlabel 'sweep parameter'\n"
           << "set ylabel 'distance to limiting profile'\n"
           << "set key left bottom\n"
           << "plot 'report.csv' skip 1 using 1:4 with linespoints title 'L2', \\\n"
           << "     'report.csv' skip 1 using 1:5 with linespoints title 'H1'\n";
    }
}

}  // namespace mgpe
