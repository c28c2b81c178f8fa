#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "mgpe/acceptance.hpp"
#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/harness.hpp"
#include "mgpe/model.hpp"
#include "mgpe/profiles.hpp"
#include "mgpe/regimes.hpp"
#include "mgpe/solver.hpp"

namespace {

mgpe::ExperimentConfig load_config(const std::string& path) {
    mgpe::ExperimentConfig cfg;
    if (!path.empty()) cfg = mgpe::ExperimentConfig::from_file(path);
    return cfg;
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& columns) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw mgpe::config_error("cannot write '" + path + "'");
    out << header << "\n";
    std::size_t rows = columns.empty() ? 0 : columns.front().size();
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t c = 0; c < columns.size(); ++c)
            out << (c ? "," : "") << mgpe::format_g17(columns[c][i]);
        out << "\n";
    }
}

int cmd_solve(const mgpe::ExperimentConfig& cfg) {
    cfg.validate();
    mgpe::PhysicalParams p{cfg.beta, cfg.delta, cfg.dim};
    mgpe::Potential pot = mgpe::config_potential(cfg);
    mgpe::Grid g = mgpe::config_grid(cfg);

    mgpe::SolverOptions opts;
    opts.tau = cfg.solver_tau;
    opts.residual_tolerance = cfg.solver_tol;
    opts.max_iterations = cfg.solver_max_iter;
    opts.seed = cfg.seed;
    mgpe::InitKind fallback = cfg.domain == "box" ? mgpe::InitKind::uniform
                                                  : mgpe::InitKind::gaussian;
    opts.init = mgpe::parse_init(cfg.solver_init, fallback);

    mgpe::GroundStateResult r = mgpe::solve_ground_state(p, pot, g, opts);

    std::printf("dim %d, beta %g, delta %g, potential %s, domain %s, n %d\n", cfg.dim, cfg.beta,
                cfg.delta, cfg.potential.c_str(), cfg.domain.c_str(), cfg.grid_n);
    std::printf("converged %s after %d iterations, residual %.3e\n", r.converged ? "yes" : "no",
                r.iterations, r.residual_norm);
    std::printf("energy: kinetic %.12g, potential %.12g, contact %.12g, hoi %.12g, total %.12g\n",
                r.energy.kinetic, r.energy.potential, r.energy.contact, r.energy.hoi,
                r.energy.total());
    std::printf("chemical potential %.12g (identity gap %.3e)\n", r.mu,
                std::abs(r.mu - mgpe::chemical_potential(r.energy)));
    if (r.decay.points >= 2)
        std::printf("tail decay: alpha %.6g, r^2 %.6f over %d points\n", r.decay.alpha,
                    r.decay.r_squared, r.decay.points);

    mgpe::ensure_out_dir(cfg.out_dir);
    std::vector<double> dens(r.field.f.values.size());
    for (std::size_t i = 0; i < dens.size(); ++i)
        dens[i] = r.field.f.values[i] * r.field.f.values[i];
    write_csv(cfg.out_dir + "/solution.csv", "x,phi,density",
              {r.field.f.grid.x, r.field.f.values, dens});
    std::printf("wrote %s/solution.csv\n", cfg.out_dir.c_str());
    return r.converged ? 0 : 2;
}

int cmd_profile(const std::string& label, int dim, double delta_inf, double beta, double gamma,
                const std::string& domain, double box_a, double box_b,
                const std::string& out_dir) {
    mgpe::Potential pot = domain == "box" ? mgpe::Potential::box(box_a, box_b)
                                          : mgpe::Potential::harmonic(gamma);
    mgpe::LimitingProfile P;
    if (label == "C1" || label == "case1" || label == "tf")
        P = mgpe::tf_case1(pot, dim);
    else if (label == "C2" || label == "case2")
        P = mgpe::profile_case2(delta_inf, pot, dim);
    else if (label == "C3" || label == "case3")
        P = mgpe::profile_case3(pot, dim);
    else if (label == "C1p" || label == "case1prime")
        P = mgpe::profile_case1prime(dim);
    else if (label == "C2p" || label == "case2prime")
        P = mgpe::profile_case2prime(delta_inf, pot, dim);
    else if (label == "delta" || label == "delta_limit")
        P = mgpe::profile_delta_limit(beta, dim);
    else if (label == "B1")
        P = mgpe::profile_box(mgpe::BoxCase::B1, delta_inf, box_a, box_b);
    else if (label == "B2")
        P = mgpe::profile_box(mgpe::BoxCase::B2, delta_inf, box_a, box_b);
    else if (label == "B3")
        P = mgpe::profile_box(mgpe::BoxCase::B3, delta_inf, box_a, box_b);
    else if (label == "B2p" || label == "B2prime")
        P = mgpe::profile_box(mgpe::BoxCase::B2prime, delta_inf, box_a, box_b);
    else
        throw mgpe::config_error("profile: unknown case label '" + label + "'");

    const mgpe::Grid& g = P.density.grid;
    double mass = P.radial ? mgpe::integrate_radial(P.dim, g, P.density.values)
                           : mgpe::integrate_richardson(g, P.density.values);
    bool zero_pot = P.label == "case1prime" || P.label == "delta_limit" ||
                    P.label.rfind("B", 0) == 0 || pot.kind != mgpe::PotentialKind::harmonic;
    auto V = [&](double r) {
        return zero_pot ? 0.0 : 0.5 * gamma * gamma * r * r;
    };
    double ivrho = mgpe::detail::profile_energy(P, V, 0.0, 0.0, P.radial);
    double identity_gap = std::abs(P.mu - (2.0 * P.energy - ivrho));

    std::printf("profile %s, dim %d\n", P.label.c_str(), P.dim);
    std::printf("mu %.12g, energy %.12g, support radius %.12g\n", P.mu, P.energy,
                P.support_radius);
    if (!P.note.empty()) std::printf("note: %s\n", P.note.c_str());
    std::printf("normalization gap %.3e, multiplier identity gap %.3e\n", std::abs(mass - 1.0),
                identity_gap);

    mgpe::ensure_out_dir(out_dir);
    write_csv(out_dir + "/profile.csv", "x,rho", {g.x, P.density.values});
    std::printf("wrote %s/profile.csv\n", out_dir.c_str());

    if (std::abs(mass - 1.0) > 1e-10 || identity_gap > 1e-8) {
        std::fprintf(stderr, "profile self-check failed\n");
        return 2;
    }
    return 0;
}

int cmd_sweep(const mgpe::ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<mgpe::ConvergenceRecord> recs = mgpe::run_sweep(cfg);
    mgpe::emit_report(recs, cfg.out_dir);
    int failed = 0;
    for (const mgpe::ConvergenceRecord& r : recs) {
        if (r.failed) ++failed;
        std::string extra = r.failed ? "  FAILED" : "";
        if (!r.note.empty()) extra += "  " + r.note;
        std::printf("param %.6g  eps %.6g  %s  L2 %.6g  H1 %.6g  iters %d%s\n", r.param, r.eps,
                    r.label.c_str(), r.dist_l2, r.dist_h1, r.iterations, extra.c_str());
    }
    std::printf("%d/%zu points failed; report in %s\n", failed, recs.size(), cfg.out_dir.c_str());
    return failed == 0 ? 0 : 2;
}

int cmd_classify(const mgpe::ExperimentConfig& cfg) {
    mgpe::PhysicalParams p{cfg.beta, cfg.delta, cfg.dim};
    mgpe::DomainKind dom = cfg.domain == "box" ? mgpe::DomainKind::box
                                               : mgpe::DomainKind::truncated;
    mgpe::RegimeReport rep = mgpe::classify(p, dom);
    std::printf("case %s\n", rep.label.c_str());
    std::printf("eps %.12g\n", rep.eps);
    std::printf("ratio %.12g\n", rep.ratio);
    std::printf("delta_inf %.12g\n", rep.delta_inf);
    std::printf("ground state exists: %s\n", rep.exists ? "yes" : "no");
    if (!rep.note.empty()) std::printf("note: %s\n", rep.note.c_str());
    return 0;
}

int cmd_probe(const mgpe::ExperimentConfig& cfg, std::vector<double> eps_list) {
    if (eps_list.empty()) eps_list = {1.0, 0.5, 0.1, 0.05, 0.01};
    mgpe::PhysicalParams p{cfg.beta, cfg.delta, cfg.dim};
    mgpe::Potential pot = mgpe::config_potential(cfg);
    mgpe::SampledFunction bump = mgpe::standard_bump();
    std::vector<std::pair<double, double>> samples =
        mgpe::nonexistence_probe(p, pot, bump, eps_list);
    std::vector<double> col_eps, col_e;
    for (const auto& [eps, e] : samples) {
        std::printf("eps %.6g  energy %.12g\n", eps, e);
        col_eps.push_back(eps);
        col_e.push_back(e);
    }
    mgpe::ensure_out_dir(cfg.out_dir);
    write_csv(cfg.out_dir + "/probe.csv", "eps,energy", {col_eps, col_e});
    std::printf("wrote %s/probe.csv\n", cfg.out_dir.c_str());
    if (cfg.delta < 0.0) {
        bool negative = true;
        for (const auto& [eps, e] : samples) negative = negative && e < 0.0;
        if (negative && samples.size() >= 3) {
            double slope = mgpe::divergence_slope(samples, 3);
            std::printf("divergence slope %.6g (expected -(dim + 2) = %d)\n", slope,
                        -(cfg.dim + 2));
        }
        for (std::size_t i = 1; i < samples.size(); ++i) {
            if (!(samples[i].second < samples[i - 1].second)) {
                std::fprintf(stderr, "probe: energy did not decrease along the family\n");
                return 2;
            }
        }
    }
    return 0;
}

int cmd_validate(const std::string& scratch) {
    std::vector<mgpe::acceptance::CriterionResult> rs = mgpe::acceptance::run_all(scratch);
    mgpe::acceptance::print(std::cout, rs);
    bool ok = mgpe::acceptance::all_pass(rs);
    std::printf("%s\n", ok ? "all criteria passed" : "criteria failed");
    return ok ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Ground states of the modified Gross-Pitaevskii equation with higher-order "
                 "interaction: solver, limiting profiles, regime sweeps"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    std::uint64_t seed_override = 0;
    bool have_seed = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key=value experiment config file");
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--seed", seed_override, "RNG seed override")
            ->each([&](const std::string&) { have_seed = true; });
    };

    CLI::App* solve = app.add_subcommand("solve", "compute one ground state");
    add_common(solve);

    CLI::App* profile = app.add_subcommand("profile", "evaluate a limiting profile");
    std::string pr_label;
    int pr_dim = 1;
    double pr_delta_inf = 1.0, pr_beta = -1.0, pr_gamma = 1.0, pr_a = 0.0, pr_b = 1.0;
    std::string pr_domain = "trap", pr_out = ".";
    profile->add_option("--case", pr_label,
                        "case label: C1|C2|C3|C1p|C2p|delta|B1|B2|B3|B2p")
        ->required();
    profile->add_option("--dim", pr_dim, "space dimension");
    profile->add_option("--delta-inf", pr_delta_inf, "limiting HOI strength");
    profile->add_option("--beta", pr_beta, "contact strength (delta limit case)");
    profile->add_option("--gamma", pr_gamma, "harmonic trap frequency");
    profile->add_option("--domain", pr_domain, "trap | box");
    profile->add_option("--box-a", pr_a, "box left endpoint");
    profile->add_option("--box-b", pr_b, "box right endpoint");
    profile->add_option("--out", pr_out, "output directory");

    CLI::App* sweep = app.add_subcommand("sweep", "run a regime convergence sweep");
    add_common(sweep);

    CLI::App* classify = app.add_subcommand("classify", "report the asymptotic regime");
    add_common(classify);
    double cl_beta = 0.0, cl_delta = 0.0;
    int cl_dim = 1;
    std::string cl_domain;
    classify->add_option("--beta", cl_beta, "contact strength");
    classify->add_option("--delta", cl_delta, "HOI strength");
    classify->add_option("--dim", cl_dim, "space dimension");
    classify->add_option("--domain", cl_domain, "truncated | box");

    CLI::App* probe = app.add_subcommand("probe", "energy of a shrinking test family");
    add_common(probe);
    double pb_beta = 0.0, pb_delta = -1.0;
    std::vector<double> pb_eps;
    probe->add_option("--beta", pb_beta, "contact strength");
    probe->add_option("--delta", pb_delta, "HOI strength");
    probe->add_option("--eps", pb_eps, "scale list (comma separated)")->delimiter(',');

    CLI::App* validate = app.add_subcommand("validate", "run the release criteria battery");
    std::string scratch = "acceptance_scratch";
    validate->add_option("--scratch", scratch, "scratch directory for sweep reports");

    CLI11_PARSE(app, argc, argv);

    try {
        if (profile->parsed())
            return cmd_profile(pr_label, pr_dim, pr_delta_inf, pr_beta, pr_gamma,
                               pr_domain == "box" ? "box" : "trap", pr_a, pr_b, pr_out);
        if (validate->parsed()) return cmd_validate(scratch);

        mgpe::ExperimentConfig cfg = load_config(config_path);
        if (!out_override.empty()) cfg.out_dir = out_override;
        if (have_seed) cfg.seed = seed_override;

        if (solve->parsed()) {
            cfg.mode = "solve";
            return cmd_solve(cfg);
        }
        if (sweep->parsed()) {
            cfg.mode = "sweep";
            return cmd_sweep(cfg);
        }
        if (classify->parsed()) {
            if (classify->count("--beta")) cfg.beta = cl_beta;
            if (classify->count("--delta")) cfg.delta = cl_delta;
            if (classify->count("--dim")) cfg.dim = cl_dim;
            if (!cl_domain.empty()) cfg.domain = cl_domain;
            return cmd_classify(cfg);
        }
        if (probe->parsed()) {
            if (probe->count("--beta")) cfg.beta = pb_beta;
            if (probe->count("--delta")) cfg.delta = pb_delta;
            return cmd_probe(cfg, pb_eps);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
