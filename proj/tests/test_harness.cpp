#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/harness.hpp"
#include "mgpe/profiles.hpp"

using namespace mgpe;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("config parsing") {
    std::string text =
        "# experiment\n"
        "mode = sweep\n"
        "dim = 1\n"
        "beta = -2.5\n"
        "delta = 1e-3\n"
        "potential = harmonic\n"
        "gamma = 2\n"
        "domain = truncated\n"
        "grid.n = 513\n"
        "grid.L = 10\n"
        "solver.tau = 0.005\n"
        "solver.tol = 1e-9\n"
        "solver.max_iter = 50000\n"
        "solver.init = tf_ansatz\n"
        "seed = 42\n"
        "out_dir = /tmp/mgpe_cfg_test\n"
        "case = C1\n"
        "schedule = 10, 100, 1000\n";
    ExperimentConfig c = ExperimentConfig::from_string(text);
    REQUIRE(c.mode == "sweep");
    REQUIRE(c.dim == 1);
    REQUIRE(c.beta == -2.5);
    REQUIRE(c.delta == 1e-3);
    REQUIRE(c.gamma == 2.0);
    REQUIRE(c.grid_n == 513);
    REQUIRE(c.grid_L == 10.0);
    REQUIRE(c.solver_tau == 0.005);
    REQUIRE(c.solver_tol == 1e-9);
    REQUIRE(c.solver_max_iter == 50000);
    REQUIRE(c.solver_init == "tf_ansatz");
    REQUIRE(c.seed == 42);
    REQUIRE(c.out_dir == "/tmp/mgpe_cfg_test");
    REQUIRE(c.kase == "C1");
    REQUIRE(c.schedule == std::vector<double>{10.0, 100.0, 1000.0});
    c.validate();

    REQUIRE_THROWS_AS(ExperimentConfig::from_string("bogus_key = 1\n"), config_error);
    REQUIRE_THROWS_AS(ExperimentConfig::from_string("no equals sign\n"), config_error);
    REQUIRE_THROWS_AS(ExperimentConfig::from_string("beta = abc\n"), config_error);
    REQUIRE_THROWS_AS(ExperimentConfig::from_file("/nonexistent/mgpe.cfg"), config_error);

    ExperimentConfig bad;
    bad.mode = "paint";
    REQUIRE_THROWS_AS(bad.validate(), config_error);
    bad = ExperimentConfig{};
    bad.dim = 4;
    REQUIRE_THROWS_AS(bad.validate(), config_error);
    bad = ExperimentConfig{};
    bad.solver_init = "warm";
    REQUIRE_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("config to potential and grid") {
    ExperimentConfig c;
    c.domain = "box";
    c.potential = "box";
    c.grid_L = 2.0;
    c.grid_n = 65;
    Grid g = config_grid(c);
    REQUIRE(g.kind == DomainKind::box);
    REQUIRE(g.a == 0.0);
    REQUIRE(g.b == 2.0);
    Potential pb = config_potential(c);
    REQUIRE(pb.kind == PotentialKind::box);

    c.domain = "truncated";
    c.potential = "harmonic";
    Grid t = config_grid(c);
    REQUIRE(t.kind == DomainKind::truncated);
    REQUIRE(t.a == -2.0);
    REQUIRE(config_potential(c).kind == PotentialKind::harmonic);
}

TEST_CASE("density distance against a closed form") {
    // The parabolic box profile against zero: integral of 36 t^2 (1-t)^2 is
    // 36/30, so the L2 distance is its square root.
    LimitingProfile b3 = profile_box(BoxCase::B3, 0.0, 0.0, 1.0);
    SampledFunction a;
    a.grid = b3.density.grid;
    a.values = b3.density.values;
    SampledFunction z;
    z.grid = a.grid;
    z.values.assign(a.values.size(), 0.0);
    double d = density_distance(a, z, DistanceKind::L2);
    REQUIRE(std::abs(d - std::sqrt(36.0 / 30.0)) < 1e-8);

    // H1 dominates L2, both respect the triangle inequality.
    SampledFunction m;
    m.grid = a.grid;
    m.values.resize(a.values.size());
    for (std::size_t i = 0; i < m.values.size(); ++i)
        m.values[i] = 0.3 * a.values[i] + 0.01;
    double dl_am = density_distance(a, m, DistanceKind::L2);
    double dl_mz = density_distance(m, z, DistanceKind::L2);
    REQUIRE(d <= dl_am + dl_mz + 1e-12);
    REQUIRE(density_distance(a, z, DistanceKind::H1) >= d);
    REQUIRE(density_distance(a, a, DistanceKind::H1) == 0.0);
}

TEST_CASE("deterministic numeric formatting") {
    for (double v : {0.1, 1.0 / 3.0, 1e300, 1e-300, -2.5e-17, 0.0, 12345.678901234567}) {
        std::string s = format_g17(v);
        REQUIRE(std::strtod(s.c_str(), nullptr) == v);
        REQUIRE(s.find(',') == std::string::npos);
    }
    REQUIRE(format_g17(0.0) == "0");
}

TEST_CASE("csv rendering is pinned") {
    std::vector<ConvergenceRecord> recs(3);
    recs[0] = {10.0, 0.5, "C1", 0.25, 0.5, 1.5, 2.5, 100, false, ""};
    recs[1] = {100.0, 0.25, "C1", 0.125, 0.25, 2.5, 3.5, 200, false, ""};
    recs[2] = {1000.0, 0.125, "C1", 0.0625, 0.125, 3.5, 4.5, 300, false, ""};
    std::string csv = render_csv(recs);
    std::stringstream ss(csv);
    std::string line;
    std::getline(ss, line);
    REQUIRE(line == "param,eps,case,dist_l2,dist_h1,energy,mu,iters");
    int rows = 0;
    while (std::getline(ss, line)) {
        REQUIRE_FALSE(line.empty());
        ++rows;
    }
    REQUIRE(rows == 3);
    REQUIRE(csv.find("10,0.5,C1,0.25,0.5,1.5,2.5,100") != std::string::npos);
}

TEST_CASE("report files") {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "mgpe_report_test";
    std::filesystem::remove_all(dir);

    std::vector<ConvergenceRecord> recs(3);
    recs[0] = {10.0, 0.5, "C3", 0.2, 0.4, 1.0, 2.0, 10, false, ""};
    recs[1] = {100.0, 0.25, "C3", 0.1, 0.2, 1.0, 2.0, 20, false, ""};
    recs[2] = {1000.0, 0.125, "C3", 0.05, 0.1, 1.0, 2.0, 30, false, ""};
    emit_report(recs, dir.string());
    REQUIRE(std::filesystem::exists(dir / "report.csv"));
    REQUIRE(std::filesystem::exists(dir / "summary.txt"));
    REQUIRE(std::filesystem::exists(dir / "plot.gp"));
    std::string sum = slurp(dir / "summary.txt");
    REQUIRE(sum.find("records: 3") != std::string::npos);
    REQUIRE(sum.find("case: C3") != std::string::npos);
    REQUIRE(sum.find("failed: none") != std::string::npos);
    REQUIRE(sum.find("monotone: PASS") != std::string::npos);

    recs[1].failed = true;
    recs[1].note = "solver exploded";
    emit_report(recs, dir.string());
    std::string sum2 = slurp(dir / "summary.txt");
    REQUIRE(sum2.find("failed: YES") != std::string::npos);
    REQUIRE(sum2.find("monotone: FAIL") != std::string::npos);
    REQUIRE(sum2.find("solver exploded") != std::string::npos);

    REQUIRE_THROWS_AS(emit_report({}, dir.string()), config_error);
    std::filesystem::remove_all(dir);
}

TEST_CASE("sweep template parameter maps") {
    ExperimentConfig cfg;
    cfg.dim = 1;
    cfg.delta = 2.0;
    PhysicalParams c2 = mgpe::detail::sweep_params(cfg, "C2", 100.0);
    REQUIRE(c2.beta == 100.0);
    REQUIRE(std::abs(c2.delta - 2.0 * std::pow(100.0, 5.0 / 3.0)) < 1e-9);
    PhysicalParams c2p = mgpe::detail::sweep_params(cfg, "C2p", 100.0);
    REQUIRE(c2p.beta == -100.0);
    PhysicalParams b2 = mgpe::detail::sweep_params(cfg, "B2", 50.0);
    REQUIRE(b2.delta == 100.0);
    REQUIRE_THROWS_AS(mgpe::detail::sweep_params(cfg, "Z9", 1.0), config_error);

    ExperimentConfig bad;
    bad.kase = "C3p";
    bad.beta = 0.0;
    bad.schedule = {10.0};
    REQUIRE_THROWS_AS(mgpe::detail::sweep_plan(bad), config_error);
    bad.kase = "C1p";
    bad.delta = 0.0;
    REQUIRE_THROWS_AS(mgpe::detail::sweep_plan(bad), config_error);
    bad.kase = "B2";
    bad.delta = 0.0;
    REQUIRE_THROWS_AS(mgpe::detail::sweep_plan(bad), config_error);
}

TEST_CASE("small sweep is reproducible byte for byte") {
    ExperimentConfig cfg;
    cfg.mode = "sweep";
    cfg.kase = "C3";
    cfg.beta = 0.0;
    cfg.dim = 1;
    cfg.grid_n = 257;
    cfg.grid_L = 6.0;
    cfg.solver_tol = 1e-6;
    cfg.schedule = {10.0, 100.0};

    std::vector<ConvergenceRecord> a = run_sweep(cfg);
    std::vector<ConvergenceRecord> b = run_sweep(cfg);
    REQUIRE(a.size() == 2);
    for (const ConvergenceRecord& r : a) {
        REQUIRE_FALSE(r.failed);
        REQUIRE(r.label == "C3");
        REQUIRE(r.dist_l2 >= 0.0);
        REQUIRE(r.dist_h1 >= r.dist_l2);
        REQUIRE(r.iterations > 0);
    }
    REQUIRE(render_csv(a) == render_csv(b));

    ExperimentConfig empty = cfg;
    empty.schedule = {};
    REQUIRE_THROWS_AS(run_sweep(empty), config_error);
    ExperimentConfig flat = cfg;
    flat.dim = 2;
    REQUIRE_THROWS_AS(run_sweep(flat), config_error);
}

TEST_CASE("sweep survives a nonexistent point") {
    ExperimentConfig cfg;
    cfg.kase = "C3";
    cfg.beta = 0.0;
    cfg.grid_n = 257;
    cfg.grid_L = 6.0;
    cfg.solver_tol = 1e-6;
    cfg.schedule = {10.0, -1.0};  // second point has delta < 0: no ground state
    std::vector<ConvergenceRecord> recs = run_sweep(cfg);
    REQUIRE(recs.size() == 2);
    REQUIRE_FALSE(recs[0].failed);
    REQUIRE(recs[1].failed);
    REQUIRE_FALSE(recs[1].note.empty());
}

TEST_CASE("output directory provisioning") {
    std::filesystem::path dir =
        std::filesystem::temp_directory_path() / "mgpe_out_test" / "nested" / "deeper";
    std::filesystem::remove_all(dir.parent_path().parent_path());
    ensure_out_dir(dir.string());
    REQUIRE(std::filesystem::is_directory(dir));
    std::filesystem::remove_all(dir.parent_path().parent_path());
}
