#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <utility>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/model.hpp"
#include "mgpe/regimes.hpp"

using namespace mgpe;

namespace {

SampledFunction normalized_gaussian(double L, int n) {
    Grid g = truncated_grid(L, n);
    SampledFunction f;
    f.grid = g;
    f.values.resize(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i) {
        double x = g.x[static_cast<std::size_t>(i)];
        f.values[static_cast<std::size_t>(i)] = std::exp(-0.5 * x * x);
    }
    double nrm = norm_w(g, f.values);
    for (double& v : f.values) v /= nrm;
    return f;
}

}  // namespace

TEST_CASE("regime labels across the ratio axis") {
    auto label = [](double beta, double delta, DomainKind dom) {
        return classify(PhysicalParams{beta, delta, 1}, dom).label;
    };
    DomainKind W = DomainKind::truncated, B = DomainKind::box;

    REQUIRE(label(100.0, 1.0, W) == "C1");
    REQUIRE(label(1.0, 1.0, W) == "C2");
    REQUIRE(label(1.0, 100.0, W) == "C3");
    REQUIRE(label(-100.0, 1.0, W) == "C1p");
    REQUIRE(label(-1.0, 1.0, W) == "C2p");
    REQUIRE(label(-1.0, 100.0, W) == "C3p");

    REQUIRE(label(100.0, 1.0, B) == "B1");
    REQUIRE(label(1.0, 1.0, B) == "B2");
    REQUIRE(label(1.0, 100.0, B) == "B3");
    REQUIRE(label(-100.0, 1.0, B) == "B1p");
    REQUIRE(label(-1.0, 1.0, B) == "B2p");
    REQUIRE(label(-1.0, 100.0, B) == "B3p");

    REQUIRE(label(1.0, -1.0, W) == "none");
    REQUIRE(label(0.0, 0.0, W) == "none");
    RegimeReport lin = classify(PhysicalParams{0.0, 0.0, 1}, W);
    REQUIRE(lin.note.find("linear") != std::string::npos);
    RegimeReport neg = classify(PhysicalParams{1.0, -1.0, 1}, W);
    REQUIRE_FALSE(neg.exists);

    REQUIRE_THROWS_AS(classify(PhysicalParams{1.0, 1.0, 1}, W, 0.5, 0.1), config_error);
}

TEST_CASE("blow-down scales per regime") {
    DomainKind W = DomainKind::truncated, B = DomainKind::box;

    RegimeReport c1 = classify(PhysicalParams{1000.0, 1.0, 1}, W);
    REQUIRE(std::abs(c1.eps - std::pow(1000.0, -1.0 / 3.0)) < 1e-14);

    RegimeReport c3 = classify(PhysicalParams{1.0, 1e5, 1}, W);
    REQUIRE(std::abs(c3.eps - std::pow(1e5, -0.2)) < 1e-14);

    RegimeReport c2p = classify(PhysicalParams{-8.0, 8.0 * std::pow(8.0, 5.0 / 3.0) * 0.5, 1}, W);
    REQUIRE(c2p.label == "C2p");
    REQUIRE(std::abs(c2p.eps - std::pow(8.0, -1.0 / 3.0)) < 1e-14);

    RegimeReport c1p = classify(PhysicalParams{-100.0, 4.0, 1}, W);
    REQUIRE(c1p.label == "C1p");
    REQUIRE(std::abs(c1p.eps - std::sqrt(4.0 / 100.0)) < 1e-14);

    RegimeReport b1p = classify(PhysicalParams{-100.0, 4.0, 1}, B);
    REQUIRE(b1p.label == "B1p");
    REQUIRE(std::abs(b1p.eps - std::sqrt(4.0 / 100.0)) < 1e-14);

    RegimeReport degenerate = classify(PhysicalParams{-100.0, 0.0, 1}, W);
    REQUIRE(degenerate.label == "C1p");
    REQUIRE(degenerate.eps == 0.0);
    REQUIRE_FALSE(degenerate.note.empty());

    RegimeReport b2 = classify(PhysicalParams{1.0, 1.0, 1}, B);
    REQUIRE(b2.eps == 1.0);
    REQUIRE(std::abs(b2.delta_inf - 1.0) < 1e-14);
}

TEST_CASE("classification is invariant under the regime scaling") {
    double s = 7.0;
    for (int dim : {1, 2, 3}) {
        double grow = (4.0 + dim) / (2.0 + dim);
        PhysicalParams p{2.0, 3.0, dim};
        PhysicalParams q{2.0 * s, 3.0 * std::pow(s, grow), dim};
        RegimeReport a = classify(p, DomainKind::truncated);
        RegimeReport b = classify(q, DomainKind::truncated);
        REQUIRE(a.label == b.label);
        REQUIRE(std::abs(a.ratio - b.ratio) < 1e-12 * std::max(1.0, std::abs(a.ratio)));
    }
}

TEST_CASE("rescaling is an exact node relabeling") {
    SampledFunction f = normalized_gaussian(4.0, 129);

    // eps = 1/4: every scale factor is a power of two, so the round trip is
    // bitwise exact.
    SampledFunction down = rescale(f, 0.25, RescaleDirection::blow_down, 1);
    REQUIRE(down.grid.a == f.grid.a * 0.25);
    REQUIRE(down.grid.b == f.grid.b * 0.25);
    REQUIRE(down.grid.n == f.grid.n);
    SampledFunction back = rescale(down, 0.25, RescaleDirection::blow_up, 1);
    for (std::size_t i = 0; i < f.values.size(); ++i)
        REQUIRE(back.values[i] == f.values[i]);
    REQUIRE(back.grid.a == f.grid.a);

    // Mass is preserved exactly by construction for any eps.
    SampledFunction d2 = rescale(f, 0.3, RescaleDirection::blow_down, 1);
    std::vector<double> sq(d2.values.size());
    for (std::size_t i = 0; i < sq.size(); ++i) sq[i] = d2.values[i] * d2.values[i];
    REQUIRE(std::abs(integrate(d2.grid, sq) - 1.0) < 1e-12);

    // Second moment contracts by eps^2 exactly in quadrature.
    auto moment = [](const SampledFunction& u) {
        std::vector<double> m(u.values.size());
        for (std::size_t i = 0; i < m.size(); ++i) {
            double x = u.grid.x[i];
            m[i] = x * x * u.values[i] * u.values[i];
        }
        return integrate(u.grid, m);
    };
    double eps = 0.3;
    REQUIRE(std::abs(moment(d2) - eps * eps * moment(f)) < 1e-13);

    REQUIRE_THROWS_AS(rescale(f, 0.0, RescaleDirection::blow_down, 1), config_error);
    REQUIRE_THROWS_AS(rescale(f, 0.5, RescaleDirection::blow_down, 5), config_error);
}

TEST_CASE("rescaled energy matches the physical energy") {
    SampledFunction f = normalized_gaussian(12.0, 1025);
    Potential pot = Potential::harmonic(1.0);
    PhysicalParams p{2.0, 0.7, 1};
    std::vector<double> V = potential_values(pot, f.grid);
    double e_phys = energy(f.grid, p, V, f.values).total();

    for (double eps : {0.5, 2.0}) {
        SampledFunction fe = rescale(f, eps, RescaleDirection::blow_down, 1);
        double e_resc = rescaled_energy(fe, eps, p, pot);
        REQUIRE(std::abs(e_resc - eps * eps * e_phys) < 1e-8 * std::max(1.0, std::abs(e_phys)));
    }
}

TEST_CASE("standard bump is a unit-mass compact seed") {
    SampledFunction b = standard_bump();
    REQUIRE(std::abs(norm_w(b.grid, b.values) - 1.0) < 1e-13);
    REQUIRE(b.values.front() == 0.0);
    REQUIRE(b.values.back() == 0.0);
    double peak = 0.0;
    for (double v : b.values) peak = std::max(peak, v);
    REQUIRE(peak > 0.5);
}

TEST_CASE("divergence probe witnesses collapse only for negative delta") {
    Potential pot = Potential::harmonic(1.0);
    SampledFunction seed = standard_bump(2.0, 513);

    PhysicalParams bad{0.0, -1.0, 1};
    // The kinetic term adds a +eps^{-2} correction on top of the -eps^{-3}
    // collapse, so the slope window has to reach small eps.
    auto samples = nonexistence_probe(bad, pot, seed, {1.0, 0.5, 0.1, 0.05, 0.01});
    REQUIRE(samples.size() == 5);
    for (std::size_t i = 1; i < samples.size(); ++i)
        REQUIRE(samples[i].second < samples[i - 1].second);
    double slope = divergence_slope(samples, 3);
    REQUIRE(std::abs(slope + 3.0) < 0.3);

    // Positive HOI: shrinking the state raises the energy instead.
    PhysicalParams good{0.0, 1.0, 1};
    auto stable = nonexistence_probe(good, pot, seed, {1.0, 0.5, 0.25});
    REQUIRE(stable.back().second > stable.front().second);
    REQUIRE_THROWS_AS(divergence_slope(stable, 3), error);

    REQUIRE_THROWS_AS(nonexistence_probe(bad, pot, seed, {}), config_error);
    PhysicalParams flat{0.0, -1.0, 2};
    REQUIRE_THROWS_AS(nonexistence_probe(flat, pot, seed, {1.0}), config_error);
}

TEST_CASE("synthetic power law is fit exactly") {
    std::vector<std::pair<double, double>> s;
    for (double eps : {1.0, 0.5, 0.1, 0.05, 0.01}) s.emplace_back(eps, -2.0 * std::pow(eps, -3.0));
    REQUIRE(std::abs(divergence_slope(s, 3) + 3.0) < 1e-12);
    REQUIRE(std::abs(divergence_slope(s, 5) + 3.0) < 1e-12);
    REQUIRE_THROWS_AS(divergence_slope(s, 6), config_error);
}
