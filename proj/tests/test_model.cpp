#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/model.hpp"

#include "reference_values.hpp"

using namespace mgpe;
using namespace mgpe::ref;

namespace {

// Unit-mass Gaussian, the harmonic ground state: every energy term has a
// closed form against it.
Field gaussian_field(const Grid& g) {
    std::vector<double> v(static_cast<std::size_t>(g.n));
    double c = std::pow(M_PI, -0.25);
    for (int i = 0; i < g.n; ++i) {
        double x = g.x[static_cast<std::size_t>(i)];
        v[static_cast<std::size_t>(i)] = c * std::exp(-0.5 * x * x);
    }
    double nrm = norm_w(g, v);
    for (double& w : v) w /= nrm;
    return make_field(g, v);
}

}  // namespace

TEST_CASE("potential kinds") {
    Grid g = truncated_grid(4.0, 65);
    std::vector<double> vh = potential_values(Potential::harmonic(2.0), g);
    REQUIRE(std::abs(vh[32] - 0.0) < 1e-14);                 // center node of the odd grid
    REQUIRE(std::abs(vh.back() - 0.5 * 4.0 * 16.0) < 1e-12); // gamma^2 x^2 / 2 at x = 4
    std::vector<double> vb = potential_values(Potential::box(0.0, 1.0), g);
    for (double v : vb) REQUIRE(v == 0.0);
    std::vector<double> vz = potential_values(Potential::zero(), g);
    for (double v : vz) REQUIRE(v == 0.0);
    REQUIRE_THROWS_AS(potential_values(Potential::harmonic(0.0), g), config_error);
}

TEST_CASE("make_field clips sign and caches the norm") {
    Grid g = box_grid(0.0, 1.0, 65);
    std::vector<double> v(static_cast<std::size_t>(g.n), -1.0);
    Field f = make_field(g, v);
    for (double w : f.f.values) REQUIRE(w == 1.0);
    REQUIRE(std::abs(f.l2_norm - 1.0) < 1e-13);
    REQUIRE_THROWS_AS(make_field(g, std::vector<double>(5, 1.0)), config_error);
}

TEST_CASE("energy terms against Gaussian closed forms") {
    Grid g = truncated_grid(16.0, 2049);
    Field f = gaussian_field(g);
    Potential pot = Potential::harmonic(1.0);
    std::vector<double> V = potential_values(pot, g);

    const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);

    PhysicalParams p{1.0, 1.0, 1};
    EnergyBreakdown eb = energy(g, p, V, f.f.values);
    REQUIRE(std::abs(eb.kinetic - 0.25) < 1e-7);
    REQUIRE(std::abs(eb.potential - 0.25) < 1e-10);
    REQUIRE(std::abs(eb.contact - 0.5 * inv_sqrt_2pi) < 1e-10);
    REQUIRE(std::abs(eb.hoi - 0.5 * inv_sqrt_2pi) < 1e-7);

    PhysicalParams pc{1.0, 0.0, 1};
    EnergyBreakdown ec = energy(g, pc, V, f.f.values);
    REQUIRE(std::abs(ec.total() - 0.69947114020071635) < 1e-7);
    REQUIRE(std::abs(chemical_potential(ec) - 0.89894228040143268) < 1e-7);

    // Field overload agrees with the raw-vector route.
    EnergyBreakdown ef = energy(f, p, pot);
    REQUIRE(ef.total() == eb.total());

    PhysicalParams lin{0.0, 0.0, 1};
    EnergyBreakdown el = energy(g, lin, V, f.f.values);
    REQUIRE(std::abs(el.total() - 0.5) < 1e-7);
    REQUIRE(std::abs(chemical_potential(el) - el.total()) == 0.0);
}

TEST_CASE("Euler-Lagrange residual vanishes on the linear eigenstate") {
    Grid g = truncated_grid(16.0, 2049);
    Field f = gaussian_field(g);
    Potential pot = Potential::harmonic(1.0);
    std::vector<double> V = potential_values(pot, g);
    PhysicalParams lin{0.0, 0.0, 1};

    double mu = 0.0;
    std::vector<double> r;
    double res = el_residual(g, lin, V, f.f.values, &mu, &r);
    REQUIRE(res < 1e-6);
    REQUIRE(std::abs(mu - 0.5) < 1e-7);
    REQUIRE(static_cast<int>(r.size()) == g.n);

    double res2 = el_residual(f, lin, pot);
    REQUIRE(std::abs(res2 - res) < 1e-14);

    std::vector<double> big(f.f.values);
    for (double& v : big) v *= 2.0;
    Field unnormalized{{g, big}, 2.0};
    REQUIRE_THROWS_AS(el_residual(unnormalized, lin, pot), config_error);
}

TEST_CASE("interaction transform and its inverse") {
    REQUIRE(transform_forward(0.0, 1.0) == 0.0);
    REQUIRE(std::abs(transform_forward(1.0, 1.0) - kRefTransformF1Delta1) < 1e-12);
    REQUIRE(std::abs(transform_forward(1.0, 0.0) - 1.0 / std::sqrt(2.0)) < 1e-15);

    // Odd symmetry and the closed-form slope.
    for (double t : {0.3, 1.7, 4.0}) {
        REQUIRE(std::abs(transform_forward(-t, 1.0) + transform_forward(t, 1.0)) < 1e-14);
        double e = 1e-6;
        double num = (transform_forward(t + e, 2.0) - transform_forward(t - e, 2.0)) / (2.0 * e);
        REQUIRE(std::abs(num - transform_slope(t, 2.0)) < 1e-6);
    }

    for (double delta : {0.0, 0.1, 1.0, 10.0}) {
        for (double t : {0.0, 0.1, 1.0, 10.0}) {
            double y = transform_forward(t, delta);
            double back = transform_inverse(y, delta);
            REQUIRE(std::abs(back - t) <= 1e-10 * std::max(1.0, t));
        }
    }

    std::vector<double> phi = {0.0, 0.25, 0.5, 1.0, 2.0};
    std::vector<double> u = transform_forward(phi, 0.7);
    std::vector<double> back = transform_inverse(u, 0.7);
    for (std::size_t i = 0; i < phi.size(); ++i)
        REQUIRE(std::abs(back[i] - phi[i]) < 1e-10);

    REQUIRE_THROWS_AS(transform_forward(1.0, -0.5), config_error);
}

TEST_CASE("tail decay fit recovers a synthetic exponential") {
    Grid g = box_grid(0.0, 20.0, 1001);
    SampledFunction f;
    f.grid = g;
    f.values.resize(static_cast<std::size_t>(g.n));
    for (int i = 0; i < g.n; ++i)
        f.values[static_cast<std::size_t>(i)] =
            3.0 * std::exp(-2.0 * g.x[static_cast<std::size_t>(i)]);
    DecayFit fit = decay_fit(f);
    REQUIRE(fit.points > 100);
    REQUIRE(std::abs(fit.alpha - 2.0) < 1e-9);
    REQUIRE(std::abs(fit.amplitude - 3.0) < 1e-6);
    REQUIRE(fit.r_squared > 1.0 - 1e-12);

    // Too few window points: the fit degrades to a zero report, not a throw.
    Grid tiny = box_grid(0.0, 1.0, 9);
    SampledFunction none;
    none.grid = tiny;
    none.values.assign(9, 0.5);
    DecayFit empty = decay_fit(none);
    REQUIRE(empty.points == 0);
    REQUIRE(empty.alpha == 0.0);
}
