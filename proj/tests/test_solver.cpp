#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/model.hpp"
#include "mgpe/solver.hpp"

#include "reference_values.hpp"

using namespace mgpe;
using namespace mgpe::ref;

TEST_CASE("existence gates") {
    REQUIRE(ground_state_exists(1, -100.0, 1.0));
    REQUIRE(ground_state_exists(3, -100.0, 0.5));
    REQUIRE_FALSE(ground_state_exists(1, 0.0, -1e-6));
    REQUIRE_FALSE(ground_state_exists(3, 10.0, -1.0));

    REQUIRE(ground_state_exists(1, -1e6, 0.0));
    REQUIRE(ground_state_exists(2, -5.0, 0.0));       // above -C_b
    REQUIRE_FALSE(ground_state_exists(2, -6.0, 0.0)); // below -C_b
    REQUIRE(std::abs(cb_constant() - M_PI * 1.86225) < 1e-12);
    REQUIRE(ground_state_exists(3, 0.0, 0.0));
    REQUIRE(ground_state_exists(3, 0.1, 0.0));
    REQUIRE_FALSE(ground_state_exists(3, -0.1, 0.0));

    PhysicalParams bad{0.0, -1.0, 1};
    REQUIRE_THROWS_AS(
        minimize(bad, Potential::harmonic(1.0), truncated_grid(8.0, 129), SolverOptions{}),
        nonexistence_error);
    PhysicalParams flat{1.0, 1.0, 2};
    REQUIRE_THROWS_AS(
        minimize(flat, Potential::harmonic(1.0), truncated_grid(8.0, 129), SolverOptions{}),
        config_error);
}

TEST_CASE("project_normalize enforces unit mass") {
    Grid g = truncated_grid(6.0, 257);
    std::vector<double> v(static_cast<std::size_t>(g.n), 0.3);
    Field f = project_normalize(make_field(g, v));
    REQUIRE(std::abs(f.l2_norm - 1.0) < 1e-14);
    Field f2 = project_normalize(f);
    REQUIRE(std::abs(f2.l2_norm - 1.0) < 1e-14);
}

TEST_CASE("linear limits recover the exact eigenvalues") {
    PhysicalParams lin{0.0, 0.0, 1};

    GroundStateResult ho = minimize(lin, Potential::harmonic(1.0), truncated_grid(12.0, 1025),
                                    SolverOptions{});
    REQUIRE(ho.converged);
    REQUIRE(std::abs(ho.energy.total() - 0.5) < 1e-6);
    REQUIRE(std::abs(ho.mu - 0.5) < 1e-6);

    SolverOptions uo;
    uo.init = InitKind::uniform;
    GroundStateResult bx = minimize(lin, Potential::box(0.0, 1.0), box_grid(0.0, 1.0, 1025), uo);
    REQUIRE(bx.converged);
    REQUIRE(std::abs(bx.energy.total() - 0.5 * M_PI * M_PI) < 1e-6);
}

TEST_CASE("interacting reference energy") {
    PhysicalParams p{10.0, 1.0, 1};
    GroundStateResult r =
        minimize(p, Potential::harmonic(1.0), truncated_grid(16.0, 2049), SolverOptions{});
    REQUIRE(r.converged);
    REQUIRE(std::abs(r.energy.total() - kRefEnergyBeta10Delta1) < 2e-5);
    REQUIRE(std::abs(r.mu - chemical_potential(r.energy)) < 1e-10 * std::abs(r.mu));
    REQUIRE(r.decay.points >= 3);
    REQUIRE(r.decay.alpha > 0.0);
}

TEST_CASE("gradient flow descends and conserves mass") {
    PhysicalParams p{1.0, 1.0, 1};
    Potential pot = Potential::harmonic(1.0);
    Grid g = truncated_grid(12.0, 1025);

    GroundStateResult r = minimize(p, pot, g, SolverOptions{});
    REQUIRE(r.converged);
    REQUIRE(r.trace.steps.size() >= 2);
    for (std::size_t i = 1; i < r.trace.steps.size(); ++i) {
        double prev = r.trace.steps[i - 1].energy;
        REQUIRE(r.trace.steps[i].energy <= prev + 1e-12 * std::max(1.0, std::abs(prev)));
    }
    for (const auto& s : r.trace.steps) REQUIRE(std::abs(s.mass_before_projection - 1.0) < 0.5);

    // The converged state is a fixed point of the projected step.
    SolverOptions tight;
    tight.residual_tolerance = 1e-11;
    GroundStateResult rt = minimize(p, pot, g, tight);
    Field next = flow_step(rt.field, p, pot, tight.tau);
    double gap = 0.0;
    for (std::size_t i = 0; i < next.f.values.size(); ++i)
        gap = std::max(gap, std::abs(next.f.values[i] - rt.field.f.values[i]));
    REQUIRE(gap < 1e-9);
    REQUIRE(std::abs(next.l2_norm - 1.0) < 1e-13);
}

TEST_CASE("minimizer does not depend on the random seed") {
    PhysicalParams p{1.0, 1.0, 1};
    Potential pot = Potential::harmonic(1.0);
    Grid g = truncated_grid(10.0, 513);
    SolverOptions a, b;
    a.init = b.init = InitKind::random;
    a.seed = 7;
    b.seed = 1234;
    GroundStateResult ra = minimize(p, pot, g, a);
    GroundStateResult rb = minimize(p, pot, g, b);
    REQUIRE(ra.converged);
    REQUIRE(rb.converged);
    double worst = 0.0;
    for (std::size_t i = 0; i < ra.field.f.values.size(); ++i) {
        double da = ra.field.f.values[i] * ra.field.f.values[i];
        double db = rb.field.f.values[i] * rb.field.f.values[i];
        worst = std::max(worst, std::abs(da - db));
    }
    REQUIRE(worst < 1e-6);
}

TEST_CASE("even potential gives an even state") {
    PhysicalParams p{5.0, 0.5, 1};
    GroundStateResult r =
        minimize(p, Potential::harmonic(1.0), truncated_grid(12.0, 1025), SolverOptions{});
    REQUIRE(r.converged);
    const std::vector<double>& v = r.field.f.values;
    double worst = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i)
        worst = std::max(worst, std::abs(v[i] - v[v.size() - 1 - i]));
    REQUIRE(worst < 1e-8);
}

TEST_CASE("strong repulsion keeps a long strictly decreasing run") {
    PhysicalParams p{100.0, 1.0, 1};
    SolverOptions o;
    o.tau = 1e-3;
    GroundStateResult r =
        minimize(p, Potential::harmonic(1.0), truncated_grid(12.0, 513), o);
    REQUIRE(r.converged);
    int run = 0, best = 0;
    for (std::size_t i = 1; i < r.trace.steps.size(); ++i) {
        if (r.trace.steps[i].energy < r.trace.steps[i - 1].energy) best = std::max(best, ++run);
        else run = 0;
    }
    REQUIRE(best >= 100);
}

TEST_CASE("transformed mode agrees with the direct flow") {
    PhysicalParams p{1.0, 1.0, 1};
    Potential pot = Potential::harmonic(1.0);
    Grid g = truncated_grid(10.0, 513);

    GroundStateResult direct = minimize(p, pot, g, SolverOptions{});
    SolverOptions ot;
    ot.mode = SolverMode::transformed;
    GroundStateResult trans = solve_ground_state(p, pot, g, ot);
    REQUIRE(direct.converged);
    REQUIRE(trans.converged);
    REQUIRE(trans.transformed_iterations > 0);
    REQUIRE(std::abs(direct.energy.total() - trans.energy.total()) < 1e-5);

    SolverOptions od;
    GroundStateResult dispatch = solve_ground_state(p, pot, g, od);
    REQUIRE(std::abs(dispatch.energy.total() - direct.energy.total()) < 1e-12);
}
