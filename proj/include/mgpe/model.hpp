#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/operators.hpp"

// Energy functional and Euler-Lagrange operator for the modified
// Gross-Pitaevskii model
//
//   E(phi) = int 1/2 |phi'|^2 + V phi^2 + beta/2 phi^4 + delta/2 |(phi^2)'|^2,
//
// minimized over nonnegative phi with unit L2 mass. All quadratic forms use
// the same discrete negative Laplacian A (see operators.hpp), so the identity
// mu = E + E_contact + E_hoi holds at the discrete level, not only in the
// continuum limit.

namespace mgpe {

struct PhysicalParams {
    double beta = 0.0;   // contact interaction strength
    double delta = 0.0;  // higher-order interaction strength
    int dim = 1;         // spatial dimension, 1..3
};

enum class PotentialKind { harmonic, box, zero };

struct Potential {
    PotentialKind kind = PotentialKind::harmonic;
    double gamma = 1.0;      // trap frequency, harmonic kind only
    double box_a = 0.0;      // box interval, box kind only
    double box_b = 1.0;

    static Potential harmonic(double gamma) { return {PotentialKind::harmonic, gamma, 0.0, 0.0}; }
    static Potential box(double a, double b) { return {PotentialKind::box, 0.0, a, b}; }
    static Potential zero() { return {PotentialKind::zero, 0.0, 0.0, 0.0}; }
};

inline std::vector<double> potential_values(const Potential& pot, const Grid& g) {
    std::vector<double> v(static_cast<std::size_t>(g.n), 0.0);
    if (pot.kind == PotentialKind::harmonic) {
        if (!(pot.gamma > 0.0)) throw config_error("potential: harmonic gamma must be > 0");
        double c = 0.5 * pot.gamma * pot.gamma;
        for (int i = 0; i < g.n; ++i) {
            double x = g.x[static_cast<std::size_t>(i)];
            v[static_cast<std::size_t>(i)] = c * x * x;
        }
    }
    // The box potential vanishes inside the domain; the wall is the Dirichlet
    // condition carried by the grid. The zero kind is used for rescaled
    // limiting problems on the whole line.
    return v;
}

// A nonnegative state sampled on a grid, with its quadrature norm cached.
struct Field {
    SampledFunction f;
    double l2_norm = 0.0;
};

inline Field make_field(const Grid& g, std::vector<double> values) {
    if (static_cast<int>(values.size()) != g.n)
        throw config_error("field: value count does not match grid");
    for (double& v : values) v = std::abs(v);
    Field out{SampledFunction{g, std::move(values)}, 0.0};
    out.l2_norm = norm_w(g, out.f.values);
    return out;
}

struct EnergyBreakdown {
    double kinetic = 0.0;
    double potential = 0.0;
    double contact = 0.0;  // beta/2 int phi^4
    double hoi = 0.0;      // delta/2 int |(phi^2)'|^2

    double total() const { return kinetic + potential + contact + hoi; }
};

inline EnergyBreakdown energy(const Grid& g, const PhysicalParams& p,
                              const std::vector<double>& V, const std::vector<double>& phi) {
    std::vector<double> rho(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) rho[i] = phi[i] * phi[i];
    EnergyBreakdown e;
    e.kinetic = 0.5 * inner_w(g, phi, detail::apply_neg_laplacian(g, phi));
    e.potential = inner_w(g, V, rho);
    e.contact = 0.5 * p.beta * inner_w(g, rho, rho);
    // The weak form makes this exactly (delta/2)|D rho|_W^2, the squared
    // discrete derivative of the density, matching the gradient used in the
    // Hamiltonian to round-off.
    if (p.delta != 0.0)
        e.hoi = 0.5 * p.delta * inner_w(g, rho, detail::apply_neg_laplacian_weak(g, rho));
    return e;
}

inline EnergyBreakdown energy(const Field& field, const PhysicalParams& p, const Potential& pot) {
    return energy(field.f.grid, p, potential_values(pot, field.f.grid), field.f.values);
}

// Lagrange multiplier of the mass constraint: exceeds the energy by one extra
// copy of the quartic terms, mu = E + E_contact + E_hoi.
inline double chemical_potential(const EnergyBreakdown& e) {
    return e.total() + e.contact + e.hoi;
}

inline double chemical_potential(const Field& field, const PhysicalParams& p,
                                 const Potential& pot) {
    if (std::abs(field.l2_norm - 1.0) > 1e-8)
        throw config_error("chemical_potential: field must be normalized");
    return chemical_potential(energy(field, p, pot));
}

// H phi = [-1/2 Lap + V + beta rho - delta Lap rho] phi with rho = phi^2.
inline std::vector<double> apply_hamiltonian(const Grid& g, const PhysicalParams& p,
                                             const std::vector<double>& V,
                                             const std::vector<double>& phi) {
    std::vector<double> rho(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) rho[i] = phi[i] * phi[i];
    std::vector<double> h = detail::apply_neg_laplacian(g, phi);
    for (double& v : h) v *= 0.5;
    if (p.delta != 0.0) {
        std::vector<double> arho = detail::apply_neg_laplacian_weak(g, rho);
        for (std::size_t i = 0; i < phi.size(); ++i)
            h[i] += (V[i] + p.beta * rho[i] + p.delta * arho[i]) * phi[i];
    } else {
        for (std::size_t i = 0; i < phi.size(); ++i) h[i] += (V[i] + p.beta * rho[i]) * phi[i];
    }
    return h;
}

// Euler-Lagrange residual r = H phi - mu phi with the quadrature-form
// multiplier mu = <phi, H phi>_W / <phi, phi>_W, which makes r orthogonal to
// phi. The two wall rows are constraint rows of the Dirichlet-pinned problem:
// the gradient there is balanced by the wall's reaction force, not by mu, so
// they are zeroed rather than measured. Returns ||r||_W; optionally reports
// mu and the residual vector.
inline double el_residual(const Grid& g, const PhysicalParams& p, const std::vector<double>& V,
                          const std::vector<double>& phi, double* mu_out = nullptr,
                          std::vector<double>* r_out = nullptr) {
    std::vector<double> h = apply_hamiltonian(g, p, V, phi);
    double mass = inner_w(g, phi, phi);
    double mu = inner_w(g, phi, h) / mass;
    if (mu_out) *mu_out = mu;
    for (std::size_t i = 0; i < phi.size(); ++i) h[i] -= mu * phi[i];
    h.front() = 0.0;
    h.back() = 0.0;
    double nrm = norm_w(g, h);
    if (r_out) *r_out = std::move(h);
    return nrm;
}

inline double el_residual(const Field& field, const PhysicalParams& p, const Potential& pot) {
    if (std::abs(field.l2_norm - 1.0) > 1e-8)
        throw config_error("el_residual: field must be normalized");
    return el_residual(field.f.grid, p, potential_values(pot, field.f.grid), field.f.values);
}

// ---------------------------------------------------------------------------
// Density transform. With u = F(phi), F'(t) = sqrt(1/2 + 2 delta t^2), the
// kinetic plus higher-order terms of E(phi) collapse to int |u'|^2, turning
// the quartic-gradient functional into a semilinear one. Defined for
// delta >= 0; closed form
//   F(t) = t/2 sqrt(1/2 + 2 delta t^2) + asinh(2 t sqrt(delta)) / (4 sqrt(2 delta)).

inline double transform_forward(double t, double delta) {
    if (delta < 0.0) throw config_error("transform: requires delta >= 0");
    if (delta == 0.0) return t / std::sqrt(2.0);
    double s = std::sqrt(delta);
    return 0.5 * t * std::sqrt(0.5 + 2.0 * delta * t * t) +
           std::asinh(2.0 * t * s) / (4.0 * std::sqrt(2.0 * delta));
}

inline double transform_slope(double t, double delta) {
    return std::sqrt(0.5 + 2.0 * delta * t * t);
}

// G = F^{-1} by safeguarded Newton. F is odd and strictly increasing with
// F' >= 1/sqrt(2), so the iteration is well conditioned everywhere.
inline double transform_inverse(double y, double delta) {
    if (delta < 0.0) throw config_error("transform: requires delta >= 0");
    if (delta == 0.0) return y * std::sqrt(2.0);
    if (y == 0.0) return 0.0;
    double sign = y > 0.0 ? 1.0 : -1.0;
    double ay = std::abs(y);
    // F(t) >= t/sqrt(2), so t = ay*sqrt(2) overshoots; 0 undershoots.
    double lo = 0.0, hi = ay * std::sqrt(2.0);
    double t = std::min(hi, std::sqrt(2.0 * ay / std::sqrt(2.0 * delta)));
    if (!(t > lo)) t = 0.5 * hi;
    for (int it = 0; it < 100; ++it) {
        double f = transform_forward(t, delta) - ay;
        if (f > 0.0) hi = t; else lo = t;
        double tn = t - f / transform_slope(t, delta);
        if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
        if (std::abs(tn - t) <= 1e-16 * (1.0 + std::abs(t))) { t = tn; break; }
        t = tn;
    }
    return sign * t;
}

inline std::vector<double> transform_forward(const std::vector<double>& phi, double delta) {
    std::vector<double> u(phi.size());
    for (std::size_t i = 0; i < phi.size(); ++i) u[i] = transform_forward(phi[i], delta);
    return u;
}

inline std::vector<double> transform_inverse(const std::vector<double>& u, double delta) {
    std::vector<double> phi(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) phi[i] = transform_inverse(u[i], delta);
    return phi;
}

// ---------------------------------------------------------------------------
// Tail decay fit: least squares for ln phi = ln C - alpha x on the right
// tail, restricted to the window where phi is small enough to be asymptotic
// but still far above roundoff.

struct DecayFit {
    double alpha = 0.0;      // decay rate
    double amplitude = 0.0;  // prefactor C
    double r_squared = 0.0;  // quality of the log-linear fit
    int points = 0;
};

inline DecayFit decay_fit(const SampledFunction& phi, double lo = 1e-10, double hi = 1e-3) {
    DecayFit fit;
    std::vector<double> xs, ys;
    for (int i = 0; i < phi.grid.n; ++i) {
        double x = phi.grid.x[static_cast<std::size_t>(i)];
        double v = std::abs(phi.values[static_cast<std::size_t>(i)]);
        if (x <= 0.0 || v < lo || v > hi) continue;
        xs.push_back(x);
        ys.push_back(std::log(v));
    }
    fit.points = static_cast<int>(xs.size());
    if (fit.points < 3) return fit;
    double n = static_cast<double>(fit.points);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double denom = n * sxx - sx * sx;
    if (denom <= 0.0) return fit;
    double slope = (n * sxy - sx * sy) / denom;
    double intercept = (sy - slope * sx) / n;
    fit.alpha = -slope;
    fit.amplitude = std::exp(intercept);
    double ss_res = 0, ss_tot = 0, ybar = sy / n;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double yhat = intercept + slope * xs[i];
        ss_res += (ys[i] - yhat) * (ys[i] - yhat);
        ss_tot += (ys[i] - ybar) * (ys[i] - ybar);
    }
    fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 0.0;
    return fit;
}

}  // namespace mgpe
