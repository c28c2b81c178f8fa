#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/model.hpp"
#include "mgpe/operators.hpp"

namespace mgpe {

// Best constant of the 2D Gagliardo-Nirenberg inequality, which sets the
// collapse threshold for attractive interactions without the higher-order
// term: in 2D at delta = 0 a ground state survives only for beta > -cb_constant().
inline double cb_constant() { return M_PI * 1.86225; }

// Existence of a constrained minimizer by parameter regime. With delta > 0
// the higher-order repulsion wins against any attraction; with delta < 0 the
// energy is unbounded below; at delta = 0 the classical dimension-dependent
// thresholds apply.
inline bool ground_state_exists(int dim, double beta, double delta) {
    if (delta > 0.0) return true;
    if (delta < 0.0) return false;
    if (dim == 1) return true;
    if (dim == 2) return beta > -cb_constant();
    return beta >= 0.0;
}

enum class InitKind { gaussian, uniform, tf_ansatz, random };

enum class SolverMode { direct, transformed };

struct SolverOptions {
    double tau = 0.01;                 // nominal flow step; adapted online
    int max_iterations = 200000;
    double residual_tolerance = 1e-8;  // on ||H phi - mu phi||_W
    double energy_tolerance = 1e-12;   // relative per-step energy stagnation
    InitKind init = InitKind::gaussian;
    std::uint64_t seed = 1u;
    SolverMode mode = SolverMode::direct;
};

struct FlowTrace {
    struct Sample {
        int iteration = 0;
        double energy = 0.0;
        double mass_before_projection = 0.0;  // ||trial||^2 before renormalizing
        double residual = 0.0;                // E-L residual at the step's start
    };
    std::vector<Sample> steps;
    int rejected_steps = 0;
};

struct GroundStateResult {
    Field field;
    EnergyBreakdown energy;
    double mu = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
    DecayFit decay;
    bool converged = false;
    int transformed_iterations = 0;  // nonzero only in transformed mode
    FlowTrace trace;
};

inline Field project_normalize(const Field& field) {
    if (!(field.l2_norm > 0.0))
        throw config_error("project_normalize: zero field");
    Field out = field;
    for (double& v : out.f.values) v /= field.l2_norm;
    out.l2_norm = norm_w(out.f.grid, out.f.values);
    return out;
}

namespace detail {

inline void pin_boundary(std::vector<double>& v) {
    v.front() = 0.0;
    v.back() = 0.0;
}

inline void normalize_mass(const Grid& g, std::vector<double>& v) {
    double nrm = norm_w(g, v);
    if (!(nrm > 0.0)) throw error("solver: cannot normalize the zero field");
    for (double& x : v) x /= nrm;
}

inline std::vector<double> initial_field(const Grid& g, const PhysicalParams& p,
                                         const Potential& pot, const SolverOptions& opts) {
    const int n = g.n;
    std::vector<double> phi(static_cast<std::size_t>(n), 0.0);
    double center = 0.5 * (g.a + g.b);
    double sigma = g.kind == DomainKind::box ? g.length() / 6.0 : g.length() / 8.0;
    if (g.kind == DomainKind::truncated && pot.kind == PotentialKind::harmonic)
        sigma = std::min(sigma, 1.0 / std::sqrt(std::max(pot.gamma, 1e-8)));

    auto envelope = [&](int i) {
        double x = g.x[static_cast<std::size_t>(i)] - center;
        return std::exp(-0.5 * x * x / (sigma * sigma));
    };

    switch (opts.init) {
        case InitKind::uniform:
            std::fill(phi.begin(), phi.end(), 1.0);
            break;
        case InitKind::tf_ansatz: {
            if (p.beta > 0.0 && pot.kind == PotentialKind::harmonic) {
                // Interaction-dominated closed form rho = (mu - V)_+ / beta
                // with mu fixed by unit mass.
                double gam = pot.gamma;
                double mu = std::pow(3.0 * p.beta * gam / (4.0 * std::sqrt(2.0)), 2.0 / 3.0);
                for (int i = 0; i < n; ++i) {
                    double x = g.x[static_cast<std::size_t>(i)];
                    double r = mu - 0.5 * gam * gam * x * x;
                    phi[static_cast<std::size_t>(i)] = r > 0.0 ? std::sqrt(r / p.beta) : 0.0;
                }
            } else if (p.beta > 0.0 && g.kind == DomainKind::box) {
                std::fill(phi.begin(), phi.end(), 1.0);
            } else {
                for (int i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] = envelope(i);
            }
            break;
        }
        case InitKind::random: {
            std::mt19937_64 rng(opts.seed);
            std::uniform_real_distribution<double> u(0.0, 1.0);
            for (int i = 0; i < n; ++i)
                phi[static_cast<std::size_t>(i)] = (0.2 + u(rng)) * envelope(i);
            break;
        }
        case InitKind::gaussian:
        default:
            for (int i = 0; i < n; ++i) phi[static_cast<std::size_t>(i)] = envelope(i);
            break;
    }
    pin_boundary(phi);
    for (double& v : phi) v = std::abs(v);
    normalize_mass(g, phi);
    return phi;
}

// Shared machinery of the direct flow: residual, preconditioned descent
// direction, and the clipped projected trial step. The preconditioner
// P = (1 + tau c0) I + tau (1/2 + s) A uses scalar bounds c0 (potential plus
// contact) and s (effective higher-order diffusion 2 delta max rho); its
// banded Cholesky factor is reused while those bounds drift less than 30%.
class FlowEngine {
public:
    FlowEngine(const Grid& g, const PhysicalParams& p, const Potential& pot)
        : g_(g), p_(p), V_(potential_values(pot, g)), w_(quadrature_weights(g)),
          band_(g), solve_(band_) {}

    const std::vector<double>& V() const { return V_; }

    double energy_total(const std::vector<double>& phi) const {
        return energy(g_, p_, V_, phi).total();
    }

    EnergyBreakdown breakdown(const std::vector<double>& phi) const {
        return energy(g_, p_, V_, phi);
    }

    double residual(const std::vector<double>& phi, double* mu, std::vector<double>* r) {
        return el_residual(g_, p_, V_, phi, mu, r);
    }

    // Preconditions r into the descent direction z (zero on the boundary).
    void precondition(const std::vector<double>& phi, const std::vector<double>& r,
                      double tau_pre, std::vector<double>& z) {
        const int n = g_.n;
        double c0 = 0.0, rho_max = 0.0;
        for (int i = 0; i < n; ++i) {
            double rho = phi[static_cast<std::size_t>(i)] * phi[static_cast<std::size_t>(i)];
            rho_max = std::max(rho_max, rho);
            // Magnitude of the local curvature of the zeroth-order terms. The
            // contact second variation is 3 beta rho, and the absolute value
            // matters: an attractive well (beta < 0) destabilizes large steps
            // just as hard as a repulsive one stiffens them, and a shift that
            // only sees the positive part lets the step grow into a noisy
            // accept-reject cycle well above the residual tolerance.
            c0 = std::max(c0, std::abs(V_[static_cast<std::size_t>(i)] + 3.0 * p_.beta * rho));
        }
        // The flow direction is H phi - mu phi, so the shift targets H: stiff
        // part (1/2 + 2 delta rho) A, soft part c0.
        double gamma_raw = 1.0 + tau_pre * c0;
        double cfac_raw = tau_pre * (0.5 + 2.0 * std::abs(p_.delta) * rho_max);
        if (!(gamma_used_ > 0.0) || gamma_raw > 1.3 * gamma_used_ ||
            gamma_raw < 0.7 * gamma_used_ || cfac_raw > 1.3 * cfac_used_ ||
            cfac_raw < 0.7 * cfac_used_) {
            solve_.factor(gamma_raw, cfac_raw);
            gamma_used_ = gamma_raw;
            cfac_used_ = cfac_raw;
        }
        rhs_.resize(static_cast<std::size_t>(n - 2));
        for (int i = 1; i + 1 < n; ++i)
            rhs_[static_cast<std::size_t>(i - 1)] =
                std::sqrt(w_[static_cast<std::size_t>(i)]) * r[static_cast<std::size_t>(i)];
        solve_.solve(rhs_);
        z.assign(static_cast<std::size_t>(n), 0.0);
        for (int i = 1; i + 1 < n; ++i)
            z[static_cast<std::size_t>(i)] =
                rhs_[static_cast<std::size_t>(i - 1)] / std::sqrt(w_[static_cast<std::size_t>(i)]);
    }

    // trial = normalize(|phi - tau z|) with pinned boundary. Returns the mass
    // (squared norm) before renormalization.
    double make_trial(const std::vector<double>& phi, const std::vector<double>& z, double tau,
                      std::vector<double>& trial) const {
        const int n = g_.n;
        trial.resize(phi.size());
        // Clamp, never reflect: folding an overshoot back to |.| plants
        // grid-scale noise wherever the field is tiny (soliton tails), and the
        // energy check then rejects every step. Truncation keeps the zero set
        // stable and lets tails decay cleanly.
        for (int i = 0; i < n; ++i)
            trial[static_cast<std::size_t>(i)] = std::max(
                phi[static_cast<std::size_t>(i)] - tau * z[static_cast<std::size_t>(i)], 0.0);
        pin_boundary(trial);
        double nrm = norm_w(g_, trial);
        if (!(nrm > 0.0)) return 0.0;
        for (double& v : trial) v /= nrm;
        return nrm * nrm;
    }

private:
    const Grid& g_;
    PhysicalParams p_;
    std::vector<double> V_, w_;
    InteriorBand band_;
    ShiftedBandSolver solve_;
    std::vector<double> rhs_;
    double gamma_used_ = -1.0, cfac_used_ = -1.0;
};

inline void check_existence(const PhysicalParams& p) {
    if (ground_state_exists(p.dim, p.beta, p.delta)) return;
    if (p.delta < 0.0)
        throw nonexistence_error(
            "no ground state for delta < 0: the energy is unbounded below "
            "(run the divergence probe to see the concentration blowup)");
    throw nonexistence_error(
        "no ground state at delta = 0 for this attraction strength in dimension " +
        std::to_string(p.dim));
}

}  // namespace detail

// One explicit step of the normalized gradient flow: semi-implicit descent on
// the Euler-Lagrange residual, magnitude clip, projection back to unit mass.
inline Field flow_step(const Field& field, const PhysicalParams& p, const Potential& pot,
                       double tau) {
    if (!(tau > 0.0)) throw config_error("flow_step: tau must be positive");
    detail::FlowEngine engine(field.f.grid, p, pot);
    double mu = 0.0;
    std::vector<double> r, z, trial;
    engine.residual(field.f.values, &mu, &r);
    engine.precondition(field.f.values, r, tau, z);
    double mass = engine.make_trial(field.f.values, z, tau, trial);
    if (!(mass > 0.0) || !std::isfinite(mass))
        throw error("flow_step: step produced a degenerate field; reduce tau");
    for (double v : trial)
        if (!std::isfinite(v)) throw error("flow_step: step produced NaN; reduce tau");
    return make_field(field.f.grid, std::move(trial));
}

// Constrained minimization by the normalized gradient flow with adaptive step
// size. A step is accepted only if the energy does not increase beyond a
// 1e-12 relative slack, so the recorded energy trace is monotone by
// construction. Stops when the Euler-Lagrange residual and the per-step
// energy decrease both fall below their tolerances.
inline GroundStateResult minimize(const PhysicalParams& p, const Potential& pot, const Grid& g,
                                  const SolverOptions& opts = {},
                                  const std::vector<double>* phi0 = nullptr) {
    detail::check_existence(p);
    if (p.dim != 1)
        throw config_error("direct minimization runs on 1D grids; higher dimensions "
                           "enter through the limiting profiles");
    if (!(opts.tau > 0.0)) throw config_error("solver: tau must be positive");
    if (!(opts.residual_tolerance > 0.0) || !(opts.energy_tolerance > 0.0))
        throw config_error("solver: tolerances must be positive");

    detail::FlowEngine engine(g, p, pot);
    std::vector<double> phi = phi0 ? *phi0 : detail::initial_field(g, p, pot, opts);
    if (static_cast<int>(phi.size()) != g.n) throw config_error("solver: bad initial field size");
    detail::pin_boundary(phi);
    for (double& v : phi) v = std::abs(v);
    detail::normalize_mass(g, phi);

    GroundStateResult out;
    double E = engine.energy_total(phi);
    double tau = opts.tau;
    const double tau_max = 100.0 * opts.tau;
    double dE = std::numeric_limits<double>::infinity();
    std::vector<double> r, z, trial;

    int iter = 0;
    bool first = true;
    for (; iter < opts.max_iterations; ++iter) {
        double mu = 0.0;
        double res = engine.residual(phi, &mu, &r);
        if (first) {
            out.trace.steps.push_back({0, E, 1.0, res});
            first = false;
        }
        if (res <= opts.residual_tolerance &&
            dE <= opts.energy_tolerance * std::max(1.0, std::abs(E))) {
            out.converged = true;
            break;
        }
        // Shift the preconditioner with the current adaptive step so stiff
        // modes stay contractive as tau grows; the factorization cache in
        // precondition() absorbs the gradual drift.
        engine.precondition(phi, r, tau, z);

        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            double mass = engine.make_trial(phi, z, tau, trial);
            if (mass > 0.0) {
                double Et = engine.energy_total(trial);
                if (std::isfinite(Et) && Et <= E + 1e-12 * std::max(1.0, std::abs(E))) {
                    dE = std::abs(E - Et);
                    E = Et;
                    phi.swap(trial);
                    out.trace.steps.push_back({iter + 1, E, mass, res});
                    tau = std::min(tau * 1.1, tau_max);
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
            ++out.trace.rejected_steps;
        }
        if (!accepted) {
            // Backtracking hit the numerical floor; nothing left to gain at
            // this resolution.
            out.converged = res <= opts.residual_tolerance;
            break;
        }
    }

    out.iterations = iter;
    out.energy = engine.breakdown(phi);
    double mu_final = 0.0;
    out.residual_norm = engine.residual(phi, &mu_final, nullptr);
    out.mu = mu_final;
    if (!out.converged && !(out.residual_norm <= opts.residual_tolerance))
        throw nonconvergence_error(
            "ground-state flow did not converge: residual " + std::to_string(out.residual_norm) +
                " after " + std::to_string(iter) + " iterations",
            iter, E, out.residual_norm);
    out.converged = true;
    out.field = make_field(g, std::move(phi));
    out.field = project_normalize(out.field);
    out.decay = decay_fit(out.field.f);
    return out;
}

// Minimization in the transformed variable u = F(phi): descend on
// int |u'|^2 + V G(u)^2 + beta/2 G(u)^4 subject to int G(u)^2 = 1 using the
// constraint-tangential gradient and a scaling retraction, then polish in the
// direct formulation so both modes report the same discrete minimizer.
inline GroundStateResult minimize_transformed(const PhysicalParams& p, const Potential& pot,
                                              const Grid& g, const SolverOptions& opts = {}) {
    detail::check_existence(p);
    if (p.dim != 1)
        throw config_error("transformed minimization runs on 1D grids");

    const int n = g.n;
    const std::vector<double> V = potential_values(pot, g);
    const std::vector<double> w = quadrature_weights(g);
    detail::InteriorBand band(g);
    detail::ShiftedBandSolver psolve(band);

    std::vector<double> phi = detail::initial_field(g, p, pot, opts);
    std::vector<double> u = transform_forward(phi, p.delta);

    // Scaling retraction: mass(s) = int G(s u)^2 increases monotonically in s,
    // so the unit-mass scale is a 1D root; Newton with a bisection safeguard.
    auto retract = [&](std::vector<double>& uu) {
        double s = 1.0, lo = 0.0, hi = 0.0;
        bool have_hi = false;
        for (int it = 0; it < 100; ++it) {
            double mass = 0.0, dmass = 0.0;
            for (int i = 0; i < n; ++i) {
                std::size_t k = static_cast<std::size_t>(i);
                double G = transform_inverse(s * uu[k], p.delta);
                double Gp = 1.0 / transform_slope(G, p.delta);
                mass += w[k] * G * G;
                dmass += w[k] * 2.0 * G * Gp * uu[k];
            }
            double f = mass - 1.0;
            if (std::abs(f) <= 1e-13) {
                for (double& v : uu) v *= s;
                return;
            }
            if (f > 0.0) { hi = s; have_hi = true; } else { lo = std::max(lo, s); }
            double sn = dmass > 0.0 ? s - f / dmass : -1.0;
            if (!std::isfinite(sn) || sn <= lo || (have_hi && sn >= hi))
                sn = have_hi ? 0.5 * (lo + hi) : 2.0 * std::max(s, 1e-6);
            s = sn;
        }
        throw error("transformed solver: unit-mass retraction failed");
    };

    std::vector<double> gv(static_cast<std::size_t>(n));
    auto tilde_energy = [&](const std::vector<double>& uu) {
        std::vector<double> rho(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            std::size_t k = static_cast<std::size_t>(i);
            double G = transform_inverse(uu[k], p.delta);
            rho[k] = G * G;
        }
        double kin = inner_w(g, uu, detail::apply_neg_laplacian(g, uu));
        double pot_term = inner_w(g, V, rho);
        double con = 0.5 * p.beta * inner_w(g, rho, rho);
        return kin + pot_term + con;
    };

    retract(u);
    double Et = tilde_energy(u);
    double tau = opts.tau;
    const double tau_max = 100.0 * opts.tau;
    double gamma_used = -1.0, cfac_used = -1.0;
    std::vector<double> grad(static_cast<std::size_t>(n)), tang(static_cast<std::size_t>(n));
    std::vector<double> rhs(static_cast<std::size_t>(n - 2)), z(static_cast<std::size_t>(n));
    std::vector<double> trial;
    int titer = 0;
    double dE = std::numeric_limits<double>::infinity();
    // The transformed stage runs until the energy stalls; the direct polish
    // below owns the residual contract.
    for (; titer < opts.max_iterations; ++titer) {
        std::vector<double> au = detail::apply_neg_laplacian(g, u);
        double c0 = 0.0;
        for (int i = 0; i < n; ++i) {
            std::size_t k = static_cast<std::size_t>(i);
            double G = transform_inverse(u[k], p.delta);
            double Gp = 1.0 / transform_slope(G, p.delta);
            gv[k] = G;
            grad[k] = 2.0 * au[k] + 2.0 * (V[k] * G + p.beta * G * G * G) * Gp;
            tang[k] = G * Gp;  // mass-constraint gradient direction
            // Curvature magnitude, attractive wells included; see the direct
            // flow's preconditioner.
            c0 = std::max(c0, std::abs(V[k] + 3.0 * p.beta * G * G));
        }
        double lam = inner_w(g, grad, tang) / std::max(inner_w(g, tang, tang), 1e-300);
        for (int i = 0; i < n; ++i)
            grad[static_cast<std::size_t>(i)] -= lam * tang[static_cast<std::size_t>(i)];

        // Shift with the current adaptive step so stiff modes stay contractive
        // as tau grows; refactor only on meaningful drift.
        double gamma_raw = 1.0 + tau * c0;
        double cfac_raw = 2.0 * tau;
        if (!(gamma_used > 0.0) || gamma_raw > 1.3 * gamma_used || gamma_raw < 0.7 * gamma_used ||
            cfac_raw > 1.3 * cfac_used || cfac_raw < 0.7 * cfac_used) {
            psolve.factor(gamma_raw, cfac_raw);
            gamma_used = gamma_raw;
            cfac_used = cfac_raw;
        }
        for (int i = 1; i + 1 < n; ++i)
            rhs[static_cast<std::size_t>(i - 1)] =
                std::sqrt(w[static_cast<std::size_t>(i)]) * grad[static_cast<std::size_t>(i)];
        psolve.solve(rhs);
        z.front() = 0.0;
        z.back() = 0.0;
        for (int i = 1; i + 1 < n; ++i)
            z[static_cast<std::size_t>(i)] =
                rhs[static_cast<std::size_t>(i - 1)] / std::sqrt(w[static_cast<std::size_t>(i)]);

        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            trial.resize(u.size());
            // Same truncation as the direct flow: u >= 0 by construction.
            for (int i = 0; i < n; ++i)
                trial[static_cast<std::size_t>(i)] = std::max(
                    u[static_cast<std::size_t>(i)] - tau * z[static_cast<std::size_t>(i)], 0.0);
            detail::pin_boundary(trial);
            bool ok = true;
            try { retract(trial); } catch (const error&) { ok = false; }
            if (ok) {
                double Enew = tilde_energy(trial);
                if (std::isfinite(Enew) && Enew <= Et + 1e-12 * std::max(1.0, std::abs(Et))) {
                    dE = std::abs(Et - Enew);
                    Et = Enew;
                    u.swap(trial);
                    tau = std::min(tau * 1.1, tau_max);
                    accepted = true;
                    break;
                }
            }
            tau *= 0.5;
        }
        if (!accepted) break;
        if (dE <= 1e-12 * std::max(1.0, std::abs(Et))) break;
    }

    std::vector<double> phi_final = transform_inverse(u, p.delta);
    detail::normalize_mass(g, phi_final);
    GroundStateResult out = minimize(p, pot, g, opts, &phi_final);
    out.transformed_iterations = titer + 1;
    return out;
}

// Mode dispatch used by the command-line front end.
inline GroundStateResult solve_ground_state(const PhysicalParams& p, const Potential& pot,
                                            const Grid& g, const SolverOptions& opts = {}) {
    if (opts.mode == SolverMode::transformed) return minimize_transformed(p, pot, g, opts);
    return minimize(p, pot, g, opts);
}

}  // namespace mgpe
