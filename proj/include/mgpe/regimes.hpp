#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"
#include "mgpe/model.hpp"
#include "mgpe/solver.hpp"

// Asymptotic regime classification and the blow-down / blow-up maps that
// compare computed ground states against the limiting profiles. The regime of
// a parameter pair is decided by the ratio of the higher-order term to the
// contact term at the relevant length scale; the associated epsilon is the
// width of the ground state in physical units.

namespace mgpe {

struct RegimeReport {
    std::string label;      // C1, C2, C3, C1p, C2p, C3p, B1, B2, B3, B1p, B2p, B3p, none
    double eps = 1.0;       // blow-down scale of the ground state
    double ratio = 0.0;     // delta / |beta|^{(4+d)/(2+d)} (whole space) or delta/|beta| (box)
    double delta_inf = 0.0; // limiting HOI strength for the balanced cases
    bool exists = true;
    std::string note;
};

// Decides the asymptotic case from the parameter sizes alone. The thresholds
// split the ratio axis into contact-dominated, balanced and HOI-dominated
// bands; they are reporting conventions, not sharp constants.
inline RegimeReport classify(const PhysicalParams& p, DomainKind domain, double lo = 0.1,
                             double hi = 10.0) {
    if (!(lo > 0.0) || !(hi > lo)) throw config_error("classify: need 0 < lo < hi");
    RegimeReport r;
    r.exists = ground_state_exists(p.dim, p.beta, p.delta);
    if (p.delta < 0.0) {
        r.label = "none";
        r.eps = 1.0;
        r.ratio = -std::numeric_limits<double>::infinity();
        r.note = "delta < 0: energy unbounded below; see the divergence probe";
        return r;
    }
    if (p.beta == 0.0 && p.delta == 0.0) {
        r.label = "none";
        r.eps = 1.0;
        r.ratio = 0.0;
        r.note = "linear problem: no interaction scaling";
        return r;
    }

    const bool whole = domain != DomainKind::box;
    const bool attractive = p.beta < 0.0;
    const double d = static_cast<double>(p.dim);
    const double ab = std::abs(p.beta);

    if (p.delta == 0.0) r.ratio = 0.0;
    else if (p.beta == 0.0) r.ratio = std::numeric_limits<double>::infinity();
    else r.ratio = whole ? p.delta / std::pow(ab, (4.0 + d) / (2.0 + d)) : p.delta / ab;

    int kase = r.ratio < lo ? 1 : (r.ratio > hi ? 3 : 2);
    r.label = (whole ? "C" : "B") + std::to_string(kase) + (attractive ? "p" : "");
    if (kase == 2) r.delta_inf = r.ratio;

    if (whole) {
        switch (kase) {
            case 1:
                if (attractive) {
                    r.eps = p.delta > 0.0 ? std::sqrt(p.delta / ab) : 0.0;
                    if (p.delta == 0.0)
                        r.note = "delta = 0: the state is its own limit; no blow-up scale";
                } else {
                    r.eps = std::pow(p.beta, -1.0 / (2.0 + d));
                }
                break;
            case 2:
                r.eps = std::pow(ab, -1.0 / (2.0 + d));
                break;
            case 3:
                r.eps = std::pow(p.delta, -1.0 / (4.0 + d));
                break;
        }
    } else {
        r.eps = 1.0;
        if (kase == 1 && attractive) {
            r.eps = p.delta > 0.0 ? std::sqrt(p.delta / ab) : 0.0;
            if (p.delta == 0.0) r.note = "delta = 0: no blow-up scale";
        }
    }
    return r;
}

enum class RescaleDirection { blow_down, blow_up };

/// Exact node relabeling: blow-down sends phi to eps^{-d/2} phi(x/eps) on the
// scaled grid (unit mass preserved); blow-up is its inverse. No interpolation
// happens, so blow_up(blow_down(f)) returns the original values bitwise.
inline SampledFunction rescale(const SampledFunction& f, double eps, RescaleDirection dir,
                               int dim) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw config_error("rescale: eps must be positive");
    if (dim < 1 || dim > 3) throw config_error("rescale: dim must be 1, 2 or 3");
    const double s = dir == RescaleDirection::blow_down ? eps : 1.0 / eps;
    SampledFunction out;
    out.grid = make_grid(f.grid.kind, f.grid.a * s, f.grid.b * s, f.grid.n);
    const double amp = std::pow(s, -0.5 * dim);
    out.values.resize(f.values.size());
    for (std::size_t i = 0; i < f.values.size(); ++i) out.values[i] = amp * f.values[i];
    return out;
}

/// Energy of the blown-down state in the rescaled frame:
//   E^eps = eps^4 K + P + eps^{d+2} C + eps^{d+4} H
// with K, P, C, H the plain energy terms evaluated on the rescaled grid. For
// the harmonic trap this satisfies E(phi) = eps^{-2} E^eps(phi^eps) exactly.
inline double rescaled_energy(const SampledFunction& phi_eps, double eps,
                              const PhysicalParams& p, const Potential& pot) {
    if (!(eps > 0.0)) throw config_error("rescaled_energy: eps must be positive");
    std::vector<double> V = potential_values(pot, phi_eps.grid);
    EnergyBreakdown eb = energy(phi_eps.grid, p, V, phi_eps.values);
    const double d = static_cast<double>(p.dim);
    return std::pow(eps, 4.0) * eb.kinetic + eb.potential +
           std::pow(eps, d + 2.0) * eb.contact + std::pow(eps, d + 4.0) * eb.hoi;
}

// Smooth compactly supported seed for the divergence probe, unit L2 mass.
inline SampledFunction standard_bump(double L = 2.0, int n = 2049) {
    Grid g = truncated_grid(L, n);
    SampledFunction f;
    f.grid = g;
    f.values.resize(static_cast<std::size_t>(g.n), 0.0);
    for (int i = 0; i < g.n; ++i) {
        double x = g.x[static_cast<std::size_t>(i)];
        if (std::abs(x) < 1.0)
            f.values[static_cast<std::size_t>(i)] = std::exp(-1.0 / (1.0 - x * x));
    }
    double nrm = norm_w(g, f.values);
    if (!(nrm > 0.0)) throw error("standard_bump: degenerate seed");
    for (double& v : f.values) v /= nrm;
    return f;
}

// Evaluates the full energy along the concentrating family
// phi_eps(x) = eps^{-d/2} phi(x/eps) and returns (eps, E) pairs in input
// order. With delta < 0 the energies diverge to -infinity like eps^{-(2+d)},
// which is the constructive witness that no ground state exists there.
inline std::vector<std::pair<double, double>> nonexistence_probe(
    const PhysicalParams& p, const Potential& pot, const SampledFunction& seed,
    const std::vector<double>& eps_list) {
    if (p.dim != 1) throw config_error("nonexistence_probe: sampled fields are one dimensional");
    if (eps_list.empty()) throw config_error("nonexistence_probe: empty eps list");
    SampledFunction base = seed;
    double nrm = norm_w(base.grid, base.values);
    if (!(nrm > 0.0)) throw config_error("nonexistence_probe: zero seed");
    for (double& v : base.values) v /= nrm;
    std::vector<std::pair<double, double>> out;
    out.reserve(eps_list.size());
    for (double eps : eps_list) {
        SampledFunction f = rescale(base, eps, RescaleDirection::blow_down, p.dim);
        std::vector<double> V = potential_values(pot, f.grid);
        double e = energy(f.grid, p, V, f.values).total();
        out.emplace_back(eps, e);
    }
    return out;
}

// Least-squares slope of ln(-E) against ln(eps) over the last `points`
// samples; all of them must have negative energy.
inline double divergence_slope(const std::vector<std::pair<double, double>>& samples,
                               int points = 3) {
    if (points < 2 || static_cast<int>(samples.size()) < points)
        throw config_error("divergence_slope: need at least two samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t k = samples.size() - static_cast<std::size_t>(points); k < samples.size();
         ++k) {
        if (!(samples[k].second < 0.0))
            throw error("divergence_slope: energy not negative at eps = " +
                        std::to_string(samples[k].first));
        double x = std::log(samples[k].first);
        double y = std::log(-samples[k].second);
        sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    double n = static_cast<double>(points);
    double den = n * sxx - sx * sx;
    if (std::abs(den) < 1e-300) throw error("divergence_slope: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

}  // namespace mgpe
