#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "mgpe/errors.hpp"

namespace mgpe {

// Kind of computational domain. A truncated grid stands in for the whole line
// (Dirichlet pinning at both ends, justified by the exponential decay of the
// states we compute); a box grid discretizes a hard-wall interval where the
// zero boundary condition is physical.
enum class DomainKind { truncated, box };

// Uniform 1D grid including both endpoints: x_i = a + i*h, h = (b-a)/(n-1).
struct Grid {
    DomainKind kind = DomainKind::truncated;
    double a = 0.0;
    double b = 0.0;
    int n = 0;
    double h = 0.0;
    std::vector<double> x;

    double length() const { return b - a; }
};

inline Grid make_grid(DomainKind kind, double a, double b, int n) {
    if (n < 8) throw config_error("grid: need n >= 8, got n = " + std::to_string(n));
    if (!(b > a)) throw config_error("grid: need b > a");
    if (kind == DomainKind::truncated && std::abs(a + b) > 1e-12 * (b - a))
        throw config_error("grid: truncated domain must be symmetric about 0");
    Grid g;
    g.kind = kind;
    g.a = a;
    g.b = b;
    g.n = n;
    g.h = (b - a) / (n - 1);
    g.x.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) g.x[static_cast<std::size_t>(i)] = a + i * g.h;
    // Pin the last node to b exactly; accumulated rounding otherwise leaks
    // into the symmetry checks downstream.
    g.x.back() = b;
    return g;
}

// Whole-line surrogate on [-L, L].
inline Grid truncated_grid(double L, int n) {
    return make_grid(DomainKind::truncated, -L, L, n);
}

inline Grid box_grid(double a, double b, int n) {
    return make_grid(DomainKind::box, a, b, n);
}

inline bool same_grid(const Grid& g1, const Grid& g2) {
    return g1.kind == g2.kind && g1.n == g2.n && g1.a == g2.a && g1.b == g2.b;
}

// A function known by its values at the grid nodes.
struct SampledFunction {
    Grid grid;
    std::vector<double> values;
};

// Trapezoid quadrature weights: h at interior nodes, h/2 at the endpoints.
inline std::vector<double> quadrature_weights(const Grid& g) {
    std::vector<double> w(static_cast<std::size_t>(g.n), g.h);
    w.front() = 0.5 * g.h;
    w.back() = 0.5 * g.h;
    return w;
}

inline double integrate(const Grid& g, const std::vector<double>& f) {
    if (static_cast<int>(f.size()) != g.n)
        throw config_error("integrate: value count does not match grid");
    double s = 0.5 * (f.front() + f.back());
    for (int i = 1; i + 1 < g.n; ++i) s += f[static_cast<std::size_t>(i)];
    return s * g.h;
}

// Richardson-extrapolated trapezoid: combines step h with step 2h to cancel
// the leading O(h^2) error term. Needs odd n so the coarse grid shares both
// endpoints with the fine one.
inline double integrate_richardson(const Grid& g, const std::vector<double>& f) {
    if (static_cast<int>(f.size()) != g.n)
        throw config_error("integrate: value count does not match grid");
    if (g.n % 2 == 0)
        throw config_error("integrate_richardson: needs an odd number of nodes");
    double fine = integrate(g, f);
    double coarse = 0.5 * (f.front() + f.back());
    for (int i = 2; i + 1 < g.n; i += 2) coarse += f[static_cast<std::size_t>(i)];
    coarse *= 2.0 * g.h;
    return (4.0 * fine - coarse) / 3.0;
}

// Integral of a radially symmetric function over R^dim given samples on a
// radial grid [0, R]: multiplies by the surface measure S_d r^(d-1).
inline double integrate_radial(int dim, const Grid& g, const std::vector<double>& f) {
    if (static_cast<int>(f.size()) != g.n)
        throw config_error("integrate_radial: value count does not match grid");
    if (dim < 1 || dim > 3) throw config_error("integrate_radial: dim must be 1, 2 or 3");
    if (g.a < 0.0) throw config_error("integrate_radial: radial grid must start at r >= 0");
    static const double surface[4] = {0.0, 2.0, 2.0 * M_PI, 4.0 * M_PI};
    std::vector<double> weighted(f.size());
    for (int i = 0; i < g.n; ++i) {
        double r = g.x[static_cast<std::size_t>(i)];
        weighted[static_cast<std::size_t>(i)] =
            f[static_cast<std::size_t>(i)] * surface[dim] * std::pow(r, dim - 1);
    }
    if (g.n % 2 == 1) return integrate_richardson(g, weighted);
    return integrate(g, weighted);
}

// Weighted inner product <f, g>_W with trapezoid weights.
inline double inner_w(const Grid& g, const std::vector<double>& f,
                      const std::vector<double>& h) {
    double s = 0.5 * (f.front() * h.front() + f.back() * h.back());
    for (int i = 1; i + 1 < g.n; ++i)
        s += f[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)];
    return s * g.h;
}

inline double norm_w(const Grid& g, const std::vector<double>& f) {
    return std::sqrt(inner_w(g, f, f));
}

// Fourth-order first derivative: centered five-point stencil inside, one-sided
// five-point stencils on the two rows at each end.
inline std::vector<double> derivative(const Grid& g, const std::vector<double>& f) {
    if (static_cast<int>(f.size()) != g.n)
        throw config_error("derivative: value count does not match grid");
    const int n = g.n;
    const double c = 1.0 / (12.0 * g.h);
    std::vector<double> d(static_cast<std::size_t>(n));
    auto v = [&](int i) { return f[static_cast<std::size_t>(i)]; };
    d[0] = c * (-25.0 * v(0) + 48.0 * v(1) - 36.0 * v(2) + 16.0 * v(3) - 3.0 * v(4));
    d[1] = c * (-3.0 * v(0) - 10.0 * v(1) + 18.0 * v(2) - 6.0 * v(3) + v(4));
    for (int i = 2; i + 2 < n; ++i)
        d[static_cast<std::size_t>(i)] =
            c * (v(i - 2) - 8.0 * v(i - 1) + 8.0 * v(i + 1) - v(i + 2));
    d[static_cast<std::size_t>(n - 2)] = c * (3.0 * v(n - 1) + 10.0 * v(n - 2) -
                                              18.0 * v(n - 3) + 6.0 * v(n - 4) - v(n - 5));
    d[static_cast<std::size_t>(n - 1)] = c * (25.0 * v(n - 1) - 48.0 * v(n - 2) +
                                              36.0 * v(n - 3) - 16.0 * v(n - 4) + 3.0 * v(n - 5));
    return d;
}

// Linear interpolation of a sampled function onto another grid. Nodes outside
// the source extent get zero (the states we resample decay to the boundary).
inline std::vector<double> resample_linear(const SampledFunction& f, const Grid& target) {
    const Grid& s = f.grid;
    std::vector<double> out(static_cast<std::size_t>(target.n), 0.0);
    for (int i = 0; i < target.n; ++i) {
        double xi = target.x[static_cast<std::size_t>(i)];
        if (xi < s.a || xi > s.b) continue;
        double t = (xi - s.a) / s.h;
        int j = static_cast<int>(std::floor(t));
        j = std::clamp(j, 0, s.n - 2);
        double frac = t - j;
        out[static_cast<std::size_t>(i)] =
            (1.0 - frac) * f.values[static_cast<std::size_t>(j)] +
            frac * f.values[static_cast<std::size_t>(j + 1)];
    }
    return out;
}

}  // namespace mgpe
