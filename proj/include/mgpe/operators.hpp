#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include <lapacke.h>

#include "mgpe/errors.hpp"
#include "mgpe/grid.hpp"

// Discrete differential operators for the energy and its gradient. Two
// distinct negative Laplacians are kept on purpose:
//
//  - apply_neg_laplacian: the direct five-point fourth-order second
//    difference. Its symbol 4(1-cos t)(7-cos t)/(12h^2) is strictly positive
//    away from the constant mode, so no grid-scale mode is energetically
//    invisible. This one carries the kinetic term. A first-derivative form
//    D^T W D cannot serve here: the centered five-point D annihilates the
//    sawtooth (-1)^i exactly, and with an attractive contact term the
//    minimizer then drains mass into a full-amplitude comb that the kinetic
//    energy cannot see.
//
//  - apply_neg_laplacian_weak: A = W^{-1} D^T W D, self-adjoint in the W
//    inner product with <f, A g>_W = <Df, Dg>_W exactly. This one carries the
//    higher-order interaction term, whose energy is defined as the squared
//    W-norm of the discrete derivative of rho = phi^2; reusing the same A
//    inside the Hamiltonian keeps that energy and its gradient consistent to
//    round-off. rho = phi^2 cannot form a comb once phi cannot.
//
// Both are self-adjoint in the W inner product on wall-vanishing fields, so
// the discrete chemical-potential identity mu = E + E_contact + E_hoi is
// exact with the mixed pair.
//
// The fields these operators act on vanish at the domain walls (Dirichlet
// pinning), so wall rows close the centered stencils by odd reflection
// instead of switching to one-sided differences. One-sided rows make the
// quadratic forms inconsistent at a wall where the state has nonzero slope:
// the minimizer grows a sawtooth boundary layer that lowers the energy by
// O(h). The odd closure is fourth-order accurate for wall-vanishing fields
// and keeps the forms coercive there. Generic one-sided differentiation of
// sampled functions stays in grid.hpp.

namespace mgpe::detail {

// Stencil of row i of the derivative matrix: first column and the five
// coefficients, excluding the common 1/(12h) factor.
struct Fd4Row {
    int col0;
    std::array<double, 5> w;
};

inline Fd4Row fd4_row(int i, int n) {
    // Wall rows: centered stencil with ghost values f(-k) = -f(k) folded in.
    if (i == 0) return {0, {0.0, 16.0, -2.0, 0.0, 0.0}};
    if (i == 1) return {0, {-8.0, -1.0, 8.0, -1.0, 0.0}};
    if (i == n - 2) return {n - 5, {0.0, 1.0, -8.0, 1.0, 8.0}};
    if (i == n - 1) return {n - 5, {0.0, 0.0, 2.0, -16.0, 0.0}};
    return {i - 2, {1.0, -8.0, 0.0, 8.0, -1.0}};
}

// u = D f without the common 1/(12h) factor.
inline std::vector<double> apply_d_raw(const Grid& g, const std::vector<double>& f) {
    const int n = g.n;
    std::vector<double> u(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        Fd4Row row = fd4_row(i, n);
        double s = 0.0;
        for (int k = 0; k < 5; ++k)
            s += row.w[static_cast<std::size_t>(k)] * f[static_cast<std::size_t>(row.col0 + k)];
        u[static_cast<std::size_t>(i)] = s;
    }
    return u;
}

// z = -f'' by the direct five-point fourth-order stencil, walls closed by
// odd reflection (ghosts f(-k) = -f(k)). Sampled sine modes that vanish at
// the walls are exact eigenvectors.
inline std::vector<double> apply_neg_laplacian(const Grid& g, const std::vector<double>& f) {
    const int n = g.n;
    const double c = 1.0 / (12.0 * g.h * g.h);
    std::vector<double> z(f.size());
    auto at = [&](int j) -> double {
        if (j < 0) return -f[static_cast<std::size_t>(-j)];
        if (j >= n) return -f[static_cast<std::size_t>(2 * (n - 1) - j)];
        return f[static_cast<std::size_t>(j)];
    };
    for (int i = 0; i < n; ++i)
        z[static_cast<std::size_t>(i)] =
            c * (at(i - 2) - 16.0 * at(i - 1) + 30.0 * at(i) - 16.0 * at(i + 1) + at(i + 2));
    return z;
}

// z = A f with A = W^{-1} D^T W D.
inline std::vector<double> apply_neg_laplacian_weak(const Grid& g, const std::vector<double>& f) {
    const int n = g.n;
    const double c = 1.0 / (12.0 * g.h);
    std::vector<double> u = apply_d_raw(g, f);
    // Scale by quadrature weights: boundary rows carry h/2, interior h. The
    // common factor h is divided back out at the end together with W^{-1}, so
    // track only the 1/2 endpoints.
    u.front() *= 0.5;
    u.back() *= 0.5;
    std::vector<double> z(static_cast<std::size_t>(n), 0.0);
    for (int i = 0; i < n; ++i) {
        Fd4Row row = fd4_row(i, n);
        double vi = c * c * u[static_cast<std::size_t>(i)];
        for (int k = 0; k < 5; ++k)
            z[static_cast<std::size_t>(row.col0 + k)] += row.w[static_cast<std::size_t>(k)] * vi;
    }
    z.front() *= 2.0;
    z.back() *= 2.0;
    return z;
}

// Free-node block (nodes 1..n-2) of the direct negative Laplacian above.
// Interior quadrature weights are uniform and the excluded wall columns
// multiply pinned values, so the block in sqrt-weighted coordinates is just
// the pentadiagonal stencil with the odd-reflection corrections on its first
// and last diagonal entries. Symmetric positive definite, bandwidth 2.
// Stored in LAPACK upper banded column-major layout: entry (i, j), i <= j,
// lives at ab[(kd + i - j) + j * (kd + 1)].
class InteriorBand {
public:
    static constexpr int kd = 2;

    InteriorBand() = default;

    explicit InteriorBand(const Grid& g) : m_(g.n - 2) {
        const double c = 1.0 / (12.0 * g.h * g.h);
        band_.assign(static_cast<std::size_t>((kd + 1) * m_), 0.0);
        for (int j = 0; j < m_; ++j) {
            // A wall ghost f(-1) = -f(1) folds a -1 into the adjacent diagonal.
            double d = 30.0;
            if (j == 0) d -= 1.0;
            if (j == m_ - 1) d -= 1.0;
            at(j, j) = d * c;
            if (j >= 1) at(j - 1, j) = -16.0 * c;
            if (j >= 2) at(j - 2, j) = c;
        }
    }

    int size() const { return m_; }
    const std::vector<double>& data() const { return band_; }

private:
    double& at(int i, int j) { return band_[static_cast<std::size_t>((kd + i - j) + j * (kd + 1))]; }

    int m_ = 0;
    std::vector<double> band_;
};

// Cholesky factorization of P = gamma*I + c*B for an InteriorBand B.
// Refactored only when (gamma, c) changes; solves reuse the factor.
class ShiftedBandSolver {
public:
    ShiftedBandSolver() = default;

    explicit ShiftedBandSolver(const InteriorBand& band) : band_(&band) {}

    void factor(double gamma, double c) {
        if (have_factor_ && gamma == gamma_ && c == c_) return;
        gamma_ = gamma;
        c_ = c;
        const int m = band_->size();
        const int kd = InteriorBand::kd;
        factor_ = band_->data();
        for (double& v : factor_) v *= c;
        for (int j = 0; j < m; ++j) factor_[static_cast<std::size_t>(kd + j * (kd + 1))] += gamma;
        lapack_int info = LAPACKE_dpbtrf(LAPACK_COL_MAJOR, 'U', m, kd, factor_.data(), kd + 1);
        if (info != 0)
            throw error("banded Cholesky factorization failed, info = " + std::to_string(info));
        have_factor_ = true;
    }

    // Solves P z = rhs in place. rhs has interior length (n - 2).
    void solve(std::vector<double>& rhs) const {
        if (!have_factor_) throw error("ShiftedBandSolver: solve before factor");
        const int m = band_->size();
        lapack_int info = LAPACKE_dpbtrs(LAPACK_COL_MAJOR, 'U', m, InteriorBand::kd, 1,
                                         factor_.data(), InteriorBand::kd + 1, rhs.data(), m);
        if (info != 0)
            throw error("banded triangular solve failed, info = " + std::to_string(info));
    }

private:
    const InteriorBand* band_ = nullptr;
    std::vector<double> factor_;
    double gamma_ = 0.0;
    double c_ = 0.0;
    bool have_factor_ = false;
};

}  // namespace mgpe::detail
