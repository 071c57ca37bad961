#pragma once

// Right-hand side of the Galerkin ODE system for the substituted variable:
//
//   xi' = (alpha - gamma - mu lambda_k) xi_k  -  beta <phi_k, T d_x w>
//         + e^{gamma t} <phi_k, -w w_x + w_y T d_x w>  +  e^{-gamma t} <phi_k, K_n>.
//
// The beta coupling is assembled from closed-form 1-D integrals. The
// quadratic term is computed to Galerkin exactness: pointwise products on
// the padded grid, an interior sine analysis in x, a boundary-completed
// closed cosine analysis in y (the product is a cosine series there, and
// its y=1 trace is reconstructible from the coefficients), then the exact
// sine-against-cosine parity integrals. With pad >= 2 the retained
// coefficients carry no aliasing or quadrature error, which is what makes
// the discrete energy balance of the scheme exact.

#include <cmath>
#include <functional>
#include <vector>

#include "glory/basis.hpp"
#include "glory/forcing.hpp"
#include "glory/nonlocal.hpp"
#include "glory/params_domain.hpp"

namespace glory {

/// x and y factor matrices of <phi_{j,m}, T d_x phi_{j',m'}>; the Galerkin
/// matrix is their tensor product, with parity zeros kept as exact zeros.
struct BetaCoupling {
    int nx = 0, ny = 0;
    std::vector<double> xf;  // nx*nx, row j, col j'
    std::vector<double> yf;  // ny*ny, row m, col m'

    double x_at(int j, int jp) const { return xf[static_cast<std::size_t>(j - 1) * nx + (jp - 1)]; }
    double y_at(int m, int mp) const { return yf[static_cast<std::size_t>(m - 1) * ny + (mp - 1)]; }
};

inline BetaCoupling beta_coupling_matrix(const RectDomain& dom, int nx, int ny) {
    BetaCoupling b;
    b.nx = nx;
    b.ny = ny;
    b.xf.assign(static_cast<std::size_t>(nx) * nx, 0.0);
    b.yf.assign(static_cast<std::size_t>(ny) * ny, 0.0);
    const double L = dom.half_width;
    for (int j = 1; j <= nx; ++j)
        for (int jp = 1; jp <= nx; ++jp) {
            if ((j + jp) % 2 == 0) continue;  // parity integral vanishes
            b.xf[static_cast<std::size_t>(j - 1) * nx + (jp - 1)] =
                4.0 * j * jp / (kPi * L * (double(j) * j - double(jp) * jp));
        }
    for (int m = 1; m <= ny; ++m)
        for (int mp = 1; mp <= ny; ++mp) {
            double iy = (m % 2) ? 2.0 / (m * kPi) : 0.0;  // int sin(m pi y) dy
            if ((m + mp) % 2)                             // int sin(m..)cos(mp..) dy
                iy -= 2.0 * m / (kPi * (double(m) * m - double(mp) * mp));
            b.yf[static_cast<std::size_t>(m - 1) * ny + (mp - 1)] = iy / mp;
        }
    return b;
}

/// (B xi)_{j,m} = sum_{j',m'} X(j,j') Y(m,m') xi_{j',m'}.
inline SpectralField apply_beta_coupling(const BetaCoupling& b, const SpectralField& xi) {
    SpectralField out = SpectralField::zero(xi.domain, xi.nx, xi.ny);
    // tmp[j'][m] = sum_{m'} Y(m,m') xi_{j',m'}
    std::vector<double> tmp(static_cast<std::size_t>(xi.nx) * xi.ny, 0.0);
    for (int jp = 1; jp <= xi.nx; ++jp)
        for (int m = 1; m <= xi.ny; ++m) {
            double s = 0.0;
            for (int mp = 1; mp <= xi.ny; ++mp) s += b.y_at(m, mp) * xi.at(jp, mp);
            tmp[static_cast<std::size_t>(jp - 1) * xi.ny + (m - 1)] = s;
        }
    for (int m = 1; m <= xi.ny; ++m)
        for (int j = 1; j <= xi.nx; ++j) {
            double s = 0.0;
            for (int jp = 1; jp <= xi.nx; ++jp)
                s += b.x_at(j, jp) * tmp[static_cast<std::size_t>(jp - 1) * xi.ny + (m - 1)];
            out.at(j, m) = s;
        }
    return out;
}

enum class ModeCut { Rectangular, EigenvalueRank };

struct RhsSplit {
    Parameters params;
    RectDomain domain;
    GridSpec grid;
    int nx = 0, ny = 0;
    std::vector<double> linear_diag;  // alpha - gamma - mu lambda, mode layout of SpectralField
    BetaCoupling beta_coupling;
    ForcingSpec forcing;
    std::vector<double> mode_mask;  // 1 kept, 0 dropped (rank cut); empty = all kept

    bool enable_nonlinear = true;
    bool enable_beta = true;
    bool enable_forcing = true;

    // scratch for the nonlinear product analysis
    mutable std::vector<double> parity_weights_;  // ny x (py+2): int sin(m..)cos(k..)

    // cache for time-constant forcing (valid for t >= cache_from_)
    mutable bool forcing_cached_ = false;
    mutable double cache_from_ = 0.0;
    mutable std::vector<double> cached_khat_;
    mutable double cached_ksq_ = 0.0;
};

inline RhsSplit make_rhs(const Parameters& params, const GridSpec& grid, ForcingSpec forcing,
                         ModeCut cut = ModeCut::Rectangular, int rank_keep = 0) {
    RhsSplit r;
    r.params = params;
    r.domain = grid.domain;
    r.grid = grid;
    r.nx = grid.nx;
    r.ny = grid.ny;
    if (grid.px < 2 * grid.nx || grid.py < 2 * grid.ny)
        throw Error("nonlinear analysis requires pad >= 2");
    r.linear_diag.resize(static_cast<std::size_t>(r.nx) * r.ny);
    for (int m = 1; m <= r.ny; ++m)
        for (int j = 1; j <= r.nx; ++j)
            r.linear_diag[static_cast<std::size_t>(m - 1) * r.nx + (j - 1)] =
                params.alpha - params.gamma - params.mu * eigenvalue(grid.domain, j, m);
    r.beta_coupling = beta_coupling_matrix(grid.domain, r.nx, r.ny);
    r.forcing = std::move(forcing);
    if (cut == ModeCut::EigenvalueRank) {
        if (rank_keep < 1 || rank_keep > r.nx * r.ny) throw Error("rank cut out of range");
        r.mode_mask.assign(static_cast<std::size_t>(r.nx) * r.ny, 0.0);
        const auto ranked = rank_table(grid.domain, r.nx, r.ny);
        for (int k = 0; k < rank_keep; ++k) {
            const auto& mi = ranked[k];
            r.mode_mask[static_cast<std::size_t>(mi.m - 1) * r.nx + (mi.j - 1)] = 1.0;
        }
    }
    // parity integrals int_0^1 sin(m pi y) cos(k pi y) dy, k = 0..py+1
    r.parity_weights_.assign(static_cast<std::size_t>(r.ny) * (grid.py + 2), 0.0);
    for (int m = 1; m <= r.ny; ++m)
        for (int k = 0; k <= grid.py + 1; ++k)
            if ((m + k) % 2)
                r.parity_weights_[static_cast<std::size_t>(m - 1) * (grid.py + 2) + k] =
                    2.0 * m / (kPi * (double(m) * m - double(k) * k));
    return r;
}

inline void apply_mask(const RhsSplit& r, SpectralField& f) {
    if (r.mode_mask.empty()) return;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) f.coeffs[i] *= r.mode_mask[i];
}

/// Projection of initial data given at the collocation nodes.
inline SpectralField project_initial_data(const RhsSplit& r, const GridField& u0) {
    for (double v : u0.values)
        if (!std::isfinite(v)) throw NotIntegrable("initial data has non-finite samples");
    SpectralField f = analyze(u0, r.nx, r.ny);
    apply_mask(r, f);
    return f;
}

inline SpectralField project_initial_data(const RhsSplit& r,
                                          const std::function<double(double, double)>& u0) {
    GridField g = GridField::zero(r.grid);
    for (int q = 0; q < r.grid.py; ++q)
        for (int p = 0; p < r.grid.px; ++p) g.at(p, q) = u0(r.grid.x_nodes[p], r.grid.y_nodes[q]);
    return project_initial_data(r, g);
}

/// Exact Galerkin projection of e^{gamma t} (-w w_x + w_y T d_x w).
inline SpectralField nonlinear_term(const RhsSplit& r, double t, const SpectralField& f) {
    const GridSpec& grid = r.grid;
    const int px = grid.px, py = grid.py;
    const double L = grid.domain.half_width;
    const double nrm = basis_normalizer(grid.domain);

    const GridField w = synthesize(f, grid);
    const auto [wx, wy] = derivative_fields(f, grid);
    const GridField tdx = apply_Tdx(f, grid);

    // closed-in-y product samples: rows 0..py+1, row 0 is y=0 (identically 0)
    std::vector<double> q(static_cast<std::size_t>(py + 2) * px, 0.0);
    for (int yq = 0; yq < py; ++yq)
        for (int p = 0; p < px; ++p)
            q[static_cast<std::size_t>(yq + 1) * px + p] =
                -w.at(p, yq) * wx.at(p, yq) + wy.at(p, yq) * tdx.at(p, yq);
    {
        // y = 1 trace: w and w_x vanish, w_y and T d_x w do not
        std::vector<double> cs(px, 0.0), cc(static_cast<std::size_t>(px) + 1, 0.0);
        for (int j = 1; j <= f.nx; ++j) {
            double sy = 0.0, sc = 0.0;
            const double aj = j * kPi / (2.0 * L);
            for (int m = 1; m <= f.ny; ++m) {
                const double sgn = (m % 2) ? -1.0 : 1.0;
                sy += nrm * (m * kPi) * f.at(j, m) * sgn;            // w_y(.,1) sine coeffs
                sc += nrm * aj * f.at(j, m) * (1.0 - sgn) / (m * kPi);  // tdx(.,1) cosine coeffs
            }
            cs[j - 1] = 0.5 * sy;  // RODFT00 doubles
            cc[j] = sc;
        }
        fft::dst1_rows(cs.data(), px, 1);
        std::vector<double> top_t;
        detail::cos_eval_rows(cc, px, 1, top_t);
        for (int p = 0; p < px; ++p)
            q[static_cast<std::size_t>(py + 1) * px + p] = cs[p] * top_t[p];
    }

    // interior sine analysis in x (rows are resolved sine series)
    fft::dst1_rows(q.data(), px, py + 2);
    const double sx = 1.0 / (px + 1);

    // closed cosine analysis in y per retained x-mode
    std::vector<double> h(static_cast<std::size_t>(py + 2) * r.nx);
    for (int row = 0; row < py + 2; ++row)
        for (int j = 1; j <= r.nx; ++j)
            h[static_cast<std::size_t>(row) * r.nx + (j - 1)] =
                q[static_cast<std::size_t>(row) * px + (j - 1)] * sx;
    fft::dct1_cols(h.data(), py + 2, r.nx);
    // h[k][j] = (py+1) sigma_k c_{j,k}

    const double scale = nrm * L;  // <phi, .> x-normalization: integral of sin_j^2 is L
    double efac = std::exp(r.params.gamma * t);
    if (!std::isfinite(efac)) throw OverflowError("e^{gamma t} overflow in nonlinear term");

    SpectralField out = SpectralField::zero(f.domain, r.nx, r.ny);
    const int n = py + 1;
    for (int j = 1; j <= r.nx; ++j)
        for (int m = 1; m <= r.ny; ++m) {
            double s = 0.0;
            const double* wrow = r.parity_weights_.data() + static_cast<std::size_t>(m - 1) * (py + 2);
            for (int k = 0; k <= py + 1; ++k) {
                const double sigma = (k == 0 || k == n) ? 2.0 : 1.0;
                const double ck = h[static_cast<std::size_t>(k) * r.nx + (j - 1)] / (n * sigma);
                s += ck * wrow[k];
            }
            out.at(j, m) = efac * scale * s;
        }
    apply_mask(r, out);
    if (!out.finite()) throw OverflowError("nonlinear term overflowed");
    return out;
}

/// Forcing coefficients <phi_k, K_n(t)> (no e^{-gamma t} factor) and the grid
/// quadrature of K_n^2 used by the energy accumulators.
struct ForcingSample {
    SpectralField coeffs;
    double k_sq = 0.0;  // int_{Omega^N} K_n(t)^2 dz
};

inline ForcingSample forcing_sample(const RhsSplit& r, double t) {
    ForcingSample out;
    if (!r.enable_forcing || r.forcing.is_zero()) {
        out.coeffs = SpectralField::zero(r.domain, r.nx, r.ny);
        return out;
    }
    const bool constant_now =
        (r.forcing.kind == ForcingKind::ClosedForm && !expr::depends_on(r.forcing.closed, expr::Var::T) &&
         (!r.forcing.mollified() || t >= 1.0 / r.forcing.mollification_index));
    if (constant_now && r.forcing_cached_ && t >= r.cache_from_) {
        out.coeffs = SpectralField::zero(r.domain, r.nx, r.ny);
        out.coeffs.coeffs = r.cached_khat_;
        out.k_sq = r.cached_ksq_;
        return out;
    }
    const GridField kn = effective_K(r.forcing, t, r.grid);
    out.k_sq = kn.quad_norm_sq();
    out.coeffs = analyze(kn, r.nx, r.ny);
    apply_mask(r, out.coeffs);
    if (constant_now) {
        r.forcing_cached_ = true;
        r.cache_from_ = r.forcing.mollified() ? 1.0 / r.forcing.mollification_index : 0.0;
        r.cached_khat_ = out.coeffs.coeffs;
        r.cached_ksq_ = out.k_sq;
    }
    return out;
}

/// Psi^n(t, xi) minus its diagonal linear part: the explicit portion of the
/// splitting (beta coupling, quadratic term, forcing). The beta term may be
/// excluded when an integrator treats it implicitly.
inline SpectralField explicit_part(const RhsSplit& r, double t, const SpectralField& xi,
                                   bool include_beta = true) {
    SpectralField out = SpectralField::zero(xi.domain, xi.nx, xi.ny);
    if (include_beta && r.enable_beta && r.params.beta != 0.0) {
        const SpectralField b = apply_beta_coupling(r.beta_coupling, xi);
        for (std::size_t i = 0; i < xi.coeffs.size(); ++i)
            out.coeffs[i] -= r.params.beta * b.coeffs[i];
    }
    if (r.enable_nonlinear) {
        const SpectralField nl = nonlinear_term(r, t, xi);
        for (std::size_t i = 0; i < xi.coeffs.size(); ++i) out.coeffs[i] += nl.coeffs[i];
    }
    if (r.enable_forcing && !r.forcing.is_zero()) {
        const ForcingSample ks = forcing_sample(r, t);
        const double efac = std::exp(-r.params.gamma * t);
        for (std::size_t i = 0; i < xi.coeffs.size(); ++i)
            out.coeffs[i] += efac * ks.coeffs.coeffs[i];
    }
    apply_mask(r, out);
    return out;
}

/// Full Psi^n(t, xi).
inline SpectralField rhs(const RhsSplit& r, double t, const SpectralField& xi) {
    SpectralField out = explicit_part(r, t, xi);
    for (std::size_t i = 0; i < xi.coeffs.size(); ++i) out.coeffs[i] += r.linear_diag[i] * xi.coeffs[i];
    apply_mask(r, out);
    return out;
}

}  // namespace glory
