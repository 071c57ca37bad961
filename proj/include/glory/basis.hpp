#pragma once

// Dirichlet-Laplacian eigenbasis on the rectangle (-L,L)x(0,1) and the
// transforms between mode coefficients and collocation values. The basis is
// the tensor sine family
//
//   phi_{j,m}(x,y) = sqrt(2/L) sin(j pi (x+L)/(2L)) sin(m pi y),
//   lambda_{j,m}   = (j pi / (2L))^2 + (m pi)^2,
//
// which is orthonormal in L2 and exact at the type-I sine nodes, so all
// synthesis/analysis steps are fast sine/cosine transforms.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "glory/errors.hpp"
#include "glory/params_domain.hpp"
#include "glory/transforms.hpp"

namespace glory {

inline constexpr double kPi = std::numbers::pi;

struct ModeIndex {
    int j = 1;  // x wavenumber, >= 1
    int m = 1;  // y wavenumber, >= 1
    bool operator==(const ModeIndex&) const = default;
};

inline double eigenvalue(const RectDomain& dom, int j, int m) {
    const double ax = j * kPi / (2.0 * dom.half_width);
    const double ay = m * kPi;
    return ax * ax + ay * ay;
}

/// L2(Omega^N)-normalizing constant of the tensor sine eigenfunctions.
inline double basis_normalizer(const RectDomain& dom) { return std::sqrt(2.0 / dom.half_width); }

struct EigenPair {
    double lambda;
    double normalizer;
};

inline EigenPair eigenpair(const RectDomain& dom, int j, int m) {
    if (j < 1 || m < 1) throw Error("mode indices must be >= 1");
    return {eigenvalue(dom, j, m), basis_normalizer(dom)};
}

inline double eval_mode(const RectDomain& dom, int j, int m, double x, double y) {
    const double L = dom.half_width;
    return basis_normalizer(dom) * std::sin(j * kPi * (x + L) / (2.0 * L)) * std::sin(m * kPi * y);
}

/// Modes sorted by eigenvalue, ties broken lexicographically in (j, m).
inline std::vector<ModeIndex> rank_table(const RectDomain& dom, int nx, int ny) {
    std::vector<ModeIndex> modes;
    modes.reserve(static_cast<std::size_t>(nx) * ny);
    for (int m = 1; m <= ny; ++m)
        for (int j = 1; j <= nx; ++j) modes.push_back({j, m});
    std::stable_sort(modes.begin(), modes.end(), [&](const ModeIndex& a, const ModeIndex& b) {
        const double la = eigenvalue(dom, a.j, a.m), lb = eigenvalue(dom, b.j, b.m);
        if (la != lb) return la < lb;
        if (a.j != b.j) return a.j < b.j;
        return a.m < b.m;
    });
    return modes;
}

/// Galerkin coordinates F_{j,m} on an nx-by-ny rectangular mode set,
/// stored row-major with j fastest: coeffs[(m-1)*nx + (j-1)].
struct SpectralField {
    RectDomain domain;
    int nx = 0, ny = 0;
    std::vector<double> coeffs;

    static SpectralField zero(const RectDomain& dom, int nx, int ny) {
        SpectralField f;
        f.domain = dom;
        f.nx = nx;
        f.ny = ny;
        f.coeffs.assign(static_cast<std::size_t>(nx) * ny, 0.0);
        return f;
    }

    double& at(int j, int m) { return coeffs[static_cast<std::size_t>(m - 1) * nx + (j - 1)]; }
    double at(int j, int m) const { return coeffs[static_cast<std::size_t>(m - 1) * nx + (j - 1)]; }
    std::size_t size() const { return coeffs.size(); }

    bool finite() const {
        for (double c : coeffs)
            if (!std::isfinite(c)) return false;
        return true;
    }

    double norm2_sq() const {
        double s = 0.0;
        for (double c : coeffs) s += c * c;
        return s;
    }
    double norm2() const { return std::sqrt(norm2_sq()); }
};

/// Values at the interior collocation nodes of the padded grid, row-major
/// with x fastest: values[q*px + p].
struct GridField {
    GridSpec grid;
    std::vector<double> values;

    static GridField zero(const GridSpec& g) {
        GridField f;
        f.grid = g;
        f.values.assign(g.size(), 0.0);
        return f;
    }

    double& at(int p, int q) { return values[static_cast<std::size_t>(q) * grid.px + p]; }
    double at(int p, int q) const { return values[static_cast<std::size_t>(q) * grid.px + p]; }

    double quad_norm_sq() const {
        double s = 0.0;
        for (double v : values) s += v * v;
        return s * grid.hx() * grid.hy();
    }
    double quad_norm() const { return std::sqrt(quad_norm_sq()); }
};

inline double quad_inner(const GridField& a, const GridField& b) {
    if (a.grid.px != b.grid.px || a.grid.py != b.grid.py) throw DomainMismatch("grid size mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) s += a.values[i] * b.values[i];
    return s * a.grid.hx() * a.grid.hy();
}

namespace detail {

/// Evaluate per-row cosine series sum_j c_j cos(pi j k/(n+1)), j = 0..n,
/// at interior k = 1..n via a closed REDFT00 of size n+2.
/// in: rows x (n+1) matrix of coefficients c_0..c_n; out: rows x n values.
inline void cos_eval_rows(const std::vector<double>& coef, int n, int rows, std::vector<double>& out) {
    std::vector<double> work(static_cast<std::size_t>(rows) * (n + 2), 0.0);
    for (int r = 0; r < rows; ++r) {
        double* w = work.data() + static_cast<std::size_t>(r) * (n + 2);
        const double* c = coef.data() + static_cast<std::size_t>(r) * (n + 1);
        w[0] = c[0];
        for (int j = 1; j <= n; ++j) w[j] = 0.5 * c[j];
        w[n + 1] = 0.0;
    }
    fft::dct1_rows(work.data(), n + 2, rows);
    out.assign(static_cast<std::size_t>(rows) * n, 0.0);
    for (int r = 0; r < rows; ++r)
        for (int k = 1; k <= n; ++k)
            out[static_cast<std::size_t>(r) * n + (k - 1)] = work[static_cast<std::size_t>(r) * (n + 2) + k];
}

/// Column variant: coef is (n+1) x cols, out is n x cols.
inline void cos_eval_cols(const std::vector<double>& coef, int n, int cols, std::vector<double>& out) {
    std::vector<double> work(static_cast<std::size_t>(n + 2) * cols, 0.0);
    for (int c = 0; c < cols; ++c) {
        work[c] = coef[c];
        for (int j = 1; j <= n; ++j)
            work[static_cast<std::size_t>(j) * cols + c] = 0.5 * coef[static_cast<std::size_t>(j) * cols + c];
    }
    fft::dct1_cols(work.data(), n + 2, cols);
    out.assign(static_cast<std::size_t>(n) * cols, 0.0);
    for (int k = 1; k <= n; ++k)
        for (int c = 0; c < cols; ++c)
            out[static_cast<std::size_t>(k - 1) * cols + c] = work[static_cast<std::size_t>(k) * cols + c];
}

}  // namespace detail

/// Exact point values of the mode expansion at all padded collocation nodes.
inline GridField synthesize(const SpectralField& f, const GridSpec& grid) {
    if (!(f.domain == grid.domain)) throw DomainMismatch("field and grid live on different domains");
    if (f.nx > grid.px || f.ny > grid.py) throw DomainMismatch("grid does not resolve the field");
    GridField out = GridField::zero(grid);
    for (int m = 1; m <= f.ny; ++m)
        for (int j = 1; j <= f.nx; ++j) out.at(j - 1, m - 1) = f.at(j, m);
    fft::dst1_rows(out.values.data(), grid.px, grid.py);
    fft::dst1_cols(out.values.data(), grid.py, grid.px);
    const double scale = 0.25 * basis_normalizer(grid.domain);
    for (double& v : out.values) v *= scale;
    return out;
}

struct AnalyzeReport {
    SpectralField field;
    double truncated_fraction = 0.0;  // quadrature mass dropped by the mode cut
    bool truncated = false;
};

/// Discrete L2 projection onto the first nx-by-ny modes via the sine-node
/// quadrature (exact for trigonometric polynomials resolved on the grid).
inline AnalyzeReport analyze_report(const GridField& g, int nx, int ny) {
    const GridSpec& grid = g.grid;
    if (nx > grid.px || ny > grid.py) throw DomainMismatch("cannot request more modes than grid nodes");
    std::vector<double> work = g.values;
    fft::dst1_rows(work.data(), grid.px, grid.py);
    fft::dst1_cols(work.data(), grid.py, grid.px);
    const double scale = 0.25 * basis_normalizer(grid.domain) * grid.hx() * grid.hy();
    AnalyzeReport rep;
    rep.field = SpectralField::zero(grid.domain, nx, ny);
    double kept = 0.0, total = 0.0;
    for (int q = 0; q < grid.py; ++q)
        for (int p = 0; p < grid.px; ++p) {
            const double c = work[static_cast<std::size_t>(q) * grid.px + p] * scale;
            total += c * c;
            if (p < nx && q < ny) {
                rep.field.at(p + 1, q + 1) = c;
                kept += c * c;
            }
        }
    if (total > 0.0) rep.truncated_fraction = std::max(0.0, (total - kept) / total);
    rep.truncated = rep.truncated_fraction > 1e-24;
    return rep;
}

inline SpectralField analyze(const GridField& g, int nx, int ny) {
    return analyze_report(g, nx, ny).field;
}

/// Pointwise d/dx and d/dy of the mode expansion at the padded nodes.
inline std::pair<GridField, GridField> derivative_fields(const SpectralField& f, const GridSpec& grid) {
    if (!(f.domain == grid.domain)) throw DomainMismatch("field and grid live on different domains");
    const double L = grid.domain.half_width;
    const double nrm = basis_normalizer(grid.domain);

    // dx: cosine series in x, sine in y.
    GridField dx = GridField::zero(grid);
    {
        // y-synthesis first on a py x nx block, then cosine evaluation in x.
        std::vector<double> b(static_cast<std::size_t>(grid.py) * f.nx, 0.0);
        for (int m = 1; m <= f.ny; ++m)
            for (int j = 1; j <= f.nx; ++j) {
                const double aj = j * kPi / (2.0 * L);
                b[static_cast<std::size_t>(m - 1) * f.nx + (j - 1)] = nrm * aj * f.at(j, m);
            }
        fft::dst1_cols(b.data(), grid.py, f.nx);  // factor 2
        std::vector<double> coef(static_cast<std::size_t>(grid.py) * (grid.px + 1), 0.0);
        for (int q = 0; q < grid.py; ++q)
            for (int j = 1; j <= f.nx; ++j)
                coef[static_cast<std::size_t>(q) * (grid.px + 1) + j] =
                    0.5 * b[static_cast<std::size_t>(q) * f.nx + (j - 1)];
        detail::cos_eval_rows(coef, grid.px, grid.py, dx.values);
    }

    // dy: sine series in x, cosine in y.
    GridField dy = GridField::zero(grid);
    {
        std::vector<double> b(static_cast<std::size_t>(f.ny) * grid.px, 0.0);
        for (int m = 1; m <= f.ny; ++m)
            for (int j = 1; j <= f.nx; ++j)
                b[static_cast<std::size_t>(m - 1) * grid.px + (j - 1)] = nrm * (m * kPi) * f.at(j, m);
        fft::dst1_rows(b.data(), grid.px, f.ny);  // factor 2
        std::vector<double> coef(static_cast<std::size_t>(grid.py + 1) * grid.px, 0.0);
        for (int m = 1; m <= f.ny; ++m)
            for (int p = 0; p < grid.px; ++p)
                coef[static_cast<std::size_t>(m) * grid.px + p] =
                    0.5 * b[static_cast<std::size_t>(m - 1) * grid.px + p];
        detail::cos_eval_cols(coef, grid.py, grid.px, dy.values);
    }
    return {std::move(dx), std::move(dy)};
}

/// Direct (slow, exact) evaluation of the expansion at arbitrary points.
inline std::vector<double> evaluate_at(const SpectralField& f, const std::vector<double>& xs,
                                       const std::vector<double>& ys) {
    const double L = f.domain.half_width;
    const double nrm = basis_normalizer(f.domain);
    const int npx = static_cast<int>(xs.size()), npy = static_cast<int>(ys.size());
    std::vector<double> sx(static_cast<std::size_t>(f.nx) * npx);
    for (int j = 1; j <= f.nx; ++j)
        for (int p = 0; p < npx; ++p)
            sx[static_cast<std::size_t>(j - 1) * npx + p] = std::sin(j * kPi * (xs[p] + L) / (2.0 * L));
    std::vector<double> sy(static_cast<std::size_t>(f.ny) * npy);
    for (int m = 1; m <= f.ny; ++m)
        for (int q = 0; q < npy; ++q)
            sy[static_cast<std::size_t>(m - 1) * npy + q] = std::sin(m * kPi * ys[q]);
    // V[q*npx+p] = nrm * sum_{j,m} F_{j,m} sx_j(p) sy_m(q)
    std::vector<double> tmp(static_cast<std::size_t>(f.ny) * npx, 0.0);
    for (int m = 0; m < f.ny; ++m)
        for (int j = 0; j < f.nx; ++j) {
            const double c = f.coeffs[static_cast<std::size_t>(m) * f.nx + j];
            if (c == 0.0) continue;
            const double* row = sx.data() + static_cast<std::size_t>(j) * npx;
            double* t = tmp.data() + static_cast<std::size_t>(m) * npx;
            for (int p = 0; p < npx; ++p) t[p] += c * row[p];
        }
    std::vector<double> out(static_cast<std::size_t>(npy) * npx, 0.0);
    for (int m = 0; m < f.ny; ++m)
        for (int q = 0; q < npy; ++q) {
            const double s = nrm * sy[static_cast<std::size_t>(m) * npy + q];
            if (s == 0.0) continue;
            const double* t = tmp.data() + static_cast<std::size_t>(m) * npx;
            double* o = out.data() + static_cast<std::size_t>(q) * npx;
            for (int p = 0; p < npx; ++p) o[p] += s * t[p];
        }
    return out;
}

}  // namespace glory
