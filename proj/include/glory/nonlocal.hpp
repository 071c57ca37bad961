#pragma once

// The nonlocal operator (Tu)(x,y) = int_0^y u(x,s) ds and the composite
// T d/dx used by the model. Two independent realizations are provided: the
// spectral-analytic mode map sin(m pi y) -> (1 - cos(m pi y))/(m pi), and a
// cumulative high-order quadrature on the grid nodes; the latter serves as
// the oracle for the former.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <mutex>
#include <vector>

#include "glory/basis.hpp"

namespace glory {

enum class TMethod { SpectralAnalytic, CumulativeQuadrature };

namespace detail {

/// Per-interval weights of a cumulative interpolatory rule on the closed
/// uniform nodes 0, h, ..., (n+1)h: each interval integrates the degree-7
/// Lagrange interpolant through 8 nearby nodes.
struct CumulativeRule {
    static constexpr int kStencil = 8;
    int ny = 0;
    // For interval i (from node i to node i+1): stencil start s_i and weights.
    std::vector<int> start;
    std::vector<std::array<double, kStencil>> w;

    static const CumulativeRule& get(int ny, double h) {
        static std::mutex mu;
        static std::map<std::pair<int, long long>, CumulativeRule> cache;
        std::lock_guard<std::mutex> lock(mu);
        const long long hkey = static_cast<long long>(1e15 * h);
        auto it = cache.find({ny, hkey});
        if (it != cache.end()) return it->second;
        CumulativeRule r;
        r.ny = ny;
        const int nclosed = ny + 1;  // nodes 0..ny (y=0 boundary plus interior)
        const int stencil = std::min(kStencil, nclosed);
        for (int i = 0; i + 1 < nclosed; ++i) {
            const int s = std::clamp(i - 3, 0, nclosed - stencil);
            const int off = s - i;  // stencil offset in interval-local coordinates
            std::array<double, kStencil> wi{};
            // integrate the Lagrange basis over [0,1] in local node units;
            // local abscissae keep the monomial arithmetic well conditioned
            for (int k = 0; k < stencil; ++k) {
                std::array<double, kStencil + 1> poly{};
                poly[0] = 1.0;
                int deg = 0;
                double denom = 1.0;
                for (int l = 0; l < stencil; ++l) {
                    if (l == k) continue;
                    denom *= double(k - l);
                    for (int d = deg; d >= 0; --d) {
                        poly[d + 1] += poly[d];
                        poly[d] *= -double(off + l);
                    }
                    ++deg;
                }
                double integ = 0.0;
                for (int d = 0; d <= deg; ++d) integ += poly[d] / (d + 1);
                wi[k] = integ / denom * h;
            }
            r.start.push_back(s);
            r.w.push_back(wi);
        }
        return cache.emplace(std::make_pair(ny, hkey), std::move(r)).first->second;
    }
};

}  // namespace detail

/// T applied to node values. SpectralAnalytic integrates the sine interpolant
/// of each column exactly; CumulativeQuadrature uses the composite rule on
/// the padded y-nodes together with the known zero value at y = 0.
inline GridField apply_T(const GridField& g, TMethod method = TMethod::SpectralAnalytic) {
    const GridSpec& grid = g.grid;
    GridField out = GridField::zero(grid);
    if (method == TMethod::SpectralAnalytic) {
        std::vector<double> work = g.values;
        fft::dst1_cols(work.data(), grid.py, grid.px);  // (py+1) * b_m
        const double inv = 1.0 / (grid.py + 1);
        std::vector<double> coef(static_cast<std::size_t>(grid.py + 1) * grid.px, 0.0);
        for (int p = 0; p < grid.px; ++p) {
            double c0 = 0.0;
            for (int m = 1; m <= grid.py; ++m) {
                const double bm = work[static_cast<std::size_t>(m - 1) * grid.px + p] * inv / (m * kPi);
                coef[static_cast<std::size_t>(m) * grid.px + p] = -bm;
                c0 += bm;
            }
            coef[p] = c0;
        }
        detail::cos_eval_cols(coef, grid.py, grid.px, out.values);
    } else {
        const auto& rule = detail::CumulativeRule::get(grid.py, grid.hy());
        std::vector<double> col(grid.py + 1);
        for (int p = 0; p < grid.px; ++p) {
            col[0] = 0.0;  // Dirichlet boundary value at y = 0
            for (int q = 0; q < grid.py; ++q) col[q + 1] = g.at(p, q);
            double acc = 0.0;
            for (int i = 0; i < grid.py; ++i) {
                const int s = rule.start[i];
                double seg = 0.0;
                for (int k = 0; k < detail::CumulativeRule::kStencil && s + k <= grid.py; ++k)
                    seg += rule.w[i][k] * col[s + k];
                acc += seg;
                out.at(p, i) = acc;
            }
        }
    }
    return out;
}

/// Pointwise values of T d/dx applied to a mode expansion:
/// per mode, sqrt(2/L) a_j cos(a_j (x+L)) (1 - cos(m pi y))/(m pi).
inline GridField apply_Tdx(const SpectralField& f, const GridSpec& grid) {
    if (!(f.domain == grid.domain)) throw DomainMismatch("field and grid live on different domains");
    const double L = grid.domain.half_width;
    const double nrm = basis_normalizer(grid.domain);
    // Step 1: y-direction (1 - cos) evaluation per x-mode j.
    std::vector<double> coef(static_cast<std::size_t>(grid.py + 1) * f.nx, 0.0);
    for (int j = 1; j <= f.nx; ++j) {
        const double aj = j * kPi / (2.0 * L);
        double c0 = 0.0;
        for (int m = 1; m <= f.ny; ++m) {
            const double gm = nrm * aj * f.at(j, m) / (m * kPi);
            coef[static_cast<std::size_t>(m) * f.nx + (j - 1)] = -gm;
            c0 += gm;
        }
        coef[j - 1] = c0;
    }
    std::vector<double> dvals;  // py x nx
    detail::cos_eval_cols(coef, grid.py, f.nx, dvals);
    // Step 2: cosine evaluation in x per y-row.
    std::vector<double> xcoef(static_cast<std::size_t>(grid.py) * (grid.px + 1), 0.0);
    for (int q = 0; q < grid.py; ++q)
        for (int j = 1; j <= f.nx; ++j)
            xcoef[static_cast<std::size_t>(q) * (grid.px + 1) + j] =
                dvals[static_cast<std::size_t>(q) * f.nx + (j - 1)];
    GridField out = GridField::zero(grid);
    detail::cos_eval_rows(xcoef, grid.px, grid.py, out.values);
    return out;
}

/// ||Tu||_2 / ||u||_2 by node quadrature; Lemma-style contraction check.
inline double check_norm_bound(const GridField& g, TMethod method = TMethod::SpectralAnalytic) {
    const double nu = g.quad_norm();
    if (nu == 0.0) throw ZeroField("check_norm_bound requires a nonzero field");
    return apply_T(g, method).quad_norm() / nu;
}

}  // namespace glory
