#pragma once

// Forcing data K: closed forms in the expression grammar, sampled time
// series on the grid, the zero-extended mollification K_n = K~ * rho_{1/n}
// with a standard bump in (t,x,y), the forcing budget k(t), and manufactured
// forcing for verification runs.

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "glory/basis.hpp"
#include "glory/expression.hpp"
#include "glory/params_domain.hpp"
#include "glory/quadrature.hpp"

namespace glory {

enum class ForcingKind { Zero, ClosedForm, GridSeries, Manufactured };

struct GridSeriesData {
    GridSpec grid;
    std::vector<double> times;                // strictly increasing
    std::vector<std::vector<double>> frames;  // node values per timestamp
};

/// Single-eigenmode manufactured solution u*(t,x,y) = A(t) phi_{j,m}(x,y).
struct ManufacturedSolution {
    int j = 1, m = 1;
    expr::NodePtr amp;      // A(t)
    expr::NodePtr amp_dot;  // A'(t)
    double amplitude_at(double t) const {
        expr::Bindings b;
        b.t = t;
        return expr::eval(amp, b);
    }
    double rate_at(double t) const {
        expr::Bindings b;
        b.t = t;
        return expr::eval(amp_dot, b);
    }
};

struct ForcingSpec {
    ForcingKind kind = ForcingKind::Zero;
    RectDomain domain;
    expr::NodePtr closed;                         // ClosedForm
    std::shared_ptr<GridSeriesData> series;       // GridSeries
    std::optional<ManufacturedSolution> mms;      // Manufactured
    Parameters params{1.0, 0.0, 0.0, 1.0};        // Manufactured (and L binding)
    int mollification_index = 0;                  // n >= 1 enables K_n
    bool bypass_mollification = false;            // smooth closed forms may skip
    int mollifier_quad_order = 10;

    bool is_zero() const { return kind == ForcingKind::Zero; }
    bool mollified() const { return mollification_index >= 1 && !bypass_mollification; }
};

inline ForcingSpec zero_forcing(const RectDomain& dom) {
    ForcingSpec s;
    s.kind = ForcingKind::Zero;
    s.domain = dom;
    return s;
}

inline ForcingSpec closed_form_forcing(const std::string& expression, const RectDomain& dom,
                                       int mollification_index = 0, bool bypass = false) {
    ForcingSpec s;
    s.kind = ForcingKind::ClosedForm;
    s.domain = dom;
    s.closed = expr::parse(expression);
    s.mollification_index = mollification_index;
    s.bypass_mollification = bypass;
    return s;
}

inline ForcingSpec grid_series_forcing(std::shared_ptr<GridSeriesData> data, const RectDomain& dom,
                                       int mollification_index = 0) {
    for (std::size_t i = 1; i < data->times.size(); ++i)
        if (!(data->times[i] > data->times[i - 1]))
            throw Error("grid series timestamps must be strictly increasing");
    ForcingSpec s;
    s.kind = ForcingKind::GridSeries;
    s.domain = dom;
    s.series = std::move(data);
    s.mollification_index = mollification_index;
    return s;
}

/// Forcing that makes u*(t) = A(t) phi_{j,m} an exact solution of the model.
inline ForcingSpec manufactured_forcing(int j, int m, const std::string& amplitude,
                                        const Parameters& params, const RectDomain& dom) {
    if (j < 1 || m < 1) throw UnsupportedExpression("manufactured mode indices must be >= 1");
    ManufacturedSolution mms;
    mms.j = j;
    mms.m = m;
    mms.amp = expr::parse(amplitude);
    if (expr::depends_on(mms.amp, expr::Var::X) || expr::depends_on(mms.amp, expr::Var::Y))
        throw UnsupportedExpression("manufactured amplitude must depend on t only");
    mms.amp_dot = expr::diff_t(mms.amp);
    ForcingSpec s;
    s.kind = ForcingKind::Manufactured;
    s.domain = dom;
    s.mms = mms;
    s.params = params;
    return s;
}

namespace detail {

struct ModeShapes {
    double phi, phi_x, phi_y, tphi_x;
};

inline ModeShapes mode_shapes(const RectDomain& dom, int j, int m, double x, double y) {
    const double L = dom.half_width;
    const double nrm = basis_normalizer(dom);
    const double a = j * kPi / (2.0 * L);
    const double sx = std::sin(a * (x + L)), cx = std::cos(a * (x + L));
    const double sy = std::sin(m * kPi * y), cy = std::cos(m * kPi * y);
    return {nrm * sx * sy, nrm * a * cx * sy, nrm * m * kPi * sx * cy,
            nrm * a * cx * (1.0 - cy) / (m * kPi)};
}

inline double manufactured_K(const ForcingSpec& spec, double t, double x, double y) {
    const ManufacturedSolution& mms = *spec.mms;
    const Parameters& pr = spec.params;
    const double lam = eigenvalue(spec.domain, mms.j, mms.m);
    const double A = mms.amplitude_at(t);
    const double Ad = mms.rate_at(t);
    const ModeShapes s = mode_shapes(spec.domain, mms.j, mms.m, x, y);
    return (Ad + (pr.mu * lam - pr.alpha) * A) * s.phi + A * A * (s.phi * s.phi_x - s.phi_y * s.tphi_x) +
           pr.beta * A * s.tphi_x;
}

inline double series_value(const GridSeriesData& d, double t, double x, double y) {
    if (d.times.empty()) return 0.0;
    // zero-extension outside the stored window
    if (t < d.times.front() || t > d.times.back()) return 0.0;
    std::size_t hi = 1;
    while (hi < d.times.size() && d.times[hi] < t) ++hi;
    if (hi == d.times.size()) hi = d.times.size() - 1;
    const std::size_t lo = hi - 1;
    const double wt = (t - d.times[lo]) / (d.times[hi] - d.times[lo]);
    // bilinear interpolation on the stored grid, zero outside the rectangle
    const GridSpec& g = d.grid;
    const double L = g.domain.half_width;
    const double fx = (x + L) / (2.0 * L) * (g.px + 1) - 1.0;  // node index space
    const double fy = y * (g.py + 1) - 1.0;
    auto sample = [&](const std::vector<double>& frame, int p, int q) -> double {
        if (p < 0 || q < 0 || p >= g.px || q >= g.py) return 0.0;
        return frame[static_cast<std::size_t>(q) * g.px + p];
    };
    const int p0 = static_cast<int>(std::floor(fx)), q0 = static_cast<int>(std::floor(fy));
    const double ax = fx - p0, ay = fy - q0;
    auto bilin = [&](const std::vector<double>& fr) {
        return (1 - ax) * (1 - ay) * sample(fr, p0, q0) + ax * (1 - ay) * sample(fr, p0 + 1, q0) +
               (1 - ax) * ay * sample(fr, p0, q0 + 1) + ax * ay * sample(fr, p0 + 1, q0 + 1);
    };
    return (1.0 - wt) * bilin(d.frames[lo]) + wt * bilin(d.frames[hi]);
}

}  // namespace detail

/// Pointwise raw forcing K~(t,x,y) with the zero-extension convention t >= 0.
inline double forcing_value(const ForcingSpec& spec, double t, double x, double y) {
    if (t < 0.0) return 0.0;
    switch (spec.kind) {
        case ForcingKind::Zero: return 0.0;
        case ForcingKind::ClosedForm: {
            expr::Bindings b;
            b.t = t;
            b.x = x;
            b.y = y;
            b.L = spec.domain.half_width;
            const double v = expr::eval(spec.closed, b);
            if (!std::isfinite(v)) throw EvaluationError("closed-form forcing is non-finite");
            return v;
        }
        case ForcingKind::GridSeries: return detail::series_value(*spec.series, t, x, y);
        case ForcingKind::Manufactured: return detail::manufactured_K(spec, t, x, y);
    }
    return 0.0;
}

/// Node values of the raw forcing at time t.
inline GridField evaluate_K(const ForcingSpec& spec, double t, const GridSpec& grid) {
    GridField out = GridField::zero(grid);
    if (spec.is_zero() || t < 0.0) return out;
    for (int q = 0; q < grid.py; ++q)
        for (int p = 0; p < grid.px; ++p)
            out.at(p, q) = forcing_value(spec, t, grid.x_nodes[p], grid.y_nodes[q]);
    return out;
}

/// Standard bump rho(z) = c exp(1/(|z|^2-1)) on the unit ball of R^3,
/// normalized to unit mass.
struct MollifierConfig {
    double epsilon = 1.0;  // = 1/n

    static double normalizer() {
        static const double c = [] {
            const double radial = quad::integrate(
                [](double r) { return r < 1.0 ? r * r * std::exp(1.0 / (r * r - 1.0)) : 0.0; }, 0.0,
                1.0, 64, 16);
            return 1.0 / (4.0 * kPi * radial);
        }();
        return c;
    }

    /// rho(z) on the unit ball (epsilon-independent reference shape).
    static double bump(double s, double x, double y) {
        const double r2 = s * s + x * x + y * y;
        if (r2 >= 1.0) return 0.0;
        return normalizer() * std::exp(1.0 / (r2 - 1.0));
    }
};

/// K_n(t, nodes) = (K~ * rho_{1/n})(t, nodes) by tensor Gauss quadrature over
/// the mollifier support.
inline GridField mollify(const ForcingSpec& spec, int n, double t, const GridSpec& grid) {
    if (n < 1) throw Error("mollification index must be >= 1");
    GridField out = GridField::zero(grid);
    if (spec.is_zero()) return out;
    if (spec.kind == ForcingKind::GridSeries && spec.series->times.size() >= 2) {
        double dtmax = 0.0;
        for (std::size_t i = 1; i < spec.series->times.size(); ++i)
            dtmax = std::max(dtmax, spec.series->times[i] - spec.series->times[i - 1]);
        if (dtmax > 1.0 / n)
            throw InsufficientSamples("grid series time spacing exceeds mollifier width 1/n");
    }
    const int G = spec.mollifier_quad_order;
    const auto& rule = quad::gauss_rule(G);
    const auto& xs = rule.nodes;
    const auto& ws = rule.weights;
    const double inv_n = 1.0 / n;
    for (int a = 0; a < G; ++a)
        for (int b = 0; b < G; ++b)
            for (int c = 0; c < G; ++c) {
                const double rho = MollifierConfig::bump(xs[a], xs[b], xs[c]);
                if (rho == 0.0) continue;
                const double wt = ws[a] * ws[b] * ws[c] * rho;
                const double ts = t - xs[a] * inv_n;
                if (ts < 0.0) continue;  // zero extension in time
                for (int q = 0; q < grid.py; ++q)
                    for (int p = 0; p < grid.px; ++p) {
                        const double x = grid.x_nodes[p] - xs[b] * inv_n;
                        const double y = grid.y_nodes[q] - xs[c] * inv_n;
                        double v = 0.0;
                        if (y > 0.0 && y < 1.0) v = forcing_value(spec, ts, x, y);
                        out.at(p, q) += wt * v;
                    }
            }
    return out;
}

/// Node values of the forcing the solver actually applies at time t.
inline GridField effective_K(const ForcingSpec& spec, double t, const GridSpec& grid) {
    if (spec.mollified()) return mollify(spec, spec.mollification_index, t, grid);
    return evaluate_K(spec, t, grid);
}

/// k(t) = ||K||^2 over (0, t+1) x Omega^N by composite Simpson in time and
/// node quadrature in space.
inline double forcing_budget(const ForcingSpec& spec, double t, const GridSpec& grid,
                             int time_samples = 64) {
    if (spec.is_zero()) return 0.0;
    const double T = t + 1.0;
    int ns = std::max(4, time_samples);
    if (ns % 2) ++ns;
    const double dt = T / ns;
    double acc = 0.0;
    for (int i = 0; i <= ns; ++i) {
        const double ti = i * dt;
        const double v = evaluate_K(spec, ti, grid).quad_norm_sq();
        const double w = (i == 0 || i == ns) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * v;
    }
    return acc * dt / 3.0;
}

}  // namespace glory
