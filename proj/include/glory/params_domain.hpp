#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "glory/errors.hpp"

namespace glory {

/// Physical constants of the model plus the derived damping constant
/// gamma = 1 + alpha + beta^2/(2 mu) used by the exponential substitution.
struct Parameters {
    double mu;     // viscosity, > 0
    double alpha;  // zeroth-order coefficient
    double beta;   // coupling strength of the nonlocal drift
    double gamma;  // derived; > 0 enforced at construction
};

inline double derive_gamma(double mu, double alpha, double beta) {
    if (!(mu > 0.0)) throw Error("mu must be positive");
    const double g = 1.0 + alpha + beta * beta / (2.0 * mu);
    if (!(g > 0.0))
        throw NonPositiveGamma("gamma = 1 + alpha + beta^2/(2 mu) = " + std::to_string(g) +
                               " <= 0; substitution requires gamma > 0");
    return g;
}

inline Parameters make_parameters(double mu, double alpha, double beta) {
    return Parameters{mu, alpha, beta, derive_gamma(mu, alpha, beta)};
}

/// Rectangle (-2^N, 2^N) x (0, 1). Levels nest: level N+1 contains level N.
struct RectDomain {
    int level = 1;
    double half_width = 2.0;  // L = 2^level

    bool operator==(const RectDomain&) const = default;
};

inline RectDomain build_domain(int level) {
    if (level < 1) throw InvalidLevel("domain level must be >= 1, got " + std::to_string(level));
    if (level > 40) throw InvalidLevel("domain level too large");
    return RectDomain{level, std::ldexp(1.0, level)};
}

/// Collocation geometry: nx-by-ny retained sine modes, padded grid of
/// ceil(pad*nx) x ceil(pad*ny) interior type-I sine nodes.
struct GridSpec {
    RectDomain domain;
    int nx = 0, ny = 0;        // retained mode counts
    double pad = 2.0;          // dealiasing factor
    int px = 0, py = 0;        // padded grid sizes
    std::vector<double> x_nodes;  // x_p = -L + 2L p/(px+1), p = 1..px
    std::vector<double> y_nodes;  // y_q = q/(py+1), q = 1..py

    double hx() const { return 2.0 * domain.half_width / (px + 1); }
    double hy() const { return 1.0 / (py + 1); }
    std::size_t size() const { return static_cast<std::size_t>(px) * py; }
};

inline GridSpec build_grid(const RectDomain& domain, int nx, int ny, double pad = 2.0) {
    if (nx < 4 || ny < 4)
        throw GridTooSmall("need nx, ny >= 4, got " + std::to_string(nx) + "x" + std::to_string(ny));
    if (!(pad >= 1.0)) throw Error("pad factor must be >= 1");
    GridSpec g;
    g.domain = domain;
    g.nx = nx;
    g.ny = ny;
    g.pad = pad;
    g.px = static_cast<int>(std::ceil(pad * nx));
    g.py = static_cast<int>(std::ceil(pad * ny));
    const double L = domain.half_width;
    g.x_nodes.resize(g.px);
    for (int p = 0; p < g.px; ++p) g.x_nodes[p] = -L + 2.0 * L * (p + 1) / (g.px + 1);
    g.y_nodes.resize(g.py);
    for (int q = 0; q < g.py; ++q) g.y_nodes[q] = double(q + 1) / (g.py + 1);
    return g;
}

}  // namespace glory
