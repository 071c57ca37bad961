#include <catch2/catch_amalgamated.hpp>

#include "glory/rhs.hpp"
#include "oracles.hpp"

using namespace glory;

namespace {

struct ClosedFormField {
    const SpectralField& f;
    double w(double x, double y) const {
        double s = 0.0;
        for (int m = 1; m <= f.ny; ++m)
            for (int j = 1; j <= f.nx; ++j)
                s += f.at(j, m) * detail::mode_shapes(f.domain, j, m, x, y).phi;
        return s;
    }
    double wx(double x, double y) const {
        double s = 0.0;
        for (int m = 1; m <= f.ny; ++m)
            for (int j = 1; j <= f.nx; ++j)
                s += f.at(j, m) * detail::mode_shapes(f.domain, j, m, x, y).phi_x;
        return s;
    }
    double wy(double x, double y) const {
        double s = 0.0;
        for (int m = 1; m <= f.ny; ++m)
            for (int j = 1; j <= f.nx; ++j)
                s += f.at(j, m) * detail::mode_shapes(f.domain, j, m, x, y).phi_y;
        return s;
    }
    double tdx(double x, double y) const {
        double s = 0.0;
        for (int m = 1; m <= f.ny; ++m)
            for (int j = 1; j <= f.nx; ++j)
                s += f.at(j, m) * detail::mode_shapes(f.domain, j, m, x, y).tphi_x;
        return s;
    }
};

}  // namespace

TEST_CASE("beta coupling closed forms") {
    const RectDomain dom = build_domain(1);
    const BetaCoupling b = beta_coupling_matrix(dom, 4, 4);

    SECTION("x parity: same-j couplings vanish") {
        for (int j = 1; j <= 4; ++j) CHECK(b.x_at(j, j) == 0.0);
        CHECK(b.x_at(1, 3) == 0.0);  // even sum
        CHECK(b.x_at(2, 4) == 0.0);
    }

    SECTION("y integral m=1, m'=2 equals 8/(3 pi) (quadrature oracle)") {
        const double iy = oracle::integrate_1d(
            [](double y) { return std::sin(kPi * y) * (1.0 - std::cos(2.0 * kPi * y)); }, 0.0, 1.0,
            8, 12);
        CHECK(iy == Catch::Approx(8.0 / (3.0 * kPi)).margin(1e-12));
        CHECK(b.y_at(1, 2) == Catch::Approx(iy / 2.0).margin(1e-12));
    }

    SECTION("entries match brute-force 2-D quadrature of <phi, T dx phi'>") {
        for (auto [j, m, jp, mp] : {std::array{1, 1, 2, 1}, {2, 2, 1, 3}, {1, 2, 4, 2}}) {
            const double oracle_val = oracle::integrate_2d(
                [&, jp = jp, mp = mp, j = j, m = m](double x, double y) {
                    return eval_mode(dom, j, m, x, y) *
                           detail::mode_shapes(dom, jp, mp, x, y).tphi_x;
                },
                dom.half_width, 16, 8);
            CHECK(b.x_at(j, jp) * b.y_at(m, mp) == Catch::Approx(oracle_val).margin(1e-11));
        }
    }
}

TEST_CASE("beta coupling agrees with the transform route in the refinement limit") {
    const RectDomain dom = build_domain(1);
    const int nx = 4, ny = 4;
    const BetaCoupling b = beta_coupling_matrix(dom, nx, ny);
    auto transform_route = [&](const SpectralField& e, double pad) {
        const GridSpec g = build_grid(dom, nx, ny, pad);
        return std::pair{analyze(apply_Tdx(e, g), nx, ny), 1.0 / (g.py + 1)};
    };
    for (int k : {0, 5, 9}) {
        auto e = SpectralField::zero(dom, nx, ny);
        e.coeffs[k] = 1.0;
        const SpectralField exact = apply_beta_coupling(b, e);
        // interior-node quadrature carries an even Euler-Maclaurin error
        // series; extrapolate the limit through value = E + a h^2 + b h^4
        // at the exact node spacings (they do not halve exactly)
        const auto [e1, h1] = transform_route(e, 16.0);
        const auto [e2, h2] = transform_route(e, 32.0);
        const auto [e3, h3] = transform_route(e, 64.0);
        const double x1 = h1 * h1, x2 = h2 * h2, x3 = h3 * h3;
        const double det = (x2 - x1) * (x3 * x3 - x1 * x1) - (x2 * x2 - x1 * x1) * (x3 - x1);
        double worst = 0.0;
        for (std::size_t i = 0; i < exact.coeffs.size(); ++i) {
            const double d2 = e2.coeffs[i] - e1.coeffs[i], d3 = e3.coeffs[i] - e1.coeffs[i];
            const double a = (d2 * (x3 * x3 - x1 * x1) - d3 * (x2 * x2 - x1 * x1)) / det;
            const double bb = (d3 * (x2 - x1) - d2 * (x3 - x1)) / det;
            const double extrap = e1.coeffs[i] - a * x1 - bb * x1 * x1;
            worst = std::max(worst, std::abs(extrap - exact.coeffs[i]));
        }
        CHECK(worst < 1e-8);
    }
}

TEST_CASE("project_initial_data") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 8, 8, 2.0);
    const RhsSplit r = make_rhs(make_parameters(1.0, 0.0, 0.0), grid, zero_forcing(dom));

    SECTION("an eigenfunction projects to its unit vector") {
        const SpectralField w = project_initial_data(
            r, [&](double x, double y) { return eval_mode(dom, 2, 1, x, y); });
        CHECK(w.at(2, 1) == Catch::Approx(1.0).epsilon(1e-13));
        double offmass = 0.0;
        for (std::size_t i = 0; i < w.coeffs.size(); ++i) offmass += w.coeffs[i] * w.coeffs[i];
        CHECK(std::sqrt(offmass - w.at(2, 1) * w.at(2, 1) + 1e-300) < 1e-12);
    }

    SECTION("Bessel: projection norm bounded by the data norm") {
        auto bump = [](double x, double y) {
            return std::exp(-4.0 * x * x) * std::sin(kPi * y) * (1.0 + 0.3 * std::sin(2.0 * kPi * y));
        };
        const SpectralField w = project_initial_data(r, bump);
        const double u0sq = oracle::integrate_2d(
            [&](double x, double y) { return bump(x, y) * bump(x, y); }, dom.half_width, 24, 12);
        CHECK(w.norm2() <= std::sqrt(u0sq) + 1e-10);
    }

    SECTION("data supported outside the rectangle projects to zero") {
        const SpectralField w = project_initial_data(r, [](double x, double y) {
            return std::exp(-4.0 * (x - 10.0) * (x - 10.0)) * std::sin(kPi * y);
        });
        CHECK(w.norm2() < 1e-30);
    }

    SECTION("non-finite data is rejected") {
        GridField g = GridField::zero(grid);
        g.at(3, 3) = std::nan("");
        CHECK_THROWS_AS(project_initial_data(r, g), NotIntegrable);
    }
}

TEST_CASE("nonlinear term basics") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 8, 6, 2.0);
    const RhsSplit r = make_rhs(make_parameters(1.0, 0.0, 0.0), grid, zero_forcing(dom));

    SECTION("quadratic in the field") {
        const SpectralField z = nonlinear_term(r, 0.0, SpectralField::zero(dom, 8, 6));
        CHECK(z.norm2() == 0.0);
        const auto f = oracle::random_field(dom, 8, 6, 21);
        auto f2 = f;
        for (double& c : f2.coeffs) c *= 2.0;
        const SpectralField n1 = nonlinear_term(r, 0.0, f);
        const SpectralField n2 = nonlinear_term(r, 0.0, f2);
        for (std::size_t i = 0; i < n1.coeffs.size(); ++i) CHECK(n2.coeffs[i] == 4.0 * n1.coeffs[i]);
    }

    SECTION("exact energy cancellation at pad 2") {
        for (unsigned seed = 0; seed < 10; ++seed) {
            const auto f = oracle::random_field(dom, 8, 6, 300 + seed);
            const SpectralField n = nonlinear_term(r, 0.0, f);
            double ip = 0.0;
            for (std::size_t i = 0; i < f.coeffs.size(); ++i) ip += f.coeffs[i] * n.coeffs[i];
            CHECK(std::abs(ip) <= 1e-9 * f.norm2() * n.norm2());
        }
    }
}

TEST_CASE("nonlinear term matches the brute-force Galerkin oracle") {
    const RectDomain dom = build_domain(1);
    const int nx = 3, ny = 2;
    const GridSpec grid = build_grid(dom, 4, 4, 2.0);  // grid resolves 2*(3,2)
    const RhsSplit r = [&] {
        RhsSplit rr = make_rhs(make_parameters(1.0, 0.0, 0.0), grid, zero_forcing(dom));
        return rr;
    }();
    auto f = SpectralField::zero(dom, 4, 4);
    std::mt19937 rng(9);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int m = 1; m <= ny; ++m)
        for (int j = 1; j <= nx; ++j) f.at(j, m) = gauss(rng);

    const SpectralField n = nonlinear_term(r, 0.0, f);
    const ClosedFormField cf{f};
    for (int m = 1; m <= 4; ++m)
        for (int j = 1; j <= 4; ++j) {
            const double want = oracle::project_mode(
                [&](double x, double y) {
                    return -cf.w(x, y) * cf.wx(x, y) + cf.wy(x, y) * cf.tdx(x, y);
                },
                dom, j, m, 20, 10);
            CHECK(n.at(j, m) == Catch::Approx(want).margin(2e-10));
        }
}

TEST_CASE("full rhs against a dense quadrature assembly on 6 modes") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 4, 4, 2.0);
    const Parameters pr = make_parameters(0.8, 0.3, 0.7);
    // a resolved trigonometric polynomial, so the node projection of K is
    // exact and the comparison isolates the assembly
    const std::string kexpr =
        "sin(pi*(x+L)/L)*sin(2*pi*y) + 0.5*sin(3*pi*(x+L)/(2*L))*sin(pi*y)";
    ForcingSpec forcing = closed_form_forcing(kexpr, dom, 0, true);
    const RhsSplit r = make_rhs(pr, grid, forcing);

    auto f = SpectralField::zero(dom, 4, 4);
    std::mt19937 rng(31);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int m = 1; m <= 2; ++m)
        for (int j = 1; j <= 3; ++j) f.at(j, m) = gauss(rng);

    const double t = 0.3;
    const SpectralField got = rhs(r, t, f);
    const ClosedFormField cf{f};
    const double eg = std::exp(pr.gamma * t), emg = std::exp(-pr.gamma * t);
    for (int m = 1; m <= 4; ++m)
        for (int j = 1; j <= 4; ++j) {
            const double lam = eigenvalue(dom, j, m);
            const double want =
                (pr.alpha - pr.gamma - pr.mu * lam) * f.at(j, m) +
                oracle::project_mode(
                    [&](double x, double y) {
                        const double L = dom.half_width;
                        const double kval =
                            std::sin(kPi * (x + L) / L) * std::sin(2 * kPi * y) +
                            0.5 * std::sin(3 * kPi * (x + L) / (2 * L)) * std::sin(kPi * y);
                        return -pr.beta * cf.tdx(x, y) +
                               eg * (-cf.w(x, y) * cf.wx(x, y) + cf.wy(x, y) * cf.tdx(x, y)) +
                               emg * kval;
                    },
                    dom, j, m, 20, 10);
            CHECK(got.at(j, m) == Catch::Approx(want).margin(1e-8));
        }
}

TEST_CASE("rhs structure and invariants") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 8, 6, 2.0);
    const Parameters pr = make_parameters(1.0, 0.2, 0.5);
    const RhsSplit r = make_rhs(pr, grid, zero_forcing(dom));

    SECTION("zero field maps to zero with no forcing") {
        const SpectralField z = rhs(r, 0.7, SpectralField::zero(dom, 8, 6));
        CHECK(z.norm2() == 0.0);
    }

    SECTION("assembly by parts for a single mode") {
        RhsSplit r0 = make_rhs(make_parameters(1.0, 0.0, 0.0), grid, zero_forcing(dom));
        r0.enable_beta = false;
        auto e1 = SpectralField::zero(dom, 8, 6);
        e1.at(1, 1) = 1.0;
        const SpectralField got = rhs(r0, 0.0, e1);
        const SpectralField nl = nonlinear_term(r0, 0.0, e1);
        const double lin = -r0.params.gamma - eigenvalue(dom, 1, 1);
        for (int m = 1; m <= 6; ++m)
            for (int j = 1; j <= 8; ++j) {
                const double want = nl.at(j, m) + ((j == 1 && m == 1) ? lin : 0.0);
                CHECK(got.at(j, m) == Catch::Approx(want).margin(1e-14));
            }
    }

    SECTION("linear_diag is nonincreasing along the eigenvalue ranking") {
        const auto ranked = rank_table(dom, 8, 6);
        double prev = 1e300;
        for (const auto& mi : ranked) {
            const double d = r.linear_diag[static_cast<std::size_t>(mi.m - 1) * 8 + (mi.j - 1)];
            CHECK(d <= prev + 1e-15);
            prev = d;
        }
    }

    SECTION("energy identity of the assembled rhs") {
        for (unsigned seed : {1u, 2u, 3u}) {
            const auto f = oracle::random_field(dom, 8, 6, 500 + seed);
            const double t = 0.2;
            const SpectralField psi = rhs(r, t, f);
            double ip = 0.0, lam_sum = 0.0;
            for (int m = 1; m <= 6; ++m)
                for (int j = 1; j <= 8; ++j) {
                    ip += f.at(j, m) * psi.at(j, m);
                    lam_sum += eigenvalue(dom, j, m) * f.at(j, m) * f.at(j, m);
                }
            const SpectralField bf = apply_beta_coupling(r.beta_coupling, f);
            double bquad = 0.0;
            for (std::size_t i = 0; i < f.coeffs.size(); ++i) bquad += f.coeffs[i] * bf.coeffs[i];
            const double expect = -pr.mu * lam_sum + (pr.alpha - pr.gamma) * f.norm2_sq() -
                                  pr.beta * bquad;
            const double scale = pr.mu * lam_sum + f.norm2_sq() + std::abs(bquad) + 1.0;
            CHECK(std::abs(ip - expect) <= 1e-9 * scale);
        }
    }

    SECTION("coupling bound |<w, T dx w>| <= ||w|| ||grad w||") {
        for (unsigned seed = 0; seed < 20; ++seed) {
            const auto f = oracle::random_field(dom, 8, 6, 700 + seed);
            const SpectralField bf = apply_beta_coupling(r.beta_coupling, f);
            double bquad = 0.0, lam_sum = 0.0;
            for (int m = 1; m <= 6; ++m)
                for (int j = 1; j <= 8; ++j) {
                    bquad += f.at(j, m) * bf.at(j, m);
                    lam_sum += eigenvalue(dom, j, m) * f.at(j, m) * f.at(j, m);
                }
            CHECK(std::abs(bquad) <= f.norm2() * std::sqrt(lam_sum) * (1.0 + 1e-12));
        }
    }
}

TEST_CASE("eigenvalue-rank mode cut confines the dynamics") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 6, 4, 2.0);
    const int keep = 10;
    const RhsSplit r = make_rhs(make_parameters(1.0, 0.0, 0.3), grid, zero_forcing(dom),
                                ModeCut::EigenvalueRank, keep);
    auto f = oracle::random_field(dom, 6, 4, 11);
    apply_mask(r, f);
    const SpectralField psi = rhs(r, 0.1, f);
    const auto ranked = rank_table(dom, 6, 4);
    for (std::size_t k = keep; k < ranked.size(); ++k)
        CHECK(psi.at(ranked[k].j, ranked[k].m) == 0.0);
}
