#include <catch2/catch_amalgamated.hpp>

#include "glory/basis.hpp"
#include "oracles.hpp"

using namespace glory;

TEST_CASE("eigenpair closed forms on level 1") {
    const RectDomain dom = build_domain(1);
    const auto [l11, n11] = eigenpair(dom, 1, 1);
    CHECK(l11 == Catch::Approx(kPi * kPi / 16.0 + kPi * kPi).epsilon(1e-14));
    CHECK(l11 == Catch::Approx(10.48646).epsilon(1e-6));
    const auto [l21, n21] = eigenpair(dom, 2, 1);
    CHECK(l21 == Catch::Approx(kPi * kPi / 4.0 + kPi * kPi).epsilon(1e-14));
    CHECK(n11 == Catch::Approx(std::sqrt(2.0 / dom.half_width)).epsilon(1e-15));
    CHECK_THROWS_AS(eigenpair(dom, 0, 1), Error);
}

TEST_CASE("eigenfunctions are L2-normalized (quadrature oracle)") {
    const RectDomain dom = build_domain(1);
    for (auto [j, m] : {std::pair{1, 1}, {2, 3}, {5, 2}}) {
        const double mass = oracle::integrate_2d(
            [&, j = j, m = m](double x, double y) {
                const double v = eval_mode(dom, j, m, x, y);
                return v * v;
            },
            dom.half_width);
        CHECK(mass == Catch::Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("quadrature Gram matrix of the first modes is the identity") {
    const RectDomain dom = build_domain(2);
    const GridSpec grid = build_grid(dom, 6, 6, 2.0);
    const auto modes = rank_table(dom, 3, 3);
    std::vector<GridField> fields;
    for (std::size_t k = 0; k < modes.size(); ++k) {
        auto f = SpectralField::zero(dom, 3, 3);
        f.at(modes[k].j, modes[k].m) = 1.0;
        fields.push_back(synthesize(f, grid));
    }
    for (std::size_t a = 0; a < fields.size(); ++a)
        for (std::size_t b = 0; b < fields.size(); ++b)
            CHECK(quad_inner(fields[a], fields[b]) == Catch::Approx(a == b ? 1.0 : 0.0).margin(1e-12));
}

TEST_CASE("rank table sorts by eigenvalue with lexicographic ties") {
    const RectDomain dom = build_domain(1);
    const auto modes = rank_table(dom, 8, 8);
    REQUIRE(modes.size() == 64);
    CHECK(modes[0] == ModeIndex{1, 1});
    for (std::size_t k = 1; k < modes.size(); ++k) {
        const double a = eigenvalue(dom, modes[k - 1].j, modes[k - 1].m);
        const double b = eigenvalue(dom, modes[k].j, modes[k].m);
        CHECK(a <= b);
        if (a == b)
            CHECK((modes[k - 1].j < modes[k].j ||
                   (modes[k - 1].j == modes[k].j && modes[k - 1].m < modes[k].m)));
    }
}

TEST_CASE("synthesize single modes and linearity") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 8, 8, 2.0);
    SECTION("single mode matches the closed form") {
        auto f = SpectralField::zero(dom, 8, 8);
        f.at(1, 1) = 1.0;
        const GridField g = synthesize(f, grid);
        for (int q = 0; q < grid.py; q += 3)
            for (int p = 0; p < grid.px; p += 3)
                CHECK(g.at(p, q) ==
                      Catch::Approx(eval_mode(dom, 1, 1, grid.x_nodes[p], grid.y_nodes[q]))
                          .margin(1e-13));
    }
    SECTION("zero field synthesizes to zero") {
        const GridField g = synthesize(SpectralField::zero(dom, 8, 8), grid);
        for (double v : g.values) CHECK(v == 0.0);
    }
    SECTION("analyze is linear on resolved modes") {
        auto f = SpectralField::zero(dom, 8, 8);
        f.at(3, 1) = 2.0;
        f.at(1, 2) = -1.0;
        const SpectralField back = analyze(synthesize(f, grid), 8, 8);
        CHECK(back.at(3, 1) == Catch::Approx(2.0).epsilon(1e-13));
        CHECK(back.at(1, 2) == Catch::Approx(-1.0).epsilon(1e-13));
        CHECK(std::abs(back.at(2, 2)) < 1e-13);
    }
}

TEST_CASE("analyze(synthesize(f)) is the identity on resolved fields") {
    const RectDomain dom = build_domain(2);
    const GridSpec grid = build_grid(dom, 12, 6, 2.0);
    const auto f = oracle::random_field(dom, 12, 6, 1234);
    const SpectralField back = analyze(synthesize(f, grid), 12, 6);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < f.coeffs.size(); ++i) {
        num += (back.coeffs[i] - f.coeffs[i]) * (back.coeffs[i] - f.coeffs[i]);
        den += f.coeffs[i] * f.coeffs[i];
    }
    CHECK(std::sqrt(num / den) < 1e-13);
}

TEST_CASE("analyze flags truncated content") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 8, 8, 2.0);
    auto f = SpectralField::zero(dom, 16, 16);
    f.at(12, 1) = 1.0;  // resolved on the padded grid, above the (8,8) cut
    const auto rep = analyze_report(synthesize(f, grid), 8, 8);
    CHECK(rep.truncated);
    CHECK(rep.field.norm2() < 1e-13);
    CHECK(rep.truncated_fraction == Catch::Approx(1.0).margin(1e-10));
}

TEST_CASE("Parseval: grid quadrature of w^2 equals sum of squares") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 10, 10, 2.0);
    const auto f = oracle::random_field(dom, 10, 10, 99);
    const GridField g = synthesize(f, grid);
    CHECK(g.quad_norm_sq() == Catch::Approx(f.norm2_sq()).epsilon(1e-12));
}

TEST_CASE("derivative fields") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 8, 8, 2.0);
    const double L = dom.half_width;
    SECTION("single mode closed forms") {
        auto f = SpectralField::zero(dom, 8, 8);
        const int j = 2, m = 3;
        f.at(j, m) = 1.0;
        const auto [dx, dy] = derivative_fields(f, grid);
        const double nrm = basis_normalizer(dom);
        const double aj = j * kPi / (2.0 * L);
        for (int q = 0; q < grid.py; q += 2)
            for (int p = 0; p < grid.px; p += 2) {
                const double x = grid.x_nodes[p], y = grid.y_nodes[q];
                CHECK(dx.at(p, q) ==
                      Catch::Approx(nrm * aj * std::cos(j * kPi * (x + L) / (2 * L)) *
                                    std::sin(m * kPi * y))
                          .margin(1e-12));
                CHECK(dy.at(p, q) ==
                      Catch::Approx(nrm * m * kPi * std::sin(j * kPi * (x + L) / (2 * L)) *
                                    std::cos(m * kPi * y))
                          .margin(1e-12));
            }
    }
    SECTION("zero field") {
        const auto [dx, dy] = derivative_fields(SpectralField::zero(dom, 8, 8), grid);
        for (double v : dx.values) CHECK(v == 0.0);
        for (double v : dy.values) CHECK(v == 0.0);
    }
    SECTION("gradient Parseval") {
        // Closed trapezoid in the cosine-carrying direction: the derivative
        // factors do not vanish on the boundary, so the interior node sum
        // alone undercounts; with the boundary slices the quadrature is
        // exact for resolved gradients.
        const auto f = oracle::random_field(dom, 8, 8, 7);
        const auto [dx, dy] = derivative_fields(f, grid);
        const double nrm = basis_normalizer(dom);
        double quad = dx.quad_norm_sq() + dy.quad_norm_sq();
        for (int q = 0; q < grid.py; ++q) {
            double left = 0.0, right = 0.0;
            for (int m = 1; m <= f.ny; ++m) {
                double cl = 0.0, cr = 0.0;
                for (int j = 1; j <= f.nx; ++j) {
                    const double aj = j * kPi / (2.0 * L);
                    cl += nrm * aj * f.at(j, m);
                    cr += nrm * aj * f.at(j, m) * ((j % 2) ? -1.0 : 1.0);
                }
                left += cl * std::sin(m * kPi * grid.y_nodes[q]);
                right += cr * std::sin(m * kPi * grid.y_nodes[q]);
            }
            quad += 0.5 * grid.hx() * grid.hy() * (left * left + right * right);
        }
        for (int p = 0; p < grid.px; ++p) {
            double bot = 0.0, top = 0.0;
            for (int j = 1; j <= f.nx; ++j) {
                double cb = 0.0, ct = 0.0;
                for (int m = 1; m <= f.ny; ++m) {
                    cb += nrm * (m * kPi) * f.at(j, m);
                    ct += nrm * (m * kPi) * f.at(j, m) * ((m % 2) ? -1.0 : 1.0);
                }
                const double sj = std::sin(j * kPi * (grid.x_nodes[p] + L) / (2.0 * L));
                bot += cb * sj;
                top += ct * sj;
            }
            quad += 0.5 * grid.hx() * grid.hy() * (bot * bot + top * top);
        }
        double lam = 0.0;
        for (int m = 1; m <= 8; ++m)
            for (int j = 1; j <= 8; ++j) lam += eigenvalue(dom, j, m) * f.at(j, m) * f.at(j, m);
        CHECK(quad == Catch::Approx(lam).epsilon(1e-10));
    }
}

TEST_CASE("evaluate_at agrees with synthesize at the nodes") {
    const RectDomain dom = build_domain(1);
    const GridSpec grid = build_grid(dom, 6, 5, 2.0);
    const auto f = oracle::random_field(dom, 6, 5, 42);
    const GridField g = synthesize(f, grid);
    const auto vals = evaluate_at(f, grid.x_nodes, grid.y_nodes);
    double worst = 0.0;
    for (int q = 0; q < grid.py; ++q)
        for (int p = 0; p < grid.px; ++p)
            worst = std::max(worst,
                             std::abs(vals[static_cast<std::size_t>(q) * grid.px + p] - g.at(p, q)));
    CHECK(worst < 1e-12);
}

TEST_CASE("synthesize rejects mismatched domains") {
    const GridSpec grid = build_grid(build_domain(1), 8, 8, 2.0);
    CHECK_THROWS_AS(synthesize(SpectralField::zero(build_domain(2), 8, 8), grid), DomainMismatch);
}
