#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "khflow/grid.hpp"
#include "khflow/hessian.hpp"

using namespace khflow;

TEST_CASE("domain construction") {
    const Domain d = Domain::disk(4, 8);
    CHECK(d.interior_count() == 32);
    CHECK_THAT(d.r_of(0), Catch::Matchers::WithinAbs(0.125, 1e-15));
    CHECK_THROWS_AS(Domain::disk(4, 7), DomainError);  // odd Ntheta
    CHECK_THROWS_AS(Domain::disk(0, 8), DomainError);

    const Domain r = Domain::rect(10, 10);
    CHECK(r.interior_count() == 100);
    CHECK_THAT(r.dx * r.dy, Catch::Matchers::WithinAbs(0.01, 1e-18));
}

TEST_CASE("sample_field") {
    const Domain d = Domain::disk(8, 16);
    const GridFunction g = sample_field(Expression::parse("r^2"), d);
    for (int i = 0; i < d.nr; ++i)
        CHECK_THAT(g.at(i, 3), Catch::Matchers::WithinRel(d.r_of(i) * d.r_of(i), 1e-14));

    const Domain rect = Domain::rect(6, 6);
    const GridFunction x = sample_field(Expression::parse("x"), rect);
    CHECK_THAT(x.rc(2, 4), Catch::Matchers::WithinAbs(rect.x_of(2), 1e-15));

    const GridFunction a = sample_field(Expression::parse("0.5*(x^2+y^2)"), d);
    const GridFunction b = sample_field(Expression::parse("0.5*r^2"), d);
    for (int i = 0; i < d.nr; ++i)
        for (int j = 0; j < d.ntheta; ++j)
            CHECK_THAT(a.at(i, j), Catch::Matchers::WithinAbs(b.at(i, j), 1e-14));
}

TEST_CASE("neumann ghost fill on the disk") {
    // u = r^2/2 with phi = -1: the fill reproduces the exact ghost value.
    for (int nr : {16, 32, 64}) {
        const Domain d = Domain::disk(nr, 8);
        GridFunction u = sample_field(Expression::parse("0.5*r^2"), d);
        const BoundaryData phi = sample_boundary(Expression::parse("-1"), d);
        fill_neumann_ghosts(u, phi);
        const double exact = 0.5 * std::pow(1.0 + 0.5 * d.dr, 2);
        CHECK_THAT(u.at(d.nr, 0), Catch::Matchers::WithinAbs(exact, 1e-14));
        CHECK_THAT(neumann_residual(u, phi), Catch::Matchers::WithinAbs(0.0, 1e-13));
    }
    // phi = 0: ghost mirrors the even extension; constants are preserved.
    const Domain d = Domain::disk(8, 16);
    GridFunction c = sample_field(Expression::parse("3"), d);
    fill_neumann_ghosts(c, zero_boundary(d));
    CHECK(c.at(d.nr, 5) == 3.0);
    CHECK(c.at(-1, 2) == 3.0);
}

TEST_CASE("pole ghost pairs theta with theta + pi") {
    const Domain d = Domain::disk(8, 16);
    GridFunction u = sample_field(Expression::parse("x"), d);  // odd across the pole
    fill_neumann_ghosts(u, sample_boundary(Expression::parse("-cos(theta)"), d));
    for (int j = 0; j < d.ntheta; ++j)
        CHECK_THAT(u.at(-1, j), Catch::Matchers::WithinAbs(u.at(0, j + d.ntheta / 2), 1e-15));
}

TEST_CASE("ghost convergence order for a nonlinear profile") {
    // u = r^4/4, u_r(1) = 1, phi = -1; the one-sided fill is second order
    // in the Neumann sense at the face.
    std::vector<double> errs;
    for (int nr : {16, 32, 64}) {
        const Domain d = Domain::disk(nr, 8);
        GridFunction u = sample_field(Expression::parse("0.25*r^4"), d);
        fill_neumann_ghosts(u, sample_boundary(Expression::parse("-1"), d));
        // compare ghost against the analytic sample at r = 1 + dr/2
        const double exact = 0.25 * std::pow(1.0 + 0.5 * d.dr, 4);
        errs.push_back(std::abs(u.at(d.nr, 0) - exact));
    }
    const double slope = std::log2(errs[0] / errs[2]) / 2.0;
    CHECK(slope > 1.8);
}

TEST_CASE("hessian of quadratics") {
    const Domain d = Domain::disk(32, 64);
    const ChiSpec nochi;

    GridFunction u = sample_field(Expression::parse("0.5*r^2"), d);
    fill_neumann_ghosts(u, sample_boundary(Expression::parse("-1"), d));
    HessianFrameField f = assemble_hessian(u, nochi);
    for (int i = 0; i < d.nr; ++i)
        for (int j = 0; j < d.ntheta; ++j) {
            const SymMatrix2& m = f.at(i, j);
            CHECK_THAT(m.a11, Catch::Matchers::WithinAbs(1.0, 1e-10));
            CHECK_THAT(m.a22, Catch::Matchers::WithinAbs(1.0, 1e-10));
            CHECK_THAT(m.a12, Catch::Matchers::WithinAbs(0.0, 1e-10));
        }

    // linear function: Hessian vanishes.  The radial and mixed entries are
    // exact; the angular second difference of cos(theta) leaves an
    // O(dtheta^2 / r) truncation term in a22.
    GridFunction lin = sample_field(Expression::parse("r*cos(theta)"), d);
    fill_neumann_ghosts(lin, sample_boundary(Expression::parse("-cos(theta)"), d));
    HessianFrameField lf = assemble_hessian(lin, nochi);
    for (int i = 1; i < d.nr - 1; ++i)
        for (int j = 0; j < d.ntheta; ++j) {
            CHECK_THAT(lf.at(i, j).a11, Catch::Matchers::WithinAbs(0.0, 1e-11));
            CHECK_THAT(lf.at(i, j).a22,
                       Catch::Matchers::WithinAbs(
                           0.0, d.dtheta * d.dtheta / (10.0 * d.r_of(i))));
            CHECK_THAT(lf.at(i, j).a12, Catch::Matchers::WithinAbs(0.0, 1e-11));
        }
}

TEST_CASE("eigenvalues are frame independent: u = x^2/2") {
    const Domain d = Domain::disk(48, 96);
    GridFunction u = sample_field(Expression::parse("0.5*x^2"), d);
    fill_neumann_ghosts(u, sample_boundary(Expression::parse("-cos(theta)^2"), d));
    const HessianFrameField f = assemble_hessian(u, ChiSpec{});
    const double tol = 20.0 * d.dr * d.dr;
    for (int i = 1; i < d.nr - 1; ++i)
        for (int j = 0; j < d.ntheta; ++j) {
            CHECK_THAT(f.eigs[static_cast<std::size_t>(i) * d.ntheta + j][0],
                       Catch::Matchers::WithinAbs(1.0, tol));
            CHECK_THAT(f.eigs[static_cast<std::size_t>(i) * d.ntheta + j][1],
                       Catch::Matchers::WithinAbs(0.0, tol));
        }
}

TEST_CASE("hessian consistency for a random quadratic") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const double a = unif(rng), b = unif(rng), c = unif(rng);
    const Domain d = Domain::disk(48, 96);
    const std::string expr = "0.5*" + std::to_string(a) + "*x^2 + " + std::to_string(b) +
                             "*x*y + 0.5*" + std::to_string(c) + "*y^2";
    GridFunction u = sample_field(Expression::parse(expr), d);
    // phi = -u_r(1, theta) for the exact quadratic
    const std::string phi = "-(" + std::to_string(a) + "*cos(theta)^2 + 2*" +
                            std::to_string(b) + "*sin(theta)*cos(theta) + " +
                            std::to_string(c) + "*sin(theta)^2)";
    fill_neumann_ghosts(u, sample_boundary(Expression::parse(phi), d));
    const HessianFrameField f = assemble_hessian(u, ChiSpec{});
    const Eigen2 exact = eigen_sym2({a, b, c});
    const double tol = 50.0 * d.dr * d.dr + 1e-9;
    for (int i = 1; i < d.nr - 1; ++i)
        for (int j = 0; j < d.ntheta; ++j) {
            const auto& e = f.eigs[static_cast<std::size_t>(i) * d.ntheta + j];
            CHECK_THAT(e[0], Catch::Matchers::WithinAbs(exact.lam1, tol));
            CHECK_THAT(e[1], Catch::Matchers::WithinAbs(exact.lam2, tol));
        }
}

TEST_CASE("chi rotation into the polar frame") {
    ChiSpec chi;
    chi.xx = Expression::parse("1");
    chi.yy = Expression::parse("2");
    // at theta = pi/2 the radial direction is y: chi_rr = 2, chi_tt = 1
    const SymMatrix2 m = chi.eval_polar(0.5, M_PI / 2.0);
    CHECK_THAT(m.a11, Catch::Matchers::WithinAbs(2.0, 1e-14));
    CHECK_THAT(m.a22, Catch::Matchers::WithinAbs(1.0, 1e-14));
    CHECK_THAT(m.a12, Catch::Matchers::WithinAbs(0.0, 1e-14));
    // trace is rotation invariant
    for (double th : {0.3, 1.1, 2.9})
        CHECK_THAT(chi.eval_polar(0.2, th).trace(), Catch::Matchers::WithinAbs(3.0, 1e-13));
}

TEST_CASE("quadrature") {
    const Domain d = Domain::disk(64, 128);
    GridFunction one = sample_field(Expression::parse("1"), d);
    CHECK_THAT(integrate_volume(one), Catch::Matchers::WithinAbs(M_PI, 1e-12));

    GridFunction r2 = sample_field(Expression::parse("r^2"), d);
    CHECK_THAT(integrate_volume(r2), Catch::Matchers::WithinAbs(M_PI / 2.0, 1e-3));

    const BoundaryData ones = sample_boundary(Expression::parse("1"), d);
    CHECK_THAT(integrate_boundary(ones), Catch::Matchers::WithinAbs(2.0 * M_PI, 1e-12));

    const Domain rect = Domain::rect(32, 32);
    GridFunction xr = sample_field(Expression::parse("x"), rect);
    CHECK_THAT(integrate_volume(xr), Catch::Matchers::WithinAbs(0.5, 1e-14));
    const BoundaryData bx = sample_boundary(Expression::parse("1"), rect);
    CHECK_THAT(integrate_boundary(bx), Catch::Matchers::WithinAbs(4.0, 1e-13));
}

TEST_CASE("discrete divergence identity telescopes exactly") {
    // int Delta u dV + int u_nu dS = 0 to rounding: r_i u_rr + u_r is the
    // conservative flux difference for cell-centered r_i, the theta terms
    // telescope around each ring, and the ghost rule encodes the flux.
    std::vector<double> errs;
    for (int nr : {16, 32, 64}) {
        const Domain d = Domain::disk(nr, 2 * nr);
        GridFunction u = sample_field(Expression::parse("0.25*r^4 + 0.1*r^3*cos(3*theta)"), d);
        const Expression phi_e =
            Expression::parse("-(1 + 0.3*cos(3*theta))");  // -u_r at r=1
        const BoundaryData phi = sample_boundary(phi_e, d);
        fill_neumann_ghosts(u, phi);
        const HessianFrameField f = assemble_hessian(u, ChiSpec{});
        GridFunction lap(d);
        for (int i = 0; i < d.nr; ++i)
            for (int j = 0; j < d.ntheta; ++j) lap.at(i, j) = f.at(i, j).trace();
        errs.push_back(std::abs(integrate_volume(lap) + integrate_boundary(phi)));
    }
    for (double e : errs) CHECK(e <= 1e-12);
}

TEST_CASE("distance to boundary") {
    const Domain d = Domain::disk(16, 32);
    const GridFunction dist = dist_to_boundary(d);
    CHECK_THAT(dist.at(0, 0), Catch::Matchers::WithinAbs(1.0 - d.r_of(0), 1e-15));
    const Domain rect = Domain::rect(8, 8);
    const GridFunction rd = dist_to_boundary(rect);
    CHECK_THAT(rd.rc(0, 3), Catch::Matchers::WithinAbs(rect.x_of(0), 1e-15));
}

TEST_CASE("radial grid basics") {
    const Domain d = Domain::radial(64);
    GridFunction u = sample_field(Expression::parse("0.5*r^2"), d);
    BoundaryData phi;
    phi.dom = d;
    phi.radial_outer = -1.0;
    fill_neumann_ghosts(u, phi);
    // exact ghost and exact radial Hessian for the quadratic
    CHECK_THAT(u.at(d.nr), Catch::Matchers::WithinAbs(0.5 * std::pow(1.0 + 0.5 * d.dr, 2), 1e-14));
    for (int i = 0; i < d.nr; ++i) {
        const SymMatrix2 h = radial_hessian_at(u, i);
        CHECK_THAT(h.a11, Catch::Matchers::WithinAbs(1.0, 1e-11));
        CHECK_THAT(h.a22, Catch::Matchers::WithinAbs(1.0, 1e-11));
    }
}
