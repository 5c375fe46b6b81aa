#include <catch2/catch_amalgamated.hpp>

#include "plab/grid.hpp"
#include "oracles.hpp"

using namespace plab;
using Catch::Approx;

TEST_CASE("build_domain tiles the stated polygons") {
    const auto rect = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.125));
    CHECK(rect.cell_count() == 64);
    CHECK(rect.cell_measure() == Approx(0.125 * 0.125));

    const auto ell = build_domain(DomainSpec::lshape(0, 1, 0, 1, 0.125));
    CHECK(ell.cell_count() == 48);

    const auto seg = build_domain(DomainSpec::interval(-1, 1, 0.5));
    CHECK(seg.cell_count() == 4);
    CHECK(seg.dim() == 1);
    CHECK(seg.origin()[0] == Approx(0.0));
}

TEST_CASE("build_domain rejects bad specs") {
    CHECK_THROWS_AS(build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.3)), std::invalid_argument);
    CHECK_THROWS_AS(build_domain(DomainSpec::rectangle(0, 0, 0, 1, 0.1)), std::invalid_argument);
    auto bad = DomainSpec::rectangle(0, 1, 0, 1, 0.125);
    bad.h = -0.125;
    CHECK_THROWS_AS(build_domain(bad), std::invalid_argument);
}

TEST_CASE("interior cells lie in the box and regions nest") {
    const auto dom = build_domain(DomainSpec::lshape(0, 1, 0, 1, 0.0625));
    for (int i = 0; i < dom.cell_count(); ++i) {
        const auto c = dom.center(i);
        CHECK(c[0] > dom.box_lo()[0]);
        CHECK(c[0] < dom.box_hi()[0]);
        CHECK(c[1] > dom.box_lo()[1]);
        CHECK(c[1] < dom.box_hi()[1]);
    }
    const auto small = Region::ball(dom, 0.2);
    const auto big = Region::ball(dom, 0.45);
    for (int i : small.cells)
        CHECK(std::find(big.cells.begin(), big.cells.end(), i) != big.cells.end());
}

TEST_CASE("gradient of a constant sees only the Dirichlet ghosts") {
    const auto dom = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.25));
    Field u = Field::scalar(dom).fill(3.0);
    const Field g = gradient(u, dom);
    const double h = dom.spacing();
    for (int i = 0; i < dom.cell_count(); ++i) {
        const auto c = dom.lattice_coords(dom.lattice_id(i));
        for (int a = 0; a < 2; ++a) {
            const bool interior_nb =
                dom.dense_index(c[0] + (a == 0 ? 1 : 0), c[1] + (a == 1 ? 1 : 0)) >= 0;
            const double expect = interior_nb ? 0.0 : (0.0 - 3.0) / h;
            CHECK(g.at(i, a) == Approx(expect));
        }
    }
}

TEST_CASE("gradient is exact for linear fields away from the boundary") {
    const auto dom = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.125));
    Field u = Field::scalar(dom);
    for (int i = 0; i < dom.cell_count(); ++i) u.at(i) = dom.center(i)[0];
    const Field g = gradient(u, dom);
    for (int i = 0; i < dom.cell_count(); ++i) {
        const auto c = dom.lattice_coords(dom.lattice_id(i));
        if (dom.dense_index(c[0] + 1, c[1]) >= 0) CHECK(g.at(i, 0) == Approx(1.0));
    }
}

TEST_CASE("1d two-cell stencil") {
    const auto dom = build_domain(DomainSpec::interval(0, 1, 0.5));
    const double a = 0.7, b = -1.3, h = 0.5;
    Field u = Field::scalar(dom);
    u.at(0) = a;
    u.at(1) = b;
    const Field g = gradient(u, dom);
    CHECK(g.at(0, 0) == Approx((b - a) / h));
    CHECK(g.at(1, 0) == Approx((0.0 - b) / h));
}

TEST_CASE("gradient is linear") {
    const auto dom = build_domain(DomainSpec::lshape(0, 1, 0, 1, 0.125));
    Rng rng(42);
    Field u = Field::scalar(dom), v = Field::scalar(dom);
    for (auto& x : u.data()) x = rng.symmetric(2.0);
    for (auto& x : v.data()) x = rng.symmetric(2.0);
    const double a = 1.7, b = -0.4;
    Field lin = Field::scalar(dom);
    for (std::size_t i = 0; i < lin.data().size(); ++i)
        lin.data()[i] = a * u.data()[i] + b * v.data()[i];
    const Field gu = gradient(u, dom), gv = gradient(v, dom), gl = gradient(lin, dom);
    for (std::size_t i = 0; i < gl.data().size(); ++i)
        CHECK(gl.data()[i] == Approx(a * gu.data()[i] + b * gv.data()[i]).margin(1e-13));
}

TEST_CASE("weighted norm on constants") {
    const auto dom = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.125));
    const Region whole = Region::whole(dom);
    Field v = Field::scalar(dom).fill(2.0);
    CHECK(weighted_norm(v, nullptr, 2.0, whole) == Approx(2.0));

    Field w = Field::box_scalar(dom).fill(3.0);
    Field ones = Field::scalar(dom).fill(1.0);
    const double p = 2.5;
    CHECK(weighted_norm(ones, &w, p, whole) == Approx(std::pow(3.0, 1.0 / p)));

    CHECK_THROWS_AS(weighted_norm(v, nullptr, 0.5, whole), std::invalid_argument);
}

TEST_CASE("weighted norm matches the naive summation oracle") {
    const auto dom = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.5)); // 4 cells
    Rng rng(7);
    Field v = Field::scalar(dom);
    Field w = Field::box_scalar(dom);
    for (auto& x : v.data()) x = rng.symmetric(3.0);
    for (auto& x : w.data()) x = rng.uniform(0.1, 2.0);
    const double t = 2.7;
    double naive = 0.0;
    for (int i = 0; i < dom.cell_count(); ++i)
        naive += std::pow(std::abs(v.at(i)), t) * w.at(dom.lattice_id(i)) * dom.cell_measure();
    naive = std::pow(naive, 1.0 / t);
    const double got = weighted_norm(v, &w, t, Region::whole(dom));
    CHECK(got == Approx(naive).epsilon(1e-14));
}

TEST_CASE("norm monotonicity and scaling") {
    const auto dom = build_domain(DomainSpec::rectangle(-1, 1, -1, 1, 0.125));
    Rng rng(11);
    Field v = Field::scalar(dom);
    for (auto& x : v.data()) x = rng.symmetric(1.0);
    const auto r1 = Region::ball(dom, 0.4), r2 = Region::ball(dom, 0.9);
    CHECK(weighted_norm(v, nullptr, 2.0, r1) <= weighted_norm(v, nullptr, 2.0, r2));

    Field cv = v;
    const double c = -2.5;
    for (auto& x : cv.data()) x *= c;
    const double lhs = weighted_norm(cv, nullptr, 1.5, r2);
    const double rhs = std::abs(c) * weighted_norm(v, nullptr, 1.5, r2);
    CHECK(lhs == Approx(rhs).epsilon(1e-13));
}

TEST_CASE("cutoff ramp hits its plateau values and slope bound") {
    const auto dom = build_domain(DomainSpec::rectangle(-1, 1, -1, 1, 1.0 / 32.0));
    const double R = 0.4, Rp = 0.8;
    REQUIRE(dom.spacing() <= (Rp - R) / 8.0);
    const Field rho = cutoff_field(R, Rp, dom);

    const int nx = dom.box_n(0), ny = dom.box_n(1);
    double grad_max = 0.0;
    for (int iy = 0; iy < ny; ++iy)
        for (int ix = 0; ix < nx; ++ix) {
            const int lid = iy * nx + ix;
            const auto c = dom.center_of_lattice(lid);
            const double r = std::hypot(c[0], c[1]);
            const double val = rho.at(lid);
            CHECK(val >= 0.0);
            CHECK(val <= 1.0);
            if (r <= R) CHECK(val == 1.0);
            if (r >= Rp) CHECK(val == 0.0);
            double g2 = 0.0;
            if (ix + 1 < nx) {
                const double d = (rho.at(iy * nx + ix + 1) - val) / dom.spacing();
                g2 += d * d;
            }
            if (iy + 1 < ny) {
                const double d = (rho.at((iy + 1) * nx + ix) - val) / dom.spacing();
                g2 += d * d;
            }
            grad_max = std::max(grad_max, std::sqrt(g2));
        }
    CHECK(grad_max <= cutoff_slope_constant / (Rp - R));
    CHECK_THROWS_AS(cutoff_field(0.8, 0.4, dom), std::invalid_argument);
}
