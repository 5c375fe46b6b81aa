#include <catch2/catch_amalgamated.hpp>

#include "plab/exponents.hpp"
#include "plab/operators.hpp"

using namespace plab;
using Catch::Approx;

TEST_CASE("p-Laplace flux basics") {
    FluxValue zero{0, 0, 0, 0};
    CHECK(p_laplace_flux(zero, 1.5, 2) == zero);
    CHECK(p_laplace_flux(zero, 3.0, 2) == zero);

    FluxValue z{0.3, -1.2, 0, 0};
    const auto id = p_laplace_flux(z, 2.0, 2);
    CHECK(id[0] == Approx(z[0]));
    CHECK(id[1] == Approx(z[1]));

    FluxValue e{2.0, 0.0, 0, 0};
    const auto cubed = p_laplace_flux(e, 3.0, 2);
    CHECK(cubed[0] == Approx(4.0));
    CHECK(cubed[1] == Approx(0.0));
}

TEST_CASE("p-Laplace flux homogeneity of degree p-1") {
    Rng rng(3);
    for (double p : {1.5, 2.0, 2.7, 4.0}) {
        for (int k = 0; k < 50; ++k) {
            FluxValue z{rng.symmetric(3.0), rng.symmetric(3.0), rng.symmetric(3.0),
                        rng.symmetric(3.0)};
            const double lam = rng.uniform(0.1, 5.0);
            FluxValue lz = z;
            for (auto& v : lz) v *= lam;
            const auto a = p_laplace_flux(lz, p, 4);
            const auto b = p_laplace_flux(z, p, 4);
            const double scale = std::pow(lam, p - 1.0);
            for (int i = 0; i < 4; ++i)
                CHECK(a[i] == Approx(scale * b[i]).margin(1e-12 * (1.0 + std::abs(a[i]))));
        }
    }
}

TEST_CASE("derive_exponents reproduces the stated families") {
    const auto e = derive_exponents(2.0, 3.0, 0.5);
    CHECK(e.q == Approx(1.5));
    CHECK(e.s == Approx(2.25));
    CHECK(e.p_conj == Approx(2.0));
    CHECK(e.r_conj == Approx(1.5));

    const auto e2 = derive_exponents(1.5, 2.0, 0.4);
    CHECK(e2.q == Approx(1.1));
    CHECK(e2.s == Approx(1.1 * 2.0 / 1.5));
    CHECK(e2.s > e2.r - 1.0);
    CHECK(e2.q / (e2.p - e2.q) == Approx(2.75));
    CHECK(e2.s / (e2.r - e2.s) == Approx(2.75));

    // eps -> 0+ limit: q -> p, s -> r
    const auto e3 = derive_exponents(2.0, 3.0, 1e-9);
    CHECK(e3.q == Approx(2.0).margin(1e-8));
    CHECK(e3.s == Approx(3.0).margin(1e-8));
}

TEST_CASE("derive_exponents rejects out-of-range eps naming the bound") {
    CHECK_THROWS_WITH(derive_exponents(2.0, 3.0, 0.7),
                      Catch::Matchers::ContainsSubstring("min(1, p/r)"));
    CHECK_THROWS_AS(derive_exponents(2.0, 3.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(derive_exponents(2.0, 3.0, -0.1), std::invalid_argument);
    CHECK_THROWS_AS(derive_exponents(3.0, 2.0, 0.1), std::invalid_argument);
}

TEST_CASE("derive_exponents is monotone in eps") {
    double prev_q = 10, prev_s = 10;
    for (double eps : {0.1, 0.2, 0.3, 0.4, 0.5}) {
        const auto e = derive_exponents(2.0, 3.0, eps);
        CHECK(e.q < prev_q);
        CHECK(e.s < prev_s);
        prev_q = e.q;
        prev_s = e.s;
    }
}

TEST_CASE("structure check passes the canonical operator with sharp constants") {
    const auto dom = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.25, 2));
    for (double p : {1.5, 2.0, 3.0}) {
        const auto op = canonical_p_laplace(p);
        const auto rep = check_structure(op, p, dom, 2000, 99);
        CHECK(rep.pass);
        CHECK(rep.coercivity_margin >= -1e-10);
        CHECK(rep.growth_margin >= -1e-10);
        CHECK(rep.monotonicity_margin >= -1e-10);
    }
}

TEST_CASE("structure check flags broken operators") {
    const auto dom = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.25));

    OperatorSpec anti; // A(z) = -z is anti-monotone
    anti.flux = [](const std::array<double, 2>&, const FluxValue& z, int m) {
        FluxValue o{};
        for (int i = 0; i < m; ++i) o[i] = -z[i];
        return o;
    };
    anti.C1 = 1.0;
    anti.C2 = 1.0;
    const auto rep1 = check_structure(anti, 2.0, dom, 500, 5);
    CHECK_FALSE(rep1.pass);
    CHECK(rep1.monotonicity_margin < 0);

    OperatorSpec doubled; // A(z) = 2z with claimed C2 = 1 violates growth
    doubled.flux = [](const std::array<double, 2>&, const FluxValue& z, int m) {
        FluxValue o{};
        for (int i = 0; i < m; ++i) o[i] = 2.0 * z[i];
        return o;
    };
    doubled.C1 = 1.0;
    doubled.C2 = 1.0;
    const auto rep2 = check_structure(doubled, 2.0, dom, 500, 5);
    CHECK_FALSE(rep2.pass);
    CHECK(rep2.growth_margin < 0);
}

TEST_CASE("perturbed operator validates with its claimed constants") {
    const auto dom = build_domain(DomainSpec::rectangle(0, 1, 0, 1, 0.125));
    for (double p : {1.5, 2.0, 3.0}) {
        const auto op = perturbed_p_laplace(p, dom, 0.5);
        const auto rep = check_structure(op, p, dom, 2000, 17);
        CHECK(rep.pass);
    }
}
