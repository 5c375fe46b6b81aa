#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "plab/common.hpp"

namespace plab {

// Exponent family p < r with the derived pair q = p - eps, s = (p - eps) r / p.
// Satisfies q in (p-1, p), s in (r-1, r) and q/(p-q) = s/(r-s) exactly.
struct ExponentSet {
    double p = 2.0;
    double r = 3.0;
    double eps = 0.25;
    double q = 1.75;
    double s = 2.625;
    double p_conj = 2.0; // p' = p/(p-1)
    double r_conj = 1.5; // r' = r/(r-1)
};

inline ExponentSet derive_exponents(double p, double r, double eps) {
    require(p > 1.0 && r > p, "derive_exponents: need 1 < p < r");
    const double cap = std::min(1.0, p / r);
    require(eps > 0.0, "derive_exponents: eps must be positive");
    require(eps < cap, "derive_exponents: eps must be below min(1, p/r) = " + std::to_string(cap));
    ExponentSet e;
    e.p = p;
    e.r = r;
    e.eps = eps;
    e.q = p - eps;
    e.s = (p - eps) * r / p;
    e.p_conj = p / (p - 1.0);
    e.r_conj = r / (r - 1.0);
    // derived-range sanity, should hold by construction
    require(e.q > p - 1.0 && e.q < p, "derive_exponents: q out of (p-1, p)");
    require(e.s > r - 1.0 && e.s < r, "derive_exponents: s out of (r-1, r)");
    const double lhs = e.q / (p - e.q);
    const double rhs = e.s / (r - e.s);
    require(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(lhs)),
            "derive_exponents: q/(p-q) != s/(r-s)");
    return e;
}

} // namespace plab
