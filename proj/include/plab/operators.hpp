#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "plab/common.hpp"
#include "plab/grid.hpp"

namespace plab {

// Flux values are d x N matrices stored axis-major, same layout as
// gradient-rank fields. Small fixed-capacity buffer so specs stay copyable.
using FluxValue = std::array<double, 4>;

inline double flux_norm(const FluxValue& z, int m) {
    double s = 0;
    for (int i = 0; i < m; ++i) s += z[i] * z[i];
    return std::sqrt(s);
}

// |z|^{p-2} z with the continuous extension 0 at z = 0 (needed for p < 2).
inline FluxValue p_laplace_flux(const FluxValue& z, double p, int m) {
    require(p > 1.0, "p_laplace_flux: p must exceed 1");
    FluxValue out{0, 0, 0, 0};
    const double mag = flux_norm(z, m);
    if (mag == 0.0) return out;
    const double scale = std::pow(mag, p - 2.0);
    for (int i = 0; i < m; ++i) out[i] = scale * z[i];
    return out;
}

// Caratheodory operator with claimed structural constants. beta1/beta2 are
// sampled per cell (empty vector means identically zero).
struct OperatorSpec {
    std::string name = "p-laplace";
    // (cell center, z, m=d*N) -> flux
    std::function<FluxValue(const std::array<double, 2>&, const FluxValue&, int)> flux;
    double C1 = 1.0;
    double C2 = 1.0;
    std::vector<double> beta1; // per dense cell, L^1-type
    std::vector<double> beta2; // per dense cell, L^{p'}-type
    bool canonical = true;     // exactly the p-Laplace flux

    double beta1_at(int cell) const { return beta1.empty() ? 0.0 : beta1[std::size_t(cell)]; }
    double beta2_at(int cell) const { return beta2.empty() ? 0.0 : beta2[std::size_t(cell)]; }
};

inline OperatorSpec canonical_p_laplace(double p) {
    OperatorSpec op;
    op.name = "p-laplace";
    op.flux = [p](const std::array<double, 2>&, const FluxValue& z, int m) {
        return p_laplace_flux(z, p, m);
    };
    op.C1 = 1.0;
    op.C2 = 1.0;
    op.canonical = true;
    return op;
}

// Canonical flux plus a bounded z-independent offset b(x) E_1. Monotonicity is
// untouched; growth holds with beta2 = |b| and coercivity with C1 = 1/2 and
// beta1 = |b|^{p'} / (p' (p/2)^{p'/p}) via Young's inequality.
inline OperatorSpec perturbed_p_laplace(double p, const DiscreteDomain& dom, double amplitude) {
    OperatorSpec op;
    op.name = "perturbed-p-laplace";
    const auto o = dom.origin();
    const double width = 0.25 * dom.box_diameter();
    auto bump = [o, width, amplitude](const std::array<double, 2>& x) {
        const double dx = x[0] - o[0];
        const double dy = x[1] - o[1];
        return amplitude * std::exp(-(dx * dx + dy * dy) / (width * width));
    };
    op.flux = [p, bump](const std::array<double, 2>& x, const FluxValue& z, int m) {
        FluxValue out = p_laplace_flux(z, p, m);
        out[0] += bump(x);
        return out;
    };
    const double pc = p / (p - 1.0);
    op.C1 = 0.5;
    op.C2 = 1.0;
    op.beta1.resize(std::size_t(dom.cell_count()));
    op.beta2.resize(std::size_t(dom.cell_count()));
    const double young = 1.0 / (pc * std::pow(p / 2.0, pc / p));
    for (int i = 0; i < dom.cell_count(); ++i) {
        const double b = bump(dom.center(i));
        op.beta2[std::size_t(i)] = b;
        op.beta1[std::size_t(i)] = young * std::pow(b, pc);
    }
    op.canonical = false;
    return op;
}

struct StructureReport {
    double coercivity_margin = 0.0;   // min of A:z - (C1 |z|^p - beta1)
    double growth_margin = 0.0;       // min of (C2 |z|^{p-1} + beta2) - |A|
    double monotonicity_margin = 0.0; // min of (A(z1)-A(z2)):(z1-z2)
    int samples = 0;
    bool pass = false;
};

// Randomized check of the three structural inequalities; margins are worst
// cases over the sample, pass iff all stay above -1e-10.
inline StructureReport check_structure(const OperatorSpec& op, double p, const DiscreteDomain& dom,
                                       int sample_count, std::uint64_t rng_seed,
                                       double magnitude = 4.0) {
    require(sample_count >= 1, "check_structure: sample_count must be >= 1");
    const int m = dom.dim() * dom.codim();
    Rng rng(rng_seed);
    StructureReport rep;
    rep.samples = sample_count;
    double cmin = std::numeric_limits<double>::infinity();
    double gmin = cmin, mmin = cmin;
    for (int k = 0; k < sample_count; ++k) {
        const int cell = int(rng.index(std::size_t(dom.cell_count())));
        const auto x = dom.center(cell);
        FluxValue z{}, z1{}, z2{};
        for (int i = 0; i < m; ++i) {
            z[i] = rng.symmetric(magnitude);
            z1[i] = rng.symmetric(magnitude);
            z2[i] = rng.symmetric(magnitude);
        }
        const FluxValue a = op.flux(x, z, m);
        const FluxValue a1 = op.flux(x, z1, m);
        const FluxValue a2 = op.flux(x, z2, m);
        double az = 0, mono = 0;
        for (int i = 0; i < m; ++i) {
            az += a[i] * z[i];
            mono += (a1[i] - a2[i]) * (z1[i] - z2[i]);
        }
        const double zn = flux_norm(z, m);
        cmin = std::min(cmin, az - (op.C1 * std::pow(zn, p) - op.beta1_at(cell)));
        gmin = std::min(gmin, op.C2 * std::pow(zn, p - 1.0) + op.beta2_at(cell) - flux_norm(a, m));
        mmin = std::min(mmin, mono);
    }
    rep.coercivity_margin = cmin;
    rep.growth_margin = gmin;
    rep.monotonicity_margin = mmin;
    rep.pass = cmin >= -1e-10 && gmin >= -1e-10 && mmin >= -1e-10;
    return rep;
}

} // namespace plab
