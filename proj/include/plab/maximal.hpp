#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "plab/common.hpp"
#include "plab/exponents.hpp"
#include "plab/grid.hpp"

namespace plab {

// Subset of bounding-box lattice cells (level sets, Whitney open sets).
struct CellMask {
    const DiscreteDomain* dom = nullptr;
    std::vector<uint8_t> member; // per lattice cell

    static CellMask empty(const DiscreteDomain& dom) {
        CellMask m;
        m.dom = &dom;
        m.member.assign(std::size_t(dom.box_cell_count()), 0);
        return m;
    }
    bool contains(int lattice) const { return member[std::size_t(lattice)] != 0; }
    int count() const {
        int c = 0;
        for (uint8_t v : member) c += v;
        return c;
    }
};

// Discrete Hardy-Littlewood maximal function over the bounding box.
// Radii run through every multiple of h up to the box diameter; the j = 0
// ball is the cell itself, so MF >= F pointwise. Balls collect lattice cells
// by center distance; the input is implicitly zero outside its support.
inline Field maximal_function(const Field& F) {
    const DiscreteDomain& dom = F.domain();
    require(F.carrier() == Carrier::Box && F.comps() == 1,
            "maximal_function: expects a one-component field on the bounding box");
    for (double v : F.data())
        require(v >= 0.0, "maximal_function: input must be nonnegative");

    const int nx = dom.box_n(0);
    const int ny = dom.dim() == 2 ? dom.box_n(1) : 1;
    const int jmax = int(std::ceil(dom.box_diameter() / dom.spacing())) + 1;

    // radius bin of a lattice offset: smallest j with |offset| <= j
    std::vector<int> bin(std::size_t(nx) * ny);
    for (int dy = 0; dy < ny; ++dy)
        for (int dx = 0; dx < nx; ++dx) {
            const double dist = std::sqrt(double(dx) * dx + double(dy) * dy);
            bin[std::size_t(dy) * nx + dx] = int(std::ceil(dist - 1e-9));
        }

    // ball denominators over the full lattice, so the zero extension beyond
    // the box dilutes averages exactly as it would on R^d
    std::vector<long> ideal(std::size_t(jmax) + 1, 0);
    if (dom.dim() == 1) {
        for (int j = 0; j <= jmax; ++j) ideal[std::size_t(j)] = (j == 0) ? 1 : 2;
    } else {
        for (int dy = -jmax; dy <= jmax; ++dy)
            for (int dx = -jmax; dx <= jmax; ++dx) {
                const double dist = std::sqrt(double(dx) * dx + double(dy) * dy);
                const int j = int(std::ceil(dist - 1e-9));
                if (j <= jmax) ideal[std::size_t(j)] += 1;
            }
    }
    for (int j = 1; j <= jmax; ++j) ideal[std::size_t(j)] += ideal[std::size_t(j) - 1];

    Field out = Field::box_scalar(dom);
    std::vector<double> sum(std::size_t(jmax) + 1);
    for (int cy = 0; cy < ny; ++cy) {
        for (int cx = 0; cx < nx; ++cx) {
            std::fill(sum.begin(), sum.end(), 0.0);
            for (int y = 0; y < ny; ++y) {
                const int ady = std::abs(y - cy);
                for (int x = 0; x < nx; ++x) {
                    const int j = bin[std::size_t(ady) * nx + std::abs(x - cx)];
                    sum[std::size_t(j)] += F.at(y * nx + x);
                }
            }
            double best = 0.0, acc = 0.0;
            for (int j = 0; j <= jmax; ++j) {
                acc += sum[std::size_t(j)];
                best = std::max(best, acc / double(ideal[std::size_t(j)]));
            }
            out.at(cy * nx + cx) = best;
        }
    }
    out.check_finite("maximal_function");
    return out;
}

// The localized maximal weight omega = (M[(|f| + |g|^{s/q}) chi_{Omega_2R}] + delta)^{-eps},
// built on the bounding box with zero extension outside Omega_2R.
struct Weight {
    Field field; // box carrier, one component
    double eps = 0.0;
    double delta = 1.0;
    double R = 0.0;
    std::string provenance;

    double value_on_lattice(int lattice) const { return field.at(lattice); }
};

inline Weight build_weight(const Field& f, const Field& g, const ExponentSet& exps, double delta,
                           double R, const DiscreteDomain& dom) {
    require(delta > 0.0 && delta <= 1.0, "build_weight: delta must lie in (0, 1]");
    require(R > 0.0, "build_weight: R must be positive");
    require(&f.domain() == &dom && &g.domain() == &dom, "build_weight: field/domain mismatch");

    Field hfield = Field::box_scalar(dom);
    const double exponent = exps.s / exps.q;
    for (int i = 0; i < dom.cell_count(); ++i) {
        if (dom.dist_to_origin(i) < 2.0 * R) {
            const double val = f.norm_at(i) + std::pow(g.norm_at(i), exponent);
            hfield.at(dom.lattice_id(i)) = val;
        }
    }
    const Field m = maximal_function(hfield);

    Weight w;
    w.field = Field::box_scalar(dom);
    for (int lid = 0; lid < dom.box_cell_count(); ++lid)
        w.field.at(lid) = std::pow(m.at(lid) + delta, -exps.eps);
    w.eps = exps.eps;
    w.delta = delta;
    w.R = R;
    w.provenance = "(M[(|f|+|g|^{s/q}) chi_{Omega_2R}] + delta)^{-eps}";

    const double cap = std::pow(delta, -exps.eps);
    for (double v : w.field.data())
        require(v > 0.0 && v <= cap * (1.0 + 1e-12), "build_weight: weight bound violated");
    return w;
}

// Empirical Muckenhoupt constant. For p > 1 the A_p product is maximised
// over seeded random balls (centers in the box, radii in [h, diameter]);
// for p = 1 it is the pointwise supremum of M(omega)/omega.
inline double ap_constant(const Weight& w, double p, int ball_samples, std::uint64_t rng_seed) {
    require(p >= 1.0, "ap_constant: p must be >= 1");
    require(ball_samples >= 1, "ap_constant: ball_samples must be >= 1");
    const DiscreteDomain& dom = w.field.domain();

    if (p == 1.0) {
        const Field m = maximal_function(w.field);
        double best = 0.0;
        for (int lid = 0; lid < dom.box_cell_count(); ++lid)
            best = std::max(best, m.at(lid) / w.field.at(lid));
        return best;
    }

    const double pc = p / (p - 1.0);
    const double dual = pc - 1.0; // p' - 1
    const int nx = dom.box_n(0);
    const int ny = dom.dim() == 2 ? dom.box_n(1) : 1;
    Rng rng(rng_seed);
    double best = 0.0;
    for (int s = 0; s < ball_samples; ++s) {
        const double cx = rng.uniform(dom.box_lo()[0], dom.box_hi()[0]);
        const double cy = rng.uniform(dom.box_lo()[1], dom.box_hi()[1]);
        const double radius = rng.uniform(dom.spacing(), dom.box_diameter());
        double s1 = 0.0, s2 = 0.0;
        long n = 0;
        for (int iy = 0; iy < ny; ++iy) {
            for (int ix = 0; ix < nx; ++ix) {
                const int lid = iy * nx + ix;
                const auto c = dom.center_of_lattice(lid);
                const double dx = c[0] - cx;
                const double dy = dom.dim() == 2 ? c[1] - cy : 0.0;
                if (dx * dx + dy * dy <= radius * radius) {
                    const double v = w.field.at(lid);
                    s1 += v;
                    s2 += std::pow(v, -dual);
                    ++n;
                }
            }
        }
        if (n == 0) continue;
        const double prod = (s1 / double(n)) * std::pow(s2 / double(n), 1.0 / dual);
        best = std::max(best, prod);
    }
    return best;
}

// Superlevel set [field > lambda] as a box cell mask.
inline CellMask level_set(const Field& field, double lambda) {
    const DiscreteDomain& dom = field.domain();
    require(field.carrier() == Carrier::Box && field.comps() == 1,
            "level_set: expects a one-component box field");
    CellMask mask = CellMask::empty(dom);
    for (int lid = 0; lid < dom.box_cell_count(); ++lid)
        if (field.at(lid) > lambda) mask.member[std::size_t(lid)] = 1;
    return mask;
}

} // namespace plab
