#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "plab/common.hpp"
#include "plab/grid.hpp"
#include "plab/maximal.hpp"

namespace plab {

// Closed dyadic cube on the root lattice. Coordinates are lattice cells of
// the bounding box (the root square may pad past the box); geometry is
// [lo*h, (lo+side)*h] per axis relative to the box corner. dist2 is the
// exact squared distance to the complement in units of h^2, computed from
// integer cell gaps, so the Whitney inequalities are integer comparisons.
struct DyadicCube {
    int level = 0;
    std::array<int, 2> lo{0, 0};
    int side = 1; // cells
    bool floor_clipped = false;
    std::int64_t dist2 = 0;
};

struct PartitionEntry {
    int lattice = 0; // box lattice cell
    double value = 0.0;
};

struct WhitneyDecomposition {
    const DiscreteDomain* dom = nullptr;
    CellMask open_set;
    int root_side = 0; // cells, power of two
    int resolution_floor = 1;
    std::vector<DyadicCube> cubes;
    std::vector<std::vector<int>> neighbors; // A_i, sorted, contains i
    bool has_partition = false;
    std::vector<std::vector<PartitionEntry>> psi; // sparse, on open-set cells
};

namespace detail {

inline constexpr std::int64_t edt_inf = std::int64_t(1) << 60;

// 1d squared-distance transform (Felzenszwalb-Huttenlocher lower envelope);
// inputs and outputs are exact integers, intersections are rationals small
// enough to stay exact in doubles
inline void edt_1d(const std::vector<std::int64_t>& f, std::vector<std::int64_t>& out,
                   std::vector<int>& v, std::vector<double>& z) {
    const int n = int(f.size());
    v.assign(std::size_t(n), 0);
    z.assign(std::size_t(n) + 1, 0.0);
    int k = 0;
    z[0] = -1e300;
    z[1] = 1e300;
    for (int q = 1; q < n; ++q) {
        if (f[std::size_t(q)] >= edt_inf) continue;
        if (f[std::size_t(v[std::size_t(k)])] >= edt_inf) {
            v[std::size_t(k)] = q;
            continue;
        }
        double s;
        while (true) {
            const int p = v[std::size_t(k)];
            s = (double(f[std::size_t(q)] - f[std::size_t(p)]) + double(q) * q -
                 double(p) * p) /
                (2.0 * (q - p));
            if (s <= z[std::size_t(k)] && k > 0)
                --k;
            else
                break;
        }
        ++k;
        v[std::size_t(k)] = q;
        z[std::size_t(k)] = s;
        z[std::size_t(k) + 1] = 1e300;
    }
    out.resize(std::size_t(n));
    int j = 0;
    for (int q = 0; q < n; ++q) {
        if (f[std::size_t(v[0])] >= edt_inf) {
            out[std::size_t(q)] = edt_inf;
            continue;
        }
        while (z[std::size_t(j) + 1] < double(q)) ++j;
        const int p = v[std::size_t(j)];
        out[std::size_t(q)] = f[std::size_t(p)] + std::int64_t(q - p) * (q - p);
    }
}

struct WhitneyScratch {
    int root_side = 0;
    int dim = 1;
    bool complement_empty = true;
    std::vector<std::int64_t> corner_d2; // squared distance to complement corners
    std::vector<std::int64_t> prefix;    // O-membership prefix sums over root lattice

    // Exact distance from a cube to the complement cell union: the nearest
    // point of a union of closed lattice cells to a lattice corner is itself
    // a lattice point, so a corner-lattice EDT seeded with the complement
    // cells' corners carries the exact geometry; the cube distance is the
    // minimum over its corners (the facing-gap minimizer always includes
    // one).
    void build_edt(const std::vector<uint8_t>& complement_cells) {
        const int S = root_side;
        const int C = S + 1;
        std::vector<std::int64_t> seed(std::size_t(C) * (dim == 2 ? C : 1), edt_inf);
        for (int cy = 0; cy < (dim == 2 ? S : 1); ++cy)
            for (int cx = 0; cx < S; ++cx) {
                if (!complement_cells[std::size_t(cy) * S + cx]) continue;
                complement_empty = false;
                if (dim == 1) {
                    seed[std::size_t(cx)] = 0;
                    seed[std::size_t(cx) + 1] = 0;
                } else {
                    for (int oy = 0; oy <= 1; ++oy)
                        for (int ox = 0; ox <= 1; ++ox)
                            seed[std::size_t(cy + oy) * C + (cx + ox)] = 0;
                }
            }
        if (dim == 1) {
            corner_d2.assign(std::size_t(C), edt_inf);
            std::vector<int> v;
            std::vector<double> z;
            edt_1d(seed, corner_d2, v, z);
            return;
        }
        // rows then columns
        std::vector<std::int64_t> rowpass(std::size_t(C) * C, edt_inf);
        std::vector<std::int64_t> line(std::size_t(C), 0);
        std::vector<std::int64_t> out(std::size_t(C), 0);
        std::vector<int> v;
        std::vector<double> z;
        for (int y = 0; y < C; ++y) {
            for (int x = 0; x < C; ++x) line[std::size_t(x)] = seed[std::size_t(y) * C + x];
            edt_1d(line, out, v, z);
            for (int x = 0; x < C; ++x) rowpass[std::size_t(y) * C + x] = out[std::size_t(x)];
        }
        corner_d2.assign(std::size_t(C) * C, edt_inf);
        for (int x = 0; x < C; ++x) {
            for (int y = 0; y < C; ++y) line[std::size_t(y)] = rowpass[std::size_t(y) * C + x];
            edt_1d(line, out, v, z);
            for (int y = 0; y < C; ++y) corner_d2[std::size_t(y) * C + x] = out[std::size_t(y)];
        }
    }

    std::int64_t corner(int x, int y) const {
        const int C = root_side + 1;
        return dim == 2 ? corner_d2[std::size_t(y) * C + x] : corner_d2[std::size_t(x)];
    }

    std::int64_t mask_count(const std::array<int, 2>& lo, int side) const {
        const int S = root_side;
        auto P = [&](int x, int y) -> std::int64_t {
            if (x <= 0 || y <= 0) return 0;
            x = std::min(x, S);
            y = std::min(y, S);
            return prefix[std::size_t(y) * (S + 1) + x];
        };
        const int x0 = lo[0], y0 = dim == 2 ? lo[1] : 0;
        const int x1 = lo[0] + side, y1 = dim == 2 ? lo[1] + side : 1;
        return P(x1, y1) - P(x0, y1) - P(x1, y0) + P(x0, y0);
    }

    std::int64_t dist2(const std::array<int, 2>& lo, int side) const {
        // a complement cell overlapping the cube means distance zero
        const std::int64_t full = dim == 2 ? std::int64_t(side) * side : side;
        if (mask_count(lo, side) < full) return 0;
        // exterior of the open root square
        std::int64_t g = std::min(std::int64_t(lo[0]), std::int64_t(root_side - lo[0] - side));
        if (dim == 2)
            g = std::min({g, std::int64_t(lo[1]), std::int64_t(root_side - lo[1] - side)});
        std::int64_t best = g * g;
        if (!complement_empty) {
            // complement lies outside the cube: the nearest pair realizes at
            // a lattice corner on the cube boundary
            const int x0 = lo[0], x1 = lo[0] + side;
            if (dim == 1) {
                best = std::min({best, corner(x0, 0), corner(x1, 0)});
            } else {
                const int y0 = lo[1], y1 = lo[1] + side;
                for (int x = x0; x <= x1; ++x)
                    best = std::min({best, corner(x, y0), corner(x, y1)});
                for (int y = y0; y <= y1; ++y)
                    best = std::min({best, corner(x0, y), corner(x1, y)});
            }
        }
        return best;
    }
};

inline void whitney_recurse(const WhitneyScratch& sc, std::array<int, 2> lo, int side, int level,
                            int floor_cells, std::vector<DyadicCube>& out) {
    if (sc.mask_count(lo, side) == 0) return;
    const std::int64_t d2 = sc.dist2(lo, side);
    const std::int64_t diam2 = std::int64_t(side) * side * sc.dim;
    if (d2 > diam2) {
        out.push_back({level, lo, side, false, d2});
        return;
    }
    if (side <= floor_cells) {
        out.push_back({level, lo, side, true, d2});
        return;
    }
    const int half = side / 2;
    whitney_recurse(sc, {lo[0], lo[1]}, half, level + 1, floor_cells, out);
    whitney_recurse(sc, {lo[0] + half, lo[1]}, half, level + 1, floor_cells, out);
    if (sc.dim == 2) {
        whitney_recurse(sc, {lo[0], lo[1] + half}, half, level + 1, floor_cells, out);
        whitney_recurse(sc, {lo[0] + half, lo[1] + half}, half, level + 1, floor_cells, out);
    }
}

inline bool cubes_touch(const DyadicCube& a, const DyadicCube& b, int dim) {
    for (int ax = 0; ax < dim; ++ax) {
        if (a.lo[ax] + a.side < b.lo[ax] || b.lo[ax] + b.side < a.lo[ax]) return false;
    }
    return true;
}

// piecewise-linear bump profile in h/16 units: 1 on [lo16, hi16], 0 beyond
// the margin of width `side` (= side*h/16 geometrically) on either end
inline double bump_profile(std::int64_t t, std::int64_t lo16, std::int64_t hi16,
                           std::int64_t side) {
    if (t <= lo16 - side || t >= hi16 + side) return 0.0;
    if (t >= lo16 && t <= hi16) return 1.0;
    if (t < lo16) return double(t - (lo16 - side)) / double(side);
    return double((hi16 + side) - t) / double(side);
}

} // namespace detail

// Whitney decomposition of the open set realized by a cell mask: top-down
// dyadic refinement accepting Q as soon as dist(Q, O^c) > diam(Q). The
// parent of an accepted cube failed that test, which yields the strict form
// diam(Q) < dist(Q, O^c) <= 4 diam(Q). Cells where refinement would pass the
// resolution floor are emitted flagged floor-clipped.
inline WhitneyDecomposition whitney_decompose(const CellMask& open_set, int resolution_floor = 1) {
    const DiscreteDomain& dom = *open_set.dom;
    require(open_set.count() > 0, "whitney_decompose: open set is empty");
    require(resolution_floor >= 1, "whitney_decompose: resolution floor must be >= 1");

    const int dim = dom.dim();
    const int nx = dom.box_n(0);
    const int ny = dim == 2 ? dom.box_n(1) : 1;
    int S = 1;
    while (S < std::max(nx, ny)) S *= 2;

    detail::WhitneyScratch sc;
    sc.root_side = S;
    sc.dim = dim;
    sc.prefix.assign(std::size_t(S + 1) * (S + 1), 0);
    std::vector<uint8_t> complement_cells(std::size_t(S) * (dim == 2 ? S : 1), 0);
    for (int y = 0; y < (dim == 2 ? S : 1); ++y) {
        for (int x = 0; x < S; ++x) {
            const bool in_box = x < nx && y < ny;
            const bool member = in_box && open_set.contains(y * nx + x);
            if (!member) complement_cells[std::size_t(y) * S + x] = 1;
            sc.prefix[std::size_t(y + 1) * (S + 1) + (x + 1)] = member ? 1 : 0;
        }
    }
    // The complement within the padded lattice always contains the exterior
    // of the root square, so it is nonempty for any cell mask; the open set
    // is a proper subset of R^d by construction.
    sc.build_edt(complement_cells);
    for (int y = 1; y <= S; ++y)
        for (int x = 1; x <= S; ++x)
            sc.prefix[std::size_t(y) * (S + 1) + x] +=
                sc.prefix[std::size_t(y) * (S + 1) + (x - 1)] +
                sc.prefix[std::size_t(y - 1) * (S + 1) + x] -
                sc.prefix[std::size_t(y - 1) * (S + 1) + (x - 1)];

    WhitneyDecomposition w;
    w.dom = &dom;
    w.open_set = open_set;
    w.root_side = S;
    w.resolution_floor = resolution_floor;
    detail::whitney_recurse(sc, {0, 0}, S, 0, resolution_floor, w.cubes);

    w.neighbors.resize(w.cubes.size());
    for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        w.neighbors[i].push_back(int(i));
        for (std::size_t j = i + 1; j < w.cubes.size(); ++j) {
            if (detail::cubes_touch(w.cubes[i], w.cubes[j], dim)) {
                w.neighbors[i].push_back(int(j));
                w.neighbors[j].push_back(int(i));
            }
        }
    }
    for (auto& a : w.neighbors) std::sort(a.begin(), a.end());
    return w;
}

// Lipschitz partition of unity psi_i = phi_i / sum_j phi_j where phi_i is a
// tensor-product piecewise-linear bump equal to 1 on (1/2) Q_i and 0 outside
// (9/8) Q_i, sampled at cell centers of the open set. The ramp spans the
// whole band between the half cube and the inflated cube, so its slope stays
// grid-resolved for every cube size (a ramp confined to the s/16 margin
// aliases to one-cell jumps once h > s/16 and the sampled gradients blow up
// under refinement).
inline void partition_of_unity(WhitneyDecomposition& w) {
    require(!w.cubes.empty(), "partition_of_unity: no cubes present");
    const DiscreteDomain& dom = *w.dom;
    const int dim = dom.dim();
    const int nx = dom.box_n(0);
    const int ny = dim == 2 ? dom.box_n(1) : 1;

    auto phi_at = [&](const DyadicCube& q, int ix, int iy) {
        // coordinates in h/16 units; cell centers sit at 16*j + 8; the
        // plateau is (1/2) Q_i = [16a + 4s, 16a + 12s], the ramp width 5s
        const std::int64_t s5 = 5LL * q.side;
        double phi = detail::bump_profile(16LL * ix + 8, 16LL * q.lo[0] + 4LL * q.side,
                                          16LL * q.lo[0] + 12LL * q.side, s5);
        if (dim == 2)
            phi *= detail::bump_profile(16LL * iy + 8, 16LL * q.lo[1] + 4LL * q.side,
                                        16LL * q.lo[1] + 12LL * q.side, s5);
        return phi;
    };

    std::vector<double> total(std::size_t(nx) * ny, 0.0);
    auto support_window = [&](const DyadicCube& q, int& x0, int& x1, int& y0, int& y1) {
        // cells whose center can see the (9/8)-inflated cube
        x0 = std::max(0, q.lo[0] - (q.side + 15) / 16 - 1);
        x1 = std::min(nx, q.lo[0] + q.side + (q.side + 15) / 16 + 1);
        y0 = dim == 2 ? std::max(0, q.lo[1] - (q.side + 15) / 16 - 1) : 0;
        y1 = dim == 2 ? std::min(ny, q.lo[1] + q.side + (q.side + 15) / 16 + 1) : 1;
    };

    for (const DyadicCube& q : w.cubes) {
        int x0, x1, y0, y1;
        support_window(q, x0, x1, y0, y1);
        for (int iy = y0; iy < y1; ++iy)
            for (int ix = x0; ix < x1; ++ix) {
                const int lid = iy * nx + ix;
                if (!w.open_set.contains(lid)) continue;
                total[std::size_t(lid)] += phi_at(q, ix, iy);
            }
    }

    for (int lid = 0; lid < nx * ny; ++lid) {
        if (w.open_set.contains(lid) && total[std::size_t(lid)] == 0.0)
            throw std::logic_error("partition_of_unity: uncovered cell inside the open set");
    }

    w.psi.assign(w.cubes.size(), {});
    for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        const DyadicCube& q = w.cubes[i];
        int x0, x1, y0, y1;
        support_window(q, x0, x1, y0, y1);
        for (int iy = y0; iy < y1; ++iy)
            for (int ix = x0; ix < x1; ++ix) {
                const int lid = iy * nx + ix;
                if (!w.open_set.contains(lid)) continue;
                const double phi = phi_at(q, ix, iy);
                if (phi > 0.0) w.psi[i].push_back({lid, phi / total[std::size_t(lid)]});
            }
    }
    w.has_partition = true;
}

// Measured sup over cubes of diam(Q_i) * max |grad psi_i| with forward
// differences at cell centers (psi extended by zero off the open set).
inline double partition_gradient_bound(const WhitneyDecomposition& w) {
    require(w.has_partition, "partition_gradient_bound: partition not built");
    const DiscreteDomain& dom = *w.dom;
    const int dim = dom.dim();
    const int nx = dom.box_n(0);
    const int ny = dim == 2 ? dom.box_n(1) : 1;
    const double h = dom.spacing();
    double worst = 0.0;
    std::vector<double> dense(std::size_t(nx) * ny);
    for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        std::fill(dense.begin(), dense.end(), 0.0);
        for (const auto& e : w.psi[i]) dense[std::size_t(e.lattice)] = e.value;
        double gmax = 0.0;
        for (const auto& e : w.psi[i]) {
            const int ix = e.lattice % nx, iy = e.lattice / nx;
            // differences looking both ways so boundary drops are seen
            for (int sgn : {-1, 1}) {
                double g2 = 0.0;
                const int jx = ix + sgn;
                const double vx = (jx >= 0 && jx < nx) ? dense[std::size_t(iy) * nx + jx] : 0.0;
                g2 += (vx - e.value) * (vx - e.value);
                if (dim == 2) {
                    const int jy = iy + sgn;
                    const double vy =
                        (jy >= 0 && jy < ny) ? dense[std::size_t(jy) * nx + ix] : 0.0;
                    g2 += (vy - e.value) * (vy - e.value);
                }
                gmax = std::max(gmax, std::sqrt(g2) / h);
            }
        }
        const double diam = w.cubes[i].side * h * std::sqrt(double(dim));
        worst = std::max(worst, diam * gmax);
    }
    return worst;
}

// Hard invariant sweep used by the experiment runner: exact cover and
// disjointness, the Whitney inequality on non-clipped cubes, neighbour
// bounds, and the partition-of-unity identities.
inline bool whitney_invariants_ok(const WhitneyDecomposition& w, std::string* why = nullptr) {
    const DiscreteDomain& dom = *w.dom;
    const int dim = dom.dim();
    const int nx = dom.box_n(0), ny = dim == 2 ? dom.box_n(1) : 1;
    auto fail = [&](const std::string& msg) {
        if (why) *why = msg;
        return false;
    };

    std::vector<int> cover(std::size_t(w.root_side) * (dim == 2 ? w.root_side : 1), 0);
    for (const auto& q : w.cubes) {
        const std::int64_t diam2 = std::int64_t(q.side) * q.side * dim;
        if (!q.floor_clipped && !(q.dist2 > diam2 && q.dist2 <= 16 * diam2))
            return fail("whitney: diam < dist <= 4 diam violated");
        for (int iy = q.lo[1]; iy < q.lo[1] + (dim == 2 ? q.side : 1); ++iy)
            for (int ix = q.lo[0]; ix < q.lo[0] + q.side; ++ix)
                cover[std::size_t(iy) * w.root_side + ix] += 1;
    }
    for (int iy = 0; iy < (dim == 2 ? w.root_side : 1); ++iy)
        for (int ix = 0; ix < w.root_side; ++ix) {
            const bool in_open =
                ix < nx && iy < ny && w.open_set.contains(iy * nx + ix);
            if (cover[std::size_t(iy) * w.root_side + ix] != (in_open ? 1 : 0))
                return fail("whitney: cubes do not tile the open set");
        }
    const int max_neigh = (dim == 2 ? 12 : 2) + 1;
    for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        if (int(w.neighbors[i].size()) > max_neigh)
            return fail("whitney: neighbour count exceeds 4^d - 2^d");
        for (int j : w.neighbors[i]) {
            if (j != int(i) &&
                (w.cubes[std::size_t(j)].side > 2 * w.cubes[i].side ||
                 2 * w.cubes[std::size_t(j)].side < w.cubes[i].side))
                return fail("whitney: touching cubes differ by more than one level");
        }
    }
    if (w.has_partition) {
        std::vector<double> sum(std::size_t(nx) * ny, 0.0);
        for (const auto& entries : w.psi)
            for (const auto& e : entries) sum[std::size_t(e.lattice)] += e.value;
        for (int lid = 0; lid < nx * ny; ++lid) {
            const bool in_open = w.open_set.contains(lid);
            if (in_open && std::abs(sum[std::size_t(lid)] - 1.0) > 1e-12)
                return fail("whitney: partition does not sum to one");
            if (!in_open && sum[std::size_t(lid)] != 0.0)
                return fail("whitney: partition leaks outside the open set");
        }
    }
    return true;
}

// Relative truncation u_O: on open-set cells the partition blend of local
// cube averages, elsewhere u itself. The average over (9/8) Q_i is taken by
// cell quadrature and set to zero unless the inflated cube lies inside the
// domain (exact cell-geometry containment test in h/16 units).
inline Field relative_truncate(const Field& u, const CellMask& open_set,
                               const WhitneyDecomposition& w, const DiscreteDomain& dom) {
    require(w.has_partition, "relative_truncate: decomposition lacks a partition of unity");
    require(w.open_set.member == open_set.member, "relative_truncate: decomposition built for a different open set");
    require(&u.domain() == &dom && u.carrier() == Carrier::Domain,
            "relative_truncate: expects a domain-carried field");
    const int dim = dom.dim();
    const int N = u.comps();
    const int nx = dom.box_n(0);

    // per-cube averages over the inflated cube
    std::vector<std::vector<double>> avg(w.cubes.size(), std::vector<double>(std::size_t(N), 0.0));
    for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        const DyadicCube& q = w.cubes[i];
        bool contained = true;
        std::array<std::int64_t, 2> lo16{}, hi16{};
        for (int a = 0; a < dim; ++a) {
            lo16[a] = 16LL * q.lo[a] - q.side;
            hi16[a] = 16LL * (q.lo[a] + q.side) + q.side;
            if (lo16[a] < 0 || hi16[a] > 16LL * dom.box_n(a)) contained = false;
        }
        if (contained) {
            // every cell overlapping the inflated cube with positive measure
            // must be interior
            const int cx0 = int(lo16[0] / 16), cx1 = int((hi16[0] + 15) / 16);
            const int cy0 = dim == 2 ? int(lo16[1] / 16) : 0;
            const int cy1 = dim == 2 ? int((hi16[1] + 15) / 16) : 1;
            for (int iy = cy0; iy < cy1 && contained; ++iy)
                for (int ix = cx0; ix < cx1 && contained; ++ix) {
                    const bool overlap = (16LL * ix < hi16[0] && 16LL * (ix + 1) > lo16[0]) &&
                                         (dim == 1 || (16LL * iy < hi16[1] &&
                                                       16LL * (iy + 1) > lo16[1]));
                    if (overlap && !dom.is_interior_lattice(ix, iy)) contained = false;
                }
        }
        if (!contained) continue;
        long cnt = 0;
        std::vector<double> acc(std::size_t(N), 0.0);
        const int cx0 = int(lo16[0] / 16), cx1 = int((hi16[0] + 15) / 16);
        const int cy0 = dim == 2 ? int(lo16[1] / 16) : 0;
        const int cy1 = dim == 2 ? int((hi16[1] + 15) / 16) : 1;
        for (int iy = cy0; iy < cy1; ++iy)
            for (int ix = cx0; ix < cx1; ++ix) {
                const std::int64_t mx = 16LL * ix + 8;
                const std::int64_t my = 16LL * iy + 8;
                if (mx < lo16[0] || mx > hi16[0]) continue;
                if (dim == 2 && (my < lo16[1] || my > hi16[1])) continue;
                const int dense = dom.dense_index(ix, iy);
                if (dense < 0) continue;
                ++cnt;
                for (int c = 0; c < N; ++c) acc[std::size_t(c)] += u.at(dense, c);
            }
        if (cnt > 0)
            for (int c = 0; c < N; ++c) avg[i][std::size_t(c)] = acc[std::size_t(c)] / double(cnt);
    }

    Field out = u;
    for (int i = 0; i < dom.cell_count(); ++i) {
        if (open_set.contains(dom.lattice_id(i)))
            for (int c = 0; c < N; ++c) out.at(i, c) = 0.0;
    }
    for (std::size_t i = 0; i < w.cubes.size(); ++i) {
        for (const auto& e : w.psi[i]) {
            const int ix = e.lattice % nx, iy = e.lattice / nx;
            const int dense = dom.dense_index(ix, iy);
            if (dense < 0) continue;
            for (int c = 0; c < N; ++c) out.at(dense, c) += e.value * avg[i][std::size_t(c)];
        }
    }
    out.check_finite("relative_truncate");
    return out;
}

} // namespace plab
