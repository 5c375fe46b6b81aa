// Test-only reference implementations, independent of the library internals.
#pragma once

#include <cmath>
#include <vector>

#include "plab/exponents.hpp"
#include "plab/grid.hpp"

namespace oracle {

using plab::DiscreteDomain;
using plab::ExponentSet;
using plab::Field;

// Naive energy: zero-pad the cell values onto an extended lattice, take
// forward differences everywhere, and sum the four terms directly.
inline double naive_energy(const std::vector<double>& u, const Field& f, const Field& g,
                           const ExponentSet& e, const DiscreteDomain& dom) {
    const int d = dom.dim(), N = dom.codim();
    const int nx = dom.box_n(0), ny = d == 2 ? dom.box_n(1) : 1;
    const double h = dom.spacing(), hd = dom.cell_measure();
    auto val = [&](int ix, int iy, int n) -> double {
        const int dense = dom.dense_index(ix, iy);
        return dense >= 0 ? u[std::size_t(dense) * N + n] : 0.0;
    };
    double total = 0.0;
    for (int iy = -1; iy <= ny; ++iy) {
        for (int ix = -1; ix <= nx; ++ix) {
            // gradient term at every extended cell
            double z2 = 0.0;
            std::vector<double> zmat(std::size_t(d) * N, 0.0);
            for (int n = 0; n < N; ++n) {
                const double dx = (val(ix + 1, iy, n) - val(ix, iy, n)) / h;
                zmat[std::size_t(0) * N + n] = dx;
                z2 += dx * dx;
                if (d == 2) {
                    const double dy = (val(ix, iy + 1, n) - val(ix, iy, n)) / h;
                    zmat[std::size_t(1) * N + n] = dy;
                    z2 += dy * dy;
                }
            }
            total += hd * std::pow(z2, 0.5 * e.p) / e.p;

            const int dense = dom.dense_index(ix, iy);
            if (dense < 0) continue;
            double u2 = 0.0;
            for (int n = 0; n < N; ++n) u2 += val(ix, iy, n) * val(ix, iy, n);
            total += hd * std::pow(u2, 0.5 * e.r) / e.r;

            const double fn = f.norm_at(dense);
            const double fs = fn > 0 ? std::pow(fn, e.p - 2.0) : 0.0;
            for (int c = 0; c < d * N; ++c)
                total -= hd * fs * f.at(dense, c) * zmat[std::size_t(c)];
            const double gn = g.norm_at(dense);
            const double gs = gn > 0 ? std::pow(gn, e.r - 2.0) : 0.0;
            for (int n = 0; n < N; ++n) total -= hd * gs * g.at(dense, n) * val(ix, iy, n);
        }
    }
    return total;
}

// Coordinate descent: each cell component is minimized in turn by bisection
// on the sign of the one-dimensional energy derivative (hand-differentiated
// from the zero-padded definition above), swept to a fixpoint. The ray
// function is convex, so its derivative is monotone in t.
inline std::vector<double> coordinate_descent(const Field& f, const Field& g,
                                              const ExponentSet& e, const DiscreteDomain& dom,
                                              int max_sweeps = 50000, double sweep_tol = 1e-12) {
    const int d = dom.dim(), N = dom.codim();
    const double h = dom.spacing();
    std::vector<double> u(std::size_t(dom.cell_count()) * N, 0.0);

    auto val = [&](int ix, int iy, int n) -> double {
        const int dense = dom.dense_index(ix, iy);
        return dense >= 0 ? u[std::size_t(dense) * N + n] : 0.0;
    };
    auto fdual = [&](int dense, int c) { // |f|^{p-2} f componentwise
        const double fn = f.norm_at(dense);
        return fn > 0 ? std::pow(fn, e.p - 2.0) * f.at(dense, c) : 0.0;
    };
    auto gdual = [&](int dense, int n) {
        const double gn = g.norm_at(dense);
        return gn > 0 ? std::pow(gn, e.r - 2.0) * g.at(dense, n) : 0.0;
    };

    // d/dt of the energy when cell (ix,iy) component n is set to t: only the
    // site at the cell and the d sites below/left of it see that value
    auto dphi = [&](int dense, int ix, int iy, int n, double t) {
        const double save = u[std::size_t(dense) * N + n];
        u[std::size_t(dense) * N + n] = t;
        double acc = 0.0;
        for (int s = 0; s <= d; ++s) {
            // s = 0: site at the cell; s = 1..d: site at cell - e_s
            const int ex = s == 1 ? ix - 1 : ix;
            const int ey = s == 2 ? iy - 1 : iy;
            double z[4] = {0, 0, 0, 0}, dz[4] = {0, 0, 0, 0};
            double z2 = 0.0;
            for (int a = 0; a < d; ++a) {
                const int ux = ex + (a == 0 ? 1 : 0);
                const int uy = ey + (a == 1 ? 1 : 0);
                for (int m = 0; m < N; ++m) {
                    const double diff = (val(ux, uy, m) - val(ex, ey, m)) / h;
                    z[a * N + m] = diff;
                    z2 += diff * diff;
                    if (m == n) {
                        if (ux == ix && uy == iy) dz[a * N + m] = 1.0 / h;
                        if (ex == ix && ey == iy) dz[a * N + m] -= 1.0 / h;
                    }
                }
            }
            double zdz = 0.0;
            for (int c = 0; c < d * N; ++c) zdz += z[c] * dz[c];
            if (z2 > 0) acc += std::pow(z2, 0.5 * (e.p - 2.0)) * zdz;
            const int edense = dom.dense_index(ex, ey);
            if (edense >= 0)
                for (int c = 0; c < d * N; ++c) acc -= fdual(edense, c) * dz[c];
        }
        double u2 = 0.0;
        for (int m = 0; m < N; ++m) u2 += val(ix, iy, m) * val(ix, iy, m);
        if (u2 > 0) acc += std::pow(u2, 0.5 * (e.r - 2.0)) * t;
        acc -= gdual(dense, n);
        u[std::size_t(dense) * N + n] = save;
        return acc;
    };

    auto minimize_coord = [&](int dense, int n) {
        const auto c = dom.lattice_coords(dom.lattice_id(dense));
        double lo = u[std::size_t(dense) * N + n] - 1.0;
        double hi = u[std::size_t(dense) * N + n] + 1.0;
        int guard = 0;
        while (dphi(dense, c[0], c[1], n, lo) > 0 && guard++ < 80) lo -= 2.0 * (hi - lo);
        guard = 0;
        while (dphi(dense, c[0], c[1], n, hi) < 0 && guard++ < 80) hi += 2.0 * (hi - lo);
        while (hi - lo > 1e-12) {
            const double mid = 0.5 * (lo + hi);
            if (dphi(dense, c[0], c[1], n, mid) < 0)
                lo = mid;
            else
                hi = mid;
        }
        const double next = 0.5 * (lo + hi);
        const double moved = std::abs(next - u[std::size_t(dense) * N + n]);
        u[std::size_t(dense) * N + n] = next;
        return moved;
    };

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double worst = 0.0;
        for (int dense = 0; dense < dom.cell_count(); ++dense)
            for (int n = 0; n < N; ++n) worst = std::max(worst, minimize_coord(dense, n));
        if (worst < sweep_tol) break;
    }
    return u;
}

// Brute-force Euclidean distance transform from a cell set, measured between
// cell centers (test oracle for Whitney geometry).
inline std::vector<double> distance_transform(const std::vector<uint8_t>& complement, int nx,
                                              int ny, double h) {
    std::vector<double> dist(std::size_t(nx) * ny, std::numeric_limits<double>::infinity());
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            double best = std::numeric_limits<double>::infinity();
            for (int cy = 0; cy < ny; ++cy)
                for (int cx = 0; cx < nx; ++cx) {
                    if (!complement[std::size_t(cy) * nx + cx]) continue;
                    const double dx = double(x - cx), dy = double(y - cy);
                    best = std::min(best, std::sqrt(dx * dx + dy * dy) * h);
                }
            dist[std::size_t(y) * nx + x] = best;
        }
    return dist;
}

} // namespace oracle
