#pragma once

#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "plab/common.hpp"
#include "plab/exponents.hpp"
#include "plab/grid.hpp"
#include "plab/maximal.hpp"
#include "plab/operators.hpp"

namespace plab {

struct SolveReport {
    int iterations = 0;
    double final_energy = 0.0;
    double residual_norm = 0.0;
    int line_search_failures = 0;
    double wall_time = 0.0;
    bool converged = false;
    double mu = 0.0; // line-search smoothing parameter (p < 2 only)
    std::vector<double> energy_history;
};

namespace detail {

// Dual data of the forcing terms: F = |f|^{p-2} f and G = |g|^{r-2} g.
struct DualForcing {
    Field F; // gradient rank
    Field G; // scalar rank

    DualForcing(const Field& f, const Field& g, const ExponentSet& e, const DiscreteDomain& dom)
        : F(Field::gradient_rank(dom)), G(Field::scalar(dom)) {
        for (int i = 0; i < dom.cell_count(); ++i) {
            const double fn = f.norm_at(i);
            const double fscale = fn > 0 ? std::pow(fn, e.p - 2.0) : 0.0;
            for (int c = 0; c < F.comps(); ++c) F.at(i, c) = fscale * f.at(i, c);
            const double gn = g.norm_at(i);
            const double gscale = gn > 0 ? std::pow(gn, e.r - 2.0) : 0.0;
            for (int c = 0; c < G.comps(); ++c) G.at(i, c) = gscale * g.at(i, c);
        }
    }
};

// The |grad u|^p part of the energy sums forward differences over the
// zero-extended lattice, so every boundary face (including the lower ghost
// faces) contributes exactly once.
inline void site_matrix(const GradientSite& s, const std::vector<double>& u, int dim, int N,
                        double h, FluxValue& z) {
    for (int a = 0; a < dim; ++a) {
        for (int n = 0; n < N; ++n) {
            const double up = s.up[a] >= 0 ? u[std::size_t(s.up[a]) * N + n] : 0.0;
            const double self = s.self >= 0 ? u[std::size_t(s.self) * N + n] : 0.0;
            z[a * N + n] = (up - self) / h;
        }
    }
}

inline double energy_impl(const std::vector<double>& u, const DualForcing& dual,
                          const ExponentSet& exps, const DiscreteDomain& dom) {
    const int dim = dom.dim(), N = dom.codim(), m = dim * N;
    const double h = dom.spacing(), hd = dom.cell_measure();
    double grad_part = 0.0, cell_part = 0.0;
    FluxValue z{};
    for (const GradientSite& s : dom.gradient_sites()) {
        site_matrix(s, u, dim, N, h, z);
        grad_part += std::pow(flux_norm(z, m), exps.p) / exps.p;
        if (s.self >= 0) {
            double coupling = 0.0;
            for (int c = 0; c < m; ++c) coupling += dual.F.at(s.self, c) * z[c];
            double un2 = 0.0, gu = 0.0;
            for (int n = 0; n < N; ++n) {
                const double uv = u[std::size_t(s.self) * N + n];
                un2 += uv * uv;
                gu += dual.G.at(s.self, n) * uv;
            }
            cell_part += std::pow(un2, 0.5 * exps.r) / exps.r - coupling - gu;
        }
    }
    const double J = hd * (grad_part + cell_part);
    require(std::isfinite(J), "discrete_energy: non-finite energy");
    return J;
}

} // namespace detail

// Convex energy whose Euler-Lagrange equation is the weak form of the
// canonical problem:
//   J(u) = sum h^d [ (1/p)|grad u|^p + (1/r)|u|^r - F : grad u - G . u ].
// Rejects non-canonical operators: no energy form exists for them.
inline double discrete_energy(const Field& u, const Field& f, const Field& g,
                              const ExponentSet& exps, const DiscreteDomain& dom,
                              const OperatorSpec* op = nullptr) {
    require(op == nullptr || op->canonical,
            "discrete_energy: energy form unavailable for non-canonical operators");
    require(&u.domain() == &dom && u.rank() == Rank::Scalar, "discrete_energy: field mismatch");
    const detail::DualForcing dual(f, g, exps, dom);
    return detail::energy_impl(u.data(), dual, exps, dom);
}

namespace detail {

inline Field residual_impl(const Field& u, const DualForcing& dual, const ExponentSet& exps,
                           const DiscreteDomain& dom) {
    const int dim = dom.dim(), N = dom.codim(), m = dim * N;
    const double h = dom.spacing();
    Field res = Field::scalar(dom);
    FluxValue z{};
    for (const GradientSite& s : dom.gradient_sites()) {
        detail::site_matrix(s, u.data(), dim, N, h, z);
        FluxValue w = p_laplace_flux(z, exps.p, m);
        if (s.self >= 0)
            for (int c = 0; c < m; ++c) w[c] -= dual.F.at(s.self, c);
        for (int a = 0; a < dim; ++a) {
            for (int n = 0; n < N; ++n) {
                const double v = w[a * N + n] / h;
                if (s.up[a] >= 0) res.at(s.up[a], n) += v;
                if (s.self >= 0) res.at(s.self, n) -= v;
            }
        }
    }
    for (int i = 0; i < dom.cell_count(); ++i) {
        const double un = u.norm_at(i);
        const double scale = un > 0 ? std::pow(un, exps.r - 2.0) : 0.0;
        for (int n = 0; n < N; ++n) res.at(i, n) += scale * u.at(i, n) - dual.G.at(i, n);
    }
    res.check_finite("energy_gradient");
    return res;
}

} // namespace detail

// Pointwise Euler-Lagrange residual R: the derivative of the energy with
// respect to the value of cell c is h^d R_c, i.e. R is the weak-form residual
// density tested against cell indicators.
inline Field energy_gradient(const Field& u, const Field& f, const Field& g,
                             const ExponentSet& exps, const DiscreteDomain& dom,
                             const OperatorSpec* op = nullptr) {
    require(op == nullptr || op->canonical,
            "energy_gradient: energy form unavailable for non-canonical operators");
    const detail::DualForcing dual(f, g, exps, dom);
    return detail::residual_impl(u, dual, exps, dom);
}

namespace detail {

inline double euclid(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Directional derivative of the energy along dir. For p < 2 the flux factor
// is smoothed as (|z|^2 + mu^2)^{(p-2)/2} so the line search sees a
// continuous derivative; reported energies stay unsmoothed.
inline double directional_derivative(const Field& u, const std::vector<double>& dir,
                                     const DualForcing& dual, const ExponentSet& exps,
                                     const DiscreteDomain& dom, double mu) {
    const int dim = dom.dim(), N = dom.codim(), m = dim * N;
    const double h = dom.spacing(), hd = dom.cell_measure();
    double acc = 0.0;
    FluxValue z{}, dz{};
    for (const GradientSite& s : dom.gradient_sites()) {
        site_matrix(s, u.data(), dim, N, h, z);
        site_matrix(s, dir, dim, N, h, dz);
        double zz = 0.0;
        for (int c = 0; c < m; ++c) zz += z[c] * z[c];
        const double scale = std::pow(zz + mu * mu, 0.5 * (exps.p - 2.0));
        double zdz = 0.0;
        for (int c = 0; c < m; ++c) zdz += z[c] * dz[c];
        acc += scale * zdz;
        if (s.self >= 0) {
            for (int c = 0; c < m; ++c) acc -= dual.F.at(s.self, c) * dz[c];
            const double un = u.norm_at(s.self);
            const double uscale = un > 0 ? std::pow(un, exps.r - 2.0) : 0.0;
            for (int n = 0; n < N; ++n) {
                const double dn = dir[std::size_t(s.self) * N + n];
                acc += (uscale * u.at(s.self, n) - dual.G.at(s.self, n)) * dn;
            }
        }
    }
    return hd * acc;
}

} // namespace detail

// Solve the canonical weak problem by minimising the discrete energy with
// Polak-Ribiere nonlinear CG, Armijo backtracking and steepest-descent
// restarts. residual_norm is the L2 norm of energy_gradient scaled by
// h^{-d/2} (the plain Euclidean norm of the pointwise residual).
inline std::pair<Field, SolveReport> solve_weak(const Field& f, const Field& g,
                                                const ExponentSet& exps, const DiscreteDomain& dom,
                                                double tol, int max_iters,
                                                const Field* init = nullptr,
                                                const OperatorSpec* op = nullptr) {
    require(tol > 0, "solve_weak: tol must be positive");
    require(op == nullptr || op->canonical,
            "solve_weak: only the canonical energy form is solvable");
    const auto t0 = std::chrono::steady_clock::now();
    const int N = dom.codim();
    const std::size_t n = std::size_t(dom.cell_count()) * N;
    const detail::DualForcing dual(f, g, exps, dom);

    Field u = init ? *init : Field::scalar(dom);
    SolveReport rep;
    rep.mu = exps.p < 2.0 ? 1e-8 : 0.0;

    double energy = detail::energy_impl(u.data(), dual, exps, dom);
    rep.energy_history.push_back(energy);
    Field res = detail::residual_impl(u, dual, exps, dom);
    double rnorm = detail::euclid(res.data());

    std::vector<double> dir(n), trial(n), res_old(n);
    for (std::size_t i = 0; i < n; ++i) dir[i] = -res.data()[i];
    double gg = detail::dot(res.data(), res.data());
    double step = 1.0;
    bool steepest = true;

    int iter = 0;
    while (rnorm > tol && iter < max_iters) {
        double dd = detail::directional_derivative(u, dir, dual, exps, dom, rep.mu);
        if (dd >= 0) {
            // not a descent direction: restart with steepest descent
            if (steepest) break;
            for (std::size_t i = 0; i < n; ++i) dir[i] = -res.data()[i];
            steepest = true;
            dd = detail::directional_derivative(u, dir, dual, exps, dom, rep.mu);
            if (dd >= 0) break;
        }

        // Line search on the convex ray function phi(t) = J(u + t dir):
        // bracket a sign change of phi', refine by regula falsi, then accept
        // under the Armijo test. Near convergence energy differences drop
        // below summation resolution, so the test carries a noise slack and
        // derivative progress decides.
        Field probe = u;
        auto dphi = [&](double t) {
            for (std::size_t i = 0; i < n; ++i) probe.data()[i] = u.data()[i] + t * dir[i];
            return detail::directional_derivative(probe, dir, dual, exps, dom, rep.mu);
        };

        double t_lo = 0.0, d_lo = dd;
        double t_hi = step, d_hi = dphi(t_hi);
        int expand = 0;
        while (d_hi < 0.0 && expand++ < 60) {
            t_lo = t_hi;
            d_lo = d_hi;
            t_hi *= 2.0;
            d_hi = dphi(t_hi);
        }
        double t = t_hi;
        if (d_hi >= 0.0) {
            for (int refine = 0; refine < 12 && d_hi > 0.0 && d_lo < 0.0; ++refine) {
                double t_mid = t_lo + (t_hi - t_lo) * d_lo / (d_lo - d_hi);
                const double span = t_hi - t_lo;
                t_mid = std::min(std::max(t_mid, t_lo + 0.02 * span), t_hi - 0.02 * span);
                const double d_mid = dphi(t_mid);
                if (std::abs(d_mid) <= 0.05 * std::abs(dd)) {
                    t_lo = t_mid;
                    break;
                }
                if (d_mid < 0.0) {
                    t_lo = t_mid;
                    d_lo = d_mid;
                } else {
                    t_hi = t_mid;
                    d_hi = d_mid;
                }
            }
            t = t_lo > 0.0 ? t_lo : 0.5 * (t_lo + t_hi);
        }

        const double noise = 1e-13 * (1.0 + std::abs(energy));
        bool accepted = false;
        double e_acc = energy;
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t i = 0; i < n; ++i) trial[i] = u.data()[i] + t * dir[i];
            const double e_try = detail::energy_impl(trial, dual, exps, dom);
            if (e_try <= energy + 1e-4 * t * dd + noise) {
                e_acc = e_try;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            ++rep.line_search_failures;
            if (steepest) break; // stuck even on steepest descent
            for (std::size_t i = 0; i < n; ++i) dir[i] = -res.data()[i];
            steepest = true;
            continue;
        }
        u.data() = trial;
        energy = e_acc;

        rep.energy_history.push_back(energy);
        ++iter;
        step = t;

        res_old = res.data();
        res = detail::residual_impl(u, dual, exps, dom);
        rnorm = detail::euclid(res.data());
        if (rnorm <= tol) break;

        double num = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            num += res.data()[i] * (res.data()[i] - res_old[i]);
        const double beta = gg > 0 ? std::max(0.0, num / gg) : 0.0;
        gg = detail::dot(res.data(), res.data());
        for (std::size_t i = 0; i < n; ++i) dir[i] = -res.data()[i] + beta * dir[i];
        steepest = beta == 0.0;
    }

    rep.iterations = iter;
    rep.final_energy = energy;
    rep.residual_norm = rnorm;
    rep.converged = rnorm <= tol;
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    u.check_finite("solve_weak");
    return {std::move(u), std::move(rep)};
}

// f^k = min{k, |f|} f/|f| chi_{B_k}: magnitude clipped at k, direction kept,
// support restricted to the ball of radius ball_radius about the origin.
inline Field truncate_forcing(const Field& F, double k, const DiscreteDomain& dom,
                              double ball_radius = -1.0) {
    require(k > 0, "truncate_forcing: level k must be positive");
    if (ball_radius < 0) ball_radius = k;
    Field out = F;
    for (int i = 0; i < dom.cell_count(); ++i) {
        const double mag = F.norm_at(i);
        double scale;
        if (dom.dist_to_origin(i) >= ball_radius)
            scale = 0.0;
        else
            scale = mag > k ? k / mag : 1.0;
        for (int c = 0; c < F.comps(); ++c) out.at(i, c) = scale * F.at(i, c);
    }
    return out;
}

// X^{p,r} norm of the difference: ||grad(u-v)||_p + ||u-v||_r over the domain.
inline double xpr_distance(const Field& u, const Field& v, const ExponentSet& exps,
                           const DiscreteDomain& dom) {
    Field diff = u;
    for (std::size_t i = 0; i < diff.data().size(); ++i) diff.data()[i] -= v.data()[i];
    const Region whole = Region::whole(dom);
    const Field gd = gradient(diff, dom);
    return weighted_norm(gd, nullptr, exps.p, whole) + weighted_norm(diff, nullptr, exps.r, whole);
}

struct ApproxRecord {
    double k = 0.0;
    double grad_p_unweighted = 0.0; // ||grad u^k||_p^p on Omega_R
    double grad_p_weighted = 0.0;   // int |grad u^k|^p omega on Omega_R
    double u_r_unweighted = 0.0;    // ||u^k||_r^r on Omega_R
    double u_r_weighted = 0.0;      // int |u^k|^r omega on Omega_R
    double xpr_dist = 0.0;          // X^{p,r} distance to previous iterate
    int iterations = 0;
    double residual = 0.0;
    bool converged = true;
};

struct ApproxReport {
    std::vector<double> k_schedule;
    std::vector<ApproxRecord> records;
    double delta = 1.0;
    double R = 0.0;
    double mu = 0.0;
};

// Approximating sequence (P)_k: truncate the data at level k, solve with a
// warm start from the previous level, and record weighted/unweighted
// energies against the weight built from the untruncated data.
inline ApproxReport approximation_study(const Field& f, const Field& g, const ExponentSet& exps,
                                        const DiscreteDomain& dom,
                                        const std::vector<double>& k_schedule, double delta,
                                        double R, double tol, int max_iters = 50000) {
    require(!k_schedule.empty(), "approximation_study: empty k schedule");
    for (std::size_t i = 1; i < k_schedule.size(); ++i)
        require(k_schedule[i] > k_schedule[i - 1],
                "approximation_study: k schedule must be strictly increasing");
    require(delta > 0.0 && delta <= 1.0, "approximation_study: delta must lie in (0, 1]");

    const Weight omega = build_weight(f, g, exps, delta, R, dom);
    const Region ball_R = Region::ball(dom, R);

    ApproxReport report;
    report.k_schedule = k_schedule;
    report.delta = delta;
    report.R = R;

    Field prev = Field::scalar(dom);
    bool have_prev = false;
    for (double k : k_schedule) {
        const Field fk = truncate_forcing(f, k, dom);
        const Field gk = truncate_forcing(g, k, dom);
        auto [u, rep] = solve_weak(fk, gk, exps, dom, tol, max_iters, have_prev ? &prev : nullptr);
        report.mu = rep.mu;

        ApproxRecord rec;
        rec.k = k;
        const Field gu = gradient(u, dom);
        rec.grad_p_unweighted = weighted_pow_integral(gu, nullptr, exps.p, ball_R);
        rec.grad_p_weighted = weighted_pow_integral(gu, &omega.field, exps.p, ball_R);
        rec.u_r_unweighted = weighted_pow_integral(u, nullptr, exps.r, ball_R);
        rec.u_r_weighted = weighted_pow_integral(u, &omega.field, exps.r, ball_R);
        rec.xpr_dist = have_prev ? xpr_distance(u, prev, exps, dom) : 0.0;
        rec.iterations = rep.iterations;
        rec.residual = rep.residual_norm;
        rec.converged = rep.converged;
        report.records.push_back(rec);

        prev = std::move(u);
        have_prev = true;
    }
    return report;
}

} // namespace plab
