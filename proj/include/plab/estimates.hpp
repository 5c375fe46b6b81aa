#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "plab/common.hpp"
#include "plab/exponents.hpp"
#include "plab/grid.hpp"
#include "plab/maximal.hpp"
#include "plab/solver.hpp"

namespace plab {

// Term-by-term record of the weighted local energy estimate
//   int_{Omega_R} |grad u|^p w + |u|^r w
//     <= C0 ( int_{Omega_2R} |f|^p w + |g|^r w + beta1 w + beta2^{p'} w
//             + delta^{-eps} R^{d - pr/(r-p)} ).
// No pass/fail here: C0 is generic, stability lives in the acceptance suite.
struct EstimateReport {
    double lhs_grad = 0.0;
    double lhs_absorb = 0.0;
    double rhs_f = 0.0;
    double rhs_g = 0.0;
    double rhs_beta1 = 0.0;
    double rhs_beta2 = 0.0;
    double rhs_geometric = 0.0;
    double empirical_constant = 0.0;
    // metadata
    double p = 0, r = 0, q = 0, s = 0, eps = 0;
    double delta = 1.0, R = 0.0, h = 0.0, k = 0.0;
    bool weighted = true;

    double lhs_total() const { return lhs_grad + lhs_absorb; }
    double rhs_total() const { return rhs_f + rhs_g + rhs_beta1 + rhs_beta2 + rhs_geometric; }
};

inline double geometric_term(const ExponentSet& e, double delta, double R, int dim) {
    return std::pow(delta, -e.eps) * std::pow(R, double(dim) - e.p * e.r / (e.r - e.p));
}

inline EstimateReport verify_local_estimate(const Field& u, const Field& f, const Field& g,
                                            const Field* beta1, const Field* beta2,
                                            const Weight& omega, const ExponentSet& exps,
                                            double R, const DiscreteDomain& dom, double k = 0.0) {
    require(omega.R == R && omega.eps == exps.eps,
            "verify_local_estimate: weight was built with different parameters");
    // B_2R must fit the lattice the weight lives on
    const auto o = dom.origin();
    for (int a = 0; a < dom.dim(); ++a)
        require(o[a] - 2.0 * R >= dom.box_lo()[a] - 1e-12 &&
                    o[a] + 2.0 * R <= dom.box_hi()[a] + 1e-12,
                "verify_local_estimate: 2R region exceeds the bounding box");

    const Region ball_R = Region::ball(dom, R);
    const Region ball_2R = Region::ball(dom, 2.0 * R);
    const Field gu = gradient(u, dom);

    EstimateReport rep;
    rep.lhs_grad = weighted_pow_integral(gu, &omega.field, exps.p, ball_R);
    rep.lhs_absorb = weighted_pow_integral(u, &omega.field, exps.r, ball_R);
    rep.rhs_f = weighted_pow_integral(f, &omega.field, exps.p, ball_2R);
    rep.rhs_g = weighted_pow_integral(g, &omega.field, exps.r, ball_2R);
    if (beta1) rep.rhs_beta1 = weighted_pow_integral(*beta1, &omega.field, 1.0, ball_2R);
    if (beta2) rep.rhs_beta2 = weighted_pow_integral(*beta2, &omega.field, exps.p_conj, ball_2R);
    rep.rhs_geometric = geometric_term(exps, omega.delta, R, dom.dim());
    rep.empirical_constant = rep.lhs_total() / rep.rhs_total();
    rep.p = exps.p;
    rep.r = exps.r;
    rep.q = exps.q;
    rep.s = exps.s;
    rep.eps = exps.eps;
    rep.delta = omega.delta;
    rep.R = R;
    rep.h = dom.spacing();
    rep.k = k;
    return rep;
}

// Unweighted corollary: q/s norms on Omega_R against q/s data norms on
// Omega_2R plus R^{d - (1/2) pr/(r-p)}. Requires beta1 = beta2 = 0.
inline EstimateReport corollary_check(const Field& u, const Field& f, const Field& g,
                                      const ExponentSet& exps, double R,
                                      const DiscreteDomain& dom, const Field* beta1 = nullptr,
                                      const Field* beta2 = nullptr, double k = 0.0) {
    auto is_zero = [](const Field* b) {
        if (!b) return true;
        for (double v : b->data())
            if (v != 0.0) return false;
        return true;
    };
    require(is_zero(beta1) && is_zero(beta2),
            "corollary_check: the corollary assumes beta1 = beta2 = 0");

    const Region ball_R = Region::ball(dom, R);
    const Region ball_2R = Region::ball(dom, 2.0 * R);
    const Field gu = gradient(u, dom);

    EstimateReport rep;
    rep.weighted = false;
    rep.lhs_grad = weighted_pow_integral(gu, nullptr, exps.q, ball_R);
    rep.lhs_absorb = weighted_pow_integral(u, nullptr, exps.s, ball_R);
    rep.rhs_f = weighted_pow_integral(f, nullptr, exps.q, ball_2R);
    rep.rhs_g = weighted_pow_integral(g, nullptr, exps.s, ball_2R);
    rep.rhs_geometric = std::pow(R, double(dom.dim()) - 0.5 * exps.p * exps.r / (exps.r - exps.p));
    rep.empirical_constant = rep.lhs_total() / rep.rhs_total();
    rep.p = exps.p;
    rep.r = exps.r;
    rep.q = exps.q;
    rep.s = exps.s;
    rep.eps = exps.eps;
    rep.R = R;
    rep.h = dom.spacing();
    rep.k = k;
    return rep;
}

// Discrete Hoelder embedding margin:
//   RHS - LHS with LHS = int_D |v|^q and
//   RHS = ||v||_{L^p_w}^q ||w^{-1}||_{L^{q/(p-q)}}^{q/p}.
// Exact Hoelder at the quadrature level, so the margin is nonnegative up to
// rounding (contract: margin >= -1e-12 * RHS).
inline double verify_embedding(const Field& v, const Weight& omega, double p, double q,
                               const Region& region) {
    require(q > 1.0 && q < p, "verify_embedding: need 1 < q < p");
    const DiscreteDomain& dom = *region.dom;
    const double hd = dom.cell_measure();
    double lhs = 0.0, vp = 0.0, winv = 0.0;
    for (int i : region.cells) {
        const double w = omega.field.at(dom.lattice_id(i));
        const double vn = v.norm_at(i);
        lhs += std::pow(vn, q) * hd;
        vp += std::pow(vn, p) * w * hd;
        winv += std::pow(w, -q / (p - q)) * hd;
    }
    const double rhs = std::pow(vp, q / p) * std::pow(winv, (p - q) / p);
    return rhs - lhs;
}

// Discrete check of the layer-cake identity used in the lambda-integration
// device: int_0^inf lambda^{-(1+eps)} int_{[Mh <= lambda]} |F| dlambda
// = (1/eps) int |F| Mh^{-eps}. Returns (lhs, rhs, relative error); the
// lambda integral is truncated to [min Mh, max Mh] on a log grid (the lower
// layers are empty, the upper tail is added in closed form).
struct FubiniDiagnostic {
    double lhs = 0.0;
    double rhs = 0.0;
    double rel_error = 0.0;
};

inline FubiniDiagnostic fubini_diagnostic(const Field& absF, const Field& mh, double eps,
                                          int lambda_points = 2000) {
    const DiscreteDomain& dom = absF.domain();
    require(absF.carrier() == Carrier::Box && mh.carrier() == Carrier::Box,
            "fubini_diagnostic: expects box fields");
    require(eps > 0, "fubini_diagnostic: eps must be positive");
    const double hd = dom.cell_measure();
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (double v : mh.data()) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    require(lo > 0, "fubini_diagnostic: Mh must be positive");
    hi *= 1.0 + 1e-12;

    FubiniDiagnostic out;
    double rhs = 0.0;
    for (int lid = 0; lid < dom.box_cell_count(); ++lid)
        rhs += absF.at(lid) * std::pow(mh.at(lid), -eps) * hd;
    out.rhs = rhs / eps;

    // log-trapezoid over lambda in [lo, hi] plus the exact tail above hi
    double lhs = 0.0;
    const double lg_lo = std::log(lo), lg_hi = std::log(hi);
    double prev_lambda = lo, prev_val = 0.0;
    bool first = true;
    for (int j = 0; j < lambda_points; ++j) {
        const double lambda =
            std::exp(lg_lo + (lg_hi - lg_lo) * double(j) / double(lambda_points - 1));
        double inner = 0.0;
        for (int lid = 0; lid < dom.box_cell_count(); ++lid)
            if (mh.at(lid) <= lambda) inner += absF.at(lid) * hd;
        const double val = std::pow(lambda, -(1.0 + eps)) * inner;
        if (!first) lhs += 0.5 * (val + prev_val) * (lambda - prev_lambda);
        prev_lambda = lambda;
        prev_val = val;
        first = false;
    }
    double total_f = 0.0;
    for (int lid = 0; lid < dom.box_cell_count(); ++lid) total_f += absF.at(lid) * hd;
    lhs += total_f * std::pow(hi, -eps) / eps; // exact tail: all cells inside
    out.lhs = lhs;
    out.rel_error = std::abs(out.lhs - out.rhs) / std::max(1e-300, std::abs(out.rhs));
    return out;
}

struct BlowupReport {
    double alpha = 0.0;
    double admissible_lo = 0.0; // d/p
    double admissible_hi = 0.0; // d/q
    // increment ratios of ||f||_q^q and ||f||_p^p quadrature under h -> h/2
    double fq_growth = 0.0;
    double fp_growth = 0.0;
    bool f_in_Lq = false;
    bool f_in_Lp = false;
    ApproxReport sweep;
    double unweighted_total_growth = 0.0;
    double weighted_last_change = 0.0;
    bool unweighted_strictly_increasing = false;
    bool unweighted_divergent = false;
    bool weighted_bounded = false;
    double threshold_T1 = 0.0;
    double threshold_T2 = 0.0;
};

// Divergence/boundedness verdicts over a k-sweep: divergent means the
// unweighted gradient energy grows strictly with total growth above T1;
// bounded means the weighted energy's last two entries differ by less than
// T2 relatively.
inline void apply_dichotomy_verdicts(BlowupReport& rep, double T1, double T2) {
    const auto& rec = rep.sweep.records;
    require(rec.size() >= 2, "dichotomy verdicts need at least two schedule entries");
    bool strict = true;
    for (std::size_t i = 1; i < rec.size(); ++i)
        if (rec[i].grad_p_unweighted <= rec[i - 1].grad_p_unweighted) strict = false;
    rep.unweighted_strictly_increasing = strict;
    rep.unweighted_total_growth =
        rec.back().grad_p_unweighted / std::max(1e-300, rec.front().grad_p_unweighted) - 1.0;
    rep.unweighted_divergent = strict && rep.unweighted_total_growth > T1;
    const std::size_t m = rec.size();
    rep.weighted_last_change =
        std::abs(rec[m - 1].grad_p_weighted - rec[m - 2].grad_p_weighted) /
        std::max(1e-300, rec[m - 2].grad_p_weighted);
    rep.weighted_bounded = rep.weighted_last_change < T2;
    rep.threshold_T1 = T1;
    rep.threshold_T2 = T2;
}

// Singular profile f = |x|^{-alpha} E1 (zero g): the first flux component
// carries the radial singularity.
inline Field radial_singularity_forcing(double alpha, const DiscreteDomain& dom,
                                        double amplitude = 1.0) {
    Field f = Field::gradient_rank(dom);
    for (int i = 0; i < dom.cell_count(); ++i) {
        const double r = dom.dist_to_origin(i);
        require(r > 0, "radial_singularity_forcing: a cell center sits on the origin");
        f.at(i, 0) = amplitude * std::pow(r, -alpha);
    }
    return f;
}

// Headline dichotomy: along the truncation schedule the unweighted gradient
// p-energy keeps growing (no weak solution in the energy space) while the
// weighted energy settles (the weighted estimate's content).
inline BlowupReport blowup_study(double alpha, const ExponentSet& exps, const DiscreteDomain& dom,
                                 const std::vector<double>& k_schedule, double delta, double R,
                                 double tol, double T1, double T2, int max_iters = 50000) {
    const double d = double(dom.dim());
    const double lo = d / exps.p, hi = d / exps.q;
    require(alpha >= lo && alpha < hi,
            "blowup_study: alpha outside admissible window [" + std::to_string(lo) + ", " +
                std::to_string(hi) + ")");

    BlowupReport rep;
    rep.alpha = alpha;
    rep.admissible_lo = lo;
    rep.admissible_hi = hi;
    rep.threshold_T1 = T1;
    rep.threshold_T2 = T2;

    // membership by quadrature growth under refinement: three grids, ratio
    // of successive increments < 1 means the quadrature is converging
    {
        std::array<double, 3> Iq{}, Ip{};
        DomainSpec spec = dom.spec();
        for (int lvl = 0; lvl < 3; ++lvl) {
            const DiscreteDomain grid(spec);
            const Field fh = radial_singularity_forcing(alpha, grid);
            const Region whole = Region::whole(grid);
            Iq[std::size_t(lvl)] = weighted_pow_integral(fh, nullptr, exps.q, whole);
            Ip[std::size_t(lvl)] = weighted_pow_integral(fh, nullptr, exps.p, whole);
            spec.h /= 2.0;
        }
        rep.fq_growth = (Iq[2] - Iq[1]) / (Iq[1] - Iq[0]);
        rep.fp_growth = (Ip[2] - Ip[1]) / (Ip[1] - Ip[0]);
        rep.f_in_Lq = rep.fq_growth < 1.0;
        rep.f_in_Lp = rep.fp_growth < 1.0;
    }

    const Field f = radial_singularity_forcing(alpha, dom);
    const Field g = Field::scalar(dom);
    rep.sweep = approximation_study(f, g, exps, dom, k_schedule, delta, R, tol, max_iters);
    apply_dichotomy_verdicts(rep, T1, T2);
    return rep;
}

} // namespace plab
