#pragma once

// Control construction: support compression of inputs (Kamen rewriting
// omega = alpha + beta * r), Bezout-based motion planning omega = S * Q * psi,
// and end-to-end verification by forward simulation.

#include <cmath>
#include <stdexcept>
#include <utility>

#include "delayreach/measure.hpp"
#include "delayreach/system.hpp"

namespace delayreach {

struct KamenResult {
    GridSignal alpha;  // supported in (tau, 0], cell-start convention
    GridSignal r;
};

// Rewrite a scalar control omega as alpha + beta * r with supp(alpha)
// contained in (tau, 0].  beta_inv must be a truncated causal inverse of
// beta whose horizon covers the support window of omega.
inline KamenResult kamen_compress(const GridSignal& omega, const ScalarMeasure& beta,
                                  const ScalarMeasure& beta_inv, double tau) {
    if (omega.dim() != 1) throw std::invalid_argument("kamen_compress: omega must be scalar");
    const double h = omega.grid_step();
    detail::check_same_step(h, beta.grid_step());
    Index lb;
    if (!beta.support_inf_index(lb))
        throw std::invalid_argument("kamen_compress: beta is the zero measure");
    const Index tau_idx = static_cast<Index>(std::floor(tau / h + 1e-9));
    if (!(tau < static_cast<double>(lb) * h))
        throw std::invalid_argument("kamen_compress: tau must be smaller than l(beta)");

    GridSignal zero_r(h, 1);
    Index om_start;
    if (!omega.support_start(om_start)) return {GridSignal(h, 1), std::move(zero_r)};
    if (static_cast<double>(om_start) * h > tau)
        return {omega.trimmed(), std::move(zero_r)};  // already inside (tau, 0]

    // v = beta^{-1} * omega; the truncation defect beta * beta_inv - delta_0
    // must sit far enough right that it cannot contaminate cells < 0 of v
    ScalarMeasure inv_defect = beta * beta_inv - ScalarMeasure::dirac(h, 0, 1.0);
    Index d_lo, d_hi;
    if (inv_defect.support_inf_index(d_lo)) {
        inv_defect.support_sup_index(d_hi);
        const double dust = 1e-10 * std::max(1.0, beta.total_variation());
        Index defect_start = d_hi + 1;
        for (Index k = d_lo; k <= d_hi; ++k)
            if (std::abs(inv_defect.mass_at(k)) > dust) {
                defect_start = k;
                break;
            }
        if (defect_start <= d_hi) {
            if (defect_start <= 0)
                throw std::invalid_argument(
                    "kamen_compress: beta_inv is not a causal inverse of beta");
            if (defect_start + om_start < 0)
                throw std::invalid_argument(
                    "kamen_compress: inverse horizon too short for omega");
        }
    }
    MatrixMeasure binv(1, 1, h);
    binv(0, 0) = beta_inv;
    GridSignal v = apply_to_signal(binv, omega);

    Index lv;
    if (!v.support_start(lv)) return {GridSignal(h, 1), std::move(zero_r)};

    // Cutoff phi: 1 on [a1, b1], 0 outside [a2, b2], linear in between, with
    // a2 < a1 < l(v) and tau - l(beta) < b1 < b2 < 0 (25% / 75% placement).
    const double lo = tau - static_cast<double>(lb) * h;  // < 0
    const double b1 = 0.75 * lo;
    const double b2 = 0.25 * lo;
    const double a1 = static_cast<double>(lv - 1) * h;
    const double a2 = static_cast<double>(lv - 2) * h;
    auto phi = [&](double t) {
        if (t <= a2 || t >= b2) return 0.0;
        if (t < a1) return (t - a2) / (a1 - a2);
        if (t <= b1) return 1.0;
        return (b2 - t) / (b2 - b1);
    };

    GridSignal r(h, 1, lv, static_cast<std::size_t>(std::max<Index>(0, -lv)));
    for (Index k = lv; k < 0; ++k) r.at(k, 0) = v.value(k, 0) * phi(static_cast<double>(k) * h);

    MatrixMeasure bm(1, 1, h);
    bm(0, 0) = beta;
    GridSignal alpha = omega - apply_to_signal(bm, r);

    // Cells at or left of tau (and at nonnegative times) vanish in exact
    // arithmetic; clamp the float dust to zero, it stays accounted for in
    // the reconvolution residual.
    GridSignal out(h, 1, tau_idx + 1,
                   static_cast<std::size_t>(std::max<Index>(0, -(tau_idx + 1))));
    for (Index k = tau_idx + 1; k < 0; ++k) out.at(k, 0) = alpha.value(k, 0);
    return {out.trimmed(), r.trimmed()};
}

// Componentwise Kamen compression with beta = det(Q); the discarded output
// term Adj(Q) * P * r is supported in R_- and never reaches t >= 0.
inline GridSignal compress_control(const SystemSpec& spec, const GridSignal& omega, double T,
                                   double T_check = 0.0) {
    spec.validate();
    if (omega.dim() != spec.m) throw std::invalid_argument("compress_control: dimension mismatch");
    const double bound = minimal_time_bound(spec);
    if (!(T > bound))
        throw std::invalid_argument("compress_control: T must exceed the minimal-time bound");

    Index om_start;
    if (!omega.support_start(om_start)) return GridSignal(spec.h, spec.m);
    const Index T_idx = static_cast<Index>(std::llround(T / spec.h));
    if (om_start >= -T_idx) return omega.trimmed();  // already inside [-T, 0]

    auto [Q, P] = build_QP(spec);
    (void)P;
    ScalarMeasure beta = det_measure(Q);
    Index om_last;
    omega.support_last(om_last);
    const double width = static_cast<double>(om_last - om_start + 1) * spec.h;
    const double horizon = width + bound + std::max(T_check, bound);
    MatrixMeasure bm(1, 1, spec.h);
    bm(0, 0) = beta;
    ScalarMeasure beta_inv = causal_inverse(bm, horizon)(0, 0);

    GridSignal alpha(spec.h, spec.m);
    bool first = true;
    for (int c = 0; c < spec.m; ++c) {
        KamenResult kr = kamen_compress(omega.component(c), beta, beta_inv, -T);
        if (kr.alpha.empty()) continue;
        GridSignal comp(spec.h, spec.m, kr.alpha.start(),
                        static_cast<std::size_t>(kr.alpha.cells()));
        for (Index k = kr.alpha.start(); k < kr.alpha.end(); ++k)
            comp.at(k, c) = kr.alpha.value(k, 0);
        alpha = first ? comp : alpha + comp;
        first = false;
    }
    return alpha.trimmed();
}

// Motion planning omega = S * Q * psi restricted to R_-.  psi must belong to
// the state space to tolerance; its positive-time part of S*Q*psi must
// vanish to tolerance on the window where the data is valid.
inline GridSignal plan_control(const SystemSpec& spec, const MatrixMeasure& S,
                               const GridSignal& psi, double state_tol = 1e-8,
                               double* residual_out = nullptr) {
    spec.validate();
    if (S.rows() != spec.m || S.cols() != spec.d)
        throw std::invalid_argument("plan_control: S must be m x d");
    if (!S.is_past_supported())
        throw std::invalid_argument("plan_control: S must be past-supported");
    if (psi.dim() != spec.d) throw std::invalid_argument("plan_control: psi dimension mismatch");

    const double resid = state_residual(spec, psi);
    if (residual_out) *residual_out = resid;
    if (resid > state_tol * 100.0)
        throw std::invalid_argument("plan_control: target is not in the state space (residual " +
                                    std::to_string(resid) + ")");

    auto [Q, P] = build_QP(spec);
    (void)P;
    MatrixMeasure SQ = conv(S, Q);
    GridSignal full = apply_to_signal(SQ, psi.restricted(0, psi.end()));

    // S*Q*psi vanishes on t >= 0 for exact state-space targets; check on the
    // sub-window unaffected by the truncation of psi.
    Index sq_lo = 0;
    SQ.support_inf_index(sq_lo);
    const Index valid_hi = psi.end() + sq_lo;  // cells [0, valid_hi) are exact
    double pos = 0.0;
    for (Index k = 0; k < valid_hi; ++k)
        for (int c = 0; c < spec.m; ++c) pos += spec.h * std::abs(full.value(k, c));
    if (pos > state_tol * 100.0 * (1.0 + psi.l1_norm()))
        throw std::invalid_argument("plan_control: positive part of S*Q*psi does not vanish");

    return full.restricted(full.start(), 0).trimmed();
}

struct ReachReport {
    GridSignal target;        // psi
    GridSignal planned;       // omega = S * Q * psi
    GridSignal compressed;    // alpha, support in [-T, 0]
    GridSignal output;        // simulated output driven by alpha
    double support_bound = 0.0;
    double state_residual = 0.0;
    double l1_error = 0.0;    // || output - psi ||_L1 on the check window
    double check_time = 0.0;
    bool pass = false;
};

// Plan, compress, simulate, compare.  T_check defaults to the part of the
// target window not corrupted by the finite planning data.
inline ReachReport reach_and_verify(const SystemSpec& spec, const MatrixMeasure& S,
                                    const GridSignal& psi, double T, double tol = 1e-8,
                                    double T_check = 0.0) {
    ReachReport rep;
    rep.target = psi;
    rep.support_bound = T;

    GridSignal omega = plan_control(spec, S, psi, tol, &rep.state_residual);
    rep.planned = omega;
    rep.compressed = omega.empty() ? omega : compress_control(spec, omega, T, T_check);

    auto [Q, P] = build_QP(spec);
    (void)P;
    Index sq_lo = 0;
    conv(S, Q).support_inf_index(sq_lo);
    Index check_cells = psi.end() + sq_lo;
    if (T_check > 0.0)
        check_cells = std::min<Index>(check_cells,
                                      static_cast<Index>(std::llround(T_check / spec.h)));
    rep.check_time = static_cast<double>(check_cells) * spec.h;

    if (rep.compressed.empty()) {
        rep.output = GridSignal(spec.h, spec.d, 0, static_cast<std::size_t>(std::max<Index>(check_cells, 0)));
    } else {
        rep.output = simulate(spec, rep.compressed,
                              std::max(spec.h, static_cast<double>(check_cells) * spec.h)).y;
    }

    double err = 0.0;
    for (Index k = 0; k < check_cells; ++k)
        for (int c = 0; c < spec.d; ++c)
            err += spec.h * std::abs(rep.output.value(k, c) - psi.value(k, c));
    rep.l1_error = err;

    Index a_start = 0;
    bool nonzero = rep.compressed.support_start(a_start);
    const Index T_idx = static_cast<Index>(std::llround(T / spec.h));
    const bool supp_ok = !nonzero || a_start >= -T_idx;
    rep.pass = supp_ok && err <= tol * (1.0 + psi.l1_norm());
    return rep;
}

}  // namespace delayreach
