#pragma once

// Difference delay systems with distributed delays on a uniform grid:
//   x(t) = sum_j A_j x(t - L_j) + int_0^{L_N} g(s) x(t - s) ds + B u(t)
// together with the associated measure pair (Q, P), forward simulation,
// and the state-space characterization pi(Q * y) = 0.

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "delayreach/measure.hpp"

namespace delayreach {

struct SystemSpec {
    int d = 1;  // state dimension
    int m = 1;  // input dimension
    double h = 1.0;
    std::vector<Index> delay_idx;       // L_j / h, strictly increasing, positive
    std::vector<Eigen::MatrixXd> A;     // one d x d matrix per delay
    Eigen::MatrixXd B;                  // d x m
    std::vector<Eigen::MatrixXd> g;     // density samples g(i h), i = 1 .. L_N/h; empty means g == 0

    int N() const { return static_cast<int>(delay_idx.size()); }
    Index largest_delay_idx() const { return delay_idx.back(); }
    double largest_delay() const { return static_cast<double>(delay_idx.back()) * h; }
    bool has_density() const { return !g.empty(); }

    void validate() const {
        detail::check_grid_step(h);
        if (d <= 0 || m <= 0) throw std::invalid_argument("spec: d and m must be positive");
        if (delay_idx.empty()) throw std::invalid_argument("spec: at least one delay required");
        Index prev = 0;
        for (Index k : delay_idx) {
            if (k <= prev)
                throw std::invalid_argument("spec: delays must be strictly increasing and positive");
            prev = k;
        }
        if (A.size() != delay_idx.size())
            throw std::invalid_argument("spec: one A matrix required per delay");
        for (const auto& a : A) {
            if (a.rows() != d || a.cols() != d)
                throw std::invalid_argument("spec: A_j must be d x d");
            if (!a.allFinite()) throw std::invalid_argument("spec: A_j has non-finite entries");
        }
        if (B.rows() != d || B.cols() != m) throw std::invalid_argument("spec: B must be d x m");
        if (!B.allFinite()) throw std::invalid_argument("spec: B has non-finite entries");
        if (!g.empty()) {
            if (static_cast<Index>(g.size()) != largest_delay_idx())
                throw std::invalid_argument("spec: g sample count must equal Lambda_N / h");
            for (const auto& gi : g) {
                if (gi.rows() != d || gi.cols() != d)
                    throw std::invalid_argument("spec: g samples must be d x d");
                if (!gi.allFinite()) throw std::invalid_argument("spec: g has non-finite entries");
            }
        }
    }

    // Greatest common divisor of the delay indices; delays are k_j * (gcd * h).
    Index delay_gcd() const {
        Index gcd = 0;
        for (Index k : delay_idx) gcd = std::gcd(gcd, k);
        return gcd;
    }
};

// Q = delta_{-L_N} I - sum_j delta_{-L_N + L_j} A_j - delta_{-L_N} * gtilde,
// P = B delta_0.
inline std::pair<MatrixMeasure, MatrixMeasure> build_QP(const SystemSpec& spec) {
    spec.validate();
    const Index L = spec.largest_delay_idx();
    MatrixMeasure Q = MatrixMeasure::identity(spec.d, spec.h).shifted(-L);
    for (int j = 0; j < spec.N(); ++j)
        Q = Q - MatrixMeasure::atomic(spec.A[static_cast<std::size_t>(j)],
                                      -L + spec.delay_idx[static_cast<std::size_t>(j)], spec.h);
    if (spec.has_density()) {
        MatrixMeasure G(spec.d, spec.d, spec.h);
        for (int i = 0; i < spec.d; ++i)
            for (int j = 0; j < spec.d; ++j) {
                std::vector<double> dens(spec.g.size());
                for (std::size_t t = 0; t < spec.g.size(); ++t) dens[t] = spec.g[t](i, j);
                // sample t corresponds to s = (t+1) h, shifted left by L_N
                G(i, j) = ScalarMeasure(spec.h, {}, 1 - L, std::move(dens));
            }
        Q = Q - G;
    }
    MatrixMeasure P = MatrixMeasure::atomic(spec.B, 0, spec.h);
    return {std::move(Q), std::move(P)};
}

// Upper bound on the minimal reachability time, -l(det Q); equals d * L_N
// for every spec built by build_QP.
inline double minimal_time_bound(const SystemSpec& spec) {
    auto [Q, P] = build_QP(spec);
    (void)P;
    ScalarMeasure det = det_measure(Q);
    Index s;
    if (!det.support_inf_index(s))
        throw std::runtime_error("det(Q) vanished; Q is not invertible on the grid");
    return -static_cast<double>(s) * spec.h;
}

struct SimulationResult {
    GridSignal x;  // state, from inf supp(u) up to T_out
    GridSignal y;  // output y(t) = x(t - L_N) on [0, T_out)
};

// Explicit forward recursion; x vanishes before inf supp(u).
inline SimulationResult simulate(const SystemSpec& spec, const GridSignal& u, double T_out) {
    spec.validate();
    if (u.dim() != spec.m) throw std::invalid_argument("simulate: input dimension mismatch");
    detail::check_same_step(spec.h, u.grid_step());
    if (!(T_out > 0.0)) throw std::invalid_argument("simulate: T_out must be positive");

    const Index L = spec.largest_delay_idx();
    const Index k_out = static_cast<Index>(std::llround(T_out / spec.h));
    Index u_start;
    const bool driven = u.support_start(u_start);
    const Index x_begin = driven ? std::min<Index>(u_start, k_out) : k_out;

    GridSignal x(spec.h, spec.d, x_begin, static_cast<std::size_t>(std::max<Index>(0, k_out - x_begin)));
    for (Index k = x_begin; k < k_out; ++k) {
        Eigen::VectorXd v = spec.B * u.vector_at(k);
        for (int j = 0; j < spec.N(); ++j)
            v += spec.A[static_cast<std::size_t>(j)] *
                 x.vector_at(k - spec.delay_idx[static_cast<std::size_t>(j)]);
        for (std::size_t i = 0; i < spec.g.size(); ++i)
            v += spec.h * (spec.g[i] * x.vector_at(k - static_cast<Index>(i) - 1));
        for (int c = 0; c < spec.d; ++c) x.at(k, c) = v(c);
    }

    GridSignal y(spec.h, spec.d, 0, static_cast<std::size_t>(k_out));
    for (Index k = 0; k < k_out; ++k)
        for (int c = 0; c < spec.d; ++c) y.at(k, c) = x.value(k - L, c);
    return {std::move(x), std::move(y)};
}

// Max over cells in [0, T - L_N] of ||(Q * y)(t)||_1, y extended by zero on
// the negative axis.  Near zero means y lies in the state space X^{Q,1}
// at grid resolution.
inline double state_residual(const SystemSpec& spec, const GridSignal& y) {
    spec.validate();
    if (y.dim() != spec.d) throw std::invalid_argument("state_residual: dimension mismatch");
    const Index L = spec.largest_delay_idx();
    const Index k_hi = y.end() - L;  // cells [0, k_hi)
    if (k_hi <= 0)
        throw std::invalid_argument("state_residual: window shorter than the largest delay");
    auto [Q, P] = build_QP(spec);
    (void)P;
    GridSignal qy = apply_to_signal(Q, y.restricted(0, y.end()));
    double worst = 0.0;
    for (Index k = 0; k < k_hi; ++k) {
        double cell = 0.0;
        for (int c = 0; c < spec.d; ++c) cell += std::abs(qy.value(k, c));
        worst = std::max(worst, cell);
    }
    return worst;
}

// Continue an initial window y0 on [0, L_N) by the homogeneous recursion up
// to time T; the result has state_residual ~ 0 by construction.
inline GridSignal extend_to_state(const SystemSpec& spec, const GridSignal& y0, double T) {
    spec.validate();
    if (y0.dim() != spec.d) throw std::invalid_argument("extend_to_state: dimension mismatch");
    const Index L = spec.largest_delay_idx();
    if (y0.start() != 0 || y0.cells() != L)
        throw std::invalid_argument("extend_to_state: y0 must cover exactly [0, Lambda_N)");
    const Index k_out = static_cast<Index>(std::llround(T / spec.h));
    GridSignal y(spec.h, spec.d, 0, static_cast<std::size_t>(std::max<Index>(L, k_out)));
    for (Index k = 0; k < L; ++k)
        for (int c = 0; c < spec.d; ++c) y.at(k, c) = y0.value(k, c);
    for (Index k = L; k < k_out; ++k) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(spec.d);
        for (int j = 0; j < spec.N(); ++j)
            v += spec.A[static_cast<std::size_t>(j)] *
                 y.vector_at(k - spec.delay_idx[static_cast<std::size_t>(j)]);
        for (std::size_t i = 0; i < spec.g.size(); ++i)
            v += spec.h * (spec.g[i] * y.vector_at(k - static_cast<Index>(i) - 1));
        for (int c = 0; c < spec.d; ++c) y.at(k, c) = v(c);
    }
    return y;
}

}  // namespace delayreach
