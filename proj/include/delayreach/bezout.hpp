#pragma once

// Left-coprimeness: verification of Q*R + P*S = delta_0 I over the measure
// algebra, and a constructive least-squares solver in the atomic case
// (g == 0), where past-supported atomic measures are polynomials in the
// backward shift sigma = delta_{-tau}.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "delayreach/measure.hpp"
#include "delayreach/system.hpp"

namespace delayreach {

struct BezoutPair {
    MatrixMeasure R;  // d x d, past-supported
    MatrixMeasure S;  // m x d, past-supported
    double residual = 0.0;
    int degree = 0;   // shift-polynomial degree of R used by the solver
};

// Residual of Q*R + P*S - delta_0 I: per entry, max atom defect plus the
// L1 mass of the density defect, maximized over entries.
inline double bezout_residual(const MatrixMeasure& Q, const MatrixMeasure& P,
                              const MatrixMeasure& R, const MatrixMeasure& S) {
    if (Q.rows() != Q.cols() || R.rows() != Q.cols() || R.cols() != Q.rows() ||
        P.rows() != Q.rows() || S.rows() != P.cols() || S.cols() != Q.rows())
        throw std::invalid_argument("bezout_residual: dimension mismatch");
    MatrixMeasure defect =
        conv(Q, R) + conv(P, S) - MatrixMeasure::identity(Q.rows(), Q.grid_step());
    double worst = 0.0;
    for (int i = 0; i < defect.rows(); ++i)
        for (int j = 0; j < defect.cols(); ++j) {
            const ScalarMeasure& e = defect(i, j);
            double atom_max = 0.0;
            for (const auto& a : e.atoms()) atom_max = std::max(atom_max, std::abs(a.w));
            double dens_l1 = 0.0;
            for (double v : e.density()) dens_l1 += e.grid_step() * std::abs(v);
            worst = std::max(worst, atom_max + dens_l1);
        }
    return worst;
}

inline std::pair<bool, double> verify_bezout(const MatrixMeasure& Q, const MatrixMeasure& P,
                                             const MatrixMeasure& R, const MatrixMeasure& S,
                                             double tol) {
    if (!R.is_past_supported() || !S.is_past_supported())
        throw std::invalid_argument("verify_bezout: R and S must be past-supported");
    double res = bezout_residual(Q, P, R, S);
    return {res <= tol, res};
}

struct BezoutFailure {
    double best_residual = kPlusInfinity;  // over all degrees tried
    int max_degree_tried = -1;
};

// Coefficient matching for Q(sigma) R(sigma) + B S(sigma) = I with
// deg R <= D, deg S <= D + K, solved in least squares and accepted when the
// re-verified residual is <= tol; D runs from 0 to the degree cap
// (d*K by default, Smith-form heuristic).
inline std::optional<BezoutPair> solve_bezout_commensurate(const SystemSpec& spec,
                                                           double tol = 1e-9,
                                                           int max_degree = -1,
                                                           BezoutFailure* failure = nullptr,
                                                           int min_degree = 0) {
    spec.validate();
    if (spec.has_density())
        throw std::invalid_argument("solve_bezout_commensurate: requires g == 0");

    const Index gcd = spec.delay_gcd();
    const int K = static_cast<int>(spec.largest_delay_idx() / gcd);
    const Index tau_idx = gcd;  // sigma = delta_{-gcd*h}
    if (max_degree < 0) max_degree = spec.d * K;

    // coefficients of Q(sigma): Qc[K] = I, Qc[K - k_j] -= A_j
    std::vector<Eigen::MatrixXd> Qc(static_cast<std::size_t>(K) + 1,
                                    Eigen::MatrixXd::Zero(spec.d, spec.d));
    Qc[static_cast<std::size_t>(K)] = Eigen::MatrixXd::Identity(spec.d, spec.d);
    for (int j = 0; j < spec.N(); ++j) {
        const int kj = static_cast<int>(spec.delay_idx[static_cast<std::size_t>(j)] / gcd);
        Qc[static_cast<std::size_t>(K - kj)] -= spec.A[static_cast<std::size_t>(j)];
    }

    auto [Q, P] = build_QP(spec);
    BezoutFailure fail;

    for (int D = std::max(0, min_degree); D <= max_degree; ++D) {
        const int degS = D + K;
        const int n_eq = (degS + 1) * spec.d * spec.d;
        const int n_R = (D + 1) * spec.d * spec.d;
        const int n_S = (degS + 1) * spec.m * spec.d;
        Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n_eq, n_R + n_S);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(n_eq);

        auto eq_row = [&](int t, int i, int j) { return (t * spec.d + i) * spec.d + j; };
        auto r_col = [&](int r, int i, int j) { return (r * spec.d + i) * spec.d + j; };
        auto s_col = [&](int s, int i, int j) { return n_R + (s * spec.m + i) * spec.d + j; };

        for (int t = 0; t <= degS; ++t) {
            // sum_q Qc[q] R[t-q] contribution
            for (int q = 0; q <= K; ++q) {
                const int r = t - q;
                if (r < 0 || r > D) continue;
                for (int i = 0; i < spec.d; ++i)
                    for (int j = 0; j < spec.d; ++j)
                        for (int k = 0; k < spec.d; ++k)
                            A(eq_row(t, i, j), r_col(r, k, j)) +=
                                Qc[static_cast<std::size_t>(q)](i, k);
            }
            // B S[t] contribution
            for (int i = 0; i < spec.d; ++i)
                for (int j = 0; j < spec.d; ++j)
                    for (int k = 0; k < spec.m; ++k)
                        A(eq_row(t, i, j), s_col(t, k, j)) += spec.B(i, k);
            if (t == 0)
                for (int i = 0; i < spec.d; ++i) b(eq_row(0, i, i)) = 1.0;
        }

        Eigen::VectorXd x = A.bdcSvd(Eigen::ComputeThinU | Eigen::ComputeThinV).solve(b);

        // assemble the candidate pair as atomic measures on sigma powers
        MatrixMeasure R(spec.d, spec.d, spec.h), S(spec.m, spec.d, spec.h);
        for (int r = 0; r <= D; ++r)
            for (int i = 0; i < spec.d; ++i)
                for (int j = 0; j < spec.d; ++j) {
                    const double w = x(r_col(r, i, j));
                    if (w != 0.0)
                        R(i, j) = R(i, j) + ScalarMeasure::dirac(spec.h, -tau_idx * r, w);
                }
        for (int s = 0; s <= degS; ++s)
            for (int i = 0; i < spec.m; ++i)
                for (int j = 0; j < spec.d; ++j) {
                    const double w = x(s_col(s, i, j));
                    if (w != 0.0)
                        S(i, j) = S(i, j) + ScalarMeasure::dirac(spec.h, -tau_idx * s, w);
                }

        const double res = bezout_residual(Q, P, R, S);
        fail.best_residual = std::min(fail.best_residual, res);
        fail.max_degree_tried = D;
        if (res <= tol) return BezoutPair{std::move(R), std::move(S), res, D};
    }

    if (failure) *failure = fail;
    return std::nullopt;
}

}  // namespace delayreach
