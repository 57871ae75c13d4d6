#pragma once

// Rank criterion rank[F, B] = d for every F in the closure of Qhat(.):
// refutation-only grid scan in general, exact polynomial test for systems
// with g == 0 (grid delays are always commensurate, base step = gcd * h).

#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "delayreach/laplace.hpp"
#include "delayreach/polynomial.hpp"
#include "delayreach/system.hpp"

namespace delayreach {

enum class Verdict { Pass, Fail, Inconclusive };

struct HautusWitness {
    std::complex<double> location;  // p for the grid method, z for the exact one
    bool at_limit = false;          // witness against the [-A_N, B] limit pair
    Eigen::VectorXcd g;             // unit left vector with ||g^T [F, B]|| <= tol
};

struct HautusReport {
    Verdict verdict = Verdict::Inconclusive;
    double min_margin = 0.0;
    double limit_margin = 0.0;
    std::optional<HautusWitness> witness;
    std::string method;  // "grid" or "exact-commensurate"
};

namespace detail {

// Deterministic compass search from the scan minimum; the margin is cheap
// and smooth away from rank drops, so this converges onto a true zero when
// one exists and stalls at an interior local minimum otherwise.
inline MarginSample polish_margin_minimum(const SystemSpec& spec, MarginSample start,
                                          double step) {
    MarginSample best = start;
    for (int iter = 0; iter < 400 && step > 1e-13; ++iter) {
        bool improved = false;
        for (const Complex dir : {Complex(1, 0), Complex(-1, 0), Complex(0, 1), Complex(0, -1)}) {
            Complex cand = best.p + step * dir;
            if (std::abs(cand.real()) * spec.largest_delay() > 690.0) continue;
            MarginSample s = coprimeness_margin(spec, cand);
            if (s.margin < best.margin) {
                best = s;
                improved = true;
            }
        }
        if (!improved) step *= 0.5;
    }
    return best;
}

}  // namespace detail

// Finite scans refute but cannot certify: pass needs every sampled margin
// above tol, fail needs a (locally polished) sample at tol/10, anything
// between is reported as inconclusive.
inline HautusReport hautus_grid_check(const SystemSpec& spec, double re_min, double re_max,
                                      double im_min, double im_max, double density,
                                      double tol = 1e-6) {
    HautusReport rep;
    rep.method = "grid";
    ScanResult scan = margin_scan(spec, re_min, re_max, im_min, im_max, density);
    scan.minimum = detail::polish_margin_minimum(spec, scan.minimum, density);
    rep.min_margin = scan.minimum.margin;
    rep.limit_margin = scan.limit.margin;

    const MarginSample& worst =
        scan.limit.margin < scan.minimum.margin ? scan.limit : scan.minimum;
    if (worst.margin <= tol / 10.0) {
        rep.verdict = Verdict::Fail;
        rep.witness = HautusWitness{worst.p, worst.is_limit, worst.witness_g};
    } else if (scan.minimum.margin > tol && scan.limit.margin > tol) {
        rep.verdict = Verdict::Pass;
    } else {
        rep.verdict = Verdict::Inconclusive;
    }
    return rep;
}

inline HautusReport hautus_grid_check(const SystemSpec& spec, double density = 0.05,
                                      double tol = 1e-6) {
    double a, b, c, d;
    default_strip(spec, a, b, c, d);
    return hautus_grid_check(spec, a, b, c, d, density, tol);
}

namespace detail {

inline Polynomial poly_det(const std::vector<std::vector<Polynomial>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    Polynomial acc;
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::vector<Polynomial>> sub(n - 1);
        for (std::size_t r = 1; r < n; ++r)
            for (std::size_t cc = 0; cc < n; ++cc)
                if (cc != c) sub[r - 1].push_back(m[r][cc]);
        Polynomial term = m[0][c] * poly_det(sub);
        acc = (c % 2 == 0) ? acc + term : acc - term;
    }
    return acc;
}

inline void enumerate_subsets(int n, int k, std::vector<int>& cur,
                              std::vector<std::vector<int>>& out, int from = 0) {
    if (static_cast<int>(cur.size()) == k) {
        out.push_back(cur);
        return;
    }
    for (int c = from; c <= n - (k - static_cast<int>(cur.size())); ++c) {
        cur.push_back(c);
        enumerate_subsets(n, k, cur, out, c + 1);
        cur.pop_back();
    }
}

}  // namespace detail

// Exact test for g == 0: with z = e^{-p tau}, the closure of Qhat is
// { z^{-K} M(z) : z != 0 } united with {-A_N}, M(z) = I - sum_j A_j z^{k_j}.
// Pass iff rank[A_N, B] = d and the d x d minors of [M(z), B] have no
// common complex root; roots of the first nonzero minor are rank-checked,
// with the minor gcd as a cross-check.
inline HautusReport hautus_exact_commensurate(const SystemSpec& spec, double tol = 1e-9) {
    spec.validate();
    if (spec.has_density())
        throw std::invalid_argument("hautus_exact_commensurate: requires g == 0");
    if (spec.d > 4)
        throw std::invalid_argument("hautus_exact_commensurate: dimension cap (d <= 4) exceeded");

    HautusReport rep;
    rep.method = "exact-commensurate";

    const Index gcd = spec.delay_gcd();
    const auto rank_margin = [&](std::complex<double> z) {
        Eigen::MatrixXcd concat(spec.d, spec.d + spec.m);
        Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(spec.d, spec.d);
        for (int j = 0; j < spec.N(); ++j) {
            const Index kj = spec.delay_idx[static_cast<std::size_t>(j)] / gcd;
            M -= spec.A[static_cast<std::size_t>(j)].cast<std::complex<double>>() *
                 std::pow(z, static_cast<double>(kj));
        }
        concat.leftCols(spec.d) = M;
        concat.rightCols(spec.m) = spec.B.cast<std::complex<double>>();
        return detail::margin_of(concat, z, false);
    };

    // limit pair [-A_N, B]
    MarginSample lim = limit_margin(spec);
    rep.limit_margin = lim.margin;
    rep.min_margin = lim.margin;
    if (lim.margin <= tol) {
        rep.verdict = Verdict::Fail;
        rep.witness = HautusWitness{lim.p, true, lim.witness_g};
        return rep;
    }

    // polynomial matrix [M(z), B]
    std::vector<std::vector<Polynomial>> pm(
        static_cast<std::size_t>(spec.d),
        std::vector<Polynomial>(static_cast<std::size_t>(spec.d + spec.m)));
    for (int i = 0; i < spec.d; ++i) {
        for (int c = 0; c < spec.d; ++c) pm[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
            (i == c) ? Polynomial::constant(1.0) : Polynomial();
        for (int j = 0; j < spec.N(); ++j) {
            const int kj = static_cast<int>(spec.delay_idx[static_cast<std::size_t>(j)] / gcd);
            for (int c = 0; c < spec.d; ++c) {
                const double a = spec.A[static_cast<std::size_t>(j)](i, c);
                if (a != 0.0)
                    pm[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] =
                        pm[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)] -
                        Polynomial::monomial(kj, a);
            }
        }
        for (int c = 0; c < spec.m; ++c)
            pm[static_cast<std::size_t>(i)][static_cast<std::size_t>(spec.d + c)] =
                Polynomial::constant(spec.B(i, c));
    }

    std::vector<std::vector<int>> subsets;
    std::vector<int> cur;
    detail::enumerate_subsets(spec.d + spec.m, spec.d, cur, subsets);
    std::vector<Polynomial> minors;
    const double coeff_tol = [&] {
        double mx = 0.0;
        for (const auto& row : pm)
            for (const auto& e : row) mx = std::max(mx, e.max_abs_coeff());
        return 1e-9 * (1.0 + mx);
    }();
    for (const auto& cols : subsets) {
        std::vector<std::vector<Polynomial>> sub(static_cast<std::size_t>(spec.d));
        for (int r = 0; r < spec.d; ++r)
            for (int c : cols)
                sub[static_cast<std::size_t>(r)].push_back(
                    pm[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
        Polynomial mi = detail::poly_det(sub);
        mi.trim(coeff_tol);
        minors.push_back(std::move(mi));
    }

    const Polynomial* first_nonzero = nullptr;
    for (const auto& mi : minors)
        if (!mi.is_zero()) {
            first_nonzero = &mi;
            break;
        }

    if (first_nonzero == nullptr) {
        // rank < d for every z; witness at z = 1
        MarginSample s = rank_margin(1.0);
        rep.min_margin = std::min(rep.min_margin, s.margin);
        rep.verdict = Verdict::Fail;
        rep.witness = HautusWitness{s.p, false, s.witness_g};
        return rep;
    }

    // authoritative check: rank at every root of the first nonzero minor
    // (a common root of all minors is in particular one of these)
    std::optional<MarginSample> fail_at;
    for (const auto& z : first_nonzero->roots()) {
        MarginSample s = rank_margin(z);
        rep.min_margin = std::min(rep.min_margin, s.margin);
        if (s.margin <= tol && (!fail_at || s.margin < fail_at->margin)) fail_at = s;
    }

    // cross-check: gcd of all minors should be nonconstant exactly when a
    // rank drop was found
    Polynomial g = poly_gcd(minors);
    const bool gcd_common_root = g.degree() >= 1;
    if (fail_at) {
        rep.verdict = Verdict::Fail;
        rep.witness = HautusWitness{fail_at->p, false, fail_at->witness_g};
    } else {
        rep.verdict = Verdict::Pass;
        if (gcd_common_root)
            throw std::runtime_error(
                "hautus_exact_commensurate: minor gcd disagrees with root rank check");
    }
    return rep;
}

}  // namespace delayreach
