#pragma once

// Frequency-domain side: transfer data Qhat(p), Phat(p) and the
// coprimeness margin sigma_min([Qhat(p), B]) over points and strips.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "delayreach/system.hpp"

namespace delayreach {

using Complex = std::complex<double>;

struct TransferData {
    Eigen::MatrixXcd Qhat;  // d x d
    Eigen::MatrixXd Phat;   // = B
};

// Qhat(p) = e^{p L_N} (I - sum_j A_j e^{-p L_j} - int_0^{L_N} g(s) e^{-ps} ds)
// with the integral by rectangle quadrature on the same cells as the
// simulator; Phat(p) = B.
inline TransferData eval_transfer(const SystemSpec& spec, Complex p) {
    spec.validate();
    const double LN = spec.largest_delay();
    if (std::abs(p.real()) * LN > 700.0)
        throw std::invalid_argument("eval_transfer: |Re(p)| * Lambda_N too large (overflow guard)");
    Eigen::MatrixXcd inner = Eigen::MatrixXcd::Identity(spec.d, spec.d);
    for (int j = 0; j < spec.N(); ++j) {
        const double Lj = static_cast<double>(spec.delay_idx[static_cast<std::size_t>(j)]) * spec.h;
        inner -= spec.A[static_cast<std::size_t>(j)].cast<Complex>() * std::exp(-p * Lj);
    }
    for (std::size_t i = 0; i < spec.g.size(); ++i) {
        const double s = static_cast<double>(i + 1) * spec.h;
        inner -= spec.h * std::exp(-p * s) * spec.g[i].cast<Complex>();
    }
    return {std::exp(p * LN) * inner, spec.B};
}

struct MarginSample {
    Complex p{0.0, 0.0};
    double margin = 0.0;
    Eigen::VectorXcd witness_g;  // unit left direction achieving the margin
    bool is_limit = false;       // sample of the limit pair [-A_N, B]
};

namespace detail {

inline MarginSample margin_of(const Eigen::MatrixXcd& concat, Complex p, bool is_limit) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(concat.adjoint(), Eigen::ComputeThinV);
    MarginSample s;
    s.p = p;
    s.is_limit = is_limit;
    const auto& sing = svd.singularValues();
    s.margin = sing(sing.size() - 1);
    s.witness_g = svd.matrixV().col(sing.size() - 1).conjugate();
    return s;
}

}  // namespace detail

// Smallest singular value of [Qhat(p), B] with the left direction achieving
// it; equivalent to the sum-of-norms infimum up to a factor sqrt(2).
inline MarginSample coprimeness_margin(const SystemSpec& spec, Complex p) {
    TransferData td = eval_transfer(spec, p);
    Eigen::MatrixXcd concat(spec.d, spec.d + spec.m);
    concat.leftCols(spec.d) = td.Qhat;
    concat.rightCols(spec.m) = td.Phat.cast<Complex>();
    return detail::margin_of(concat, p, false);
}

// Margin of the limit pair [-A_N, B] reached as Re(p) -> -infinity.
inline MarginSample limit_margin(const SystemSpec& spec) {
    spec.validate();
    Eigen::MatrixXcd concat(spec.d, spec.d + spec.m);
    concat.leftCols(spec.d) = -spec.A.back().cast<Complex>();
    concat.rightCols(spec.m) = spec.B.cast<Complex>();
    return detail::margin_of(concat, Complex(-kPlusInfinity, 0.0), true);
}

struct ScanResult {
    MarginSample minimum;       // over the sampled strip
    MarginSample limit;         // the [-A_N, B] pair
    double im_period = 0.0;     // Im-periodicity of the margin (grid systems)
    std::size_t samples = 0;
};

// Minimum margin over a rectangular grid in the complex plane, plus the
// limit margin.  Deterministic reduction: smallest margin, ties broken by
// lexicographic (Re, Im).
inline ScanResult margin_scan(const SystemSpec& spec, double re_min, double re_max,
                              double im_min, double im_max, double step) {
    spec.validate();
    if (!(step > 0.0)) throw std::invalid_argument("margin_scan: grid step must be positive");
    if (re_max < re_min || im_max < im_min)
        throw std::invalid_argument("margin_scan: empty strip");
    ScanResult out;
    // all delays and density cells are grid multiples; with g == 0 the
    // periodicity improves to the gcd of the delays
    const Index base = spec.has_density() ? 1 : spec.delay_gcd();
    out.im_period = 2.0 * M_PI / (static_cast<double>(base) * spec.h);

    bool first = true;
    const auto n_re = static_cast<std::size_t>(std::floor((re_max - re_min) / step)) + 1;
    const auto n_im = static_cast<std::size_t>(std::floor((im_max - im_min) / step)) + 1;
    for (std::size_t i = 0; i < n_re; ++i)
        for (std::size_t j = 0; j < n_im; ++j) {
            Complex p(re_min + static_cast<double>(i) * step,
                      im_min + static_cast<double>(j) * step);
            MarginSample s = coprimeness_margin(spec, p);
            ++out.samples;
            if (first || s.margin < out.minimum.margin) {
                out.minimum = s;
                first = false;
            }
        }
    out.limit = limit_margin(spec);
    return out;
}

// Documented heuristic for the default scan strip: Re(p) -> +inf cannot
// violate the rank condition (Qhat ~ e^{p L_N} I), Re(p) -> -inf reduces to
// the [-A_N, B] limit, so a bounded strip suffices.
inline void default_strip(const SystemSpec& spec, double& re_min, double& re_max,
                          double& im_min, double& im_max) {
    const double eps_g = 1e-6;
    double a_norm = 0.0;
    for (const auto& a : spec.A) a_norm += a.cwiseAbs().maxCoeff();
    re_min = -std::log(1.0 / eps_g) / spec.largest_delay();
    re_max = std::log(2.0 * a_norm + 2.0) / spec.largest_delay();
    const Index base = spec.has_density() ? 1 : spec.delay_gcd();
    im_min = 0.0;  // margin is symmetric in Im(p) for real data
    im_max = 2.0 * M_PI / (static_cast<double>(base) * spec.h);
}

}  // namespace delayreach
