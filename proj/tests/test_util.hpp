#pragma once

// Shared deterministic generators for randomized tests.

#include <random>
#include <vector>

#include <Eigen/Dense>

#include "delayreach/measure.hpp"
#include "delayreach/system.hpp"

namespace testutil {

using delayreach::GridSignal;
using delayreach::Index;
using delayreach::ScalarMeasure;
using delayreach::SystemSpec;

using Rng = std::mt19937_64;

inline double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols, double amp = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = uniform(rng, -amp, amp);
    return m;
}

// Random spec with contractive dynamics: the total delayed mass is scaled to
// 0.8 so truncated inverses and long simulations stay well conditioned.
inline SystemSpec random_spec(Rng& rng, int d, bool with_density, double h = 0.25) {
    SystemSpec spec;
    spec.d = d;
    spec.m = uniform_int(rng, 1, 2);
    spec.h = h;

    const int N = uniform_int(rng, 1, 3);
    std::vector<Index> idx;
    while (static_cast<int>(idx.size()) < N) {
        Index k = uniform_int(rng, 1, 12);
        bool dup = false;
        for (Index e : idx) dup = dup || e == k;
        if (!dup) idx.push_back(k);
    }
    std::sort(idx.begin(), idx.end());
    spec.delay_idx = idx;

    double a_mass = 0.0;
    for (int j = 0; j < N; ++j) {
        spec.A.push_back(random_matrix(rng, d, d));
        a_mass += spec.A.back().cwiseAbs().rowwise().sum().maxCoeff();
    }
    double g_mass = 0.0;
    if (with_density) {
        for (Index t = 0; t < spec.delay_idx.back(); ++t) {
            spec.g.push_back(random_matrix(rng, d, d));
            g_mass += h * spec.g.back().cwiseAbs().rowwise().sum().maxCoeff();
        }
    }
    const double scale = 0.8 / std::max(1.0, a_mass + g_mass);
    for (auto& a : spec.A) a *= scale;
    for (auto& gi : spec.g) gi *= scale;

    spec.B = random_matrix(rng, d, spec.m);
    return spec;
}

// Commensurate g == 0 spec on delays k_j * (tau_idx * h), k_j <= max_k.
inline SystemSpec random_commensurate_spec(Rng& rng, int d, int m, int tau_idx, int max_k,
                                           double h = 0.25, double contraction = 0.8) {
    SystemSpec spec;
    spec.d = d;
    spec.m = m;
    spec.h = h;

    const int N = uniform_int(rng, 1, std::min(2, max_k));
    std::vector<int> ks;
    while (static_cast<int>(ks.size()) < N) {
        int k = uniform_int(rng, 1, max_k);
        bool dup = false;
        for (int e : ks) dup = dup || e == k;
        if (!dup) ks.push_back(k);
    }
    std::sort(ks.begin(), ks.end());
    for (int k : ks) spec.delay_idx.push_back(static_cast<Index>(k) * tau_idx);

    double a_mass = 0.0;
    for (int j = 0; j < N; ++j) {
        spec.A.push_back(random_matrix(rng, d, d));
        a_mass += spec.A.back().cwiseAbs().rowwise().sum().maxCoeff();
    }
    if (contraction > 0.0) {
        const double scale = contraction / std::max(1.0, a_mass);
        for (auto& a : spec.A) a *= scale;
    }
    spec.B = random_matrix(rng, d, m);
    return spec;
}

inline GridSignal random_signal(Rng& rng, double h, int dim, Index start, Index cells,
                                double amp = 1.0) {
    GridSignal sig(h, dim, start, static_cast<std::size_t>(cells));
    for (Index k = start; k < start + cells; ++k)
        for (int c = 0; c < dim; ++c) sig.at(k, c) = uniform(rng, -amp, amp);
    return sig;
}

// Scalar hand spec: x(t) = 0.5 x(t-1) + u(t), h = 0.25.
inline SystemSpec scalar_spec(double a = 0.5, double b = 1.0) {
    SystemSpec spec;
    spec.d = 1;
    spec.m = 1;
    spec.h = 0.25;
    spec.delay_idx = {4};
    spec.A = {Eigen::MatrixXd::Constant(1, 1, a)};
    spec.B = Eigen::MatrixXd::Constant(1, 1, b);
    return spec;
}

// d=2 nilpotent example: A1 = [[0,1],[0,0]], B = (1,0)^T; the left vector
// (0,1) annihilates both B and the limit pair.
inline SystemSpec nilpotent_spec() {
    SystemSpec spec;
    spec.d = 2;
    spec.m = 1;
    spec.h = 0.25;
    spec.delay_idx = {4};
    Eigen::MatrixXd a(2, 2);
    a << 0, 1, 0, 0;
    spec.A = {a};
    spec.B = Eigen::MatrixXd::Zero(2, 1);
    spec.B(0, 0) = 1.0;
    return spec;
}

// Past-supported random measure with a dominant leading atom, so its causal
// inverse decays geometrically.
inline ScalarMeasure random_contractive_measure(Rng& rng, double h, Index lead_idx,
                                                bool with_density) {
    const double w0 = (uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.5, 1.5);
    std::vector<delayreach::Atom> atoms{{lead_idx, w0}};
    double budget = 0.7 * std::abs(w0);
    const int extra = uniform_int(rng, 0, 3);
    for (int i = 0; i < extra; ++i) {
        Index at = uniform_int(rng, static_cast<int>(lead_idx) + 1, 0);
        double w = uniform(rng, -budget / (extra + 1), budget / (extra + 1));
        atoms.push_back({at, w});
    }
    std::vector<double> dens;
    Index ds = 0;
    if (with_density && lead_idx < -1) {
        const Index n = -lead_idx - 1;
        ds = lead_idx + 1;
        const double damp = 0.2 * std::abs(w0) / (h * static_cast<double>(n));
        for (Index i = 0; i < n; ++i) dens.push_back(uniform(rng, -damp, damp));
    }
    return ScalarMeasure(h, std::move(atoms), ds, std::move(dens));
}

}  // namespace testutil
