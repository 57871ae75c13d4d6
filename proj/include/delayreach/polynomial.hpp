#pragma once

// Small dense real-coefficient polynomials: arithmetic, tolerance-aware
// Euclidean gcd, and roots via the companion matrix.

#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace delayreach {

class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coeffs) : c_(std::move(coeffs)) { trim(0.0); }
    static Polynomial constant(double v) { return Polynomial({v}); }
    static Polynomial monomial(int degree, double v = 1.0) {
        std::vector<double> c(static_cast<std::size_t>(degree) + 1, 0.0);
        c.back() = v;
        return Polynomial(std::move(c));
    }

    const std::vector<double>& coeffs() const { return c_; }
    bool is_zero() const { return c_.empty(); }
    int degree() const { return static_cast<int>(c_.size()) - 1; }  // -1 for zero
    double leading() const { return c_.empty() ? 0.0 : c_.back(); }
    double coeff(int k) const {
        return (k >= 0 && k < static_cast<int>(c_.size())) ? c_[static_cast<std::size_t>(k)] : 0.0;
    }

    double max_abs_coeff() const {
        double m = 0.0;
        for (double v : c_) m = std::max(m, std::abs(v));
        return m;
    }

    // Drop leading coefficients with |c| <= tol.
    void trim(double tol) {
        while (!c_.empty() && std::abs(c_.back()) <= tol) c_.pop_back();
    }

    std::complex<double> eval(std::complex<double> z) const {
        std::complex<double> acc = 0.0;
        for (std::size_t k = c_.size(); k-- > 0;) acc = acc * z + c_[k];
        return acc;
    }

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < c.size(); ++k)
            c[k] = a.coeff(static_cast<int>(k)) + b.coeff(static_cast<int>(k));
        return Polynomial(std::move(c));
    }

    friend Polynomial operator-(const Polynomial& a, const Polynomial& b) {
        std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
        for (std::size_t k = 0; k < c.size(); ++k)
            c[k] = a.coeff(static_cast<int>(k)) - b.coeff(static_cast<int>(k));
        return Polynomial(std::move(c));
    }

    friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
        if (a.is_zero() || b.is_zero()) return Polynomial();
        std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.c_.size(); ++i)
            for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
        return Polynomial(std::move(c));
    }

    Polynomial scaled(double s) const {
        std::vector<double> c = c_;
        for (double& v : c) v *= s;
        return Polynomial(std::move(c));
    }

    // Remainder of the Euclidean division by a nonzero divisor.
    Polynomial remainder(const Polynomial& div) const {
        if (div.is_zero()) throw std::invalid_argument("polynomial division by zero");
        std::vector<double> r = c_;
        const int dd = div.degree();
        while (static_cast<int>(r.size()) - 1 >= dd) {
            double q = r.back() / div.leading();
            int shift = static_cast<int>(r.size()) - 1 - dd;
            for (int k = 0; k <= dd; ++k)
                r[static_cast<std::size_t>(k + shift)] -= q * div.coeff(k);
            r.pop_back();
        }
        return Polynomial(std::move(r));
    }

    std::complex<double> eval_derivative(std::complex<double> z) const {
        std::complex<double> acc = 0.0;
        for (std::size_t k = c_.size(); k-- > 1;)
            acc = acc * z + static_cast<double>(k) * c_[k];
        return acc;
    }

    // Roots of the monic normalization via the companion matrix, polished
    // by a few Newton steps.
    std::vector<std::complex<double>> roots() const {
        if (degree() < 1) return {};
        const int n = degree();
        Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(n, n);
        for (int k = 0; k < n; ++k) comp(k, n - 1) = -c_[static_cast<std::size_t>(k)] / c_.back();
        for (int k = 1; k < n; ++k) comp(k, k - 1) = 1.0;
        Eigen::EigenSolver<Eigen::MatrixXd> es(comp, /*computeEigenvectors=*/false);
        std::vector<std::complex<double>> out(static_cast<std::size_t>(n));
        for (int k = 0; k < n; ++k) {
            std::complex<double> z = es.eigenvalues()(k);
            for (int it = 0; it < 4; ++it) {
                std::complex<double> dp = eval_derivative(z);
                if (std::abs(dp) == 0.0) break;
                std::complex<double> step = eval(z) / dp;
                z -= step;
                if (std::abs(step) < 1e-15 * (1.0 + std::abs(z))) break;
            }
            out[static_cast<std::size_t>(k)] = z;
        }
        return out;
    }

private:
    std::vector<double> c_;  // ascending powers
};

// gcd with monic normalization and coefficient tolerance at each step;
// near-zero leading coefficients are degree-trimmed first.
inline Polynomial poly_gcd(Polynomial a, Polynomial b, double rel_tol = 1e-9) {
    auto normalize = [&](Polynomial& p) {
        p.trim(rel_tol * (1.0 + p.max_abs_coeff()));
        if (!p.is_zero()) p = p.scaled(1.0 / p.leading());
    };
    normalize(a);
    normalize(b);
    while (!b.is_zero()) {
        Polynomial r = a.remainder(b);
        normalize(r);
        a = std::move(b);
        b = std::move(r);
    }
    return a;  // monic, or zero when both inputs vanish
}

inline Polynomial poly_gcd(const std::vector<Polynomial>& ps, double rel_tol = 1e-9) {
    Polynomial g;
    for (const auto& p : ps) g = poly_gcd(g, p, rel_tol);
    return g;
}

}  // namespace delayreach
