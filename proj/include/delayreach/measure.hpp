#pragma once

// Convolution algebra of compactly supported matrix-valued Radon measures
// on a uniform grid, plus piecewise-constant grid signals.
//
// A scalar measure is a finite list of atoms (Dirac masses at grid nodes)
// plus a gridded density part.  A density sample s at cell index k carries
// mass h*s located at k*h, so convolution acts uniformly on the combined
// mass sequence while the atom/density split is tracked separately.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace delayreach {

using Index = std::int64_t;

inline constexpr double kPlusInfinity = std::numeric_limits<double>::infinity();

struct Atom {
    Index idx = 0;   // location = idx * h
    double w = 0.0;  // nonzero after normalization
};

namespace detail {

inline void check_grid_step(double h) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw std::invalid_argument("grid step must be positive and finite");
}

inline void check_same_step(double ha, double hb) {
    if (ha != hb) throw std::invalid_argument("mismatched grid steps");
}

}  // namespace detail

class ScalarMeasure {
public:
    ScalarMeasure() = default;

    explicit ScalarMeasure(double h) : h_(h) { detail::check_grid_step(h); }

    ScalarMeasure(double h, std::vector<Atom> atoms, Index density_start = 0,
                  std::vector<double> density = {})
        : h_(h),
          atoms_(std::move(atoms)),
          density_start_(density_start),
          density_(std::move(density)) {
        detail::check_grid_step(h);
        normalize();
    }

    static ScalarMeasure dirac(double h, Index idx, double w = 1.0) {
        return ScalarMeasure(h, {{idx, w}});
    }

    static ScalarMeasure zero(double h) { return ScalarMeasure(h); }

    double grid_step() const { return h_; }
    const std::vector<Atom>& atoms() const { return atoms_; }
    Index density_start() const { return density_start_; }
    const std::vector<double>& density() const { return density_; }

    bool is_zero() const { return atoms_.empty() && density_.empty(); }
    bool is_atomic() const { return density_.empty(); }

    // Infimum of the support, +inf for the zero measure.  Density support is
    // read off the sample grid, so the value is exact only up to one cell.
    double support_inf() const {
        Index i;
        return support_inf_index(i) ? static_cast<double>(i) * h_ : kPlusInfinity;
    }

    bool support_inf_index(Index& out) const {
        bool have = false;
        Index best = 0;
        if (!atoms_.empty()) {
            best = atoms_.front().idx;
            have = true;
        }
        if (!density_.empty()) {
            if (!have || density_start_ < best) best = density_start_;
            have = true;
        }
        if (have) out = best;
        return have;
    }

    bool support_sup_index(Index& out) const {
        bool have = false;
        Index best = 0;
        if (!atoms_.empty()) {
            best = atoms_.back().idx;
            have = true;
        }
        if (!density_.empty()) {
            Index e = density_start_ + static_cast<Index>(density_.size()) - 1;
            if (!have || e > best) best = e;
            have = true;
        }
        if (have) out = best;
        return have;
    }

    // Atom weight at a given grid node (0 when absent).
    double atom_at(Index idx) const {
        auto it = std::lower_bound(atoms_.begin(), atoms_.end(), idx,
                                   [](const Atom& a, Index i) { return a.idx < i; });
        return (it != atoms_.end() && it->idx == idx) ? it->w : 0.0;
    }

    double density_at(Index idx) const {
        Index off = idx - density_start_;
        if (off < 0 || off >= static_cast<Index>(density_.size())) return 0.0;
        return density_[static_cast<std::size_t>(off)];
    }

    // Total point mass carried by cell idx: atom weight plus h * density.
    double mass_at(Index idx) const { return atom_at(idx) + h_ * density_at(idx); }

    // True when all mass sits at non-positive locations (entry of M(R_-)).
    bool is_past_supported() const {
        Index s;
        if (!support_sup_index(s)) return true;
        return s <= 0;
    }

    double total_variation() const {
        double tv = 0.0;
        for (const auto& a : atoms_) tv += std::abs(a.w);
        for (double v : density_) tv += h_ * std::abs(v);
        return tv;
    }

    ScalarMeasure shifted(Index by) const {
        std::vector<Atom> at = atoms_;
        for (auto& a : at) a.idx += by;
        return ScalarMeasure(h_, std::move(at), density_start_ + by, density_);
    }

    ScalarMeasure scaled(double c) const {
        if (c == 0.0) return zero(h_);
        std::vector<Atom> at = atoms_;
        for (auto& a : at) a.w *= c;
        std::vector<double> de = density_;
        for (auto& v : de) v *= c;
        return ScalarMeasure(h_, std::move(at), density_start_, std::move(de));
    }

    friend ScalarMeasure operator+(const ScalarMeasure& a, const ScalarMeasure& b) {
        detail::check_same_step(a.h_, b.h_);
        std::vector<Atom> atoms;
        atoms.reserve(a.atoms_.size() + b.atoms_.size());
        std::size_t i = 0, j = 0;
        while (i < a.atoms_.size() || j < b.atoms_.size()) {
            if (j >= b.atoms_.size() ||
                (i < a.atoms_.size() && a.atoms_[i].idx < b.atoms_[j].idx)) {
                atoms.push_back(a.atoms_[i++]);
            } else if (i >= a.atoms_.size() || b.atoms_[j].idx < a.atoms_[i].idx) {
                atoms.push_back(b.atoms_[j++]);
            } else {
                atoms.push_back({a.atoms_[i].idx, a.atoms_[i].w + b.atoms_[j].w});
                ++i;
                ++j;
            }
        }
        Index ds = 0;
        std::vector<double> dens;
        if (!a.density_.empty() || !b.density_.empty()) {
            Index lo = std::numeric_limits<Index>::max();
            Index hi = std::numeric_limits<Index>::min();
            if (!a.density_.empty()) {
                lo = std::min(lo, a.density_start_);
                hi = std::max(hi, a.density_start_ + static_cast<Index>(a.density_.size()));
            }
            if (!b.density_.empty()) {
                lo = std::min(lo, b.density_start_);
                hi = std::max(hi, b.density_start_ + static_cast<Index>(b.density_.size()));
            }
            ds = lo;
            dens.assign(static_cast<std::size_t>(hi - lo), 0.0);
            for (std::size_t k = 0; k < a.density_.size(); ++k)
                dens[static_cast<std::size_t>(a.density_start_ - lo) + k] += a.density_[k];
            for (std::size_t k = 0; k < b.density_.size(); ++k)
                dens[static_cast<std::size_t>(b.density_start_ - lo) + k] += b.density_[k];
        }
        return ScalarMeasure(a.h_, std::move(atoms), ds, std::move(dens));
    }

    friend ScalarMeasure operator-(const ScalarMeasure& a, const ScalarMeasure& b) {
        return a + b.scaled(-1.0);
    }

    // Convolution: atom*atom stays atomic, atom*density shifts and scales the
    // density, density*density is the discrete convolution scaled by h.
    friend ScalarMeasure operator*(const ScalarMeasure& a, const ScalarMeasure& b) {
        detail::check_same_step(a.h_, b.h_);
        if (a.is_zero() || b.is_zero()) return zero(a.h_);

        ScalarMeasure out(a.h_);
        // atomic part
        for (const auto& x : a.atoms_)
            for (const auto& y : b.atoms_)
                out = out + dirac(a.h_, x.idx + y.idx, x.w * y.w);

        // cross terms and density*density, accumulated on one window
        bool have_density = !a.density_.empty() || !b.density_.empty();
        if (have_density) {
            Index lo = std::numeric_limits<Index>::max();
            Index hi = std::numeric_limits<Index>::min();
            auto widen = [&](Index s, Index e) {
                lo = std::min(lo, s);
                hi = std::max(hi, e);
            };
            if (!b.density_.empty())
                for (const auto& x : a.atoms_)
                    widen(x.idx + b.density_start_,
                          x.idx + b.density_start_ + static_cast<Index>(b.density_.size()));
            if (!a.density_.empty())
                for (const auto& y : b.atoms_)
                    widen(y.idx + a.density_start_,
                          y.idx + a.density_start_ + static_cast<Index>(a.density_.size()));
            if (!a.density_.empty() && !b.density_.empty())
                widen(a.density_start_ + b.density_start_,
                      a.density_start_ + b.density_start_ +
                          static_cast<Index>(a.density_.size() + b.density_.size()) - 1);
            if (lo <= hi) {
                std::vector<double> dens(static_cast<std::size_t>(hi - lo), 0.0);
                for (const auto& x : a.atoms_)
                    for (std::size_t k = 0; k < b.density_.size(); ++k)
                        dens[static_cast<std::size_t>(x.idx + b.density_start_ - lo) + k] +=
                            x.w * b.density_[k];
                for (const auto& y : b.atoms_)
                    for (std::size_t k = 0; k < a.density_.size(); ++k)
                        dens[static_cast<std::size_t>(y.idx + a.density_start_ - lo) + k] +=
                            y.w * a.density_[k];
                for (std::size_t i = 0; i < a.density_.size(); ++i)
                    for (std::size_t j = 0; j < b.density_.size(); ++j)
                        dens[static_cast<std::size_t>(a.density_start_ + b.density_start_ - lo) +
                             i + j] += a.h_ * a.density_[i] * b.density_[j];
                out = out + ScalarMeasure(a.h_, {}, lo, std::move(dens));
            }
        }
        return out;
    }

private:
    void normalize() {
        std::sort(atoms_.begin(), atoms_.end(),
                  [](const Atom& a, const Atom& b) { return a.idx < b.idx; });
        std::vector<Atom> merged;
        for (const auto& a : atoms_) {
            if (!merged.empty() && merged.back().idx == a.idx)
                merged.back().w += a.w;
            else
                merged.push_back(a);
        }
        merged.erase(std::remove_if(merged.begin(), merged.end(),
                                    [](const Atom& a) { return a.w == 0.0; }),
                     merged.end());
        atoms_ = std::move(merged);

        std::size_t lead = 0;
        while (lead < density_.size() && density_[lead] == 0.0) ++lead;
        std::size_t tail = density_.size();
        while (tail > lead && density_[tail - 1] == 0.0) --tail;
        if (lead > 0 || tail < density_.size()) {
            density_start_ += static_cast<Index>(lead);
            density_ = std::vector<double>(density_.begin() + static_cast<std::ptrdiff_t>(lead),
                                           density_.begin() + static_cast<std::ptrdiff_t>(tail));
        }
        if (density_.empty()) density_start_ = 0;
    }

    double h_ = 1.0;
    std::vector<Atom> atoms_;
    Index density_start_ = 0;
    std::vector<double> density_;
};

// Rectangular array of scalar measures sharing one grid step.
class MatrixMeasure {
public:
    MatrixMeasure() = default;

    MatrixMeasure(int rows, int cols, double h)
        : rows_(rows), cols_(cols), h_(h),
          entries_(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols),
                   ScalarMeasure::zero(h)) {
        if (rows <= 0 || cols <= 0) throw std::invalid_argument("dimensions must be positive");
        detail::check_grid_step(h);
    }

    static MatrixMeasure identity(int d, double h) {
        MatrixMeasure m(d, d, h);
        for (int i = 0; i < d; ++i) m(i, i) = ScalarMeasure::dirac(h, 0, 1.0);
        return m;
    }

    // B * delta at a grid node
    static MatrixMeasure atomic(const Eigen::MatrixXd& w, Index idx, double h) {
        MatrixMeasure m(static_cast<int>(w.rows()), static_cast<int>(w.cols()), h);
        for (int i = 0; i < m.rows_; ++i)
            for (int j = 0; j < m.cols_; ++j)
                if (w(i, j) != 0.0) m(i, j) = ScalarMeasure::dirac(h, idx, w(i, j));
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    double grid_step() const { return h_; }

    ScalarMeasure& operator()(int i, int j) {
        return entries_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
                        static_cast<std::size_t>(j)];
    }
    const ScalarMeasure& operator()(int i, int j) const {
        return entries_[static_cast<std::size_t>(i) * static_cast<std::size_t>(cols_) +
                        static_cast<std::size_t>(j)];
    }

    // Infimum over all entries of the support, +inf if identically zero.
    bool support_inf_index(Index& out) const {
        bool have = false;
        Index best = 0;
        for (const auto& e : entries_) {
            Index s;
            if (e.support_inf_index(s)) {
                if (!have || s < best) best = s;
                have = true;
            }
        }
        if (have) out = best;
        return have;
    }

    bool support_sup_index(Index& out) const {
        bool have = false;
        Index best = 0;
        for (const auto& e : entries_) {
            Index s;
            if (e.support_sup_index(s)) {
                if (!have || s > best) best = s;
                have = true;
            }
        }
        if (have) out = best;
        return have;
    }

    bool is_past_supported() const {
        Index s;
        return !support_sup_index(s) || s <= 0;
    }

    bool has_density() const {
        for (const auto& e : entries_)
            if (!e.density().empty()) return true;
        return false;
    }

    // Matrix of total point masses carried by cell idx.
    Eigen::MatrixXd mass_at(Index idx) const {
        Eigen::MatrixXd m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).mass_at(idx);
        return m;
    }

    Eigen::MatrixXd atom_at(Index idx) const {
        Eigen::MatrixXd m(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).atom_at(idx);
        return m;
    }

    MatrixMeasure shifted(Index by) const {
        MatrixMeasure out(rows_, cols_, h_);
        for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k].shifted(by);
        return out;
    }

    MatrixMeasure scaled(double c) const {
        MatrixMeasure out(rows_, cols_, h_);
        for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k].scaled(c);
        return out;
    }

    friend MatrixMeasure operator+(const MatrixMeasure& a, const MatrixMeasure& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_)
            throw std::invalid_argument("dimension mismatch in matrix-measure sum");
        detail::check_same_step(a.h_, b.h_);
        MatrixMeasure out(a.rows_, a.cols_, a.h_);
        for (std::size_t k = 0; k < a.entries_.size(); ++k)
            out.entries_[k] = a.entries_[k] + b.entries_[k];
        return out;
    }

    friend MatrixMeasure operator-(const MatrixMeasure& a, const MatrixMeasure& b) {
        return a + b.scaled(-1.0);
    }

private:
    int rows_ = 0, cols_ = 0;
    double h_ = 1.0;
    std::vector<ScalarMeasure> entries_;
};

// Entry (i,k) = sum_j mu(i,j) * nu(j,k) over the convolution algebra.
inline MatrixMeasure conv(const MatrixMeasure& mu, const MatrixMeasure& nu) {
    if (mu.cols() != nu.rows())
        throw std::invalid_argument("dimension mismatch in matrix-measure convolution");
    detail::check_same_step(mu.grid_step(), nu.grid_step());
    MatrixMeasure out(mu.rows(), nu.cols(), mu.grid_step());
    for (int i = 0; i < mu.rows(); ++i)
        for (int k = 0; k < nu.cols(); ++k) {
            ScalarMeasure acc = ScalarMeasure::zero(mu.grid_step());
            for (int j = 0; j < mu.cols(); ++j) acc = acc + mu(i, j) * nu(j, k);
            out(i, k) = acc;
        }
    return out;
}

inline double support_inf(const ScalarMeasure& mu) { return mu.support_inf(); }

namespace detail {

inline ScalarMeasure det_rec(const MatrixMeasure& m, int row, std::uint32_t col_mask,
                             std::vector<ScalarMeasure>& memo, std::vector<bool>& have) {
    const int d = m.rows();
    if (row == d) return ScalarMeasure::dirac(m.grid_step(), 0, 1.0);
    if (have[col_mask]) return memo[col_mask];
    ScalarMeasure acc = ScalarMeasure::zero(m.grid_step());
    int pos = 0;
    for (int c = 0; c < d; ++c) {
        if (!(col_mask & (1u << c))) continue;
        if (!m(row, c).is_zero()) {
            ScalarMeasure sub =
                det_rec(m, row + 1, col_mask & ~(1u << c), memo, have);
            ScalarMeasure term = m(row, c) * sub;
            acc = (pos % 2 == 0) ? acc + term : acc - term;
        }
        ++pos;
    }
    memo[col_mask] = acc;
    have[col_mask] = true;
    return acc;
}

}  // namespace detail

// Determinant over the convolution algebra, cofactor expansion with
// memoization over column subsets.  Exact on the atom part.
inline ScalarMeasure det_measure(const MatrixMeasure& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("determinant of non-square matrix");
    const int d = m.rows();
    if (d > 6) throw std::invalid_argument("determinant dimension cap (d <= 6) exceeded");
    std::vector<ScalarMeasure> memo(1u << d, ScalarMeasure::zero(m.grid_step()));
    std::vector<bool> have(1u << d, false);
    return detail::det_rec(m, 0, (1u << d) - 1, memo, have);
}

// Transposed cofactor matrix; conv(adjugate(M), M) = det_measure(M) * I.
inline MatrixMeasure adjugate(const MatrixMeasure& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("adjugate of non-square matrix");
    const int d = m.rows();
    if (d > 6) throw std::invalid_argument("adjugate dimension cap (d <= 6) exceeded");
    MatrixMeasure out(d, d, m.grid_step());
    if (d == 1) {
        out(0, 0) = ScalarMeasure::dirac(m.grid_step(), 0, 1.0);
        return out;
    }
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            MatrixMeasure minor(d - 1, d - 1, m.grid_step());
            for (int r = 0, mr = 0; r < d; ++r) {
                if (r == j) continue;
                for (int c = 0, mc = 0; c < d; ++c) {
                    if (c == i) continue;
                    minor(mr, mc) = m(r, c);
                    ++mc;
                }
                ++mr;
            }
            ScalarMeasure cof = det_measure(minor);
            out(i, j) = (((i + j) % 2) == 0) ? cof : cof.scaled(-1.0);
        }
    return out;
}

// Truncation of the causal convolution inverse, computed by forward
// substitution on the mass sequence.  The atomic part of the inverse is the
// inverse of the atomic part alone; the remainder is density.
inline MatrixMeasure causal_inverse(const MatrixMeasure& m, double horizon) {
    if (m.rows() != m.cols()) throw std::invalid_argument("causal inverse of non-square matrix");
    if (!(horizon > 0.0)) throw std::invalid_argument("inverse horizon must be positive");
    const int d = m.rows();
    const double h = m.grid_step();
    Index s;
    if (!m.support_inf_index(s)) throw std::invalid_argument("causal inverse of zero measure");

    Eigen::MatrixXd lead = m.atom_at(s);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(lead);
    if (!lu.isInvertible())
        throw std::invalid_argument("leading atom of measure is not invertible");
    Eigen::MatrixXd lead_inv = lu.inverse();

    const Index n = static_cast<Index>(std::llround(horizon / h));
    Index sup;
    m.support_sup_index(sup);
    const Index width = sup - s;  // coefficients of the shifted measure live on [0, width]

    std::vector<Eigen::MatrixXd> mass(static_cast<std::size_t>(width) + 1),
        atom(static_cast<std::size_t>(width) + 1);
    for (Index k = 0; k <= width; ++k) {
        mass[static_cast<std::size_t>(k)] = m.mass_at(s + k);
        atom[static_cast<std::size_t>(k)] = m.atom_at(s + k);
    }

    // x: masses of the inverse, y: its atomic part
    std::vector<Eigen::MatrixXd> x(static_cast<std::size_t>(n) + 1),
        y(static_cast<std::size_t>(n) + 1);
    for (Index k = 0; k <= n; ++k) {
        Eigen::MatrixXd accm = Eigen::MatrixXd::Zero(d, d);
        Eigen::MatrixXd acca = Eigen::MatrixXd::Zero(d, d);
        for (Index j = 1; j <= std::min(k, width); ++j) {
            accm += mass[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(k - j)];
            acca += atom[static_cast<std::size_t>(j)] * y[static_cast<std::size_t>(k - j)];
        }
        if (k == 0) {
            x[0] = lead_inv;
            y[0] = lead_inv;
        } else {
            x[static_cast<std::size_t>(k)] = -lead_inv * accm;
            y[static_cast<std::size_t>(k)] = -lead_inv * acca;
        }
    }

    MatrixMeasure out(d, d, h);
    const Index start = -s;  // l(M^{-1}) = -l(M)
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            std::vector<Atom> atoms;
            std::vector<double> dens(static_cast<std::size_t>(n) + 1, 0.0);
            for (Index k = 0; k <= n; ++k) {
                double a = y[static_cast<std::size_t>(k)](i, j);
                double rest = x[static_cast<std::size_t>(k)](i, j) - a;
                if (a != 0.0) atoms.push_back({start + k, a});
                dens[static_cast<std::size_t>(k)] = rest / h;
            }
            out(i, j) = ScalarMeasure(h, std::move(atoms), start, std::move(dens));
        }
    return out;
}

// Vector-valued piecewise-constant function on the grid: sample k holds the
// value on [ (start+k)h, (start+k+1)h ).
class GridSignal {
public:
    GridSignal() = default;

    GridSignal(double h, int dim, Index start = 0, std::size_t cells = 0)
        : h_(h), dim_(dim), start_(start),
          data_(cells * static_cast<std::size_t>(dim), 0.0) {
        detail::check_grid_step(h);
        if (dim <= 0) throw std::invalid_argument("signal dimension must be positive");
    }

    double grid_step() const { return h_; }
    int dim() const { return dim_; }
    Index start() const { return start_; }
    Index end() const { return start_ + cells(); }  // one past the last cell
    Index cells() const { return static_cast<Index>(data_.size() / static_cast<std::size_t>(dim_)); }
    bool empty() const { return data_.empty(); }

    double& at(Index cell, int comp) {
        return data_[static_cast<std::size_t>(cell - start_) * static_cast<std::size_t>(dim_) +
                     static_cast<std::size_t>(comp)];
    }

    // Zero outside the stored window.
    double value(Index cell, int comp) const {
        if (cell < start_ || cell >= end()) return 0.0;
        return data_[static_cast<std::size_t>(cell - start_) * static_cast<std::size_t>(dim_) +
                     static_cast<std::size_t>(comp)];
    }

    Eigen::VectorXd vector_at(Index cell) const {
        Eigen::VectorXd v(dim_);
        for (int c = 0; c < dim_; ++c) v(c) = value(cell, c);
        return v;
    }

    double l1_norm() const {
        double s = 0.0;
        for (double v : data_) s += std::abs(v);
        return h_ * s;
    }

    double max_abs() const {
        double s = 0.0;
        for (double v : data_) s = std::max(s, std::abs(v));
        return s;
    }

    // First cell with a nonzero sample; false when identically zero.
    bool support_start(Index& out) const {
        for (Index k = start_; k < end(); ++k)
            for (int c = 0; c < dim_; ++c)
                if (value(k, c) != 0.0) {
                    out = k;
                    return true;
                }
        return false;
    }

    bool support_last(Index& out) const {
        for (Index k = end() - 1; k >= start_; --k)
            for (int c = 0; c < dim_; ++c)
                if (value(k, c) != 0.0) {
                    out = k;
                    return true;
                }
        return false;
    }

    GridSignal restricted(Index from, Index to) const {  // cells [from, to)
        GridSignal out(h_, dim_, from, static_cast<std::size_t>(std::max<Index>(0, to - from)));
        for (Index k = from; k < to; ++k)
            for (int c = 0; c < dim_; ++c) out.at(k, c) = value(k, c);
        return out;
    }

    // Drop all-zero cells at both ends.
    GridSignal trimmed() const {
        Index a, b;
        if (!support_start(a)) return GridSignal(h_, dim_);
        support_last(b);
        return restricted(a, b + 1);
    }

    GridSignal component(int comp) const {
        GridSignal out(h_, 1, start_, static_cast<std::size_t>(cells()));
        for (Index k = start_; k < end(); ++k) out.at(k, 0) = value(k, comp);
        return out;
    }

    friend GridSignal operator+(const GridSignal& a, const GridSignal& b) {
        detail::check_same_step(a.h_, b.h_);
        if (a.dim_ != b.dim_) throw std::invalid_argument("signal dimension mismatch");
        if (a.empty()) return b;
        if (b.empty()) return a;
        Index lo = std::min(a.start_, b.start_);
        Index hi = std::max(a.end(), b.end());
        GridSignal out(a.h_, a.dim_, lo, static_cast<std::size_t>(hi - lo));
        for (Index k = lo; k < hi; ++k)
            for (int c = 0; c < a.dim_; ++c) out.at(k, c) = a.value(k, c) + b.value(k, c);
        return out;
    }

    friend GridSignal operator-(const GridSignal& a, const GridSignal& b) {
        return a + b.scaled(-1.0);
    }

    GridSignal scaled(double c) const {
        GridSignal out = *this;
        for (auto& v : out.data_) v *= c;
        return out;
    }

private:
    double h_ = 1.0;
    int dim_ = 1;
    Index start_ = 0;
    std::vector<double> data_;
};

// (M * f) sampled on the grid; truncate_to_nonneg keeps cells >= 0 only.
inline GridSignal apply_to_signal(const MatrixMeasure& m, const GridSignal& f,
                                  bool truncate_to_nonneg = false) {
    if (m.cols() != f.dim())
        throw std::invalid_argument("dimension mismatch in measure application");
    detail::check_same_step(m.grid_step(), f.grid_step());
    Index ms, me;
    if (!m.support_inf_index(ms) || f.empty())
        return GridSignal(m.grid_step(), m.rows());
    m.support_sup_index(me);

    Index lo = ms + f.start();
    Index hi = me + f.end();  // one past
    if (truncate_to_nonneg) lo = std::max<Index>(lo, 0);
    if (hi <= lo) return GridSignal(m.grid_step(), m.rows());

    GridSignal out(m.grid_step(), m.rows(), lo, static_cast<std::size_t>(hi - lo));
    const double h = m.grid_step();
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) {
            const ScalarMeasure& e = m(i, j);
            for (const auto& a : e.atoms())
                for (Index k = lo; k < hi; ++k) out.at(k, i) += a.w * f.value(k - a.idx, j);
            const auto& dens = e.density();
            for (std::size_t t = 0; t < dens.size(); ++t) {
                if (dens[t] == 0.0) continue;
                Index idx = e.density_start() + static_cast<Index>(t);
                for (Index k = lo; k < hi; ++k) out.at(k, i) += h * dens[t] * f.value(k - idx, j);
            }
        }
    return out;
}

}  // namespace delayreach
