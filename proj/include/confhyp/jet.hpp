#ifndef CONFHYP_JET_HPP
#define CONFHYP_JET_HPP

#include "confhyp/scalar.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace confhyp {

// Exponent vector of one monomial; length = coordinate count.
using MultiIndex = std::vector<int>;

inline int total_degree(const MultiIndex& a) {
    return std::accumulate(a.begin(), a.end(), 0);
}

// Graded-lex order: by total degree, then lexicographically.
inline bool graded_lex_less(const MultiIndex& a, const MultiIndex& b) {
    int da = total_degree(a), db = total_degree(b);
    if (da != db) return da < db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

namespace detail {

// Exponents packed 5 bits each into a 64-bit key (dim <= 12, order <= 31).
inline std::uint64_t pack_multi_index(const MultiIndex& a) {
    std::uint64_t k = 0;
    for (int e : a) k = (k << 5) | static_cast<std::uint64_t>(e);
    return k;
}

}  // namespace detail

// Shared monomial basis for all jets of a fixed (dim, trunc) pair: the
// graded-lex enumeration of every multi-index with total degree <= trunc,
// plus index lookup and per-degree offsets.
class JetLayout {
public:
    JetLayout(int dim, int trunc) : dim_(dim), trunc_(trunc) {
        if (dim < 1 || dim > 12) throw std::invalid_argument("JetLayout: dim out of range");
        if (trunc < 0 || trunc > 31) throw std::invalid_argument("JetLayout: trunc out of range");
        MultiIndex cur(dim, 0);
        for (int deg = 0; deg <= trunc; ++deg) {
            offset_.push_back(static_cast<int>(basis_.size()));
            enumerate(cur, 0, deg);
        }
        offset_.push_back(static_cast<int>(basis_.size()));
        index_.reserve(basis_.size() * 2);
        for (std::size_t i = 0; i < basis_.size(); ++i)
            index_.emplace(detail::pack_multi_index(basis_[i]), static_cast<int>(i));
    }

    int dim() const { return dim_; }
    int trunc() const { return trunc_; }
    int size(int up_to_order) const {
        if (up_to_order < 0) return 0;
        return offset_[std::min(up_to_order, trunc_) + 1];
    }
    int size() const { return size(trunc_); }
    const MultiIndex& monomial(int i) const { return basis_[i]; }
    int degree_of(int i) const { return total_degree(basis_[i]); }

    int index_of(const MultiIndex& m) const {
        auto it = index_.find(detail::pack_multi_index(m));
        if (it == index_.end()) return -1;
        return it->second;
    }

    // Index of the product monomial given two basis indices, or -1 if the
    // degree exceeds trunc.
    int product_index(int i, int j) const {
        MultiIndex m = basis_[i];
        const MultiIndex& n = basis_[j];
        for (int k = 0; k < dim_; ++k) m[k] += n[k];
        if (total_degree(m) > trunc_) return -1;
        return index_of(m);
    }

    static std::shared_ptr<const JetLayout> get(int dim, int trunc) {
        static std::mutex mu;
        static std::map<std::pair<int, int>, std::shared_ptr<const JetLayout>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto key = std::make_pair(dim, trunc);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        auto lay = std::make_shared<const JetLayout>(dim, trunc);
        cache.emplace(key, lay);
        return lay;
    }

private:
    void enumerate(MultiIndex& cur, int pos, int remaining) {
        if (pos == dim_ - 1) {
            cur[pos] = remaining;
            basis_.push_back(cur);
            cur[pos] = 0;
            return;
        }
        for (int e = remaining; e >= 0; --e) {
            cur[pos] = e;
            enumerate(cur, pos + 1, remaining - e);
        }
        cur[pos] = 0;
    }

    int dim_, trunc_;
    std::vector<MultiIndex> basis_;
    std::vector<int> offset_;  // offset_[k] = first index of degree k
    std::unordered_map<std::uint64_t, int> index_;
};

// Truncated multivariate power series at the base point. Coefficients are
// dense up to the jet's valid order; consuming more order than is valid
// throws. Values are immutable in spirit: all operations return new jets.
template <class S>
class Jet {
public:
    Jet() = default;

    Jet(std::shared_ptr<const JetLayout> lay, int valid_order)
        : lay_(std::move(lay)), valid_(valid_order) {
        if (valid_ < 0 || valid_ > lay_->trunc())
            throw std::invalid_argument("Jet: valid order out of range");
        c_.assign(lay_->size(valid_), S{});
    }

    static Jet constant(std::shared_ptr<const JetLayout> lay, S v) {
        Jet j(lay, lay->trunc());
        j.c_[0] = std::move(v);
        return j;
    }

    static Jet coordinate(std::shared_ptr<const JetLayout> lay, int axis) {
        Jet j(lay, lay->trunc());
        MultiIndex m(lay->dim(), 0);
        m[axis] = 1;
        j.c_[lay->index_of(m)] = S(1);
        return j;
    }

    const JetLayout& layout() const { return *lay_; }
    std::shared_ptr<const JetLayout> layout_ptr() const { return lay_; }
    int dim() const { return lay_->dim(); }
    int order() const { return valid_; }
    bool empty() const { return !lay_; }

    const S& coeff(int i) const { return c_[i]; }
    S& coeff_mut(int i) { return c_[i]; }
    int ncoeff() const { return static_cast<int>(c_.size()); }

    const S& coeff(const MultiIndex& m) const {
        static const S zero{};
        if (total_degree(m) > valid_)
            throw std::out_of_range("Jet::coeff: monomial beyond valid order");
        int i = lay_->index_of(m);
        return i < 0 ? zero : c_[i];
    }

    void set_coeff(const MultiIndex& m, S v) {
        if (total_degree(m) > valid_)
            throw std::out_of_range("Jet::set_coeff: monomial beyond valid order");
        c_[lay_->index_of(m)] = std::move(v);
    }

    bool is_zero() const {
        for (const auto& x : c_)
            if (!scalar_is_zero(x)) return false;
        return true;
    }

    // Smallest total degree with a nonzero coefficient; valid+1 if zero.
    int vanishing_order() const {
        for (int i = 0; i < ncoeff(); ++i)
            if (!scalar_is_zero(c_[i])) return lay_->degree_of(i);
        return valid_ + 1;
    }

    const S& value_at_base() const { return c_[0]; }

    Jet truncated(int new_order) const {
        if (new_order >= valid_) return *this;
        if (new_order < 0) throw std::invalid_argument("Jet::truncated: negative order");
        Jet r(lay_, new_order);
        std::copy(c_.begin(), c_.begin() + r.ncoeff(), r.c_.begin());
        return r;
    }

    friend Jet operator+(const Jet& a, const Jet& b) {
        a.check_compatible(b);
        int v = std::min(a.valid_, b.valid_);
        Jet r(a.lay_, v);
        for (int i = 0; i < r.ncoeff(); ++i) r.c_[i] = a.c_[i] + b.c_[i];
        return r;
    }

    friend Jet operator-(const Jet& a, const Jet& b) {
        a.check_compatible(b);
        int v = std::min(a.valid_, b.valid_);
        Jet r(a.lay_, v);
        for (int i = 0; i < r.ncoeff(); ++i) r.c_[i] = a.c_[i] - b.c_[i];
        return r;
    }

    friend Jet operator-(const Jet& a) {
        Jet r(a.lay_, a.valid_);
        for (int i = 0; i < r.ncoeff(); ++i) r.c_[i] = -a.c_[i];
        return r;
    }

    Jet& operator+=(const Jet& b) { *this = *this + b; return *this; }
    Jet& operator-=(const Jet& b) { *this = *this - b; return *this; }

    // Truncated Cauchy product to the minimum valid order. Zero coefficients
    // are skipped; polynomial inputs keep this near the sparse cost.
    friend Jet operator*(const Jet& a, const Jet& b) {
        a.check_compatible(b);
        // The product coefficient at degree D is complete once every
        // non-vanishing pair is inside the operands' valid ranges, so a factor
        // vanishing to positive order extends the product's validity.
        int v = std::min(a.valid_ + b.vanishing_order(), b.valid_ + a.vanishing_order());
        v = std::min(v, a.lay_->trunc());
        Jet r(a.lay_, v);
        const JetLayout& lay = *a.lay_;
        // collect nonzero support of b once; typical operands are sparse
        std::vector<int> bnz;
        bnz.reserve(64);
        for (int j = 0; j < b.ncoeff(); ++j)
            if (!scalar_is_zero(b.c_[j])) bnz.push_back(j);
        for (int i = 0; i < a.ncoeff(); ++i) {
            if (scalar_is_zero(a.c_[i])) continue;
            int jmax = lay.size(v - lay.degree_of(i));
            for (int j : bnz) {
                if (j >= jmax) break;
                int k = lay.product_index(i, j);
                r.c_[k] += a.c_[i] * b.c_[j];
            }
        }
        return r;
    }

    Jet& operator*=(const Jet& b) { *this = *this * b; return *this; }

    friend Jet operator*(const S& s, const Jet& a) {
        Jet r(a.lay_, a.valid_);
        for (int i = 0; i < r.ncoeff(); ++i) r.c_[i] = s * a.c_[i];
        return r;
    }
    friend Jet operator*(const Jet& a, const S& s) { return s * a; }

    bool operator==(const Jet& o) const {
        check_compatible(o);
        int v = std::min(valid_, o.valid_);
        for (int i = 0; i < lay_->size(v); ++i)
            if (!(c_[i] == o.c_[i])) return false;
        // Coefficients past the common valid order are not comparable;
        // equality is up to the shared order.
        return true;
    }

private:
    void check_compatible(const Jet& o) const {
        if (!lay_ || !o.lay_) throw std::invalid_argument("Jet: empty operand");
        if (lay_->dim() != o.lay_->dim() || lay_->trunc() != o.lay_->trunc())
            throw std::invalid_argument("Jet: dimension/truncation mismatch");
    }

    std::shared_ptr<const JetLayout> lay_;
    int valid_ = -1;
    std::vector<S> c_;
};

template <class S>
Jet<S> jet_add(const Jet<S>& a, const Jet<S>& b) { return a + b; }

template <class S>
Jet<S> jet_mul(const Jet<S>& a, const Jet<S>& b) { return a * b; }

// Formal partial derivative; drops one valid order.
template <class S>
Jet<S> jet_differentiate(const Jet<S>& a, int axis) {
    if (axis < 0 || axis >= a.dim()) throw std::out_of_range("jet_differentiate: axis");
    if (a.order() < 1) throw std::invalid_argument("jet_differentiate: order < 1");
    Jet<S> r(a.layout_ptr(), a.order() - 1);
    const JetLayout& lay = a.layout();
    for (int i = 0; i < a.ncoeff(); ++i) {
        if (scalar_is_zero(a.coeff(i))) continue;
        MultiIndex m = lay.monomial(i);
        if (m[axis] == 0) continue;
        int e = m[axis];
        m[axis] -= 1;
        r.coeff_mut(lay.index_of(m)) += S(e) * a.coeff(i);
    }
    return r;
}

// Multiplicative inverse up to the valid order (degree-by-degree solve).
template <class S>
Jet<S> jet_reciprocal(const Jet<S>& a) {
    if (scalar_is_zero(a.value_at_base()))
        throw std::domain_error("jet_reciprocal: zero constant term");
    const JetLayout& lay = a.layout();
    Jet<S> r(a.layout_ptr(), a.order());
    S inv0 = S(1) / a.value_at_base();
    r.coeff_mut(0) = inv0;
    // r_k determined by (a*r)_k = 0 for each monomial k of degree >= 1, in
    // graded order: r_k = -inv0 * sum a_i r_{k-i} over nonzero a_i with i >= 1.
    std::vector<int> anz;
    for (int i = 1; i < a.ncoeff(); ++i)
        if (!scalar_is_zero(a.coeff(i))) anz.push_back(i);
    for (int k = 1; k < r.ncoeff(); ++k) {
        const MultiIndex& mk = lay.monomial(k);
        int dk = lay.degree_of(k);
        S acc{};
        MultiIndex diff(mk.size());
        for (int i : anz) {
            if (lay.degree_of(i) > dk) break;
            const MultiIndex& mi = lay.monomial(i);
            bool ok = true;
            for (std::size_t t = 0; t < mk.size(); ++t) {
                diff[t] = mk[t] - mi[t];
                if (diff[t] < 0) { ok = false; break; }
            }
            if (!ok) continue;
            acc += a.coeff(i) * r.coeff(lay.index_of(diff));
        }
        r.coeff_mut(k) = -inv0 * acc;
    }
    return r;
}

// Square root with positive constant term, determined degree by degree from
// r*r = a. In rational mode the constant term must be a perfect square.
template <class S>
Jet<S> jet_sqrt(const Jet<S>& a) {
    if (scalar_is_zero(a.value_at_base()) || !(a.value_at_base() > S(0)))
        throw std::domain_error("jet_sqrt: constant term must be positive");
    const JetLayout& lay = a.layout();
    Jet<S> r(a.layout_ptr(), a.order());
    S r0 = scalar_sqrt(a.value_at_base());
    r.coeff_mut(0) = r0;
    S half_inv = S(1) / (S(2) * r0);
    for (int k = 1; k < r.ncoeff(); ++k) {
        const MultiIndex& mk = lay.monomial(k);
        int dk = lay.degree_of(k);
        // (r*r)_k = 2 r0 r_k + sum_{j,l >= 1} r_j r_l  => solve for r_k
        S acc{};
        for (int j = 1; j < lay.size(dk); ++j) {
            if (scalar_is_zero(r.coeff(j))) continue;
            const MultiIndex& mj = lay.monomial(j);
            MultiIndex diff(mk.size());
            bool ok = true;
            for (std::size_t t = 0; t < mk.size(); ++t) {
                diff[t] = mk[t] - mj[t];
                if (diff[t] < 0) { ok = false; break; }
            }
            if (!ok) continue;
            int di = lay.index_of(diff);
            if (di == 0 || lay.degree_of(di) == dk) continue;  // involves r_k itself
            acc += r.coeff(j) * r.coeff(di);
        }
        // terms r_j r_l with deg j = dk, deg l = 0 handled by the 2 r0 r_k unknown;
        // same-degree pairs (deg j + deg l = dk with deg j = dk) excluded above.
        r.coeff_mut(k) = (a.coeff(k) - acc) * half_inv;
    }
    return r;
}

// The jet (in the remaining variables) multiplying s_axis^k. Exponent of
// s_axis in the result is zero; the other exponents are kept in place.
template <class S>
Jet<S> jet_s_coefficient(const Jet<S>& a, int k, int s_axis) {
    if (k < 0 || k > a.order())
        throw std::out_of_range("jet_s_coefficient: k beyond valid order");
    if (s_axis < 0 || s_axis >= a.dim()) throw std::out_of_range("jet_s_coefficient: axis");
    const JetLayout& lay = a.layout();
    Jet<S> r(a.layout_ptr(), a.order() - k);
    for (int i = 0; i < a.ncoeff(); ++i) {
        if (scalar_is_zero(a.coeff(i))) continue;
        MultiIndex m = lay.monomial(i);
        if (m[s_axis] != k) continue;
        m[s_axis] = 0;
        r.coeff_mut(lay.index_of(m)) = a.coeff(i);
    }
    return r;
}

// Multiply by s_axis^k (exact shift; gains k valid orders up to trunc).
template <class S>
Jet<S> jet_shift_s(const Jet<S>& a, int k, int s_axis) {
    if (k < 0) throw std::invalid_argument("jet_shift_s: negative k");
    Jet<S> r(a.layout_ptr(), std::min(a.order() + k, a.layout().trunc()));
    const JetLayout& lay = a.layout();
    for (int i = 0; i < a.ncoeff(); ++i) {
        if (scalar_is_zero(a.coeff(i))) continue;
        MultiIndex m = lay.monomial(i);
        m[s_axis] += k;
        if (total_degree(m) > r.order()) continue;
        r.coeff_mut(lay.index_of(m)) = a.coeff(i);
    }
    return r;
}

// Exact division by s_axis^k; every monomial must carry s^k.
template <class S>
Jet<S> jet_divide_by_s_power(const Jet<S>& a, int k, int s_axis) {
    const JetLayout& lay = a.layout();
    Jet<S> r(a.layout_ptr(), a.order());  // coefficients above order-k are zero-filled
    for (int i = 0; i < a.ncoeff(); ++i) {
        if (scalar_is_zero(a.coeff(i))) continue;
        MultiIndex m = lay.monomial(i);
        if (m[s_axis] < k)
            throw std::domain_error("jet_divide_by_s_power: nonzero low-order coefficient");
        m[s_axis] -= k;
        r.coeff_mut(lay.index_of(m)) = a.coeff(i);
    }
    return r.truncated(std::max(a.order() - k, 0));
}

// Smallest s-degree carrying a nonzero coefficient jet; order+1 if none.
template <class S>
int jet_s_vanishing_order(const Jet<S>& a, int s_axis) {
    int best = a.order() + 1;
    const JetLayout& lay = a.layout();
    for (int i = 0; i < a.ncoeff(); ++i)
        if (!scalar_is_zero(a.coeff(i))) best = std::min(best, lay.monomial(i)[s_axis]);
    return best;
}

// Evaluate at a point (float-mode oracles).
template <class S>
S jet_evaluate(const Jet<S>& a, const std::vector<S>& x) {
    const JetLayout& lay = a.layout();
    S acc{};
    for (int i = 0; i < a.ncoeff(); ++i) {
        if (scalar_is_zero(a.coeff(i))) continue;
        S term = a.coeff(i);
        const MultiIndex& m = lay.monomial(i);
        for (int t = 0; t < lay.dim(); ++t)
            for (int e = 0; e < m[t]; ++e) term *= x[t];
        acc += term;
    }
    return acc;
}

template <class S>
Jet<S> jet_pow(const Jet<S>& a, int k) {
    if (k < 0) return jet_pow(jet_reciprocal(a), -k);
    Jet<S> r = Jet<S>::constant(a.layout_ptr(), S(1)).truncated(a.order());
    for (int i = 0; i < k; ++i) r = r * a;
    return r;
}

}  // namespace confhyp

#endif
