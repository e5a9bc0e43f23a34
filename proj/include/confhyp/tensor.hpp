#ifndef CONFHYP_TENSOR_HPP
#define CONFHYP_TENSOR_HPP

#include "confhyp/jet.hpp"

#include <cassert>
#include <functional>
#include <stdexcept>
#include <vector>

namespace confhyp {

// A slot is either a tensor index (extent d) or a tractor index (extent d+2).
// Tractor slot layout: 0 = top, 1..d = middle, d+1 = bottom.
enum class SlotKind { Tensor, Tractor };

struct Slot {
    SlotKind kind;
    bool up;
    int extent;

    static Slot tensor(bool up, int d) { return {SlotKind::Tensor, up, d}; }
    static Slot tractor(bool up, int d) { return {SlotKind::Tractor, up, d + 2}; }

    bool operator==(const Slot& o) const {
        return kind == o.kind && up == o.up && extent == o.extent;
    }
};

// Tensor (or tractor, or mixed) with Jet components, index variance per slot
// and a conformal weight annotation. Components are stored row-major.
template <class S>
class TensorJet {
public:
    TensorJet() = default;

    TensorJet(std::vector<Slot> slots, std::shared_ptr<const JetLayout> lay, int valid_order,
              int weight = 0)
        : slots_(std::move(slots)), lay_(std::move(lay)), weight_(weight) {
        comp_.assign(ncomp(), Jet<S>(lay_, valid_order));
    }

    static TensorJet scalar(Jet<S> j, int weight = 0) {
        TensorJet t;
        t.lay_ = j.layout_ptr();
        t.comp_.push_back(std::move(j));
        t.weight_ = weight;
        return t;
    }

    int rank() const { return static_cast<int>(slots_.size()); }
    const std::vector<Slot>& slots() const { return slots_; }
    int weight() const { return weight_; }
    void set_weight(int w) { weight_ = w; }
    std::shared_ptr<const JetLayout> layout_ptr() const { return lay_; }

    int ncomp() const {
        int n = 1;
        for (const auto& s : slots_) n *= s.extent;
        return n;
    }

    int order() const {
        int v = lay_->trunc();
        for (const auto& c : comp_) v = std::min(v, c.order());
        return v;
    }

    const Jet<S>& at_flat(int i) const { return comp_[i]; }
    Jet<S>& at_flat(int i) { return comp_[i]; }

    int flat_index(const std::vector<int>& idx) const {
        assert(static_cast<int>(idx.size()) == rank());
        int f = 0;
        for (int k = 0; k < rank(); ++k) f = f * slots_[k].extent + idx[k];
        return f;
    }

    std::vector<int> unflatten(int f) const {
        std::vector<int> idx(rank());
        for (int k = rank() - 1; k >= 0; --k) {
            idx[k] = f % slots_[k].extent;
            f /= slots_[k].extent;
        }
        return idx;
    }

    const Jet<S>& at(const std::vector<int>& idx) const { return comp_[flat_index(idx)]; }
    Jet<S>& at(const std::vector<int>& idx) { return comp_[flat_index(idx)]; }

    const Jet<S>& at(std::initializer_list<int> idx) const {
        return at(std::vector<int>(idx));
    }
    Jet<S>& at(std::initializer_list<int> idx) { return at(std::vector<int>(idx)); }

    bool is_zero() const {
        for (const auto& c : comp_)
            if (!c.is_zero()) return false;
        return true;
    }

    TensorJet truncated(int new_order) const {
        TensorJet r = *this;
        for (auto& c : r.comp_) c = c.truncated(new_order);
        return r;
    }

    friend TensorJet operator+(const TensorJet& a, const TensorJet& b) {
        a.check_same_shape(b);
        TensorJet r = a;
        for (int i = 0; i < r.ncomp(); ++i) r.comp_[i] = a.comp_[i] + b.comp_[i];
        return r;
    }
    friend TensorJet operator-(const TensorJet& a, const TensorJet& b) {
        a.check_same_shape(b);
        TensorJet r = a;
        for (int i = 0; i < r.ncomp(); ++i) r.comp_[i] = a.comp_[i] - b.comp_[i];
        return r;
    }
    friend TensorJet operator-(const TensorJet& a) {
        TensorJet r = a;
        for (auto& c : r.comp_) c = -c;
        return r;
    }
    TensorJet& operator+=(const TensorJet& b) { *this = *this + b; return *this; }
    TensorJet& operator-=(const TensorJet& b) { *this = *this - b; return *this; }

    friend TensorJet operator*(const Jet<S>& s, const TensorJet& a) {
        TensorJet r = a;
        for (auto& c : r.comp_) c = s * c;
        return r;
    }
    friend TensorJet operator*(const S& s, const TensorJet& a) {
        TensorJet r = a;
        for (auto& c : r.comp_) c = s * c;
        return r;
    }

    // Outer product; slots of b appended after slots of a, weights add.
    friend TensorJet outer(const TensorJet& a, const TensorJet& b) {
        TensorJet r;
        r.lay_ = a.lay_;
        r.slots_ = a.slots_;
        r.slots_.insert(r.slots_.end(), b.slots_.begin(), b.slots_.end());
        r.weight_ = a.weight_ + b.weight_;
        r.comp_.reserve(a.ncomp() * b.ncomp());
        for (int i = 0; i < a.ncomp(); ++i)
            for (int j = 0; j < b.ncomp(); ++j) r.comp_.push_back(a.comp_[i] * b.comp_[j]);
        return r;
    }

    // Contract slot i (up) with slot j (down), or vice versa; same kind.
    TensorJet contracted(int si, int sj) const {
        if (si > sj) std::swap(si, sj);
        if (si == sj || slots_[si].kind != slots_[sj].kind ||
            slots_[si].up == slots_[sj].up)
            throw std::invalid_argument("contracted: slots must be same kind, opposite variance");
        TensorJet r;
        r.lay_ = lay_;
        r.weight_ = weight_;
        for (int k = 0; k < rank(); ++k)
            if (k != si && k != sj) r.slots_.push_back(slots_[k]);
        int v = order();
        r.comp_.assign(r.ncomp(), Jet<S>(lay_, v));
        int e = slots_[si].extent;
        std::vector<int> idx(rank(), 0);
        for (int f = 0; f < r.ncomp(); ++f) {
            auto ridx = r.unflatten(f);
            int t = 0;
            for (int k = 0; k < rank(); ++k)
                if (k != si && k != sj) idx[k] = ridx[t++];
            for (int c = 0; c < e; ++c) {
                idx[si] = c;
                idx[sj] = c;
                r.comp_[f] += at(idx);
            }
        }
        return r;
    }

    // Swap two slots (must have equal extent).
    TensorJet transposed(int si, int sj) const {
        if (slots_[si].extent != slots_[sj].extent)
            throw std::invalid_argument("transposed: extent mismatch");
        TensorJet r = *this;
        std::swap(r.slots_[si], r.slots_[sj]);
        for (int f = 0; f < ncomp(); ++f) {
            auto idx = unflatten(f);
            std::swap(idx[si], idx[sj]);
            r.comp_[r.flat_index(idx)] = comp_[f];
        }
        return r;
    }

    TensorJet symmetrized(int si, int sj) const {
        TensorJet t = transposed(si, sj);
        t.slots_ = slots_;  // keep original variance order
        TensorJet r = *this;
        S half = S(1) / S(2);
        for (int f = 0; f < ncomp(); ++f) r.comp_[f] = half * (comp_[f] + t.comp_[f]);
        return r;
    }

    TensorJet antisymmetrized(int si, int sj) const {
        TensorJet t = transposed(si, sj);
        t.slots_ = slots_;
        TensorJet r = *this;
        S half = S(1) / S(2);
        for (int f = 0; f < ncomp(); ++f) r.comp_[f] = half * (comp_[f] - t.comp_[f]);
        return r;
    }

    // Apply f to every component.
    TensorJet map(const std::function<Jet<S>(const Jet<S>&)>& f) const {
        TensorJet r = *this;
        for (auto& c : r.comp_) c = f(c);
        return r;
    }

    bool equals(const TensorJet& o) const {
        check_same_shape(o);
        for (int i = 0; i < ncomp(); ++i)
            if (!(comp_[i] == o.comp_[i])) return false;
        return true;
    }

private:
    void check_same_shape(const TensorJet& o) const {
        if (slots_.size() != o.slots_.size())
            throw std::invalid_argument("TensorJet: rank mismatch");
        for (std::size_t k = 0; k < slots_.size(); ++k)
            if (!(slots_[k] == o.slots_[k]))
                throw std::invalid_argument("TensorJet: slot mismatch");
    }

    std::vector<Slot> slots_;
    std::shared_ptr<const JetLayout> lay_;
    std::vector<Jet<S>> comp_;
    int weight_ = 0;
};

// Contraction of the last slot of a with the first slot of b.
template <class S>
TensorJet<S> dot(const TensorJet<S>& a, const TensorJet<S>& b) {
    TensorJet<S> o = outer(a, b);
    return o.contracted(a.rank() - 1, a.rank());
}

}  // namespace confhyp

#endif
