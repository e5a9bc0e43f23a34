#ifndef CONFHYP_TRACTOR_HPP
#define CONFHYP_TRACTOR_HPP

#include "confhyp/hypersurface.hpp"

namespace confhyp {

// Tractors are TensorJets whose slots have SlotKind::Tractor (extent d+2,
// layout 0 = top, 1..d = middle, d+1 = bottom), expressed in the scale of the
// ambient metric. The canonical tractor X^A = (0, 0, 1) has weight 1.
template <class S>
TensorJet<S> tractor_x(const MetricJet<S>& m, int valid_order) {
    int d = m.d;
    TensorJet<S> x({Slot::tractor(true, d)}, m.layout_ptr(), valid_order, 1);
    x.at({d + 1}) = Jet<S>::constant(m.layout_ptr(), S(1)).truncated(valid_order);
    return x;
}

// Tractor metric: top-bottom pairing 1, middle block g (or g^{-1} when up).
template <class S>
TensorJet<S> tractor_metric(const MetricJet<S>& m, bool up = false) {
    int d = m.d;
    int v = m.order();
    TensorJet<S> h({Slot::tractor(up, d), Slot::tractor(up, d)}, m.layout_ptr(), v);
    auto one = Jet<S>::constant(m.layout_ptr(), S(1)).truncated(v);
    h.at({0, d + 1}) = one;
    h.at({d + 1, 0}) = one;
    const TensorJet<S>& g = up ? m.g_inv : m.g;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) h.at({1 + i, 1 + j}) = g.at({i, j});
    return h;
}

// Raise or lower a tractor slot with h: top and bottom swap, middle flips
// with the metric.
template <class S>
TensorJet<S> flip_tractor_slot(const MetricJet<S>& m, const TensorJet<S>& t, int k) {
    const Slot& sl = t.slots()[k];
    if (sl.kind != SlotKind::Tractor)
        throw std::invalid_argument("flip_tractor_slot: tractor slots only");
    int d = m.d;
    const TensorJet<S>& met = sl.up ? m.g : m.g_inv;
    std::vector<Slot> slots = t.slots();
    slots[k].up = !sl.up;
    TensorJet<S> r(slots, t.layout_ptr(), t.order(), t.weight());
    for (int f = 0; f < t.ncomp(); ++f) {
        auto idx = t.unflatten(f);
        int i = idx[k];
        auto jdx = idx;
        if (i == 0 || i == d + 1) {
            jdx[k] = (i == 0) ? d + 1 : 0;
            r.at(idx) = t.at(jdx);
        } else {
            Jet<S> acc(t.layout_ptr(), t.order());
            for (int e = 0; e < d; ++e) {
                jdx[k] = 1 + e;
                const Jet<S>& comp = t.at(jdx);
                if (comp.is_zero() || met.at({i - 1, e}).is_zero()) continue;
                acc += met.at({i - 1, e}) * comp;
            }
            r.at(idx) = acc;
        }
    }
    return r;
}

// h(U, V) for rank-1 tractors of opposite or equal variance.
template <class S>
Jet<S> tractor_pair(const MetricJet<S>& m, const TensorJet<S>& u, const TensorJet<S>& v) {
    if (u.rank() != 1 || v.rank() != 1)
        throw std::invalid_argument("tractor_pair: rank-1 tractors required");
    TensorJet<S> ul = (u.slots()[0].up == v.slots()[0].up) ? flip_tractor_slot(m, u, 0) : u;
    return dot(ul, v).at_flat(0);
}

// The tractor connection (one new tensor slot in front).
template <class S>
TensorJet<S> tractor_connection_apply(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                                      const TensorJet<S>& t) {
    return cov_deriv(m, pack.Gamma, t, &pack.Schouten);
}

// Connection Laplacian with tractor coupling on any slot structure.
template <class S>
TensorJet<S> tractor_laplacian(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                               const TensorJet<S>& t) {
    TensorJet<S> dt = tractor_connection_apply(m, pack, t);
    TensorJet<S> ddt = tractor_connection_apply(m, pack, dt);
    return flip_slot(m, ddt, 0).contracted(0, 1);
}

// Thomas operator: prepends an up tractor slot, lowers the weight by one.
// D_A T = (w(d+2w-2) T, (d+2w-2) grad T, -(Lap T + w J T)).
template <class S>
TensorJet<S> thomas_d(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                      const TensorJet<S>& t) {
    if (t.order() < 2) throw std::invalid_argument("thomas_d: insufficient order");
    int d = m.d;
    int w = t.weight();
    S h2 = S(d + 2 * w - 2);
    TensorJet<S> dt_up = flip_slot(m, tractor_connection_apply(m, pack, t), 0);
    TensorJet<S> lap = tractor_laplacian(m, pack, t);
    int v = lap.order();
    std::vector<Slot> slots = t.slots();
    slots.insert(slots.begin(), Slot::tractor(true, d));
    TensorJet<S> r(slots, t.layout_ptr(), v, w - 1);
    for (int f = 0; f < t.ncomp(); ++f) {
        auto idx = t.unflatten(f);
        std::vector<int> ridx(idx.size() + 1);
        std::copy(idx.begin(), idx.end(), ridx.begin() + 1);
        ridx[0] = 0;
        r.at(ridx) = (S(w) * h2) * t.at_flat(f);
        for (int i = 0; i < d; ++i) {
            ridx[0] = 1 + i;
            std::vector<int> didx(idx.size() + 1);
            didx[0] = i;
            std::copy(idx.begin(), idx.end(), didx.begin() + 1);
            r.at(ridx) = h2 * dt_up.at(didx);
        }
        ridx[0] = d + 1;
        r.at(ridx) = -(lap.at_flat(f) + S(w) * (pack.J * t.at_flat(f)));
    }
    return r;
}

template <class S>
TensorJet<S> hatted_d(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                      const TensorJet<S>& t) {
    int h2 = m.d + 2 * t.weight() - 2;
    if (h2 == 0) throw std::domain_error("hatted_d: forbidden weight w = 1 - d/2");
    return S(1) / S(h2) * thomas_d(m, pack, t);
}

// I = hatted_d of the weight-1 defining density: (sigma, grad sigma,
// -(Lap sigma + J sigma)/d), weight 0.
template <class S>
TensorJet<S> scale_tractor(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                           const Jet<S>& sigma) {
    return hatted_d(m, pack, TensorJet<S>::scalar(sigma, 1));
}

// N = (0, unit conormal raised, -H), weight 0.
template <class S>
TensorJet<S> normal_tractor(const MetricJet<S>& m, const HypersurfaceFrame<S>& f) {
    int d = m.d;
    if (f.H.empty()) throw std::invalid_argument("normal_tractor: frame lacks mean curvature");
    int v = std::min(f.n_hat_up.order(), f.H.order());
    TensorJet<S> n({Slot::tractor(true, d)}, m.layout_ptr(), v);
    for (int i = 0; i < d; ++i) n.at({1 + i}) = f.n_hat_up.at({i}).truncated(v);
    n.at({d + 1}) = -f.H.truncated(v);
    return n;
}

// P_AB = hatted_d applied to the lowered scale tractor, both slots down.
template <class S>
TensorJet<S> p_tractor(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                       const Jet<S>& sigma) {
    if (m.d == 2) throw std::domain_error("p_tractor: d = 2 excluded");
    TensorJet<S> il = flip_tractor_slot(m, scale_tractor(m, pack, sigma), 0);
    return flip_tractor_slot(m, hatted_d(m, pack, il), 0);
}

// Extraction map: the first nonzero block of the splitting, scanned in
// filtration order (depth 0 is invariant under rescaling additions). Up
// slots filter top -> middle -> bottom; down slots the reverse. Blocks with
// a middle entry become tensor slots of the same variance.
template <class S>
TensorJet<S> q_star(const MetricJet<S>& m, const TensorJet<S>& t) {
    int d = m.d;
    int rank = t.rank();
    for (const auto& sl : t.slots())
        if (sl.kind != SlotKind::Tractor)
            throw std::invalid_argument("q_star: pure tractor required");
    if (rank < 1 || rank > 2) throw std::invalid_argument("q_star: rank 1 or 2 required");
    // depth-b entry of a slot: up (0: top, 1: middle, 2: bottom), down reversed
    auto slot_index = [&](const Slot& sl, int b, int mid) {
        int bb = sl.up ? b : 2 - b;
        return bb == 0 ? 0 : (bb == 1 ? 1 + mid : d + 1);
    };
    auto block_weight = [](const Slot& sl, int b) {
        int bb = sl.up ? b : 2 - b;
        return bb == 0 ? 1 : (bb == 1 ? (sl.up ? -1 : 1) : (sl.up ? -1 : 1));
    };
    for (int depth = 0; depth <= 2 * rank; ++depth) {
        for (int b0 = std::max(0, depth - 2 * (rank - 1)); b0 <= std::min(depth, 2); ++b0) {
            int b1 = depth - b0;
            std::vector<int> blocks = {b0};
            if (rank == 2) blocks.push_back(b1);
            std::vector<Slot> slots;
            int w = t.weight();
            for (int k = 0; k < rank; ++k) {
                const Slot& sl = t.slots()[k];
                if (blocks[k] == 1) slots.push_back(Slot::tensor(sl.up, d));
                w += block_weight(sl, blocks[k]);
            }
            TensorJet<S> r(slots, t.layout_ptr(), t.order(), w);
            bool nonzero = false;
            for (int f = 0; f < r.ncomp(); ++f) {
                auto ridx = r.unflatten(f);
                std::vector<int> idx(rank);
                int mcur = 0;
                for (int k = 0; k < rank; ++k) {
                    int mid = (blocks[k] == 1) ? ridx[mcur++] : 0;
                    idx[k] = slot_index(t.slots()[k], blocks[k], mid);
                }
                r.at_flat(f) = t.at(idx);
                if (!r.at_flat(f).is_zero()) nonzero = true;
            }
            if (nonzero) return r;
        }
    }
    throw std::invalid_argument("q_star: zero tractor");
}

// Symmetric trace-free part over two up tractor slots (indices si, si+1).
template <class S>
TensorJet<S> tractor_tracefree_sym(const MetricJet<S>& m, const TensorJet<S>& t, int si) {
    int d = m.d;
    TensorJet<S> r = t.symmetrized(si, si + 1);
    TensorJet<S> hl = tractor_metric(m, false);
    Jet<S> tr = outer(hl, r).contracted(0, 2).contracted(0, 1).at_flat(0);
    TensorJet<S> hu = tractor_metric(m, true).truncated(r.order());
    S c = S(1) / S(d + 2);
    return r - c * (tr * hu);
}

// r-operator on a symmetric trace-free rank-2 up tractor of weight
// w not in {0, -1, -d/2, -1-d/2, -2-d/2}; output is annihilated by X and by
// the tractor trace.
template <class S>
TensorJet<S> r_operator(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                        const TensorJet<S>& t) {
    int d = m.d;
    int w = t.weight();
    if (w == 0 || w == -1 || 2 * w == -d || 2 * (w + 1) == -d || 2 * (w + 2) == -d)
        throw std::domain_error("r_operator: excluded weight");
    if (!t.equals(t.transposed(0, 1)))
        throw std::invalid_argument("r_operator: symmetric input required");
    {
        TensorJet<S> hl = tractor_metric(m, false).truncated(t.order());
        Jet<S> tr = outer(hl, t).contracted(0, 2).contracted(0, 1).at_flat(0);
        if (!tr.is_zero()) throw std::invalid_argument("r_operator: trace-free input required");
    }
    // X_C T^{CB} is the top row of T (X lowered hits the top slot).
    TensorJet<S> v({Slot::tractor(true, d)}, t.layout_ptr(), t.order(), w + 1);
    for (int b = 0; b < d + 2; ++b) v.at({b}) = t.at({0, b});
    Jet<S> psi = v.at({0});  // X_C X_D T^{CD}
    TensorJet<S> term2 = tractor_tracefree_sym(m, hatted_d(m, pack, v), 0);
    TensorJet<S> psit = TensorJet<S>::scalar(psi, w + 2);
    TensorJet<S> term3 =
        tractor_tracefree_sym(m, hatted_d(m, pack, hatted_d(m, pack, psit)), 0);
    // phi = hatted_d contracted into v
    TensorJet<S> dv = hatted_d(m, pack, v);
    Jet<S> phi = flip_tractor_slot(m, dv, 0).contracted(0, 1).at_flat(0);
    TensorJet<S> dphi = hatted_d(m, pack, TensorJet<S>::scalar(phi, w));
    TensorJet<S> x = tractor_x(m, dphi.order());
    TensorJet<S> term4 = tractor_tracefree_sym(m, outer(x, dphi), 0);
    int v_ord = std::min(std::min(term2.order(), term3.order()), term4.order());
    TensorJet<S> r = t.truncated(v_ord) - S(2) / S(w) * term2.truncated(v_ord) +
                     S(1) / (S(w) * S(w + 1)) * term3.truncated(v_ord) -
                     S(8) / (S(w) * S(d) * S(d + 2 * w + 2)) * term4.truncated(v_ord);
    r.set_weight(w);
    return r;
}

// Conformal rescale data: Omega and Upsilon_a = grad ln Omega.
template <class S>
struct RescaleSpec {
    Jet<S> Omega;
    TensorJet<S> Upsilon;
};

template <class S>
RescaleSpec<S> make_rescale_spec(const MetricJet<S>& m, const Jet<S>& omega) {
    RescaleSpec<S> r;
    r.Omega = omega;
    Jet<S> inv = jet_reciprocal(omega);
    r.Upsilon = TensorJet<S>({Slot::tensor(false, m.d)}, m.layout_ptr(), omega.order() - 1);
    for (int a = 0; a < m.d; ++a)
        r.Upsilon.at({a}) = jet_differentiate(omega, a) * inv;
    return r;
}

// The rescaled metric Omega^2 g.
template <class S>
MetricJet<S> rescale_metric(const MetricJet<S>& m, const Jet<S>& omega) {
    Jet<S> o2 = omega * omega;
    return make_metric(o2 * m.g);
}

// Components of a tractor in the scale Omega^2 g. Per up slot
// (t+, t^a, t-) -> (Om t+, Om^{-1}(t^a + Ups^a t+),
//                   Om^{-1}(t- - Ups.t - (1/2)|Ups|^2 t+));
// per down slot (r, m_a, s) -> (Om^{-1}(r - Ups.m - (1/2)|Ups|^2 s),
//                               Om(m_a + Ups_a s), Om s);
// the whole multiplied by Omega^weight. Tensor slot components are
// representatives in fixed coordinates and only see the weight factor.
template <class S>
TensorJet<S> apply_rescale(const MetricJet<S>& m, const TensorJet<S>& t,
                           const RescaleSpec<S>& spec) {
    int d = m.d;
    if (!(spec.Omega.value_at_base() > S{}))
        throw std::invalid_argument("apply_rescale: Omega must be positive at the base point");
    TensorJet<S> up_up = flip_slot(m, spec.Upsilon, 0);
    Jet<S> up2 = dot(spec.Upsilon, up_up).at_flat(0);
    Jet<S> om_inv = jet_reciprocal(spec.Omega);
    TensorJet<S> r = t;
    for (int k = 0; k < t.rank(); ++k) {
        const Slot& sl = t.slots()[k];
        if (sl.kind != SlotKind::Tractor) continue;
        TensorJet<S> nr = r;
        for (int f = 0; f < r.ncomp(); ++f) {
            auto idx = r.unflatten(f);
            int b = idx[k];
            auto cidx = idx;
            auto comp = [&](int c) -> const Jet<S>& {
                cidx[k] = c;
                return r.at(cidx);
            };
            Jet<S> acc = r.at_flat(f);
            if (sl.up) {
                if (b == 0) {
                    acc = spec.Omega * acc;
                } else if (b <= d) {
                    acc += up_up.at({b - 1}) * comp(0);
                    acc = om_inv * acc;
                } else {
                    for (int j = 0; j < d; ++j)
                        acc -= spec.Upsilon.at({j}) * comp(1 + j);
                    acc -= S(1) / S(2) * (up2 * comp(0));
                    acc = om_inv * acc;
                }
            } else {
                if (b == 0) {
                    for (int j = 0; j < d; ++j)
                        acc -= up_up.at({j}) * comp(1 + j);
                    acc -= S(1) / S(2) * (up2 * comp(d + 1));
                    acc = om_inv * acc;
                } else if (b <= d) {
                    acc += spec.Upsilon.at({b - 1}) * comp(d + 1);
                    acc = spec.Omega * acc;
                } else {
                    acc = spec.Omega * acc;
                }
            }
            nr.at_flat(f) = acc;
        }
        r = nr;
    }
    int w = t.weight();
    Jet<S> fac = (w >= 0) ? jet_pow(spec.Omega, w) : jet_pow(om_inv, -w);
    return fac * r;
}

}  // namespace confhyp

#endif
