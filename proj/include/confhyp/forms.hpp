#ifndef CONFHYP_FORMS_HPP
#define CONFHYP_FORMS_HPP

#include "confhyp/tractor.hpp"

namespace confhyp {

// The surface x0 = 0 is coordinatized by the remaining axes, so covariant
// tangential tensors pull back by dropping the x0 components and the
// x0-dependence. Intrinsic objects live on a (dim-1)-variable layout.
template <class S>
Jet<S> jet_pullback(std::shared_ptr<const JetLayout> lay2, const Jet<S>& a) {
    Jet<S> r(lay2, std::min(a.order(), lay2->trunc()));
    const JetLayout& lay = a.layout();
    for (int i = 0; i < a.ncoeff(); ++i) {
        const MultiIndex& mi = lay.monomial(i);
        if (mi[0] != 0) continue;
        if (lay.degree_of(i) > r.order()) break;
        MultiIndex mj(mi.begin() + 1, mi.end());
        r.set_coeff(mj, a.coeff(i));
    }
    return r;
}

// Pullback of a covariant tensor restricted to the surface: keep tangential
// index values 1..dim-1.
template <class S>
TensorJet<S> tensor_pullback(std::shared_ptr<const JetLayout> lay2, const TensorJet<S>& t) {
    int d2 = lay2->dim();
    for (const auto& sl : t.slots())
        if (sl.kind != SlotKind::Tensor || sl.up)
            throw std::invalid_argument("tensor_pullback: covariant tensor slots only");
    std::vector<Slot> slots(t.rank(), Slot::tensor(false, d2));
    TensorJet<S> r(slots, lay2, std::min(t.order(), lay2->trunc()), t.weight());
    for (int f = 0; f < r.ncomp(); ++f) {
        auto idx = r.unflatten(f);
        for (auto& i : idx) i += 1;
        r.at_flat(f) = jet_pullback(lay2, t.at(idx));
    }
    return r;
}

// Intrinsic data of the surface: induced metric, curvature, and the pulled
// back trace-free second fundamental form.
template <class S>
struct SurfaceGeometry {
    std::shared_ptr<const JetLayout> lay2;
    MetricJet<S> metric;
    CurvaturePack<S> pack;
    TensorJet<S> IIo;  // intrinsic components
};

template <class S>
SurfaceGeometry<S> surface_geometry(const MetricJet<S>& m, const HypersurfaceFrame<S>& f) {
    int d = m.d;
    if (d < 4) throw std::invalid_argument("surface_geometry: d < 4");
    SurfaceGeometry<S> s;
    s.lay2 = JetLayout::get(d - 1, m.layout_ptr()->trunc());
    TensorJet<S> gb({Slot::tensor(false, d - 1), Slot::tensor(false, d - 1)}, s.lay2,
                    m.order());
    for (int i = 0; i < d - 1; ++i)
        for (int j = 0; j < d - 1; ++j)
            gb.at({i, j}) = jet_pullback(s.lay2, restrict_to_surface(m.g.at({1 + i, 1 + j})));
    s.metric = make_metric(gb);
    s.pack = curvature_pack(s.metric);
    s.IIo = tensor_pullback(s.lay2, f.IIo);
    s.IIo.set_weight(1);
    return s;
}

// Trace-free part of a symmetric covariant 2-tensor against the given metric.
template <class S>
TensorJet<S> tracefree_part(const MetricJet<S>& m, const TensorJet<S>& t) {
    int d = m.d;
    Jet<S> tr(m.layout_ptr(), t.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (t.at({a, b}).is_zero() || m.g_inv.at({a, b}).is_zero()) continue;
            tr += m.g_inv.at({a, b}) * t.at({a, b});
        }
    TensorJet<S> r = t;
    S c = S(1) / S(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) r.at({a, b}) -= c * (tr * m.g.at({a, b}));
    return r;
}

template <class S>
struct FundamentalForm {
    int m_index = 0;
    int weight = 0;                      // 3 - m_index
    TensorJet<S> components;             // intrinsic, symmetric trace-free
    int transverse_order_measured = -1;  // filled by probes where applicable
};

// Third fundamental form: -(IIo^2)_{(ab)o} + W_{nabn} pulled back.
template <class S>
FundamentalForm<S> third_form(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                              const HypersurfaceFrame<S>& f) {
    int d = m.d;
    if (d < 4) throw std::invalid_argument("third_form: d < 4");
    SurfaceGeometry<S> sg = surface_geometry(m, f);
    int d2 = d - 1;
    TensorJet<S> iio_up = flip_slot(sg.metric, sg.IIo, 0);  // IIo^c_b
    TensorJet<S> iio2 = dot(sg.IIo, iio_up);
    // W_{cabd} nhat^c nhat^d at the surface, pulled back
    TensorJet<S> wnn({Slot::tensor(false, d), Slot::tensor(false, d)}, m.layout_ptr(),
                     pack.Weyl.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Jet<S> acc(m.layout_ptr(), pack.Weyl.order());
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    const Jet<S>& w = pack.Weyl.at({c, a, b, e});
                    if (w.is_zero()) continue;
                    acc += f.n_hat_up.at({c}) * f.n_hat_up.at({e}) * w;
                }
            wnn.at({a, b}) = acc;
        }
    TensorJet<S> wb = tensor_pullback(sg.lay2, restrict_to_surface(wnn));
    FundamentalForm<S> r;
    r.m_index = 3;
    r.weight = 0;
    r.components = tracefree_part(sg.metric, (-iio2 + wb).symmetrized(0, 1));
    r.components.set_weight(0);
    (void)d2;
    return r;
}

// Fourth fundamental form, d >= 6. Ambient pieces are computed with the
// hypersurface frame, restricted, and pulled back; the barred derivative and
// barred Weyl use the induced metric.
template <class S>
FundamentalForm<S> fourth_form(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                               const HypersurfaceFrame<S>& f) {
    int d = m.d;
    if (d < 6) throw std::invalid_argument("fourth_form: d < 6");
    SurfaceGeometry<S> sg = surface_geometry(m, f);
    auto lay = m.layout_ptr();
    auto pull = [&](const TensorJet<S>& t) {
        return tensor_pullback(sg.lay2, restrict_to_surface(t));
    };
    int v = pack.Weyl.order();
    // W_{cabd} nhat^c nhat^d
    TensorJet<S> wnn({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, v);
    // W_{cabe} nhat^e (slots c,a,b)
    TensorJet<S> wn({Slot::tensor(false, d), Slot::tensor(false, d), Slot::tensor(false, d)},
                    lay, v);
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                Jet<S> acc(lay, v);
                for (int e = 0; e < d; ++e) {
                    const Jet<S>& w = pack.Weyl.at({c, a, b, e});
                    if (w.is_zero()) continue;
                    acc += f.n_hat_up.at({e}) * w;
                }
                wn.at({c, a, b}) = acc;
            }
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Jet<S> acc(lay, v);
            for (int c = 0; c < d; ++c) {
                if (wn.at({c, a, b}).is_zero()) continue;
                acc += f.n_hat_up.at({c}) * wn.at({c, a, b});
            }
            wnn.at({a, b}) = acc;
        }
    // term 1: -2(d-4)(d-5) C^T_{n(ab)}; the factor 2 converts the stored
    // Cotton normalization (half-antisymmetrized) to the plain difference.
    TensorJet<S> cn({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, pack.Cotton.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Jet<S> acc(lay, pack.Cotton.order());
            for (int c = 0; c < d; ++c) {
                if (pack.Cotton.at({c, a, b}).is_zero()) continue;
                acc += f.n_hat_up.at({c}) * pack.Cotton.at({c, a, b});
            }
            cn.at({a, b}) = acc;
        }
    TensorJet<S> t1 = S(-2 * (d - 4) * (d - 5)) * pull(cn).symmetrized(0, 1);
    // term 2: -(d-4)(d-5) H W_{nabn}
    TensorJet<S> t2 = S(-(d - 4) * (d - 5)) *
                      (jet_pullback(sg.lay2, restrict_to_surface(f.H)) * pull(wnn));
    // term 3: -(d-4) barred div over c of W_{c(ab)n}
    TensorJet<S> wnp = pull(wn).symmetrized(1, 2);
    TensorJet<S> dwn = cov_deriv(sg.metric, sg.pack.Gamma, wnp);  // (e, c, a, b)
    TensorJet<S> div3 = flip_slot(sg.metric, dwn, 0).contracted(0, 1);
    TensorJet<S> t3 = S(-(d - 4)) * div3;
    // term 4: 2 W_{c nhat nhat (a} IIo^c_{b)}
    TensorJet<S> wcnn({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, v);
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a) {
            Jet<S> acc(lay, v);
            for (int e = 0; e < d; ++e)
                for (int e2 = 0; e2 < d; ++e2) {
                    const Jet<S>& w = pack.Weyl.at({c, e, e2, a});
                    if (w.is_zero()) continue;
                    acc += f.n_hat_up.at({e}) * f.n_hat_up.at({e2}) * w;
                }
            wcnn.at({c, a}) = acc;
        }
    TensorJet<S> wcnnp = pull(wcnn);  // (c, a) intrinsic
    TensorJet<S> iio_up = flip_slot(sg.metric, sg.IIo, 0);  // IIo^c_b on slot 0
    TensorJet<S> t4 = S(2) * dot(wcnnp.transposed(0, 1), iio_up).symmetrized(0, 1);
    // term 5: -((d^2-7d+18)/(d-3)) III_(a . IIo_b)
    FundamentalForm<S> iii = third_form(m, pack, f);
    TensorJet<S> t5 = S(-(d * d - 7 * d + 18)) / S(d - 3) *
                      dot(iii.components, iio_up).symmetrized(0, 1);
    // term 6: (d-6) barred-W^c_{ab}^e IIo_{ce}
    TensorJet<S> t6({Slot::tensor(false, d - 1), Slot::tensor(false, d - 1)}, sg.lay2,
                    sg.pack.Weyl.order());
    {
        TensorJet<S> iio_upup = flip_slot(sg.metric, iio_up, 1);  // IIo^{ce}
        for (int a = 0; a < d - 1; ++a)
            for (int b = 0; b < d - 1; ++b) {
                Jet<S> acc(sg.lay2, sg.pack.Weyl.order());
                for (int c = 0; c < d - 1; ++c)
                    for (int e = 0; e < d - 1; ++e) {
                        const Jet<S>& w = sg.pack.Weyl.at({c, a, b, e});
                        if (w.is_zero() || iio_upup.at({c, e}).is_zero()) continue;
                        acc += w * iio_upup.at({c, e});
                    }
                t6.at({a, b}) = acc;
            }
        t6 = S(d - 6) * t6;
    }
    // term 7: ((d^3-10d^2+25d-10)/((d-1)(d-2))) K IIo
    Jet<S> K = dot(iio_up, iio_up).contracted(0, 1).at_flat(0);
    TensorJet<S> t7 = S(d * d * d - 10 * d * d + 25 * d - 10) / (S(d - 1) * S(d - 2)) *
                      (K * sg.IIo);
    int vo = t3.order();
    auto tr = [&](const TensorJet<S>& t) { return t.truncated(vo); };
    FundamentalForm<S> r;
    r.m_index = 4;
    r.weight = -1;
    r.components = tracefree_part(
        sg.metric, (tr(t1) + tr(t2) + tr(t3) + tr(t4) + tr(t5) + tr(t6) + tr(t7)));
    r.components.set_weight(-1);
    return r;
}

// delta_R = grad_nhat - w H, restricted to the surface.
template <class S>
TensorJet<S> delta_r_apply(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                           const HypersurfaceFrame<S>& f, const TensorJet<S>& t) {
    TensorJet<S> dt = cov_deriv(m, pack.Gamma, t, &pack.Schouten);
    TensorJet<S> r = dot(flip_slot(m, f.n_hat, 0), dt) - S(t.weight()) * (f.H * t);
    r = restrict_to_surface(r);
    r.set_weight(t.weight() - 1);
    return r;
}

// delta_k: (k-1)-fold Thomas operator, each new slot contracted with the
// normal tractor extension immediately, then delta_R, restricted to the
// surface.
template <class S>
TensorJet<S> delta_k_apply(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                           const HypersurfaceFrame<S>& f, const TensorJet<S>& t, int k) {
    if (k < 1) throw std::invalid_argument("delta_k_apply: k < 1");
    int d = m.d;
    int w = t.weight();
    if (k + 1 - d <= 2 * w && 2 * w <= 2 * k - 1 - d)
        throw std::domain_error("delta_k_apply: excluded weight");
    TensorJet<S> n = normal_tractor(m, f);
    TensorJet<S> nl = flip_tractor_slot(m, n, 0);
    TensorJet<S> cur = t;
    for (int j = 0; j < k - 1; ++j) cur = dot(nl, thomas_d(m, pack, cur));
    return delta_r_apply(m, pack, f, cur);
}

// Tangential trace-free part of the (m_index-2)-th normal derivative of the
// extended trace-free second fundamental form, pulled back to the surface:
// the leading representative of the m-th form.
template <class S>
FundamentalForm<S> higher_form_leading(int m_index, const MetricJet<S>& m,
                                       const CurvaturePack<S>& pack,
                                       const HypersurfaceFrame<S>& f) {
    int d = m.d;
    if (m_index < 2 || m_index >= d)
        throw std::invalid_argument("higher_form_leading: index out of range (order-d case excluded)");
    SurfaceGeometry<S> sg = surface_geometry(m, f);
    TensorJet<S> t = normal_derivative_power(m, pack, f, f.IIo_e, m_index - 2);
    FundamentalForm<S> r;
    r.m_index = m_index;
    r.weight = 3 - m_index;
    r.components =
        tracefree_part(sg.metric, tensor_pullback(sg.lay2, restrict_to_surface(t)));
    r.components.set_weight(r.weight);
    return r;
}

}  // namespace confhyp

#endif
