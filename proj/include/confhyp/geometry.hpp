#ifndef CONFHYP_GEOMETRY_HPP
#define CONFHYP_GEOMETRY_HPP

#include "confhyp/tensor.hpp"

namespace confhyp {

// Coordinate metric as jets together with its exact inverse.
template <class S>
struct MetricJet {
    int d = 0;
    TensorJet<S> g;      // g_{ab}, two down slots
    TensorJet<S> g_inv;  // g^{ab}

    std::shared_ptr<const JetLayout> layout_ptr() const { return g.layout_ptr(); }
    int order() const { return g.order(); }
};

namespace detail {

// Gauss-Jordan inverse over the jet ring; pivots on base-point values, which
// exist because the metric is nondegenerate at the base point.
template <class S>
std::vector<std::vector<Jet<S>>> invert_matrix(std::vector<std::vector<Jet<S>>> a) {
    int n = static_cast<int>(a.size());
    auto lay = a[0][0].layout_ptr();
    int v = a[0][0].order();
    std::vector<std::vector<Jet<S>>> inv(n, std::vector<Jet<S>>(n));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            inv[i][j] = (i == j) ? Jet<S>::constant(lay, S(1)).truncated(v)
                                 : Jet<S>(lay, v);
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!scalar_is_zero(a[r][col].value_at_base())) { piv = r; break; }
        if (piv < 0) throw std::domain_error("invert_matrix: degenerate at base point");
        std::swap(a[col], a[piv]);
        std::swap(inv[col], inv[piv]);
        Jet<S> pinv = jet_reciprocal(a[col][col]);
        for (int j = 0; j < n; ++j) {
            a[col][j] = a[col][j] * pinv;
            inv[col][j] = inv[col][j] * pinv;
        }
        for (int r = 0; r < n; ++r) {
            if (r == col || a[r][col].is_zero()) continue;
            Jet<S> f = a[r][col];
            for (int j = 0; j < n; ++j) {
                a[r][j] = a[r][j] - f * a[col][j];
                inv[r][j] = inv[r][j] - f * inv[col][j];
            }
        }
    }
    return inv;
}

}  // namespace detail

// Build a metric (and its inverse) from symmetric component jets; verifies
// positive definiteness at the base point via leading principal minors.
template <class S>
MetricJet<S> make_metric(const TensorJet<S>& g) {
    int d = g.slots()[0].extent;
    MetricJet<S> m;
    m.d = d;
    m.g = g;
    std::vector<std::vector<Jet<S>>> a(d, std::vector<Jet<S>>(d));
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) {
            if (!(g.at({i, j}) == g.at({j, i})))
                throw std::invalid_argument("make_metric: non-symmetric components");
            a[i][j] = g.at({i, j});
        }
    // leading principal minors at degree 0
    {
        std::vector<std::vector<S>> b(d, std::vector<S>(d));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j) b[i][j] = g.at({i, j}).value_at_base();
        for (int k = 1; k <= d; ++k) {
            // determinant of leading k x k block by fraction-free elimination
            std::vector<std::vector<S>> c(k, std::vector<S>(k));
            for (int i = 0; i < k; ++i)
                for (int j = 0; j < k; ++j) c[i][j] = b[i][j];
            S det = S(1);
            for (int col = 0; col < k; ++col) {
                int piv = -1;
                for (int r = col; r < k; ++r)
                    if (!scalar_is_zero(c[r][col])) { piv = r; break; }
                if (piv < 0) { det = S(0); break; }
                if (piv != col) { std::swap(c[piv], c[col]); det = -det; }
                det *= c[col][col];
                S pi = S(1) / c[col][col];
                for (int r = col + 1; r < k; ++r) {
                    S f = c[r][col] * pi;
                    for (int j = col; j < k; ++j) c[r][j] -= f * c[col][j];
                }
            }
            if (!(det > S(0)))
                throw std::domain_error("make_metric: not positive definite at base point");
        }
    }
    auto inv = detail::invert_matrix(a);
    m.g_inv = TensorJet<S>({Slot::tensor(true, d), Slot::tensor(true, d)}, g.layout_ptr(),
                           g.order());
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m.g_inv.at({i, j}) = inv[i][j];
    return m;
}

// Christoffel symbols Gamma^c_{ab}, stored with slot order (c, a, b).
template <class S>
TensorJet<S> christoffel(const MetricJet<S>& m) {
    int d = m.d;
    if (m.order() < 1) throw std::invalid_argument("christoffel: insufficient order");
    auto lay = m.layout_ptr();
    int v = m.order() - 1;
    std::vector<std::vector<std::vector<Jet<S>>>> dg(
        d, std::vector<std::vector<Jet<S>>>(d, std::vector<Jet<S>>(d)));
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) {
                dg[a][i][j] = jet_differentiate(m.g.at({i, j}), a);
                if (j != i) dg[a][j][i] = dg[a][i][j];
            }
    TensorJet<S> gamma({Slot::tensor(true, d), Slot::tensor(false, d), Slot::tensor(false, d)},
                       lay, v);
    S half = S(1) / S(2);
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b <= a; ++b) {
                Jet<S> acc(lay, v);
                for (int e = 0; e < d; ++e) {
                    if (m.g_inv.at({c, e}).is_zero()) continue;
                    acc += m.g_inv.at({c, e}) * (dg[a][b][e] + dg[b][a][e] - dg[e][a][b]);
                }
                gamma.at({c, a, b}) = half * acc;
                if (b != a) gamma.at({c, b, a}) = gamma.at({c, a, b});
            }
    return gamma;
}

// Covariant derivative with the derivative slot prepended. Tensor slots use
// the Christoffel action; tractor slots additionally mix via the Schouten
// tensor (pass P for any input carrying tractor slots).
template <class S>
TensorJet<S> cov_deriv(const MetricJet<S>& m, const TensorJet<S>& gamma, const TensorJet<S>& t,
                       const TensorJet<S>* schouten = nullptr) {
    int d = m.d;
    if (t.order() < 1) throw std::invalid_argument("cov_deriv: insufficient order");
    auto lay = t.layout_ptr();
    int v = std::min(t.order(), gamma.order() + 1) - 1;
    std::vector<Slot> slots;
    slots.push_back(Slot::tensor(false, d));
    for (const auto& s : t.slots()) slots.push_back(s);
    TensorJet<S> r(slots, lay, v, t.weight());

    for (int f = 0; f < t.ncomp(); ++f) {
        auto idx = t.unflatten(f);
        for (int a = 0; a < d; ++a) {
            std::vector<int> ridx;
            ridx.reserve(idx.size() + 1);
            ridx.push_back(a);
            ridx.insert(ridx.end(), idx.begin(), idx.end());
            Jet<S> acc = jet_differentiate(t.at_flat(f), a).truncated(v);
            for (int k = 0; k < t.rank(); ++k) {
                const Slot& sl = t.slots()[k];
                std::vector<int> jdx = idx;
                if (sl.kind == SlotKind::Tensor) {
                    int c = idx[k];
                    for (int e = 0; e < d; ++e) {
                        jdx[k] = e;
                        const Jet<S>& comp = t.at(jdx);
                        if (comp.is_zero()) continue;
                        if (sl.up)
                            acc += gamma.at({c, a, e}) * comp;
                        else
                            acc -= gamma.at({e, a, c}) * comp;
                    }
                } else {
                    if (!schouten)
                        throw std::invalid_argument("cov_deriv: tractor slot needs Schouten");
                    const TensorJet<S>& P = *schouten;
                    int B = idx[k];
                    // tractor Christoffel G^B_{aC}: middle block uses Gamma, plus the
                    // top/bottom mixing of the tractor connection display.
                    auto add = [&](int C, const Jet<S>& gcoef, bool plus) {
                        jdx[k] = C;
                        const Jet<S>& comp = t.at(jdx);
                        if (comp.is_zero() || gcoef.is_zero()) return;
                        if (plus == sl.up)
                            acc += gcoef * comp;
                        else
                            acc -= gcoef * comp;
                    };
                    // For an up slot: (nabla T)^B += G^B_{aC} T^C.
                    // For a down slot: (nabla T)_B -= G^C_{aB} T_C; we reuse the same
                    // table with (B, C) transposed via the lambda below.
                    auto G_entry = [&](int Brow, int Ccol) -> Jet<S> {
                        Jet<S> z(lay, v);
                        if (Brow == 0) {
                            if (Ccol >= 1 && Ccol <= d) return -m.g.at({a, Ccol - 1});
                            return z;
                        }
                        if (Brow >= 1 && Brow <= d) {
                            int i = Brow - 1;
                            if (Ccol == 0) {
                                Jet<S> acc2(lay, v);
                                for (int e = 0; e < d; ++e)
                                    acc2 += m.g_inv.at({i, e}) * P.at({a, e});
                                return acc2;
                            }
                            if (Ccol >= 1 && Ccol <= d) return gamma.at({i, a, Ccol - 1});
                            if (Ccol == d + 1)
                                return (a == i) ? Jet<S>::constant(lay, S(1)).truncated(v) : z;
                        }
                        if (Brow == d + 1 && Ccol >= 1 && Ccol <= d)
                            return -P.at({a, Ccol - 1});
                        return z;
                    };
                    int ext = d + 2;
                    for (int C = 0; C < ext; ++C) {
                        Jet<S> gcoef = sl.up ? G_entry(B, C) : G_entry(C, B);
                        add(C, gcoef, true);
                    }
                }
            }
            r.at(ridx) = acc;
        }
    }
    return r;
}

// Christoffels, Riemann, Ricci, scalar, Schouten, J, Weyl, Cotton.
template <class S>
struct CurvaturePack {
    TensorJet<S> Gamma;     // Gamma^c_{ab}, slots (c,a,b)
    TensorJet<S> Riemann;   // R_{abcd}
    TensorJet<S> Ricci;     // Ric_{ab}
    Jet<S> Sc;
    TensorJet<S> Schouten;  // P_{ab}
    Jet<S> J;
    TensorJet<S> Weyl;      // W_{abcd}
    TensorJet<S> Cotton;    // C_{abc}
};

// R_{ab}{}^c{}_d lowered on the third slot with the convention fixed by the
// Weyl/Schouten decomposition test.
template <class S>
TensorJet<S> riemann(const MetricJet<S>& m, const TensorJet<S>& gamma) {
    int d = m.d;
    if (m.order() < 2) throw std::invalid_argument("riemann: insufficient order");
    auto lay = m.layout_ptr();
    int v = gamma.order() - 1;
    // dGamma[a][c][b][e] = partial_a Gamma^c_{be}
    TensorJet<S> up({Slot::tensor(false, d), Slot::tensor(false, d), Slot::tensor(true, d),
                     Slot::tensor(false, d)},
                    lay, v);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (b > a) continue;
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    Jet<S> acc = jet_differentiate(gamma.at({c, b, e}), a) -
                                 jet_differentiate(gamma.at({c, a, e}), b);
                    for (int f2 = 0; f2 < d; ++f2) {
                        const Jet<S>& g1 = gamma.at({c, a, f2});
                        const Jet<S>& g2 = gamma.at({f2, b, e});
                        if (!g1.is_zero() && !g2.is_zero()) acc += g1 * g2;
                        const Jet<S>& g3 = gamma.at({c, b, f2});
                        const Jet<S>& g4 = gamma.at({f2, a, e});
                        if (!g3.is_zero() && !g4.is_zero()) acc -= g3 * g4;
                    }
                    up.at({a, b, c, e}) = acc.truncated(v);
                    up.at({b, a, c, e}) = -up.at({a, b, c, e});
                }
        }
    TensorJet<S> low({Slot::tensor(false, d), Slot::tensor(false, d), Slot::tensor(false, d),
                      Slot::tensor(false, d)},
                     lay, v);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < a; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    Jet<S> acc(lay, v);
                    for (int f2 = 0; f2 < d; ++f2) {
                        const Jet<S>& u = up.at({a, b, f2, e});
                        if (!u.is_zero() && !m.g.at({c, f2}).is_zero())
                            acc += m.g.at({c, f2}) * u;
                    }
                    low.at({a, b, c, e}) = acc;
                    low.at({b, a, c, e}) = -acc;
                }
    return low;
}

template <class S>
CurvaturePack<S> curvature_pack(const MetricJet<S>& m) {
    int d = m.d;
    if (d < 3) throw std::invalid_argument("curvature_pack: d < 3");
    CurvaturePack<S> p;
    p.Gamma = christoffel(m);
    p.Riemann = riemann(m, p.Gamma);
    auto lay = m.layout_ptr();
    int v = p.Riemann.order();
    // Ric_{ab} = R_{ca}{}^c{}_b = g^{ce} R_{cae b}
    p.Ricci = TensorJet<S>({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, v);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b <= a; ++b) {
            Jet<S> acc(lay, v);
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    const Jet<S>& r = p.Riemann.at({c, a, e, b});
                    if (!r.is_zero() && !m.g_inv.at({c, e}).is_zero())
                        acc += m.g_inv.at({c, e}) * r;
                }
            p.Ricci.at({a, b}) = acc;
            if (b != a) p.Ricci.at({b, a}) = acc;
        }
    p.Sc = Jet<S>(lay, v);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (p.Ricci.at({a, b}).is_zero() || m.g_inv.at({a, b}).is_zero()) continue;
            p.Sc += m.g_inv.at({a, b}) * p.Ricci.at({a, b});
        }
    S c1 = S(1) / S(d - 2);
    S c2 = S(1) / S(2 * (d - 1));
    p.Schouten = TensorJet<S>({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, v);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b <= a; ++b) {
            p.Schouten.at({a, b}) =
                c1 * (p.Ricci.at({a, b}) - c2 * (p.Sc * m.g.at({a, b})));
            if (b != a) p.Schouten.at({b, a}) = p.Schouten.at({a, b});
        }
    p.J = Jet<S>(lay, v);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (p.Schouten.at({a, b}).is_zero() || m.g_inv.at({a, b}).is_zero()) continue;
            p.J += m.g_inv.at({a, b}) * p.Schouten.at({a, b});
        }
    p.Weyl = TensorJet<S>({Slot::tensor(false, d), Slot::tensor(false, d),
                           Slot::tensor(false, d), Slot::tensor(false, d)},
                          lay, v);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    p.Weyl.at({a, b, c, e}) =
                        p.Riemann.at({a, b, c, e}) -
                        (m.g.at({a, c}) * p.Schouten.at({b, e}) -
                         m.g.at({b, c}) * p.Schouten.at({a, e}) -
                         m.g.at({a, e}) * p.Schouten.at({b, c}) +
                         m.g.at({b, e}) * p.Schouten.at({a, c}));
                }
    // C_{abc} = nabla_{[a} P_{b]c}
    if (m.order() >= 3) {
        TensorJet<S> dP = cov_deriv(m, p.Gamma, p.Schouten);
        int vc = dP.order();
        p.Cotton = TensorJet<S>({Slot::tensor(false, d), Slot::tensor(false, d),
                                 Slot::tensor(false, d)},
                                lay, vc);
        S half = S(1) / S(2);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c)
                    p.Cotton.at({a, b, c}) =
                        half * (dP.at({a, b, c}) - dP.at({b, a, c}));
    }
    return p;
}

// Laplacian of a scalar jet.
template <class S>
Jet<S> laplacian(const MetricJet<S>& m, const TensorJet<S>& gamma, const Jet<S>& f) {
    auto lay = m.layout_ptr();
    int d = m.d;
    TensorJet<S> df = cov_deriv(m, gamma, TensorJet<S>::scalar(f));
    TensorJet<S> ddf = cov_deriv(m, gamma, df);
    Jet<S> acc(lay, ddf.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (ddf.at({a, b}).is_zero() || m.g_inv.at({a, b}).is_zero()) continue;
            acc += m.g_inv.at({a, b}) * ddf.at({a, b});
        }
    return acc;
}

// Raise slot k with g^{ab} (or lower with g_{ab} when the slot is up).
template <class S>
TensorJet<S> flip_slot(const MetricJet<S>& m, const TensorJet<S>& t, int k) {
    const Slot& sl = t.slots()[k];
    if (sl.kind != SlotKind::Tensor) throw std::invalid_argument("flip_slot: tensor slots only");
    const TensorJet<S>& met = sl.up ? m.g : m.g_inv;
    int d = m.d;
    std::vector<Slot> slots = t.slots();
    slots[k].up = !sl.up;
    TensorJet<S> r(slots, t.layout_ptr(), t.order(), t.weight());
    for (int f = 0; f < t.ncomp(); ++f) {
        auto idx = t.unflatten(f);
        int i = idx[k];
        Jet<S> acc(t.layout_ptr(), t.order());
        auto jdx = idx;
        for (int e = 0; e < d; ++e) {
            jdx[k] = e;
            const Jet<S>& comp = t.at(jdx);
            if (comp.is_zero() || met.at({i, e}).is_zero()) continue;
            acc += met.at({i, e}) * comp;
        }
        r.at(idx) = acc;
    }
    return r;
}

}  // namespace confhyp

#endif
