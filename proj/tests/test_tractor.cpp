#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "confhyp/tractor.hpp"
#include "confhyp/yamabe.hpp"

using namespace confhyp;
using S = Rational;

namespace {

MetricJet<S> curved_metric(int d, int T) {
    auto lay = JetLayout::get(d, T);
    auto s = Jet<S>::coordinate(lay, 0);
    auto y = Jet<S>::coordinate(lay, 1);
    auto x = Jet<S>::coordinate(lay, 2);
    TensorJet<S> g({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, T);
    for (int i = 0; i < d; ++i) g.at({i, i}) = Jet<S>::constant(lay, S(1));
    g.at({1, 1}) = g.at({1, 1}) + s * y + S(1) / S(3) * (x * x);
    g.at({1, 2}) = S(1) / S(2) * (s * x) + y * y;
    g.at({2, 1}) = g.at({1, 2});
    g.at({0, 0}) = g.at({0, 0}) + y * x;
    return make_metric(g);
}

MetricJet<S> flat_metric(int d, int T) {
    auto lay = JetLayout::get(d, T);
    TensorJet<S> g({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, T);
    for (int i = 0; i < d; ++i) g.at({i, i}) = Jet<S>::constant(lay, S(1));
    return make_metric(g);
}

}  // namespace

TEST_CASE("canonical tractor is null and the scale tractor squares to I^2") {
    int d = 4, T = 6;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    auto lay = m.layout_ptr();
    auto X = tractor_x(m, T);
    CHECK(tractor_pair(m, X, X).is_zero());

    auto s = Jet<S>::coordinate(lay, 0);
    auto y = Jet<S>::coordinate(lay, 1);
    auto x = Jet<S>::coordinate(lay, 2);
    Jet<S> sigma = s + S(1) / S(2) * (s * y) + S(1) / S(4) * (y * x);
    auto I = scale_tractor(m, pack, sigma);
    Jet<S> p = tractor_pair(m, I, I);
    Jet<S> i2 = i_squared(m, pack, sigma);
    CHECK(p == i2.truncated(p.order()));
}

TEST_CASE("flat scale tractor and Thomas operator on constants") {
    int d = 4, T = 6;
    auto m = flat_metric(d, T);
    auto pack = curvature_pack(m);
    auto lay = m.layout_ptr();
    auto s = Jet<S>::coordinate(lay, 0);
    auto I = scale_tractor(m, pack, s);
    CHECK(I.at({0}) == s.truncated(I.order()));
    CHECK(I.at({1}) == Jet<S>::constant(lay, S(1)).truncated(I.order()));
    CHECK(I.at({2}).is_zero());
    CHECK(I.at({d + 1}).is_zero());
    // weight-w constant c: D c = (w(d+2w-2) c, 0, 0)
    TensorJet<S> c = TensorJet<S>::scalar(Jet<S>::constant(lay, S(5)), 3);
    auto Dc = thomas_d(m, pack, c);
    CHECK(Dc.at({0}) ==
          Jet<S>::constant(lay, S(3 * (d + 6 - 2) * 5)).truncated(Dc.order()));
    for (int i = 1; i <= d + 1; ++i) CHECK(Dc.at({i}).is_zero());
}

TEST_CASE("Thomas operator composed with itself traces to zero") {
    int d = 5, T = 6;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    auto lay = m.layout_ptr();
    auto y = Jet<S>::coordinate(lay, 1);
    auto s = Jet<S>::coordinate(lay, 0);
    auto x = Jet<S>::coordinate(lay, 2);
    TensorJet<S> c = TensorJet<S>::scalar(Jet<S>::constant(lay, S(1)) + y * y + s * x, 2);
    auto DD = thomas_d(m, pack, thomas_d(m, pack, c));
    CHECK(flip_tractor_slot(m, DD, 0).contracted(0, 1).is_zero());
    TensorJet<S> t1({Slot::tractor(true, d)}, lay, T, 2);
    t1.at({0}) = Jet<S>::constant(lay, S(1)) + y + s * x;
    t1.at({1}) = x - S(2) * (y * y);
    t1.at({3}) = y * x + S(1) / S(3) * s;
    t1.at({d + 1}) = S(1) / S(2) * x + s * s;
    auto DD1 = thomas_d(m, pack, thomas_d(m, pack, t1));
    CHECK(flip_tractor_slot(m, DD1, 0).contracted(0, 1).is_zero());
}

TEST_CASE("tractor connection is metric for the tractor pairing") {
    int d = 4, T = 6;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    auto lay = m.layout_ptr();
    auto s = Jet<S>::coordinate(lay, 0);
    auto y = Jet<S>::coordinate(lay, 1);
    auto x = Jet<S>::coordinate(lay, 2);
    TensorJet<S> t1({Slot::tractor(true, d)}, lay, T, 0);
    t1.at({0}) = Jet<S>::constant(lay, S(1)) + y + s * x;
    t1.at({1}) = x - S(2) * (y * y);
    t1.at({d + 1}) = S(1) / S(2) * x + s * s;
    TensorJet<S> t2({Slot::tractor(true, d)}, lay, T, 0);
    t2.at({0}) = y - x * x;
    t2.at({2}) = S(2) * s + y * x;
    t2.at({d + 1}) = Jet<S>::constant(lay, S(1)) + s * y;
    Jet<S> p = tractor_pair(m, t1, t2);
    TensorJet<S> dp = gradient(m, p);
    auto dt1 = tractor_connection_apply(m, pack, t1);
    auto dt2 = tractor_connection_apply(m, pack, t2);
    auto lhs = dot(dt1, flip_tractor_slot(m, t2, 0)) + dot(dt2, flip_tractor_slot(m, t1, 0));
    for (int a = 0; a < d; ++a) CHECK(lhs.at({a}) == dp.at({a}).truncated(lhs.order()));
}

TEST_CASE("Leibniz failure of the normalized Thomas operator is X-directed") {
    for (int d : {4, 5}) {
        int T = 6;
        auto m = curved_metric(d, T);
        auto pack = curvature_pack(m);
        auto lay = m.layout_ptr();
        auto s = Jet<S>::coordinate(lay, 0);
        auto y = Jet<S>::coordinate(lay, 1);
        auto x = Jet<S>::coordinate(lay, 2);
        for (auto [w1, w2] : std::vector<std::pair<int, int>>{{2, 1}, {1, 1}, {3, 2}}) {
            TensorJet<S> a = TensorJet<S>::scalar(
                Jet<S>::constant(lay, S(1)) + y + S(2) * (x * x) + s * s * y, w1);
            TensorJet<S> b = TensorJet<S>::scalar(
                Jet<S>::constant(lay, S(2)) + x - s * y + y * y, w2);
            TensorJet<S> ab = TensorJet<S>::scalar(a.at_flat(0) * b.at_flat(0), w1 + w2);
            auto Da = hatted_d(m, pack, a);
            auto Db = hatted_d(m, pack, b);
            auto Dab = hatted_d(m, pack, ab);
            auto lhs = Dab - b.at_flat(0) * Da - a.at_flat(0) * Db;
            Jet<S> dd = dot(flip_tractor_slot(m, Da, 0), Db).at_flat(0);
            auto rhs = (S(-2) / S(d + 2 * w1 + 2 * w2 - 2) * dd) * tractor_x(m, lhs.order());
            CHECK(lhs.truncated(rhs.order()).equals(rhs.truncated(lhs.order())));
        }
    }
}

TEST_CASE("commutator of normalized Thomas operators projects to the Weyl action") {
    int d = 4, T = 6;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    auto lay = m.layout_ptr();
    auto s = Jet<S>::coordinate(lay, 0);
    auto y = Jet<S>::coordinate(lay, 1);
    auto x = Jet<S>::coordinate(lay, 2);
    for (int w : {2, 3}) {
        TensorJet<S> t({Slot::tractor(true, d)}, lay, T, w);  // pure middle slot
        t.at({1}) = Jet<S>::constant(lay, S(1)) + y + s * x;
        t.at({2}) = x - S(2) * (y * y);
        t.at({4}) = y * x + S(1) / S(3) * s;
        auto D2 = hatted_d(m, pack, hatted_d(m, pack, t));
        auto comm = D2 - D2.transposed(0, 1);
        auto low = flip_tractor_slot(m, flip_tractor_slot(m, comm, 0), 1);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int c = 0; c < d; ++c) {
                    Jet<S> rhs(lay, low.order());
                    for (int e = 0; e < d; ++e) {
                        if (pack.Weyl.at({a, b, c, e}).is_zero()) continue;
                        rhs += pack.Weyl.at({a, b, c, e}) * t.at({1 + e});
                    }
                    Jet<S> lhs = low.at({1 + a, 1 + b, 1 + c});
                    int vo = std::min(lhs.order(), rhs.order());
                    CHECK((lhs.truncated(vo) - rhs.truncated(vo)).is_zero());
                }
    }
}

TEST_CASE("rank-2 insertion operator output is annihilated by X and h") {
    int d = 4, T = 6;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    auto lay = m.layout_ptr();
    auto s = Jet<S>::coordinate(lay, 0);
    auto y = Jet<S>::coordinate(lay, 1);
    auto x = Jet<S>::coordinate(lay, 2);
    TensorJet<S> t1({Slot::tractor(true, d)}, lay, T, 0);
    t1.at({0}) = Jet<S>::constant(lay, S(1)) + y + s * x;
    t1.at({1}) = x - S(2) * (y * y);
    t1.at({3}) = y * x + S(1) / S(3) * s;
    t1.at({d + 1}) = S(1) / S(2) * x + s * s;
    TensorJet<S> t2({Slot::tractor(true, d)}, lay, T, 0);
    t2.at({0}) = Jet<S>::constant(lay, S(1)) + x;
    t2.at({2}) = y + s;
    t2.at({d + 1}) = Jet<S>::constant(lay, S(3)) - y * y;
    auto Tsym = tractor_tracefree_sym(m, outer(t1, t2), 0);
    Tsym.set_weight(2);
    auto rT = r_operator(m, pack, Tsym);
    for (int b = 0; b < d + 2; ++b) CHECK(rT.at({0, b}).is_zero());  // X_A r^{AB}
    auto hl = tractor_metric(m, false).truncated(rT.order());
    CHECK(outer(hl, rT).contracted(0, 2).contracted(0, 1).at_flat(0).is_zero());
    CHECK(q_star(m, rT).rank() == 2);
    // excluded weights are rejected
    auto bad = Tsym;
    bad.set_weight(0);
    CHECK_THROWS(r_operator(m, pack, bad));
}

TEST_CASE("rescale harness: scale tractor transforms by the density factors") {
    int d = 4, T = 6;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    auto lay = m.layout_ptr();
    auto s = Jet<S>::coordinate(lay, 0);
    auto y = Jet<S>::coordinate(lay, 1);
    auto x = Jet<S>::coordinate(lay, 2);
    Jet<S> Om = Jet<S>::constant(lay, S(1)) + S(1) / S(3) * y + S(1) / S(5) * (s * x);
    auto mh = rescale_metric(m, Om);
    auto packh = curvature_pack(mh);
    Jet<S> sigma = s + S(1) / S(2) * (s * y);
    auto I = scale_tractor(m, pack, sigma);
    auto Ih = scale_tractor(mh, packh, Om * sigma);
    auto spec = make_rescale_spec(m, Om);
    auto Ir = apply_rescale(m, I, spec);
    CHECK(Ih.truncated(Ir.order()).equals(Ir.truncated(Ih.order())));
    CHECK(tractor_pair(m, I, I).value_at_base() ==
          tractor_pair(mh, Ih, Ih).value_at_base());
    auto Xr = apply_rescale(m, tractor_x(m, T), spec);
    CHECK(Xr.equals(tractor_x(m, Xr.order())));
}

TEST_CASE("second-order scale jet: X rows vanish on the surface, middle is IIo^e") {
    int d = 4, T = 6;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    auto s = Jet<S>::coordinate(m.layout_ptr(), 0);
    auto sol = solve_singular_yamabe(m, pack, s, d);
    auto P = p_tractor(m, pack, sol.sigma_tilde);
    for (int b = 0; b < d + 2; ++b) {
        CHECK(restrict_to_surface(P.at({d + 1, b})).is_zero());
        CHECK(restrict_to_surface(P.at({b, d + 1})).is_zero());
    }
    auto frame = build_frame(m, pack, sol.sigma_tilde);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            CHECK(restrict_to_surface(P.at({1 + i, 1 + j}) - frame.IIo_e.at({i, j})).is_zero());
}
