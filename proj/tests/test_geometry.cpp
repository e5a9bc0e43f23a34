#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "confhyp/geometry.hpp"

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
    g.at({1, 1}) = g.at({1, 1}) + s * y + x * x * y;
    g.at({1, 2}) = y * x + s * s;
    g.at({2, 1}) = g.at({1, 2});
    g.at({0, 0}) = g.at({0, 0}) + S(1) / S(3) * (y * x);
    return make_metric(g);
}

}  // namespace

TEST_CASE("make_metric validates input") {
    auto lay = JetLayout::get(3, 3);
    TensorJet<S> g({Slot::tensor(false, 3), Slot::tensor(false, 3)}, lay, 3);
    for (int i = 0; i < 3; ++i) g.at({i, i}) = Jet<S>::constant(lay, S(1));
    g.at({0, 1}) = Jet<S>::coordinate(lay, 0);
    CHECK_THROWS(make_metric(g));  // not symmetric
    g.at({1, 0}) = g.at({0, 1});
    auto m = make_metric(g);
    // inverse really inverts
    auto prod = dot(m.g, flip_slot(m, m.g, 0));
    (void)prod;
    TensorJet<S> id = dot(m.g_inv, m.g);  // wrong pairing order would throw
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            Jet<S> e = id.at({i, j});
            if (i == j)
                CHECK(e == Jet<S>::constant(lay, S(1)).truncated(e.order()));
            else
                CHECK(e.is_zero());
        }
    // degenerate at base point
    TensorJet<S> g2 = g;
    g2.at({2, 2}) = Jet<S>::coordinate(lay, 1);
    CHECK_THROWS(make_metric(g2));
}

TEST_CASE("round conformally flat metric has constant curvature") {
    // g = 4/(1+|x|^2)^2 delta: scalar curvature d(d-1), Schouten g/2, Weyl 0
    int d = 4, T = 5;
    auto lay = JetLayout::get(d, T);
    Jet<S> r2(lay, T);
    for (int i = 0; i < d; ++i) {
        auto xi = Jet<S>::coordinate(lay, i);
        r2 += xi * xi;
    }
    Jet<S> w = jet_reciprocal(Jet<S>::constant(lay, S(1)) + r2);
    Jet<S> conf = S(4) * (w * w);
    TensorJet<S> g({Slot::tensor(false, d), Slot::tensor(false, d)}, lay, T);
    for (int i = 0; i < d; ++i) g.at({i, i}) = conf;
    auto m = make_metric(g);
    auto pack = curvature_pack(m);
    CHECK(pack.Sc == Jet<S>::constant(lay, S(d * (d - 1))).truncated(pack.Sc.order()));
    CHECK(pack.J == Jet<S>::constant(lay, S(d) / S(2)).truncated(pack.J.order()));
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Jet<S> diff = pack.Schouten.at({a, b}) -
                          S(1) / S(2) * m.g.at({a, b}).truncated(pack.Schouten.order());
            CHECK(diff.is_zero());
        }
    CHECK(pack.Weyl.is_zero());
    CHECK(pack.Cotton.is_zero());
}

TEST_CASE("curvature tensor symmetries on a generic metric") {
    int d = 4, T = 5;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    // R_{abcd}: antisymmetric in (ab), in (cd), symmetric under pair swap
    const TensorJet<S>& low = pack.Riemann;  // stored with all indices down
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    int v = low.order();
                    CHECK((low.at({a, b, c, e}) + low.at({b, a, c, e})).is_zero());
                    CHECK((low.at({a, b, c, e}) + low.at({a, b, e, c})).is_zero());
                    CHECK((low.at({a, b, c, e}) - low.at({c, e, a, b})).truncated(v).is_zero());
                    // first Bianchi
                    CHECK((low.at({a, b, c, e}) + low.at({b, c, a, e}) + low.at({c, a, b, e}))
                              .is_zero());
                }
    // Ricci symmetric; Schouten trace = J
    CHECK(pack.Ricci.equals(pack.Ricci.transposed(0, 1)));
    Jet<S> tr(m.layout_ptr(), pack.Schouten.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) tr += m.g_inv.at({a, b}) * pack.Schouten.at({a, b});
    CHECK((tr - pack.J.truncated(tr.order())).is_zero());
}

TEST_CASE("Weyl is trace-free and its divergence gives the Cotton tensor") {
    int d = 5, T = 5;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    // trace W_{a}{}^{b}{}_{bd} vanishes
    TensorJet<S> tr = flip_slot(m, pack.Weyl, 1).contracted(1, 2);
    CHECK(tr.is_zero());
    // divergence on the first slot recovers (d-3) times the plain derivative
    // difference, i.e. 2(d-3) times the stored half-antisymmetrized Cotton
    TensorJet<S> dW = cov_deriv(m, pack.Gamma, pack.Weyl);
    TensorJet<S> divW = flip_slot(m, dW, 0).contracted(0, 1);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                Jet<S> l = divW.at({c, a, b}).truncated(pack.Cotton.order()) -
                           S(2 * (d - 3)) * pack.Cotton.at({a, b, c}).truncated(divW.order());
                CHECK(l.is_zero());
            }
}

TEST_CASE("covariant derivative is metric and reduces to partials on scalars") {
    int d = 4, T = 5;
    auto m = curved_metric(d, T);
    auto pack = curvature_pack(m);
    TensorJet<S> dg = cov_deriv(m, pack.Gamma, m.g);
    CHECK(dg.is_zero());
    Jet<S> f = Jet<S>::coordinate(m.layout_ptr(), 1) * Jet<S>::coordinate(m.layout_ptr(), 2);
    TensorJet<S> df = cov_deriv(m, pack.Gamma, TensorJet<S>::scalar(f));
    for (int a = 0; a < d; ++a) {
        Jet<S> diff = df.at({a}) - jet_differentiate(f, a).truncated(df.order());
        CHECK(diff.is_zero());
    }
    // laplacian agrees with trace of the second covariant derivative
    TensorJet<S> d2f = cov_deriv(m, pack.Gamma, df);
    Jet<S> tr(m.layout_ptr(), d2f.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) tr += m.g_inv.at({a, b}) * d2f.at({a, b});
    Jet<S> lap = laplacian(m, pack.Gamma, f);
    CHECK((tr - lap.truncated(tr.order())).is_zero());
}
