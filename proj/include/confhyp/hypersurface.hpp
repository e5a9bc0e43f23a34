#ifndef CONFHYP_HYPERSURFACE_HPP
#define CONFHYP_HYPERSURFACE_HPP

#include "confhyp/geometry.hpp"

namespace confhyp {

// The engine restricts to hypersurfaces given by s = u * x0 with u(p) != 0:
// the surface is the zero locus of the first coordinate, and restriction is
// extraction of the x0-degree-0 part. Throws if s is not of that shape.
template <class S>
void check_defining_function(const Jet<S>& s) {
    if (!scalar_is_zero(s.value_at_base()))
        throw std::invalid_argument("defining function must vanish at the base point");
    Jet<S> u = jet_divide_by_s_power(s, 1, 0);  // throws if some monomial lacks x0
    if (scalar_is_zero(u.value_at_base()))
        throw std::invalid_argument(
            "defining function must be a unit multiple of the first coordinate");
}

inline constexpr int kSurfaceAxis = 0;

// Restriction to the hypersurface: x0-degree-0 part, componentwise.
template <class S>
Jet<S> restrict_to_surface(const Jet<S>& a) {
    return jet_s_coefficient(a, 0, kSurfaceAxis);
}

template <class S>
TensorJet<S> restrict_to_surface(const TensorJet<S>& t) {
    return t.map([](const Jet<S>& c) { return restrict_to_surface(c); });
}

// Derived data of a defining function. All fields are jets extended off the
// surface by the same formulas; surface values are their x0-degree-0 parts.
template <class S>
struct HypersurfaceFrame {
    Jet<S> s;
    TensorJet<S> n;        // n_a = partial_a s
    Jet<S> n_norm2;        // |n|^2_g
    TensorJet<S> n_hat;    // n_a / |n|, down
    TensorJet<S> n_hat_up;
    TensorJet<S> proj;     // projector, slots (a down, b up)
    Jet<S> H;              // mean curvature extension
    Jet<S> rho;            // -(Delta s + J s)/d
    TensorJet<S> IIo;      // trace-free second fundamental form at the surface
    TensorJet<S> IIo_e;    // its canonical extension, full jet
};

template <class S>
TensorJet<S> gradient(const MetricJet<S>& m, const Jet<S>& f) {
    int d = m.d;
    TensorJet<S> n({Slot::tensor(false, d)}, m.layout_ptr(), f.order() - 1);
    for (int a = 0; a < d; ++a) n.at({a}) = jet_differentiate(f, a);
    return n;
}

template <class S>
HypersurfaceFrame<S> conormal_data(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                                   const Jet<S>& s) {
    check_defining_function(s);
    int d = m.d;
    HypersurfaceFrame<S> f;
    f.s = s;
    f.n = gradient(m, s);
    f.n.set_weight(1);
    TensorJet<S> n_up = flip_slot(m, f.n, 0);
    f.n_norm2 = dot(f.n, n_up).at_flat(0);
    if (scalar_is_zero(f.n_norm2.value_at_base()))
        throw std::invalid_argument("conormal_data: ds vanishes at the base point");
    Jet<S> inv_norm = jet_reciprocal(jet_sqrt(f.n_norm2));
    f.n_hat = inv_norm * f.n;
    f.n_hat_up = inv_norm * n_up;
    f.proj = TensorJet<S>({Slot::tensor(false, d), Slot::tensor(true, d)}, m.layout_ptr(),
                          f.n_hat.order());
    auto one = Jet<S>::constant(m.layout_ptr(), S(1)).truncated(f.n_hat.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            f.proj.at({a, b}) = -(f.n_hat.at({a}) * f.n_hat_up.at({b}));
            if (a == b) f.proj.at({a, b}) += one;
        }
    Jet<S> lap = laplacian(m, pack.Gamma, s);
    f.rho = S(-1) / S(d) * (lap + pack.J * s);
    return f;
}

// H = projector-trace of the covariant derivative of the unit conormal,
// divided by d-1, kept as a jet off the surface.
template <class S>
Jet<S> mean_curvature(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                      HypersurfaceFrame<S>& f) {
    int d = m.d;
    TensorJet<S> dn = cov_deriv(m, pack.Gamma, f.n_hat);  // (a, b) both down
    Jet<S> acc(m.layout_ptr(), dn.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            // projector with both indices up: g^{ab} - n^a n^b
            Jet<S> pr = m.g_inv.at({a, b}) - f.n_hat_up.at({a}) * f.n_hat_up.at({b});
            if (pr.is_zero() || dn.at({a, b}).is_zero()) continue;
            acc += pr * dn.at({a, b});
        }
    f.H = S(1) / S(d - 1) * acc;
    return f.H;
}

// Trace-free second fundamental form at the surface: project the covariant
// derivative of the unit conormal tangentially, remove the H-trace, restrict.
template <class S>
TensorJet<S> tracefree_II(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                          HypersurfaceFrame<S>& f) {
    int d = m.d;
    if (f.H.empty()) mean_curvature(m, pack, f);
    TensorJet<S> dn = cov_deriv(m, pack.Gamma, f.n_hat);
    int v = dn.order();
    TensorJet<S> II({Slot::tensor(false, d), Slot::tensor(false, d)}, m.layout_ptr(), v, 1);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Jet<S> acc(m.layout_ptr(), v);
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e) {
                    const Jet<S>& pr1 = f.proj.at({a, c});
                    const Jet<S>& pr2 = f.proj.at({b, e});
                    if (pr1.is_zero() || pr2.is_zero() || dn.at({c, e}).is_zero()) continue;
                    acc += pr1 * pr2 * dn.at({c, e});
                }
            II.at({a, b}) = acc;
        }
    II = II.symmetrized(0, 1);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            Jet<S> gbar = m.g.at({a, b}) - f.n_hat.at({a}) * f.n_hat.at({b});
            II.at({a, b}) -= f.H * gbar;
        }
    f.IIo = restrict_to_surface(II);
    f.IIo.set_weight(1);
    return f.IIo;
}

// Canonical extension: ambient trace-free part of Hess(s) + s P.
template <class S>
TensorJet<S> iio_extension(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                           HypersurfaceFrame<S>& f) {
    int d = m.d;
    TensorJet<S> hess = cov_deriv(m, pack.Gamma, cov_deriv(m, pack.Gamma,
                                                           TensorJet<S>::scalar(f.s)));
    TensorJet<S> t = hess + f.s * pack.Schouten;
    Jet<S> tr(m.layout_ptr(), t.order());
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (t.at({a, b}).is_zero() || m.g_inv.at({a, b}).is_zero()) continue;
            tr += m.g_inv.at({a, b}) * t.at({a, b});
        }
    S c = S(1) / S(d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) t.at({a, b}) -= c * (tr * m.g.at({a, b}));
    t.set_weight(1);
    f.IIo_e = t;
    return t;
}

template <class S>
HypersurfaceFrame<S> build_frame(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                                 const Jet<S>& s) {
    HypersurfaceFrame<S> f = conormal_data(m, pack, s);
    mean_curvature(m, pack, f);
    tracefree_II(m, pack, f);
    iio_extension(m, pack, f);
    return f;
}

// (nabla_n)^k t with n the unnormalized gradient of the frame's defining
// function, as in the obstruction expansion. Valid order drops by k.
template <class S>
TensorJet<S> normal_derivative_power(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                                     const HypersurfaceFrame<S>& f, TensorJet<S> t, int k,
                                     const TensorJet<S>* schouten_for_tractor = nullptr) {
    if (t.order() < k) throw std::invalid_argument("normal_derivative_power: insufficient order");
    TensorJet<S> n_up = flip_slot(m, f.n, 0);
    for (int i = 0; i < k; ++i) {
        TensorJet<S> dt = cov_deriv(m, pack.Gamma, t,
                                    schouten_for_tractor ? schouten_for_tractor
                                                         : &pack.Schouten);
        t = dot(n_up, dt);  // contracts n^a with the new derivative slot
    }
    return t;
}

// Smallest x0-degree over all components; order+1 if the tensor vanishes.
template <class S>
int tensor_s_vanishing_order(const TensorJet<S>& t) {
    int best = t.order() + 1;
    for (int i = 0; i < t.ncomp(); ++i)
        best = std::min(best, jet_s_vanishing_order(t.at_flat(i), kSurfaceAxis));
    return best;
}

}  // namespace confhyp

#endif
