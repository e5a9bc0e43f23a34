#ifndef CONFHYP_YAMABE_HPP
#define CONFHYP_YAMABE_HPP

#include "confhyp/hypersurface.hpp"

namespace confhyp {

// Self-pairing of the scale tractor built from sigma, in the input scale:
// |grad sigma|^2 - (2 sigma / d)(Lap sigma + J sigma).
template <class S>
Jet<S> i_squared(const MetricJet<S>& m, const CurvaturePack<S>& pack, const Jet<S>& sigma) {
    int d = m.d;
    TensorJet<S> ds = gradient(m, sigma);
    Jet<S> grad2 = dot(flip_slot(m, ds, 0), ds).at_flat(0);
    Jet<S> lap = laplacian(m, pack.Gamma, sigma);
    return grad2 - S(2) / S(d) * (sigma * (lap + pack.J * sigma));
}

template <class S>
struct YamabeSolution {
    int d = 0;
    Jet<S> f;            // positive factor
    Jet<S> sigma_tilde;  // f * s
    Jet<S> I2;
    Jet<S> residual;     // I2 - 1
    int residual_order = 0;
    Jet<S> B;            // I2 = 1 + sigma_tilde^d * B
    Jet<S> B_at_sigma;   // x0-degree-0 part of B
};

enum class ProbeOrder { Forward, Reverse };

namespace detail {

// Solve (C * u) = rhs for the tangential jet u, where C acts by jet
// multiplication. The multiplication matrix on the tangential monomial basis
// is assembled and eliminated exactly; probe_order picks the elimination
// order (the solution is unique, so both orders must agree).
template <class S>
Jet<S> solve_multiplication(const Jet<S>& C, const Jet<S>& rhs, ProbeOrder order) {
    if (scalar_is_zero(C.value_at_base()))
        throw std::domain_error("yamabe update: singular linear step");
    const JetLayout& lay = C.layout();
    int v = std::min(C.order(), rhs.order());
    // tangential basis: monomials with zero x0-exponent, degree <= v
    std::vector<int> basis;
    for (int i = 0; i < lay.size(v); ++i)
        if (lay.monomial(i)[kSurfaceAxis] == 0) basis.push_back(i);
    if (order == ProbeOrder::Reverse) std::reverse(basis.begin(), basis.end());
    int n = static_cast<int>(basis.size());
    std::vector<std::vector<S>> a(n, std::vector<S>(n, S{}));
    std::vector<S> b(n, S{});
    for (int col = 0; col < n; ++col) {
        // column = C * monomial(basis[col])
        int dm = lay.degree_of(basis[col]);
        for (int row = 0; row < n; ++row) {
            const MultiIndex& mr = lay.monomial(basis[row]);
            const MultiIndex& mc = lay.monomial(basis[col]);
            MultiIndex diff(mr.size());
            bool ok = true;
            for (std::size_t t = 0; t < mr.size(); ++t) {
                diff[t] = mr[t] - mc[t];
                if (diff[t] < 0) { ok = false; break; }
            }
            if (!ok || lay.degree_of(basis[row]) - dm > v) continue;
            if (ok) a[row][col] = C.coeff(lay.index_of(diff));
        }
    }
    for (int row = 0; row < n; ++row) b[row] = rhs.coeff(basis[row]);
    // Gaussian elimination with pivoting by first nonzero in column order
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int col = 0; col < n; ++col) {
        int piv = -1;
        for (int r = col; r < n; ++r)
            if (!scalar_is_zero(a[r][col])) { piv = r; break; }
        if (piv < 0) throw std::domain_error("yamabe update: singular linear step");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        S ip = S(1) / a[col][col];
        for (int r = 0; r < n; ++r) {
            if (r == col || scalar_is_zero(a[r][col])) continue;
            S fct = a[r][col] * ip;
            for (int c2 = col; c2 < n; ++c2) a[r][c2] -= fct * a[col][c2];
            b[r] -= fct * b[col];
        }
    }
    Jet<S> u(C.layout_ptr(), v);
    for (int i = 0; i < n; ++i) u.set_coeff(lay.monomial(basis[i]), b[i] / a[i][i]);
    return u;
}

}  // namespace detail

// Order-by-order normalization of f so that i_squared(f*s) = 1 + O(s^d).
// At each step k the s^k residual responds to f -> f(1+u s^k) affinely, by
// multiplication with a tangential jet C obtained from a unit probe; C is
// invertible at the base point for k < d and degenerates exactly at k = d.
template <class S>
YamabeSolution<S> solve_singular_yamabe(const MetricJet<S>& m, const CurvaturePack<S>& pack,
                                        const Jet<S>& s, int d,
                                        ProbeOrder order = ProbeOrder::Forward) {
    check_defining_function(s);
    YamabeSolution<S> sol;
    sol.d = d;
    auto lay = m.layout_ptr();
    TensorJet<S> ds = gradient(m, s);
    Jet<S> norm2 = dot(flip_slot(m, ds, 0), ds).at_flat(0);
    Jet<S> f = jet_reciprocal(jet_sqrt(norm2));
    auto one = Jet<S>::constant(lay, S(1));
    for (int k = 1; k < d; ++k) {
        Jet<S> res = i_squared(m, pack, f * s) - one;
        if (res.order() < k)
            throw std::invalid_argument("solve_singular_yamabe: insufficient jet order");
        Jet<S> Rk = jet_s_coefficient(res, k, kSurfaceAxis);
        if (Rk.is_zero()) continue;
        // unit probe for the response factor C
        Jet<S> sk = jet_pow(Jet<S>::coordinate(lay, kSurfaceAxis), k);
        Jet<S> res1 = i_squared(m, pack, (f * (one + sk)) * s) - one;
        Jet<S> C = jet_s_coefficient(res1, k, kSurfaceAxis) - Rk;
        if (scalar_is_zero(C.value_at_base()))
            throw std::domain_error("yamabe update: singular linear step");
        // Forward: the multiplication system is triangular in graded monomial
        // order and inverts as a jet reciprocal. Reverse: assemble the matrix
        // in reversed basis order and eliminate; must agree.
        Jet<S> u = (order == ProbeOrder::Forward)
                       ? -(Rk * jet_reciprocal(C))
                       : detail::solve_multiplication(C, -Rk, order);
        f = f * (one + jet_shift_s(u, k, kSurfaceAxis));
    }
    sol.f = f;
    sol.sigma_tilde = f * s;
    sol.I2 = i_squared(m, pack, sol.sigma_tilde);
    sol.residual = sol.I2 - one;
    sol.residual_order = jet_s_vanishing_order(sol.residual, kSurfaceAxis);
    if (sol.residual_order < d)
        throw std::domain_error("solve_singular_yamabe: residual below obstruction order");
    if (sol.residual.order() >= d) {
        Jet<S> num = jet_divide_by_s_power(sol.residual, d, kSurfaceAxis);
        // sigma_tilde = w * x0 with w a unit; B = residual / sigma_tilde^d
        Jet<S> w = jet_divide_by_s_power(sol.sigma_tilde, 1, kSurfaceAxis);
        sol.B = num * jet_pow(jet_reciprocal(w), d);
        sol.B_at_sigma = jet_s_coefficient(sol.B, 0, kSurfaceAxis);
    }
    return sol;
}

// The surface value of B; errors if the solver left low-order residual.
template <class S>
Jet<S> obstruction_density(const YamabeSolution<S>& sol) {
    if (sol.residual_order < sol.d)
        throw std::domain_error("obstruction_density: unsolved input");
    if (sol.B_at_sigma.empty())
        throw std::domain_error("obstruction_density: insufficient order for B");
    return sol.B_at_sigma;
}

}  // namespace confhyp

#endif
