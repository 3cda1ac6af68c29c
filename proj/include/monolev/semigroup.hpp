#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "flow.hpp"
#include "measure.hpp"
#include "test_function.hpp"
#include "transform.hpp"

namespace monolev {

/// |\int_z^w d zeta / A(zeta) - t| with w = H_t(z), the integral taken over the chords of
/// the computed trajectory. 1/A is holomorphic on the upper half-plane, so the chords
/// give the same value as the exact path when w is right.
inline double abel_residual(const CharacteristicPair& pair, cplx z, double t) {
    FlowOptions fo;
    fo.record_trajectory = true;
    const OdeResult r = flow_trajectory(pair, z, t, fo);
    using Rule = boost::math::quadrature::gauss<double, 10>;
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    cplx acc = 0.0;
    for (std::size_t k = 0; k + 1 < r.trajectory.size(); ++k) {
        const cplx a = r.trajectory[k];
        const cplx b = r.trajectory[k + 1];
        const cplx mid = 0.5 * (a + b);
        const cplx half = 0.5 * (b - a);
        cplx seg = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            // Boost stores the non-negative half of the symmetric rule.
            seg += ws[i] / detail::pick_rhs(pair, mid + xs[i] * half);
            if (xs[i] != 0.0) seg += ws[i] / detail::pick_rhs(pair, mid - xs[i] * half);
        }
        acc += seg * half;
    }
    return std::abs(acc - t);
}

/// The marginal mu_t recovered from the flow; mu_0 = delta_0.
inline DiscretizedMeasure marginal(const CharacteristicPair& pair, double t, const AutoInversionOptions& opt = {}) {
    require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
    if (t == 0.0) return measures::dirac(0.0);
    return invert_auto(CauchyEvaluator::from_flow(pair, t), opt);
}

namespace detail {

// Nodes and weights of rho: its atoms and its density grid.
inline std::vector<Atom> rho_nodes(const CharacteristicPair& pair) {
    std::vector<Atom> nodes;
    if (!pair.rho) return nodes;
    nodes = pair.rho->atoms();
    if (const auto& d = pair.rho->density())
        for (std::size_t j = 0; j < d->size(); ++j)
            if (d->values[j] > 0.0) nodes.push_back({d->node(j), d->weight(j) * d->values[j]});
    return nodes;
}

inline double diagonal_radius(const CharacteristicPair& pair) {
    const double scale = pair.rho ? std::max(1.0, pair.rho->support_bound()) : 1.0;
    return 1e-4 * scale;
}

}  // namespace detail

/// The generator functional L f = -a f'(0) + \int (f(x) - f(0) - x f'(0)) / x^2 drho(x),
/// with f''(0)/2 on the diagonal.
inline cplx L_apply(const CharacteristicPair& pair, const TestFunction& f) {
    const cplx f0 = f(0.0);
    const cplx d0 = f.d1(0.0);
    cplx acc = -pair.a * d0;
    const double delta = detail::diagonal_radius(pair);
    std::optional<cplx> half_d2;
    for (const auto& n : detail::rho_nodes(pair)) {
        const double x = n.position;
        if (std::abs(x) < delta) {
            if (!half_d2) half_d2 = 0.5 * f.d2(0.0);
            acc += n.mass * *half_d2;
        } else {
            acc += n.mass * (f(x) - f0 - x * d0) / (x * x);
        }
    }
    return acc;
}

/// Schurmann triple on the discretized L^2(rho): pi multiplies by f at the nodes,
/// eta(f) = (f(x) - f(0))/x (f'(0) at x = 0), epsilon(f) = f(0) and L as above.
struct SchurmannTriple {
    double a = 0.0;
    std::vector<double> nodes;
    std::vector<double> weights;

    std::vector<cplx> pi(const TestFunction& f) const {
        std::vector<cplx> v(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) v[i] = f(nodes[i]);
        return v;
    }
    std::vector<cplx> eta(const TestFunction& f) const {
        const cplx f0 = f(0.0);
        std::vector<cplx> v(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i)
            v[i] = nodes[i] == 0.0 ? f.d1(0.0) : (f(nodes[i]) - f0) / nodes[i];
        return v;
    }
    cplx epsilon(const TestFunction& f) const { return f(0.0); }
    cplx L(const TestFunction& f) const {
        const cplx f0 = f(0.0);
        const cplx d0 = f.d1(0.0);
        cplx acc = -a * d0;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double x = nodes[i];
            acc += weights[i] * (x == 0.0 ? 0.5 * f.d2(0.0) : (f(x) - f0 - x * d0) / (x * x));
        }
        return acc;
    }
    /// <u, v> in L^2(rho), antilinear in u.
    cplx inner(const std::vector<cplx>& u, const std::vector<cplx>& v) const {
        cplx s = 0.0;
        for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * std::conj(u[i]) * v[i];
        return s;
    }
};

inline SchurmannTriple schurmann_triple(const CharacteristicPair& pair) {
    SchurmannTriple s;
    s.a = pair.a;
    for (const auto& n : detail::rho_nodes(pair)) {
        s.nodes.push_back(n.position);
        s.weights.push_back(n.mass);
    }
    return s;
}

struct SchurmannResidual {
    double cocycle = 0.0;     // max over nodes of |eta(fg) - pi(f) eta(g) - eta(f) eps(g)|
    double coboundary = 0.0;  // |L(fg) - eps(f) L(g) - <eta(f*), eta(g)> - L(f) eps(g)|
};

inline SchurmannResidual schurmann_verify(const CharacteristicPair& pair, const TestFunction& f, const TestFunction& g) {
    const SchurmannTriple s = schurmann_triple(pair);
    const TestFunction fg = product(f, g);
    const auto eta_fg = s.eta(fg);
    const auto pi_f = s.pi(f);
    const auto eta_f = s.eta(f);
    const auto eta_g = s.eta(g);
    const cplx eps_f = s.epsilon(f);
    const cplx eps_g = s.epsilon(g);
    SchurmannResidual r;
    for (std::size_t i = 0; i < s.nodes.size(); ++i)
        r.cocycle = std::max(r.cocycle, std::abs(eta_fg[i] - pi_f[i] * eta_g[i] - eta_f[i] * eps_g));
    const cplx lhs = s.L(fg);
    const cplx rhs = eps_f * s.L(g) + s.inner(s.eta(conjugate(f)), eta_g) + s.L(f) * eps_g;
    r.coboundary = std::abs(lhs - rhs);
    return r;
}

struct ContourOptions {
    std::size_t points = 256;  // on the upper semicircle
    double radius = 0.0;       // 0 selects twice the support bound
};

namespace detail {

inline double contour_radius(const CharacteristicPair& pair, double t, const ContourOptions& co) {
    if (co.radius > 0.0) return co.radius;
    return 2.0 * std::max(support_bound(pair, t), 0.5);
}

// H_t at the midpoints theta_j = (j + 1/2) pi / N of the upper semicircle of radius R.
inline std::vector<std::pair<cplx, cplx>> contour_samples(const CharacteristicPair& pair, double t, double R,
                                                          std::size_t N) {
    std::vector<std::pair<cplx, cplx>> zs(N);
    parallel_for(N, [&](std::size_t j) {
        const double th = (static_cast<double>(j) + 0.5) * M_PI / static_cast<double>(N);
        const cplx z = std::polar(R, th);
        zs[j] = {z, t == 0.0 ? z : flow_H(pair, z, t)};
    });
    return zs;
}

}  // namespace detail

/// Moments m_0..m_kmax of mu_t from m_k = (1/2 pi i) \oint z^k G_t(z) dz. Only the upper
/// semicircle is sampled; the lower half is its conjugate.
inline std::vector<double> moments_via_contour(const CharacteristicPair& pair, double t, int kmax,
                                               const ContourOptions& co = {}) {
    require(kmax >= 0, Errc::InvalidArgument, "negative moment order");
    require(kmax <= 16, Errc::OrderTooHigh, "contour moments are limited to k <= 16");
    require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
    const double R = detail::contour_radius(pair, t, co);
    const std::size_t N = co.points;
    const auto zs = detail::contour_samples(pair, t, R, N);
    std::vector<double> m(static_cast<std::size_t>(kmax) + 1, 0.0);
    for (const auto& [z, H] : zs) {
        cplx zp = z / H;  // z^{k+1} G(z) at k = 0
        for (int k = 0; k <= kmax; ++k) {
            m[static_cast<std::size_t>(k)] += zp.real();
            zp *= z;
        }
    }
    for (auto& v : m) v /= static_cast<double>(N);
    if (std::abs(m[0] - 1.0) > 1e-4)
        fail(Errc::RadiusTooSmall, "contour radius " + std::to_string(R) + " gives m0 = " + std::to_string(m[0]));
    return m;
}

inline double moment_via_contour(const CharacteristicPair& pair, double t, int k, const ContourOptions& co = {}) {
    return moments_via_contour(pair, t, k, co)[static_cast<std::size_t>(k)];
}

/// Coefficients c[k][n] with T_t x^k (y) = sum_n c[k][n] y^n, from
/// c[k][n] = (1/2 pi i) \oint z^k G_t(z)^{n+1} dz (the expansion of 1/(H_t - y) in y).
inline std::vector<std::vector<double>> transition_polynomial(const CharacteristicPair& pair, double t, int kmax,
                                                              const ContourOptions& co = {}) {
    require(kmax >= 0 && kmax <= 16, Errc::OrderTooHigh, "transition polynomials are limited to degree 16");
    const double R = detail::contour_radius(pair, t, co);
    const std::size_t N = co.points;
    const auto zs = detail::contour_samples(pair, t, R, N);
    const auto K = static_cast<std::size_t>(kmax);
    std::vector<std::vector<double>> c(K + 1, std::vector<double>(K + 1, 0.0));
    for (const auto& [z, H] : zs) {
        const cplx G = 1.0 / H;
        cplx zk = z;  // z^{k+1}, the extra z from dz = i z d theta
        for (std::size_t k = 0; k <= K; ++k) {
            cplx term = zk * G;
            for (std::size_t n = 0; n <= k; ++n) {
                c[k][n] += term.real();
                term *= G;
            }
            zk *= z;
        }
    }
    for (auto& row : c)
        for (auto& v : row) v /= static_cast<double>(N);
    require(std::abs(c[0][0] - 1.0) <= 1e-4, Errc::RadiusTooSmall, "contour radius too small for mu_t");
    return c;
}

}  // namespace monolev
