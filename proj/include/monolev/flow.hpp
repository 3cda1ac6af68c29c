#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <string>
#include <vector>

#include "errors.hpp"
#include "measure.hpp"
#include "ode.hpp"

namespace monolev {

/// Characteristic pair (a, rho) of a monotone convolution semigroup. The drift
/// coefficient is -a and rho({0}) is the diffusion coefficient.
struct CharacteristicPair {
    double a = 0.0;
    std::optional<DiscretizedMeasure> rho;  // empty means rho = 0

    bool has_rho() const { return rho.has_value() && total_mass(*rho) > 0.0; }
    double rho_mass() const { return has_rho() ? total_mass(*rho) : 0.0; }
    bool trivial() const { return a == 0.0 && !has_rho(); }

    /// Stable fingerprint for memo keys.
    std::uint64_t digest() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](double v) {
            std::uint64_t bits;
            std::memcpy(&bits, &v, sizeof bits);
            h ^= bits;
            h *= 1099511628211ull;
        };
        mix(a);
        if (rho) {
            for (const auto& at : rho->atoms()) {
                mix(at.position);
                mix(at.mass);
            }
            if (const auto& d = rho->density()) {
                mix(d->lo);
                mix(d->hi);
                for (double v : d->values) mix(v);
            }
        }
        return h;
    }
};

inline CharacteristicPair make_characteristic_pair(double a, std::optional<DiscretizedMeasure> rho) {
    if (rho && total_mass(*rho) == 0.0) rho.reset();
    CharacteristicPair p{a, std::move(rho)};
    require(!p.trivial(), Errc::InvalidArgument, "characteristic pair (0, 0) generates the trivial semigroup");
    return p;
}

namespace pairs {

/// Pure drift (a, 0): mu_t = delta_{-a t}.
inline CharacteristicPair drift(double a) { return make_characteristic_pair(a, std::nullopt); }

/// Monotone Brownian motion with drift -a: (a, delta_0).
inline CharacteristicPair brownian(double a = 0.0) { return make_characteristic_pair(a, make_measure({{0.0, 1.0}}, {}, false)); }

/// Monotone Poisson process of rate lambda: (-lambda/2, lambda/2 delta_1).
inline CharacteristicPair poisson(double lambda = 1.0) {
    require(lambda > 0.0, Errc::InvalidArgument, "Poisson rate must be positive");
    return make_characteristic_pair(-0.5 * lambda, make_measure({{1.0, 0.5 * lambda}}, {}, false));
}

}  // namespace pairs

/// Pick function A(z) = a + \int 1/(x - z) drho(x). Valid off the real axis.
inline cplx eval_A(const CharacteristicPair& pair, cplx z) {
    require(z.imag() != 0.0, Errc::LowerHalfPlane, "A(z) needs Im z != 0");
    cplx v = pair.a;
    if (pair.rho) v -= cauchy_integral(*pair.rho, z);
    return v;
}

namespace detail {

// Unchecked A for the ODE right-hand side: trial stages may touch the real axis.
inline cplx pick_rhs(const CharacteristicPair& pair, cplx z) {
    if (!pair.rho) return pair.a;
    return pair.a - cauchy_sum(*pair.rho, z);
}

}  // namespace detail

struct FlowOptions {
    double rtol = 1e-10;
    bool record_trajectory = false;
    /// Inverse flows stop with OutsideDomain below this imaginary part.
    double im_floor = 1e-12;
};

/// H_t(z) for the semigroup generated by `pair`, obtained by integrating dw/ds = A(w)
/// from w(0) = z. Steps that would lower Im w are rejected, since the exact flow
/// never does.
inline OdeResult flow_trajectory(const CharacteristicPair& pair, cplx z, double t, const FlowOptions& fo = {}) {
    require(z.imag() > 0.0, Errc::LowerHalfPlane, "flow_H needs Im z > 0");
    require(t >= 0.0, Errc::InvalidArgument, "flow time must be >= 0");
    OdeOptions opt;
    opt.rtol = fo.rtol;
    opt.enforce_im_nondecreasing = true;
    opt.record_trajectory = fo.record_trajectory;
    if (!pair.rho) {
        // Constant vector field: exact.
        OdeResult r;
        r.value = z + pair.a * t;
        if (fo.record_trajectory) {
            r.times = {0.0, t};
            r.trajectory = {z, r.value};
        }
        return r;
    }
    return integrate_autonomous([&pair](cplx w) { return detail::pick_rhs(pair, w); }, z, t, opt);
}

inline cplx flow_H(const CharacteristicPair& pair, cplx z, double t, const FlowOptions& fo = {}) {
    return flow_trajectory(pair, z, t, fo).value;
}

/// H_t^{-1}(z): integrates dw/ds = -A(w). Fails with OutsideDomain when the trajectory
/// reaches the real axis before time t, i.e. z is not in H_t(C+).
inline cplx inverse_flow_H(const CharacteristicPair& pair, cplx z, double t, const FlowOptions& fo = {}) {
    require(z.imag() > 0.0, Errc::LowerHalfPlane, "inverse_flow_H needs Im z > 0");
    require(t >= 0.0, Errc::InvalidArgument, "flow time must be >= 0");
    if (!pair.rho) return z - pair.a * t;
    OdeOptions opt;
    opt.rtol = fo.rtol;
    opt.im_floor = fo.im_floor;
    return integrate_autonomous([&pair](cplx w) { return -detail::pick_rhs(pair, w); }, z, t, opt).value;
}

/// Heuristic radius containing supp mu_t: reach of rho, distance drifted, and a
/// diffusive spread. Callers that need certainty check recovered mass and expand.
inline double support_bound(const CharacteristicPair& pair, double t) {
    double r = 0.0;
    if (pair.rho) r = pair.rho->support_bound();
    return r + std::abs(pair.a) * t + 2.0 * std::sqrt(pair.rho_mass() * t);
}

}  // namespace monolev
