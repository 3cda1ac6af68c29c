#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

#include "errors.hpp"

namespace monolev {

using cplx = std::complex<double>;

struct OdeOptions {
    double rtol = 1e-10;
    double atol = 1e-13;
    std::size_t max_steps = 200000;
    /// Forward mode only: reject a step when Im w would drop by more than this.
    double im_decrease_tol = 1e-12;
    bool enforce_im_nondecreasing = false;
    /// Abort with OutsideDomain when Im w falls below this floor (backward flows).
    double im_floor = -std::numeric_limits<double>::infinity();
    bool record_trajectory = false;
};

struct OdeResult {
    cplx value;
    std::size_t steps = 0;
    std::size_t rejected = 0;
    std::vector<double> times;        // filled when record_trajectory
    std::vector<cplx> trajectory;     // filled when record_trajectory
};

/// Adaptive Dormand-Prince 5(4) for the autonomous scalar complex ODE w' = f(w),
/// integrated from w(0) = w0 to time t >= 0 with local extrapolation.
template <class F>
OdeResult integrate_autonomous(F&& f, cplx w0, double t, const OdeOptions& opt = {}) {
    require(t >= 0.0 && std::isfinite(t), Errc::InvalidArgument, "integration time must be finite and >= 0");
    OdeResult res;
    res.value = w0;
    if (opt.record_trajectory) {
        res.times.push_back(0.0);
        res.trajectory.push_back(w0);
    }
    if (t == 0.0) return res;

    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // b - b*, the embedded error weights
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    cplx w = w0;
    double s = 0.0;
    cplx k1 = f(w);
    double h;
    {
        const double scale = std::max(std::abs(w), 1e-3);
        const double rate = std::max(std::abs(k1), 1e-12);
        h = std::min(t, 0.01 * scale / rate);
        h = std::max(h, 1e-14 * t);
    }
    while (s < t) {
        if (res.steps + res.rejected >= opt.max_steps) {
            std::ostringstream os;
            os << "step budget exhausted at s=" << s << " of " << t << ", last w=" << w;
            fail(Errc::StepFailure, os.str());
        }
        bool last = false;
        if (s + h >= t) {
            h = t - s;
            last = true;
        }
        const cplx k2 = f(w + h * (a21 * k1));
        const cplx k3 = f(w + h * (a31 * k1 + a32 * k2));
        const cplx k4 = f(w + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const cplx k5 = f(w + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const cplx k6 = f(w + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const cplx w_new = w + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const cplx k7 = f(w_new);
        const cplx err_vec = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double sc = opt.atol + opt.rtol * std::max(std::abs(w), std::abs(w_new));
        double err = std::abs(err_vec) / sc;
        if (!std::isfinite(err) || !std::isfinite(w_new.real()) || !std::isfinite(w_new.imag())) err = 1e10;

        bool accept = err <= 1.0;
        if (accept && opt.enforce_im_nondecreasing && w_new.imag() < w.imag() - opt.im_decrease_tol) accept = false;

        if (accept) {
            s = last ? t : s + h;
            w = w_new;
            k1 = k7;
            ++res.steps;
            if (opt.record_trajectory) {
                res.times.push_back(s);
                res.trajectory.push_back(w);
            }
            if (w.imag() < opt.im_floor) {
                std::ostringstream os;
                os << "trajectory left the domain at s=" << s << " (Im w=" << w.imag() << ")";
                fail(Errc::OutsideDomain, os.str());
            }
            const double fac = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 5.0;
            h *= std::clamp(fac, 0.2, 5.0);
        } else {
            ++res.rejected;
            const double fac = (err < 1e9) ? 0.9 * std::pow(err, -0.2) : 0.1;
            h *= std::clamp(fac, 0.1, 0.5);
            if (h < 1e-15 * std::max(1.0, t)) {
                std::ostringstream os;
                // The field is analytic above the floor, so a stalled backward flow has met the real axis.
                if (std::isfinite(opt.im_floor)) {
                    os << "trajectory reached a singularity on the real axis at s=" << s << ", last good w=" << w;
                    fail(Errc::OutsideDomain, os.str());
                }
                os << "step size underflow at s=" << s << ", last good w=" << w;
                fail(Errc::StepFailure, os.str());
            }
        }
    }
    res.value = w;
    return res;
}

}  // namespace monolev
