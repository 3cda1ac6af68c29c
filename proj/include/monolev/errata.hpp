#pragma once

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "flow.hpp"
#include "markov.hpp"
#include "semigroup.hpp"
#include "test_function.hpp"

namespace monolev {

/// Generator formulas as they are commonly printed, kept only so that the verifier can
/// measure how far they are from d/dt T_t at t = 0.
namespace printed {

/// -a f'(x) + \int (f(x) - f(y) - (x - y) f'(x)) / (x - y)^2 drho(y)
inline cplx general_generator(const CharacteristicPair& pair, const TestFunction& f, double x) {
    const cplx fx = f(x);
    const cplx dfx = f.d1(x);
    cplx acc = -pair.a * dfx;
    const double delta = detail::diagonal_radius(pair);
    for (const auto& n : detail::rho_nodes(pair)) {
        const double d = x - n.position;
        if (std::abs(d) < delta) {
            acc -= n.mass * 0.5 * f.d2(x);
        } else {
            acc += n.mass * (fx - f(n.position) - d * dfx) / (d * d);
        }
    }
    return acc;
}

/// Pair (0, delta_0): (f(x) - f(0) - x f'(x)) / x^2, and f''(0)/2 at x = 0.
inline cplx brownian_generator(const TestFunction& f, double x) {
    if (x == 0.0) return 0.5 * f.d2(0.0);
    return (f(x) - f(0.0) - x * f.d1(x)) / (x * x);
}

/// Pair (a, delta_0): (f(x) - f(0) - x(1 + a x) f'(x)) / x^2, and f''(0)/2 - a f'(0) at x = 0.
inline cplx drifted_brownian_generator(double a, const TestFunction& f, double x) {
    if (x == 0.0) return 0.5 * f.d2(0.0) - a * f.d1(0.0);
    return (f(x) - f(0.0) - x * (1.0 + a * x) * f.d1(x)) / (x * x);
}

/// Pair (-lambda/2, lambda/2 delta_1): (lambda/2) (f(x) - f(1) - x f'(x)) / (x - 1)^2.
inline cplx poisson_generator(double lambda, const TestFunction& f, double x) {
    return 0.5 * lambda * (f(x) - f(1.0) - x * f.d1(x)) / ((x - 1.0) * (x - 1.0));
}

/// Pure drift: H_t(z) = z - a t.
inline cplx drift_flow(double a, cplx z, double t) { return z - a * t; }

/// Poisson implicit equation -(lambda/2)(w - z) - (lambda/2) ln((w - 1)/(z - 1)) = t, as a residual.
inline double poisson_implicit_residual(double lambda, cplx z, cplx w, double t) {
    return std::abs(-0.5 * lambda * (w - z) - 0.5 * lambda * std::log((w - 1.0) / (z - 1.0)) - t);
}

}  // namespace printed

/// d/dt T_t f(x) at t = 0 by a Richardson-corrected forward difference.
inline cplx generator_oracle(const CharacteristicPair& pair, const TestFunction& f, double x, double h = 1e-4) {
    const cplx fx = f(x);
    const cplx d1 = (apply_T(pair, h, f, x) - fx) / h;
    const cplx d2 = (apply_T(pair, 2.0 * h, f, x) - fx) / (2.0 * h);
    return 2.0 * d1 - d2;
}

struct ErratumEntry {
    std::string name;
    std::string detail;
    cplx printed_value;
    cplx implemented_value;
    cplx oracle_value;
    double printed_gap = 0.0;      // |printed - oracle|
    double implemented_gap = 0.0;  // |implemented - oracle|
    /// printed/oracle where the oracle is nonzero; -1 marks a pure sign flip.
    cplx ratio;
};

namespace detail {

inline ErratumEntry make_erratum(std::string name, std::string what, cplx printed_v, cplx impl, cplx oracle) {
    ErratumEntry e{std::move(name), std::move(what), printed_v, impl, oracle, std::abs(printed_v - oracle),
                   std::abs(impl - oracle), cplx(std::nan(""), 0.0)};
    if (std::abs(oracle) > 1e-12) e.ratio = printed_v / oracle;
    return e;
}

}  // namespace detail

/// Measures the printed generator and flow formulas against the finite-difference
/// oracle and the implemented forms.
inline std::vector<ErratumEntry> errata_report() {
    std::vector<ErratumEntry> out;
    const auto f = TestFunction::polynomial({0.0, 0.3, -0.5, 1.0, 0.25});  // 0.3x - 0.5x^2 + x^3 + x^4/4
    const double x = 0.7;

    {
        const auto pair = pairs::brownian();
        out.push_back(detail::make_erratum("brownian_generator", "pair (0, delta_0), f = 0.3x - 0.5x^2 + x^3 + x^4/4, x = 0.7",
                                           printed::brownian_generator(f, x), script_L(pair, f, x),
                                           generator_oracle(pair, f, x)));
    }
    {
        const double a = 0.5;
        const auto pair = pairs::brownian(a);
        out.push_back(detail::make_erratum("drifted_brownian_generator", "pair (0.5, delta_0), same f and x",
                                           printed::drifted_brownian_generator(a, f, x), script_L(pair, f, x),
                                           generator_oracle(pair, f, x)));
    }
    {
        const double lambda = 1.0;
        const auto pair = pairs::poisson(lambda);
        out.push_back(detail::make_erratum("poisson_generator", "pair (-1/2, delta_1 / 2), same f and x",
                                           printed::poisson_generator(lambda, f, x), script_L(pair, f, x),
                                           generator_oracle(pair, f, x)));
    }
    {
        const auto pair = pairs::poisson(1.0);
        out.push_back(detail::make_erratum("general_generator", "Poisson pair, same f and x",
                                           printed::general_generator(pair, f, x), script_L(pair, f, x),
                                           generator_oracle(pair, f, x)));
    }
    {
        const double a = 0.7, t = 1.0;
        const cplx z(0.3, 1.0);
        const auto pair = pairs::drift(a);
        out.push_back(detail::make_erratum("drift_flow", "pair (0.7, 0), z = 0.3 + i, t = 1; oracle is the flow",
                                           printed::drift_flow(a, z, t), z + a * t, flow_H(pair, z, t)));
    }
    {
        const double lambda = 1.0, t = 0.5;
        const cplx z(0.0, 2.0);
        const auto pair = pairs::poisson(lambda);
        const cplx w = flow_H(pair, z, t);
        // Printed implicit equation and the Abel equation, both evaluated at the flow value.
        const double printed_res = printed::poisson_implicit_residual(lambda, z, w, t);
        out.push_back(detail::make_erratum("poisson_implicit_equation",
                                           "lambda = 1, z = 2i, t = 0.5; values are residuals at w = H_t(z)",
                                           printed_res, abel_residual(pair, z, t), 0.0));
    }
    return out;
}

}  // namespace monolev
