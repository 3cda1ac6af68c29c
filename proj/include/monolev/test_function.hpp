#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace monolev {

using cplx = std::complex<double>;

/// Functions that can be integrated against a measure or fed to a generator.
///
/// Values are complex so that resolvents 1/(z - x) share the interface with
/// real polynomials; real-valued functions simply carry a zero imaginary part.
class TestFunction {
public:
    struct Polynomial {
        std::vector<double> coeffs;  // coeffs[k] multiplies x^k
    };
    struct Resolvent {
        cplx pole;
    };
    struct BlackBox {
        std::function<cplx(double)> f;
        std::function<cplx(double)> df;   // may be empty
        std::function<cplx(double)> d2f;  // may be empty
        double domain_lo = -std::numeric_limits<double>::infinity();
        double domain_hi = std::numeric_limits<double>::infinity();
    };

    static TestFunction polynomial(std::vector<double> coeffs) {
        if (coeffs.empty()) coeffs.push_back(0.0);
        return TestFunction(Polynomial{std::move(coeffs)});
    }
    static TestFunction constant(double c) { return polynomial({c}); }
    static TestFunction monomial(int k, double scale = 1.0) {
        std::vector<double> c(static_cast<std::size_t>(k) + 1, 0.0);
        c.back() = scale;
        return polynomial(std::move(c));
    }
    static TestFunction resolvent(cplx pole) {
        require(pole.imag() != 0.0, Errc::InvalidArgument, "resolvent pole must lie off the real axis");
        return TestFunction(Resolvent{pole});
    }
    static TestFunction black_box(BlackBox b) {
        require(static_cast<bool>(b.f), Errc::InvalidArgument, "black-box function needs an evaluator");
        require(b.domain_lo < b.domain_hi, Errc::InvalidArgument, "empty black-box domain");
        return TestFunction(std::move(b));
    }
    /// Real-valued black box from plain double evaluators.
    static TestFunction real_black_box(std::function<double(double)> f, std::function<double(double)> df = {},
                                       std::function<double(double)> d2f = {},
                                       double lo = -std::numeric_limits<double>::infinity(),
                                       double hi = std::numeric_limits<double>::infinity()) {
        BlackBox b;
        b.f = [f](double x) { return cplx(f(x), 0.0); };
        if (df) b.df = [df](double x) { return cplx(df(x), 0.0); };
        if (d2f) b.d2f = [d2f](double x) { return cplx(d2f(x), 0.0); };
        b.domain_lo = lo;
        b.domain_hi = hi;
        return black_box(std::move(b));
    }

    bool is_polynomial() const { return std::holds_alternative<Polynomial>(rep_); }
    bool is_resolvent() const { return std::holds_alternative<Resolvent>(rep_); }
    bool is_black_box() const { return std::holds_alternative<BlackBox>(rep_); }
    const Polynomial& as_polynomial() const { return std::get<Polynomial>(rep_); }
    const Resolvent& as_resolvent() const { return std::get<Resolvent>(rep_); }
    const BlackBox& as_black_box() const { return std::get<BlackBox>(rep_); }

    int degree() const {
        if (!is_polynomial()) return -1;
        const auto& c = as_polynomial().coeffs;
        int d = static_cast<int>(c.size()) - 1;
        while (d > 0 && c[static_cast<std::size_t>(d)] == 0.0) --d;
        return d;
    }

    /// Interval on which the function may be evaluated.
    std::pair<double, double> domain() const {
        if (is_black_box()) return {as_black_box().domain_lo, as_black_box().domain_hi};
        return {-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
    }

    cplx operator()(double x) const { return derivative(x, 0); }
    cplx d1(double x) const { return derivative(x, 1); }
    cplx d2(double x) const { return derivative(x, 2); }

    cplx derivative(double x, int order) const {
        if (const auto* p = std::get_if<Polynomial>(&rep_)) {
            // Horner on the order-th derivative.
            const auto& c = p->coeffs;
            double acc = 0.0;
            for (std::size_t k = c.size(); k-- > static_cast<std::size_t>(order);) {
                double fall = 1.0;
                for (int j = 0; j < order; ++j) fall *= static_cast<double>(k - static_cast<std::size_t>(j));
                acc = acc * x + fall * c[k];
            }
            return {acc, 0.0};
        }
        if (const auto* r = std::get_if<Resolvent>(&rep_)) {
            // d^n/dx^n (z - x)^{-1} = n! (z - x)^{-(n+1)}
            const cplx u = 1.0 / (r->pole - x);
            if (order == 0) return u;
            if (order == 1) return u * u;
            return 2.0 * u * u * u;
        }
        const auto& b = std::get<BlackBox>(rep_);
        if (x < b.domain_lo || x > b.domain_hi)
            fail(Errc::DomainMismatch, "black-box evaluated outside its domain at x=" + std::to_string(x));
        if (order == 0) return b.f(x);
        const auto& g = order == 1 ? b.df : b.d2f;
        if (!g) fail(Errc::DerivativeUnavailable, "black-box derivative of order " + std::to_string(order));
        return g(x);
    }

private:
    using Rep = std::variant<Polynomial, Resolvent, BlackBox>;
    explicit TestFunction(Rep r) : rep_(std::move(r)) {}
    Rep rep_;
};

/// Pointwise product. Polynomials stay polynomials; anything else becomes a black box
/// whose derivatives follow the product rule (available when both factors provide them).
inline TestFunction product(const TestFunction& f, const TestFunction& g) {
    if (f.is_polynomial() && g.is_polynomial()) {
        const auto& a = f.as_polynomial().coeffs;
        const auto& b = g.as_polynomial().coeffs;
        std::vector<double> c(a.size() + b.size() - 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i)
            for (std::size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
        return TestFunction::polynomial(std::move(c));
    }
    TestFunction::BlackBox bb;
    bb.f = [f, g](double x) { return f(x) * g(x); };
    bb.df = [f, g](double x) { return f.d1(x) * g(x) + f(x) * g.d1(x); };
    bb.d2f = [f, g](double x) { return f.d2(x) * g(x) + 2.0 * f.d1(x) * g.d1(x) + f(x) * g.d2(x); };
    auto [flo, fhi] = f.domain();
    auto [glo, ghi] = g.domain();
    bb.domain_lo = std::max(flo, glo);
    bb.domain_hi = std::min(fhi, ghi);
    return TestFunction::black_box(std::move(bb));
}

/// Complex conjugate function x -> conj(f(x)).
inline TestFunction conjugate(const TestFunction& f) {
    if (f.is_polynomial()) return f;
    if (f.is_resolvent()) return TestFunction::resolvent(std::conj(f.as_resolvent().pole));
    TestFunction::BlackBox bb;
    bb.f = [f](double x) { return std::conj(f(x)); };
    bb.df = [f](double x) { return std::conj(f.d1(x)); };
    bb.d2f = [f](double x) { return std::conj(f.d2(x)); };
    std::tie(bb.domain_lo, bb.domain_hi) = f.domain();
    return TestFunction::black_box(std::move(bb));
}

}  // namespace monolev
