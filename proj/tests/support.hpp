#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "monolev/measure.hpp"

namespace testing {

using cplx = std::complex<double>;

/// splitmix64; small, seedable and identical on every platform.
class Gen {
public:
    explicit Gen(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }

    cplx upper(double re = 2.0, double im_lo = 0.05, double im_hi = 2.0) {
        const double x = uniform(-re, re);
        return {x, uniform(im_lo, im_hi)};
    }

    /// Probability measure with k atoms in [-r, r].
    monolev::DiscretizedMeasure atomic(int k, double r = 1.5) {
        std::vector<monolev::Atom> atoms;
        double total = 0.0;
        for (int i = 0; i < k; ++i) {
            const double m = uniform(0.1, 1.0);
            atoms.push_back({uniform(-r, r), m});
            total += m;
        }
        for (auto& a : atoms) a.mass /= total;
        return monolev::make_measure(std::move(atoms));
    }

private:
    std::uint64_t state_;
};

/// Arcsine density of monotone Brownian motion at time t.
inline double arcsine_pdf(double x, double t) {
    const double r = 2.0 * t - x * x;
    return r > 0.0 ? 1.0 / (M_PI * std::sqrt(r)) : 0.0;
}

/// Even arcsine moments on (-sqrt(2t), sqrt(2t)): binom(2k, k) (t/2)^k.
inline double arcsine_moment(int n, double t) {
    if (n % 2) return 0.0;
    const int k = n / 2;
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c = c * (k + i) / i;
    return c * std::pow(0.5 * t, k);
}

/// Principal sqrt flipped into the upper half-plane.
inline cplx upper_sqrt(cplx w) {
    cplx s = std::sqrt(w);
    return s.imag() < 0.0 ? -s : s;
}

inline double atom_moment(const std::vector<std::pair<double, double>>& atoms, int k) {
    double s = 0.0;
    for (const auto& [x, m] : atoms) s += m * std::pow(x, k);
    return s;
}

}  // namespace testing
