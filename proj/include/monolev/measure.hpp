#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "test_function.hpp"

namespace monolev {

struct Atom {
    double position = 0.0;
    double mass = 0.0;
};

/// Density sampled on a uniform grid; mass is assigned by the trapezoidal rule,
/// which is exact for the piecewise-linear interpolant of the samples.
struct DensityGrid {
    double lo = 0.0;
    double hi = 0.0;
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double spacing() const { return (hi - lo) / static_cast<double>(values.size() - 1); }
    double node(std::size_t j) const {
        // Pin the last node to hi exactly.
        return j + 1 == values.size() ? hi : lo + static_cast<double>(j) * spacing();
    }
    double weight(std::size_t j) const {
        const double h = spacing();
        return (j == 0 || j + 1 == values.size()) ? 0.5 * h : h;
    }
    bool same_nodes(const DensityGrid& o) const { return lo == o.lo && hi == o.hi && size() == o.size(); }
};

/// Compactly supported finite measure on the real line: atoms plus a gridded density.
class DiscretizedMeasure {
public:
    DiscretizedMeasure() = default;

    const std::vector<Atom>& atoms() const { return atoms_; }
    const std::optional<DensityGrid>& density() const { return density_; }
    bool has_density() const { return density_.has_value(); }
    bool is_probability() const { return probability_; }

    /// Smallest interval containing all atoms and the density grid.
    std::pair<double, double> support() const {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& a : atoms_) {
            lo = std::min(lo, a.position);
            hi = std::max(hi, a.position);
        }
        if (density_) {
            lo = std::min(lo, density_->lo);
            hi = std::max(hi, density_->hi);
        }
        return {lo, hi};
    }
    double support_bound() const {
        auto [lo, hi] = support();
        return std::max(std::abs(lo), std::abs(hi));
    }

    double atom_mass() const {
        double m = 0.0;
        for (const auto& a : atoms_) m += a.mass;
        return m;
    }
    double density_mass() const {
        if (!density_) return 0.0;
        double m = 0.0;
        for (std::size_t j = 0; j < density_->size(); ++j) m += density_->weight(j) * density_->values[j];
        return m;
    }

    // Construction goes through make_measure so that invariants are checked once.
    friend DiscretizedMeasure make_measure(std::vector<Atom>, std::optional<DensityGrid>, bool, double);
    friend DiscretizedMeasure scaled(const DiscretizedMeasure&, double);

private:
    std::vector<Atom> atoms_;
    std::optional<DensityGrid> density_;
    bool probability_ = false;
};

namespace detail {

inline void sort_and_merge_atoms(std::vector<Atom>& atoms, double rel_tol = 1e-12) {
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
    std::vector<Atom> merged;
    for (const auto& a : atoms) {
        if (a.mass == 0.0) continue;
        if (!merged.empty() &&
            std::abs(merged.back().position - a.position) <= rel_tol * (1.0 + std::abs(a.position))) {
            auto& b = merged.back();
            const double m = b.mass + a.mass;
            b.position = (b.position * b.mass + a.position * a.mass) / m;
            b.mass = m;
        } else {
            merged.push_back(a);
        }
    }
    atoms = std::move(merged);
}

}  // namespace detail

/// Builds a measure from atoms and an optional density table.
///
/// With `probability` set the total mass must be within `tol` of one and is then
/// rescaled to exactly one.
inline DiscretizedMeasure make_measure(std::vector<Atom> atoms, std::optional<DensityGrid> density = std::nullopt,
                                       bool probability = true, double tol = 1e-6) {
    for (const auto& a : atoms) {
        require(std::isfinite(a.position) && std::isfinite(a.mass), Errc::InvalidArgument, "non-finite atom");
        require(a.mass >= 0.0, Errc::NegativeMass, "atom at " + std::to_string(a.position) + " has negative mass");
    }
    if (density) {
        require(std::isfinite(density->lo) && std::isfinite(density->hi) && density->lo < density->hi,
                Errc::InvalidArgument, "density grid bounds must be finite with lo < hi");
        require(density->size() >= 2, Errc::InvalidArgument, "density grid needs at least two nodes");
        for (double v : density->values) {
            require(std::isfinite(v), Errc::InvalidArgument, "non-finite density value");
            require(v >= 0.0, Errc::NegativeMass, "negative density value");
        }
    }
    require(!atoms.empty() || density.has_value(), Errc::EmptyMeasure, "no atoms and no density");

    DiscretizedMeasure m;
    detail::sort_and_merge_atoms(atoms);
    m.atoms_ = std::move(atoms);
    m.density_ = std::move(density);
    m.probability_ = probability;
    if (probability) {
        const double total = m.atom_mass() + m.density_mass();
        require(std::abs(total - 1.0) <= tol, Errc::NotProbability,
                "total mass " + std::to_string(total) + " is not within tolerance of 1");
        for (auto& a : m.atoms_) a.mass /= total;
        if (m.density_)
            for (auto& v : m.density_->values) v /= total;
    }
    return m;
}

/// Nonnegative multiple of a measure (never a probability measure unless c == 1 and mu is one).
inline DiscretizedMeasure scaled(const DiscretizedMeasure& mu, double c) {
    require(c >= 0.0, Errc::NegativeMass, "negative scale factor");
    DiscretizedMeasure m = mu;
    for (auto& a : m.atoms_) a.mass *= c;
    if (m.density_)
        for (auto& v : m.density_->values) v *= c;
    m.probability_ = mu.is_probability() && c == 1.0;
    return m;
}

/// Density table whose trapezoidal masses reproduce the integral of `density` exactly:
/// each node carries the average of the density over its dual cell. The substitution
/// x = a + (b - a)(1 - cos s)/2 absorbs inverse-square-root endpoint singularities.
inline DensityGrid density_from_function(const std::function<double(double)>& density, double lo, double hi,
                                         std::size_t n) {
    require(n >= 2 && lo < hi, Errc::InvalidArgument, "density grid needs n >= 2 and lo < hi");
    DensityGrid g{lo, hi, std::vector<double>(n, 0.0)};
    const double h = g.spacing();
    using Rule = boost::math::quadrature::gauss<double, 30>;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = std::max(lo, g.node(j) - 0.5 * h);
        const double b = std::min(hi, g.node(j) + 0.5 * h);
        auto integrand = [&](double s) {
            const double x = a + 0.5 * (b - a) * (1.0 - std::cos(s));
            return density(x) * 0.5 * (b - a) * std::sin(s);
        };
        g.values[j] = Rule::integrate(integrand, 0.0, M_PI) / (b - a);
    }
    return g;
}

inline double total_mass(const DiscretizedMeasure& mu);

/// k-th moment: atom sum plus trapezoidal integral of x^k against the density.
inline double moment(const DiscretizedMeasure& mu, int k) {
    require(k >= 0, Errc::InvalidArgument, "negative moment order");
    require(k <= 32, Errc::OrderTooHigh, "moment order " + std::to_string(k) + " exceeds 32");
    double s = 0.0;
    for (const auto& a : mu.atoms()) s += a.mass * std::pow(a.position, k);
    if (const auto& d = mu.density()) {
        for (std::size_t j = 0; j < d->size(); ++j) s += d->weight(j) * std::pow(d->node(j), k) * d->values[j];
    }
    return s;
}

inline double total_mass(const DiscretizedMeasure& mu) { return moment(mu, 0); }

struct Quadrature {
    cplx value;
    double abs_error = 0.0;
};

/// Integral of f against mu. The error estimate compares the trapezoidal sums on the
/// grid and on every other node.
inline Quadrature integrate(const DiscretizedMeasure& mu, const TestFunction& f) {
    auto [lo, hi] = mu.support();
    auto [flo, fhi] = f.domain();
    require(flo <= lo && hi <= fhi, Errc::DomainMismatch, "test function domain does not cover the support");
    cplx s = 0.0;
    for (const auto& a : mu.atoms()) s += a.mass * f(a.position);
    double err = 0.0;
    if (const auto& d = mu.density()) {
        const std::size_t n = d->size();
        std::vector<cplx> fv(n);
        cplx fine = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            fv[j] = d->values[j] == 0.0 ? cplx(0.0) : f(d->node(j)) * d->values[j];
            fine += d->weight(j) * fv[j];
        }
        s += fine;
        if (n >= 5 && n % 2 == 1) {
            const double h2 = 2.0 * d->spacing();
            cplx coarse = 0.0;
            for (std::size_t j = 0; j < n; j += 2) coarse += ((j == 0 || j + 1 == n) ? 0.5 * h2 : h2) * fv[j];
            err = std::abs(fine - coarse) / 3.0;
        }
    }
    return {s, err + 1e-15 * std::abs(s)};
}

namespace detail {

inline cplx cauchy_sum(const DiscretizedMeasure& mu, cplx z) {
    cplx g = 0.0;
    for (const auto& a : mu.atoms()) g += a.mass / (z - a.position);
    if (const auto& d = mu.density()) {
        const std::size_t n = d->size();
        const double h = d->spacing();
        cplx log_prev = std::log(z - d->node(0));
        for (std::size_t j = 0; j + 1 < n; ++j) {
            const double r0 = d->values[j];
            const double r1 = d->values[j + 1];
            const cplx log_next = std::log(z - d->node(j + 1));
            if (r0 != 0.0 || r1 != 0.0) {
                // Exact integral of the linear interpolant over [x_j, x_{j+1}].
                const double slope = (r1 - r0) / h;
                const cplx rho_z = r0 + slope * (z - d->node(j));
                g += rho_z * (log_prev - log_next) - (r1 - r0);
            }
            log_prev = log_next;
        }
    }
    return g;
}

}  // namespace detail

/// Cauchy integral \int 1/(z - x) dmu(x), for Im z != 0. The density part is integrated
/// exactly for the piecewise-linear interpolant of the grid values.
inline cplx cauchy_integral(const DiscretizedMeasure& mu, cplx z) {
    require(z.imag() != 0.0, Errc::LowerHalfPlane, "Cauchy integral needs Im z != 0");
    return detail::cauchy_sum(mu, z);
}

/// Cumulative distribution and its inverse. Density cells are split at atom positions
/// so that the CDF is exact for the piecewise-linear density plus atoms.
class InverseCdf {
public:
    explicit InverseCdf(const DiscretizedMeasure& mu) {
        std::vector<Atom> atoms = mu.atoms();
        std::size_t next_atom = 0;
        auto push_atoms_upto = [&](double x, bool inclusive) {
            while (next_atom < atoms.size() &&
                   (atoms[next_atom].position < x || (inclusive && atoms[next_atom].position == x))) {
                pieces_.push_back({atoms[next_atom].position, atoms[next_atom].position, 0.0, 0.0,
                                   atoms[next_atom].mass, true});
                ++next_atom;
            }
        };
        if (const auto& d = mu.density()) {
            const double h = d->spacing();
            for (std::size_t j = 0; j + 1 < d->size(); ++j) {
                double x0 = d->node(j);
                const double x1 = d->node(j + 1);
                double r0 = d->values[j];
                const double r1 = d->values[j + 1];
                push_atoms_upto(x0, true);
                // Split the cell at interior atoms.
                while (next_atom < atoms.size() && atoms[next_atom].position < x1) {
                    const double p = atoms[next_atom].position;
                    const double rp = d->values[j] + (r1 - d->values[j]) * (p - d->node(j)) / h;
                    add_cell(x0, p, r0, rp);
                    push_atoms_upto(p, true);
                    x0 = p;
                    r0 = rp;
                }
                add_cell(x0, x1, r0, r1);
            }
        }
        push_atoms_upto(std::numeric_limits<double>::infinity(), true);
        cumulative_.resize(pieces_.size() + 1, 0.0);
        starts_.reserve(pieces_.size());
        for (std::size_t i = 0; i < pieces_.size(); ++i) {
            cumulative_[i + 1] = cumulative_[i] + pieces_[i].mass;
            starts_.push_back(pieces_[i].x0);
        }
        require(total() > 0.0, Errc::EmptyMeasure, "measure has zero mass");
    }

    double total() const { return cumulative_.back(); }

    /// Mass of (-inf, x].
    double cdf(double x) const {
        // Pieces are ordered and non-overlapping; only the last piece starting at or
        // before x can be partially covered.
        auto it = std::upper_bound(starts_.begin(), starts_.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - starts_.begin());
        if (i == 0) return 0.0;
        const Piece& p = pieces_[i - 1];
        if (p.atom || x >= p.x1) return cumulative_[i];
        return cumulative_[i - 1] + partial(p, x - p.x0);
    }

    /// Generalized inverse at level u in [0, 1] of the normalized CDF.
    double quantile(double u) const {
        const double target = std::clamp(u, 0.0, 1.0) * total();
        auto it = std::lower_bound(cumulative_.begin() + 1, cumulative_.end(), target);
        std::size_t i = static_cast<std::size_t>(it - cumulative_.begin()) - 1;
        if (i >= pieces_.size()) i = pieces_.size() - 1;
        const Piece& p = pieces_[i];
        if (p.atom) return p.x0;
        const double rem = std::max(0.0, target - cumulative_[i]);
        return p.x0 + solve_partial(p, rem);
    }

    /// Sorted piece boundaries, used to integrate CDF differences.
    std::vector<double> breakpoints() const {
        std::vector<double> b;
        b.reserve(2 * pieces_.size());
        for (const auto& p : pieces_) {
            b.push_back(p.x0);
            b.push_back(p.x1);
        }
        return b;
    }

private:
    struct Piece {
        double x0, x1, r0, r1, mass;
        bool atom;
    };

    void add_cell(double x0, double x1, double r0, double r1) {
        if (x1 <= x0) return;
        pieces_.push_back({x0, x1, r0, r1, 0.5 * (x1 - x0) * (r0 + r1), false});
    }

    static double partial(const Piece& p, double tau) {
        const double slope = (p.r1 - p.r0) / (p.x1 - p.x0);
        return p.r0 * tau + 0.5 * slope * tau * tau;
    }

    static double solve_partial(const Piece& p, double target) {
        const double width = p.x1 - p.x0;
        if (p.mass <= 0.0) return 0.0;
        if (target >= p.mass) return width;
        const double slope = (p.r1 - p.r0) / width;
        const double disc = std::max(0.0, p.r0 * p.r0 + 2.0 * slope * target);
        const double denom = p.r0 + std::sqrt(disc);
        const double tau = denom > 0.0 ? 2.0 * target / denom : width * target / p.mass;
        return std::clamp(tau, 0.0, width);
    }

    std::vector<Piece> pieces_;
    std::vector<double> starts_;
    std::vector<double> cumulative_;
};

inline double cdf(const DiscretizedMeasure& mu, double x) { return InverseCdf(mu).cdf(x); }

/// Uniform double in [0, 1) from the top 53 bits; reproducible across standard libraries.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Inverse-CDF sampling; deterministic given the generator state.
inline std::vector<double> sample(const DiscretizedMeasure& mu, std::size_t n, std::mt19937_64& rng) {
    require(mu.is_probability(), Errc::NotProbability, "sampling requires a probability measure");
    const InverseCdf inv(mu);
    std::vector<double> out(n);
    for (auto& x : out) x = inv.quantile(uniform01(rng));
    return out;
}

/// L1 distance between the distribution functions, \int |F_mu - F_nu| dx.
/// This is the Wasserstein-1 distance for probability measures and treats atoms
/// and narrow density bumps consistently.
inline double l1_distance(const DiscretizedMeasure& mu, const DiscretizedMeasure& nu) {
    const InverseCdf a(mu), b(nu);
    std::vector<double> pts = a.breakpoints();
    const auto pb = b.breakpoints();
    pts.insert(pts.end(), pb.begin(), pb.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double s = 0.0;
    // Between breakpoints both CDFs are quadratic; Simpson on halves is accurate
    // except where the difference changes sign, which contributes at second order.
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        const double x0 = pts[i], x1 = pts[i + 1];
        const double w = x1 - x0;
        if (w <= 0.0) continue;
        // Evaluate just inside the interval so atoms at the ends are attributed correctly.
        auto diff = [&](double x) { return std::abs(a.cdf(x) - b.cdf(x)); };
        const double xm = 0.5 * (x0 + x1);
        const double e = 1e-12 * w;
        s += w / 6.0 * (diff(x0 + e) + 4.0 * diff(xm) + diff(x1 - e));
    }
    return s;
}

/// sup_x |F_n(x) - F_mu(x)| of an empirical sample against the measure's CDF.
inline double kolmogorov_distance(std::vector<double> samples, const DiscretizedMeasure& mu) {
    require(!samples.empty(), Errc::InvalidArgument, "empty sample");
    std::sort(samples.begin(), samples.end());
    const InverseCdf inv(mu);
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size();) {
        // Tied samples [i, j) form one jump of the empirical CDF.
        std::size_t j = i + 1;
        while (j < samples.size() && samples[j] == samples[i]) ++j;
        const double f = inv.cdf(samples[i]) / inv.total();
        // Left limit of F at the sample point covers atoms.
        const double f_left = inv.cdf(std::nextafter(samples[i], -std::numeric_limits<double>::infinity())) / inv.total();
        d = std::max({d, std::abs(static_cast<double>(j) / n - f), std::abs(static_cast<double>(i) / n - f_left)});
        i = j;
    }
    return d;
}

/// Convex combination of measures. Densities must share one grid.
inline DiscretizedMeasure mixture(const std::vector<std::pair<double, DiscretizedMeasure>>& parts) {
    require(!parts.empty(), Errc::EmptyMeasure, "empty mixture");
    std::vector<Atom> atoms;
    std::optional<DensityGrid> dens;
    double wsum = 0.0;
    for (const auto& [w, m] : parts) {
        require(w >= 0.0, Errc::NegativeMass, "negative mixture weight");
        wsum += w;
        for (const auto& a : m.atoms()) atoms.push_back({a.position, w * a.mass});
        if (const auto& d = m.density()) {
            if (!dens) {
                dens = DensityGrid{d->lo, d->hi, std::vector<double>(d->size(), 0.0)};
            }
            require(dens->same_nodes(*d), Errc::InvalidArgument, "mixture components use different density grids");
            for (std::size_t j = 0; j < d->size(); ++j) dens->values[j] += w * d->values[j];
        }
    }
    return make_measure(std::move(atoms), std::move(dens), true, 1e-6 + 1e-9 * parts.size() + std::abs(wsum - 1.0));
}

namespace measures {

inline DiscretizedMeasure dirac(double a) { return make_measure({{a, 1.0}}); }

/// Symmetric Bernoulli 1/2 (delta_{-1} + delta_{1}).
inline DiscretizedMeasure bernoulli() { return make_measure({{-1.0, 0.5}, {1.0, 0.5}}); }

inline DiscretizedMeasure two_point(double x0, double x1, double p1) {
    return make_measure({{x0, 1.0 - p1}, {x1, p1}});
}

/// Arcsine law of variance t: density 1/(pi sqrt(2t - x^2)) on (-sqrt(2t), sqrt(2t)).
inline DiscretizedMeasure arcsine(double t, std::size_t n = 2001) {
    require(t > 0.0, Errc::InvalidArgument, "arcsine variance must be positive");
    const double b = std::sqrt(2.0 * t);
    auto f = [t](double x) {
        const double r = 2.0 * t - x * x;
        return r > 0.0 ? 1.0 / (M_PI * std::sqrt(r)) : 0.0;
    };
    return make_measure({}, density_from_function(f, -b, b, n), true, 1e-6);
}

}  // namespace measures

}  // namespace monolev
