#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "measure.hpp"
#include "parallel.hpp"

namespace monolev {

/// Evaluator of G = \int dmu/(z - x) and H = 1/G on the upper half-plane. Copies share
/// one immutable node, so nesting (shifts, compositions) is cheap.
class CauchyEvaluator {
public:
    struct FromMeasure {
        DiscretizedMeasure mu;
    };
    struct ClosedFormBM {
        double t;
    };
    struct ClosedFormDrift {
        double a;
        double t;
    };
    struct FromFlow {
        CharacteristicPair pair;
        double t;
    };
    struct Shifted;
    struct Composed;

    static CauchyEvaluator from_measure(DiscretizedMeasure mu);
    static CauchyEvaluator closed_form_bm(double t);
    static CauchyEvaluator closed_form_drift(double a, double t);
    static CauchyEvaluator from_flow(CharacteristicPair pair, double t);
    /// H(z) = H_base(z) - y, the transform of delta_y |> base.
    static CauchyEvaluator shifted(CauchyEvaluator base, double y);
    /// H(z) = H_outer(H_inner(z)), the transform of outer |> inner.
    static CauchyEvaluator composed(CauchyEvaluator outer, CauchyEvaluator inner);

    std::string kind() const;

    /// H on Im z > 0 without argument checks.
    cplx H_upper(cplx z) const;
    /// G on Im z > 0 without argument checks.
    cplx G_upper(cplx z) const;

    /// Interval expected to contain the support. Exact for measures, closed forms and
    /// shifts/compositions of those; heuristic for flows.
    std::pair<double, double> support_hint() const;

    struct Node;

private:
    explicit CauchyEvaluator(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
    std::shared_ptr<const Node> node_;
};

struct CauchyEvaluator::Shifted {
    CauchyEvaluator base;
    double y;
};
struct CauchyEvaluator::Composed {
    CauchyEvaluator outer;
    CauchyEvaluator inner;
};

struct CauchyEvaluator::Node {
    std::variant<FromMeasure, ClosedFormBM, ClosedFormDrift, FromFlow, Shifted, Composed> v;
};

inline CauchyEvaluator CauchyEvaluator::from_measure(DiscretizedMeasure mu) {
    require(mu.is_probability(), Errc::NotProbability, "Cauchy evaluator needs a probability measure");
    return CauchyEvaluator(std::make_shared<Node>(Node{FromMeasure{std::move(mu)}}));
}
inline CauchyEvaluator CauchyEvaluator::closed_form_bm(double t) {
    require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
    return CauchyEvaluator(std::make_shared<Node>(Node{ClosedFormBM{t}}));
}
inline CauchyEvaluator CauchyEvaluator::closed_form_drift(double a, double t) {
    require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
    return CauchyEvaluator(std::make_shared<Node>(Node{ClosedFormDrift{a, t}}));
}
inline CauchyEvaluator CauchyEvaluator::from_flow(CharacteristicPair pair, double t) {
    require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
    return CauchyEvaluator(std::make_shared<Node>(Node{FromFlow{std::move(pair), t}}));
}
inline CauchyEvaluator CauchyEvaluator::shifted(CauchyEvaluator base, double y) {
    return CauchyEvaluator(std::make_shared<Node>(Node{Shifted{std::move(base), y}}));
}
inline CauchyEvaluator CauchyEvaluator::composed(CauchyEvaluator outer, CauchyEvaluator inner) {
    return CauchyEvaluator(std::make_shared<Node>(Node{Composed{std::move(outer), std::move(inner)}}));
}

inline std::string CauchyEvaluator::kind() const {
    static constexpr std::array<const char*, 6> names = {"FromMeasure", "ClosedFormBM", "ClosedFormDrift",
                                                         "FromFlow",    "Shifted",      "Composed"};
    return names[node_->v.index()];
}

namespace detail {

// Principal root, negated when it falls in the lower half-plane.
inline cplx pick_sqrt(cplx w) {
    cplx r = std::sqrt(w);
    if (r.imag() < 0.0) r = -r;
    return r;
}

}  // namespace detail

inline cplx CauchyEvaluator::H_upper(cplx z) const {
    return std::visit(
        [z](const auto& e) -> cplx {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, FromMeasure>) {
                const cplx g = detail::cauchy_sum(e.mu, z);
                if (g == 0.0) fail(Errc::EvaluatorUndefined, "G vanished");
                return 1.0 / g;
            } else if constexpr (std::is_same_v<T, ClosedFormBM>) {
                return e.t == 0.0 ? z : detail::pick_sqrt(z * z - 2.0 * e.t);
            } else if constexpr (std::is_same_v<T, ClosedFormDrift>) {
                return z + e.a * e.t;
            } else if constexpr (std::is_same_v<T, FromFlow>) {
                try {
                    return flow_H(e.pair, z, e.t);
                } catch (const Error& err) {
                    if (err.code() == Errc::StepFailure) fail(Errc::EvaluatorUndefined, err.what());
                    throw;
                }
            } else if constexpr (std::is_same_v<T, Shifted>) {
                return e.base.H_upper(z) - e.y;
            } else {
                return e.outer.H_upper(e.inner.H_upper(z));
            }
        },
        node_->v);
}

inline cplx CauchyEvaluator::G_upper(cplx z) const {
    if (const auto* m = std::get_if<FromMeasure>(&node_->v)) return detail::cauchy_sum(m->mu, z);
    const cplx h = H_upper(z);
    if (h == 0.0) fail(Errc::EvaluatorUndefined, "H vanished");
    return 1.0 / h;
}

inline std::pair<double, double> CauchyEvaluator::support_hint() const {
    return std::visit(
        [](const auto& e) -> std::pair<double, double> {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, FromMeasure>) {
                return e.mu.support();
            } else if constexpr (std::is_same_v<T, ClosedFormBM>) {
                const double b = std::sqrt(2.0 * e.t);
                return {-b, b};
            } else if constexpr (std::is_same_v<T, ClosedFormDrift>) {
                return {-e.a * e.t, -e.a * e.t};
            } else if constexpr (std::is_same_v<T, FromFlow>) {
                if (e.t == 0.0) return {0.0, 0.0};
                if (!e.pair.has_rho()) return {-e.pair.a * e.t, -e.pair.a * e.t};
                const double b = support_bound(e.pair, e.t);
                return {-b, b};
            } else if constexpr (std::is_same_v<T, Shifted>) {
                // Atoms of delta_y |> nu sit between y + lo and y + hi on the side of y.
                auto [lo, hi] = e.base.support_hint();
                return {lo + std::min(e.y, 0.0), hi + std::max(e.y, 0.0)};
            } else {
                auto [olo, ohi] = e.outer.support_hint();
                auto [ilo, ihi] = e.inner.support_hint();
                return {ilo + std::min(olo, 0.0), ihi + std::max(ohi, 0.0)};
            }
        },
        node_->v);
}

/// Cauchy transform. The lower half-plane is reached through G(conj z) = conj G(z).
inline cplx eval_G(const CauchyEvaluator& ev, cplx z) {
    require(z.imag() != 0.0, Errc::LowerHalfPlane, "G is evaluated off the real axis only");
    if (z.imag() < 0.0) return std::conj(ev.G_upper(std::conj(z)));
    return ev.G_upper(z);
}

/// Reciprocal Cauchy transform 1/G.
inline cplx eval_H(const CauchyEvaluator& ev, cplx z) {
    require(z.imag() != 0.0, Errc::LowerHalfPlane, "H is evaluated off the real axis only");
    if (z.imag() < 0.0) return std::conj(ev.H_upper(std::conj(z)));
    return ev.H_upper(z);
}

struct InversionGrid {
    double lo = -1.0;
    double hi = 1.0;
    std::size_t n = 2001;

    double spacing() const { return (hi - lo) / static_cast<double>(n - 1); }
    double node(std::size_t j) const { return j + 1 == n ? hi : lo + static_cast<double>(j) * spacing(); }
};

struct InversionOptions {
    /// Imaginary offsets used for the density, as multiples of the grid spacing.
    double eps_coarse = 2.0;
    double eps_fine = 1.0;
    /// Atom ladder, multiples of the grid spacing, decreasing.
    std::vector<double> ladder = {1.0, 1e-1, 1e-2, 1e-3};
    double mass_floor = 1e-4;
    double clip_tolerance = 1e-4;
    double mass_tolerance = 1e-3;
};

struct InversionReport {
    double raw_mass = 0.0;      // atoms plus density before renormalization
    double clipped_mass = 0.0;  // negative density removed by clipping
    double atom_mass = 0.0;
    std::size_t atom_count = 0;
    InversionGrid grid;
};

struct Inversion {
    DiscretizedMeasure measure;
    InversionReport report;
};

namespace detail {

inline double neville_at_zero(const std::vector<double>& x, std::vector<double> y) {
    const std::size_t n = x.size();
    for (std::size_t k = 1; k < n; ++k)
        for (std::size_t i = n - 1; i >= k; --i) {
            y[i] = (x[i] * y[i - 1] - x[i - k] * y[i]) / (x[i] - x[i - k]);
            if (i == k) break;
        }
    return y.back();
}

/// Refines atom candidates of the transform with reciprocal H (on Im z > 0).
/// `indicator[j]` is the two-level Richardson atom indicator at grid node j.
template <class HFn>
std::vector<Atom> refine_atoms(const HFn& H, const InversionGrid& grid, const std::vector<double>& indicator,
                               const InversionOptions& opt) {
    const double h = grid.spacing();
    const double scale = std::max({1.0, std::abs(grid.lo), std::abs(grid.hi)});
    std::vector<std::size_t> cand;
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double v = indicator[j];
        if (!(v > 0.5 * opt.mass_floor)) continue;
        const bool left_ok = j == 0 || v >= indicator[j - 1];
        const bool right_ok = j + 1 == grid.n || v > indicator[j + 1];
        if (left_ok && right_ok) cand.push_back(j);
    }
    std::vector<Atom> found(cand.size(), Atom{0.0, -1.0});
    parallel_for(cand.size(), [&](std::size_t c) {
        const double x0 = grid.node(cand[c]);
        const double eN = opt.ladder.back() * h;
        const double del = std::max(0.25 * eN, 1e-8 * scale);
        double u = x0;
        bool converged = false;
        for (int it = 0; it < 30; ++it) {
            const cplx Hc = H(cplx(u, eN));
            const cplx dH = (H(cplx(u + del, eN)) - H(cplx(u - del, eN))) / (2.0 * del);
            if (dH == 0.0) break;
            const double step = std::real(Hc / dH);
            if (!std::isfinite(step)) break;
            u -= step;
            if (std::abs(u - x0) > 3.0 * h) break;
            // Quadratic convergence stalls at the evaluator's noise floor.
            if (std::abs(step) <= std::max(1e-13 * scale, 1e-8 * h)) {
                converged = true;
                break;
            }
        }
        if (!converged) return;
        std::vector<double> eps, q;
        for (double l : opt.ladder) {
            const double e = l * h;
            eps.push_back(e);
            q.push_back(e * -std::imag(1.0 / H(cplx(u, e))));
        }
        // A true atom keeps eps * (-Im G) flat down the ladder; edges of a density decay.
        if (!(q.back() > 0.9 * q.front())) return;
        const std::size_t k = std::min<std::size_t>(3, eps.size());
        const double m = neville_at_zero(std::vector<double>(eps.end() - k, eps.end()),
                                         std::vector<double>(q.end() - k, q.end()));
        if (m > opt.mass_floor) found[c] = Atom{u, m};
    });
    std::vector<Atom> atoms;
    const double dedupe = std::max(1e-3 * h, 1e-10 * scale);
    for (const auto& a : found) {
        if (a.mass < 0.0) continue;
        bool dup = false;
        for (const auto& b : atoms) dup = dup || std::abs(a.position - b.position) <= dedupe;
        if (!dup) atoms.push_back(a);
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.position < b.position; });
    return atoms;
}

// Atoms plus Richardson-combined density from G sampled at two offsets.
template <class HFn>
Inversion assemble_inversion(const HFn& H, const InversionGrid& grid, const std::vector<cplx>& Gc,
                             const std::vector<cplx>& Gf, const InversionOptions& opt) {
    const double h = grid.spacing();
    const double ec = opt.eps_coarse * h;
    const double ef = opt.eps_fine * h;
    const double rc = opt.eps_fine / opt.eps_coarse;  // ratio of offsets
    std::vector<double> indicator(grid.n);
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double sf = ef * -Gf[j].imag();
        const double sc = ec * -Gc[j].imag();
        // Cancels the density contribution, which is linear in eps, and keeps atoms.
        indicator[j] = (sf - rc * sc) / (1.0 - rc);
    }
    std::vector<Atom> atoms = refine_atoms(H, grid, indicator, opt);

    DensityGrid dens{grid.lo, grid.hi, std::vector<double>(grid.n, 0.0)};
    double clipped = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j) {
        const double x = grid.node(j);
        cplx gc = Gc[j], gf = Gf[j];
        for (const auto& a : atoms) {
            gc -= a.mass / (cplx(x, ec) - a.position);
            gf -= a.mass / (cplx(x, ef) - a.position);
        }
        const double dc = -gc.imag() / M_PI;
        const double df = -gf.imag() / M_PI;
        // Extrapolate the Poisson-smoothed density to eps = 0 (first-order bias cancels).
        const double v = (df - rc * dc) / (1.0 - rc);
        if (v < 0.0) {
            clipped += dens.weight(j) * -v;
        } else {
            dens.values[j] = v;
        }
    }

    Inversion out;
    auto& rep = out.report;
    rep.grid = grid;
    rep.clipped_mass = clipped;
    rep.atom_count = atoms.size();
    for (const auto& a : atoms) rep.atom_mass += a.mass;
    double dmass = 0.0;
    for (std::size_t j = 0; j < grid.n; ++j) dmass += dens.weight(j) * dens.values[j];
    rep.raw_mass = rep.atom_mass + dmass;

    if (clipped > opt.clip_tolerance)
        fail(Errc::NegativeDensityExcess, "clipping removed mass " + std::to_string(clipped));
    if (std::abs(rep.raw_mass - 1.0) > opt.mass_tolerance)
        fail(Errc::MassDeficit, "recovered mass " + std::to_string(rep.raw_mass) + " on [" +
                                    std::to_string(grid.lo) + ", " + std::to_string(grid.hi) + "]");
    std::optional<DensityGrid> keep;
    if (dmass > 1e-9 || atoms.empty()) keep = std::move(dens);
    out.measure = make_measure(std::move(atoms), std::move(keep), true, 1.0);
    return out;
}

}  // namespace detail

/// Inverts delta_y |> nu for many y on one grid: H_nu is sampled once at both offsets,
/// so each shift costs O(n) plus the atom refinement.
class ShiftedInverter {
public:
    ShiftedInverter(CauchyEvaluator base, InversionGrid grid, InversionOptions opt = {})
        : base_(std::move(base)), grid_(grid), opt_(std::move(opt)) {
        require(grid_.n >= 5 && grid_.lo < grid_.hi, Errc::InvalidArgument, "inversion grid needs n >= 5, lo < hi");
        require(opt_.eps_coarse > opt_.eps_fine && opt_.eps_fine > 0.0, Errc::InvalidArgument,
                "eps schedule must be decreasing and positive");
        require(!opt_.ladder.empty(), Errc::InvalidArgument, "empty atom ladder");
        const double h = grid_.spacing();
        Hc_.resize(grid_.n);
        Hf_.resize(grid_.n);
        parallel_for(grid_.n, [&](std::size_t j) {
            const double x = grid_.node(j);
            Hc_[j] = base_.H_upper(cplx(x, opt_.eps_coarse * h));
            Hf_[j] = base_.H_upper(cplx(x, opt_.eps_fine * h));
        });
    }

    const InversionGrid& grid() const { return grid_; }
    const CauchyEvaluator& base() const { return base_; }

    Inversion invert_report(double y) const {
        std::vector<cplx> Gc(grid_.n), Gf(grid_.n);
        for (std::size_t j = 0; j < grid_.n; ++j) {
            Gc[j] = 1.0 / (Hc_[j] - y);
            Gf[j] = 1.0 / (Hf_[j] - y);
        }
        auto H = [this, y](cplx z) { return base_.H_upper(z) - y; };
        return detail::assemble_inversion(H, grid_, Gc, Gf, opt_);
    }
    DiscretizedMeasure invert(double y) const { return invert_report(y).measure; }

private:
    CauchyEvaluator base_;
    InversionGrid grid_;
    InversionOptions opt_;
    std::vector<cplx> Hc_, Hf_;
};

/// Stieltjes inversion on a fixed grid.
inline Inversion stieltjes_invert_report(const CauchyEvaluator& ev, const InversionGrid& grid,
                                         const InversionOptions& opt = {}) {
    require(grid.n >= 5 && grid.lo < grid.hi, Errc::InvalidArgument, "inversion grid needs n >= 5, lo < hi");
    const double h = grid.spacing();
    std::vector<cplx> Gc(grid.n), Gf(grid.n);
    parallel_for(grid.n, [&](std::size_t j) {
        const double x = grid.node(j);
        Gc[j] = ev.G_upper(cplx(x, opt.eps_coarse * h));
        Gf[j] = ev.G_upper(cplx(x, opt.eps_fine * h));
    });
    auto H = [&ev](cplx z) { return ev.H_upper(z); };
    return detail::assemble_inversion(H, grid, Gc, Gf, opt);
}

inline DiscretizedMeasure stieltjes_invert(const CauchyEvaluator& ev, const InversionGrid& grid,
                                           const InversionOptions& opt = {}) {
    return stieltjes_invert_report(ev, grid, opt).measure;
}

/// Atoms of the measure behind `ev` inside [lo, hi], scanned on n nodes.
inline std::vector<Atom> detect_atoms(const CauchyEvaluator& ev, const InversionGrid& interval,
                                      const InversionOptions& opt = {}) {
    require(interval.n >= 3 && interval.lo < interval.hi, Errc::InvalidArgument, "bad atom scan interval");
    const double h = interval.spacing();
    const double rc = opt.eps_fine / opt.eps_coarse;
    std::vector<double> ind(interval.n);
    parallel_for(interval.n, [&](std::size_t j) {
        const double x = interval.node(j);
        const double sf = opt.eps_fine * h * -ev.G_upper(cplx(x, opt.eps_fine * h)).imag();
        const double sc = opt.eps_coarse * h * -ev.G_upper(cplx(x, opt.eps_coarse * h)).imag();
        ind[j] = (sf - rc * sc) / (1.0 - rc);
    });
    auto H = [&ev](cplx z) { return ev.H_upper(z); };
    return detail::refine_atoms(H, interval, ind, opt);
}

struct AutoInversionOptions {
    std::size_t n = 2001;
    int max_expansions = 8;
    bool tighten = true;
    /// Density below this fraction of its maximum counts as outside the support when tightening.
    double support_threshold = 1e-4;
    InversionOptions inversion;
};

namespace detail {

inline InversionGrid padded_grid(double lo, double hi, std::size_t n) {
    const double scale = 1.0 + std::max(std::abs(lo), std::abs(hi));
    const double w = std::max(hi - lo, 0.05 * scale);
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * w + 0.12 * w;
    return {mid - half, mid + half, n};
}

// Interval carrying the atoms and the non-negligible density.
inline std::pair<double, double> effective_support(const DiscretizedMeasure& mu, double rel) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (const auto& a : mu.atoms()) {
        lo = std::min(lo, a.position);
        hi = std::max(hi, a.position);
    }
    if (const auto& d = mu.density()) {
        const double mx = *std::max_element(d->values.begin(), d->values.end());
        for (std::size_t j = 0; j < d->size(); ++j)
            if (d->values[j] > rel * mx) {
                lo = std::min(lo, d->node(j));
                hi = std::max(hi, d->node(j));
            }
    }
    return {lo, hi};
}

}  // namespace detail

/// Inversion with the grid chosen from the evaluator's support hint: widened on mass
/// deficit, then tightened to the recovered support for resolution.
inline Inversion invert_auto_report(const CauchyEvaluator& ev, const AutoInversionOptions& opt = {},
                                    std::optional<std::pair<double, double>> hint = std::nullopt) {
    auto [lo, hi] = hint ? *hint : ev.support_hint();
    InversionGrid grid = detail::padded_grid(lo, hi, opt.n);
    std::optional<Inversion> result;
    for (int attempt = 0;; ++attempt) {
        try {
            result = stieltjes_invert_report(ev, grid, opt.inversion);
            break;
        } catch (const Error& e) {
            if (e.code() != Errc::MassDeficit || attempt >= opt.max_expansions) throw;
            const double mid = 0.5 * (grid.lo + grid.hi);
            const double half = 0.75 * (grid.hi - grid.lo);
            grid = {mid - half, mid + half, opt.n};
        }
    }
    if (!opt.tighten) return *result;
    auto [elo, ehi] = detail::effective_support(result->measure, opt.support_threshold);
    InversionGrid tight = detail::padded_grid(elo, ehi, opt.n);
    tight.lo = std::max(tight.lo, grid.lo);
    tight.hi = std::min(tight.hi, grid.hi);
    if (tight.hi - tight.lo > 0.8 * (grid.hi - grid.lo)) return *result;
    try {
        return stieltjes_invert_report(ev, tight, opt.inversion);
    } catch (const Error& e) {
        if (!is_numerical(e.code())) throw;
        return *result;
    }
}

inline DiscretizedMeasure invert_auto(const CauchyEvaluator& ev, const AutoInversionOptions& opt = {}) {
    return invert_auto_report(ev, opt).measure;
}

}  // namespace monolev
