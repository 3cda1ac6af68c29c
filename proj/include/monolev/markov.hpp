#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <shared_mutex>
#include <tuple>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "flow.hpp"
#include "measure.hpp"
#include "parallel.hpp"
#include "semigroup.hpp"
#include "test_function.hpp"
#include "transform.hpp"

namespace monolev {

namespace detail {

// Process-wide memo of read-mostly derived data. Concurrent readers share a lock;
// two writers racing on one key both compute and the later insert wins, which is
// harmless since results are deterministic.
template <class Key, class Value>
class Memo {
public:
    template <class Make>
    std::shared_ptr<const Value> get(const Key& key, Make&& make) {
        {
            std::shared_lock lock(mutex_);
            auto it = map_.find(key);
            if (it != map_.end()) return it->second;
        }
        auto v = std::make_shared<const Value>(make());
        std::unique_lock lock(mutex_);
        map_[key] = v;
        return v;
    }
    void put(const Key& key, std::shared_ptr<const Value> v) {
        std::unique_lock lock(mutex_);
        map_[key] = std::move(v);
    }
    std::shared_ptr<const Value> find(const Key& key) const {
        std::shared_lock lock(mutex_);
        auto it = map_.find(key);
        return it == map_.end() ? nullptr : it->second;
    }

private:
    mutable std::shared_mutex mutex_;
    std::map<Key, std::shared_ptr<const Value>> map_;
};

using PairTimeKey = std::pair<std::uint64_t, double>;

inline Memo<PairTimeKey, std::pair<double, double>>& support_memo() {
    static Memo<PairTimeKey, std::pair<double, double>> m;
    return m;
}

inline Memo<std::tuple<std::uint64_t, double, int>, std::vector<std::vector<double>>>& polynomial_memo() {
    static Memo<std::tuple<std::uint64_t, double, int>, std::vector<std::vector<double>>> m;
    return m;
}

}  // namespace detail

/// Effective support of mu_t, found once per (pair, t) by inverting the marginal.
inline std::pair<double, double> marginal_support(const CharacteristicPair& pair, double t) {
    if (t == 0.0) return {0.0, 0.0};
    return *detail::support_memo().get({pair.digest(), t}, [&] {
        const DiscretizedMeasure mu = marginal(pair, t);
        return detail::effective_support(mu, 1e-4);
    });
}

/// Transition kernel mu_{t,x} = delta_x |> mu_t, i.e. the measure with H = H_t - x.
inline DiscretizedMeasure kernel(const CharacteristicPair& pair, double t, double x,
                                 const AutoInversionOptions& opt = {}) {
    require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
    if (t == 0.0) return measures::dirac(x);
    auto [lo, hi] = marginal_support(pair, t);
    const auto ev = CauchyEvaluator::shifted(CauchyEvaluator::from_flow(pair, t), x);
    return invert_auto_report(ev, opt, std::make_pair(lo + std::min(x, 0.0), hi + std::max(x, 0.0))).measure;
}

struct ApplyOptions {
    /// Integrate against the inverted kernel even where a closed route exists.
    bool force_quadrature = false;
};

/// T_t f(x) = \int f d mu_{t,x}. Resolvents use 1/(H_t(z) - x) and polynomials the
/// contour transition coefficients; anything else is integrated against the kernel.
inline cplx apply_T(const CharacteristicPair& pair, double t, const TestFunction& f, double x,
                    const ApplyOptions& ao = {}) {
    require(t >= 0.0, Errc::InvalidArgument, "time must be >= 0");
    if (t == 0.0) return f(x);
    if (!ao.force_quadrature) {
        if (f.is_resolvent()) {
            const cplx z = f.as_resolvent().pole;
            if (z.imag() > 0.0) return 1.0 / (flow_H(pair, z, t) - x);
            return std::conj(1.0 / (flow_H(pair, std::conj(z), t) - x));
        }
        if (f.is_polynomial()) {
            const int deg = f.degree();
            if (deg <= 16) {
                const auto c = detail::polynomial_memo().get(
                    {pair.digest(), t, deg}, [&] { return transition_polynomial(pair, t, deg); });
                const auto& coeff = f.as_polynomial().coeffs;
                std::vector<double> out(static_cast<std::size_t>(deg) + 1, 0.0);
                for (std::size_t k = 0; k <= static_cast<std::size_t>(deg); ++k)
                    for (std::size_t n = 0; n <= k; ++n) out[n] += coeff[k] * (*c)[k][n];
                return TestFunction::polynomial(out)(x);
            }
        }
    }
    return integrate(kernel(pair, t, x), f).value;
}

/// Generator of T_t: -a f'(x) + \int [f(y) - f(x) + (x - y) f'(x)] / (x - y)^2 drho(y),
/// with f''(x)/2 where y is within 1e-4 * scale of x.
inline cplx script_L(const CharacteristicPair& pair, const TestFunction& f, double x) {
    const cplx fx = f(x);
    const cplx dfx = f.d1(x);
    cplx acc = -pair.a * dfx;
    const double delta = detail::diagonal_radius(pair);
    std::optional<cplx> half_d2;
    for (const auto& n : detail::rho_nodes(pair)) {
        const double d = x - n.position;
        if (std::abs(d) < delta) {
            if (!half_d2) half_d2 = 0.5 * f.d2(x);
            acc += n.mass * *half_d2;
        } else {
            acc += n.mass * (f(n.position) - fx + d * dfx) / (d * d);
        }
    }
    return acc;
}

struct PathOptions {
    std::size_t state_nodes = 512;
    std::size_t quantile_levels = 2048;
    std::size_t grid_n = 2001;
};

/// Quantile tables of delta_x |> mu_dt on a uniform state grid.
class KernelTable {
public:
    KernelTable(const CharacteristicPair& pair, double dt, double xlo, double xhi, const PathOptions& po = {})
        : xlo_(xlo), xhi_(xhi), nx_(po.state_nodes), nu_(po.quantile_levels) {
        require(dt > 0.0, Errc::InvalidArgument, "kernel table needs dt > 0");
        require(xlo < xhi && nx_ >= 2 && nu_ >= 2, Errc::InvalidArgument, "bad kernel table layout");
        auto [lo, hi] = marginal_support(pair, dt);
        const auto grid = detail::padded_grid(lo + std::min(xlo, 0.0), hi + std::max(xhi, 0.0), po.grid_n);
        const ShiftedInverter inverter(CauchyEvaluator::from_flow(pair, dt), grid);
        table_.assign(nx_ * (nu_ + 1), 0.0);
        parallel_for(nx_, [&](std::size_t i) {
            const InverseCdf icdf(inverter.invert(state(i)));
            double* row = &table_[i * (nu_ + 1)];
            for (std::size_t k = 0; k <= nu_; ++k)
                row[k] = icdf.quantile(static_cast<double>(k) / static_cast<double>(nu_) * icdf.total());
        });
    }

    double xlo() const { return xlo_; }
    double xhi() const { return xhi_; }
    double state(std::size_t i) const {
        return i + 1 == nx_ ? xhi_ : xlo_ + (xhi_ - xlo_) * static_cast<double>(i) / static_cast<double>(nx_ - 1);
    }

    /// Next state from x with uniform u, interpolating linearly in x and in u.
    double draw(double x, double u) const {
        const double s = std::clamp((x - xlo_) / (xhi_ - xlo_), 0.0, 1.0) * static_cast<double>(nx_ - 1);
        const std::size_t i = std::min(static_cast<std::size_t>(s), nx_ - 2);
        const double lam = s - static_cast<double>(i);
        return (1.0 - lam) * quantile(i, u) + lam * quantile(i + 1, u);
    }

private:
    double quantile(std::size_t i, double u) const {
        const double p = std::clamp(u, 0.0, 1.0) * static_cast<double>(nu_);
        const std::size_t k = std::min(static_cast<std::size_t>(p), nu_ - 1);
        const double f = p - static_cast<double>(k);
        const double* row = &table_[i * (nu_ + 1)];
        return (1.0 - f) * row[k] + f * row[k + 1];
    }

    double xlo_, xhi_;
    std::size_t nx_, nu_;
    std::vector<double> table_;
};

namespace detail {

inline Memo<PairTimeKey, KernelTable>& table_memo() {
    static Memo<PairTimeKey, KernelTable> m;
    return m;
}

}  // namespace detail

/// Cached kernel table for (pair, dt) covering [xlo, xhi]; rebuilt over the union when
/// the cached one is too narrow.
inline std::shared_ptr<const KernelTable> kernel_table(const CharacteristicPair& pair, double dt, double xlo,
                                                       double xhi, const PathOptions& po = {}) {
    const detail::PairTimeKey key{pair.digest(), dt};
    auto cached = detail::table_memo().find(key);
    if (cached && cached->xlo() <= xlo && xhi <= cached->xhi()) return cached;
    if (cached) {
        xlo = std::min(xlo, cached->xlo());
        xhi = std::max(xhi, cached->xhi());
    }
    auto fresh = std::make_shared<const KernelTable>(pair, dt, xlo, xhi, po);
    detail::table_memo().put(key, fresh);
    return fresh;
}

struct PathArray {
    std::vector<double> times;
    std::size_t n_paths = 0;
    std::vector<double> values;  // path-major: values[p * times.size() + i]

    double at(std::size_t path, std::size_t i) const { return values[path * times.size() + i]; }
};

/// Classical paths: X(t_1) ~ mu_{t_1}, X(t_{i+1}) ~ mu_{t_{i+1} - t_i, X(t_i)}.
inline PathArray sample_path(const CharacteristicPair& pair, const std::vector<double>& times, std::size_t n_paths,
                             std::mt19937_64& rng, const PathOptions& po = {}) {
    require(!times.empty(), Errc::InvalidArgument, "no sample times");
    require(times.front() >= 0.0, Errc::InvalidArgument, "sample times must be >= 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        require(times[i] >= times[i - 1], Errc::InvalidArgument, "sample times must be nondecreasing");
    const std::size_t m = times.size();
    PathArray out{times, n_paths, std::vector<double>(n_paths * m, 0.0)};

    // Uniforms are drawn serially so the result does not depend on the thread count.
    std::vector<double> u(n_paths * m);
    for (auto& v : u) v = uniform01(rng);

    if (times.front() > 0.0) {
        const InverseCdf first(marginal(pair, times.front()));
        for (std::size_t p = 0; p < n_paths; ++p) out.values[p * m] = first.quantile(u[p * m] * first.total());
    }
    for (std::size_t i = 1; i < m; ++i) {
        const double dt = times[i] - times[i - 1];
        if (dt == 0.0) {
            for (std::size_t p = 0; p < n_paths; ++p) out.values[p * m + i] = out.values[p * m + i - 1];
            continue;
        }
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (std::size_t p = 0; p < n_paths; ++p) {
            lo = std::min(lo, out.values[p * m + i - 1]);
            hi = std::max(hi, out.values[p * m + i - 1]);
        }
        const double pad = 1e-3 * (1.0 + std::max(std::abs(lo), std::abs(hi)));
        // Grid cells aligned to the pad keep cache keys stable across similar runs.
        lo = std::floor(lo / pad) * pad - pad;
        hi = std::ceil(hi / pad) * pad + pad;
        const auto table = kernel_table(pair, dt, lo, hi, po);
        parallel_for(n_paths, [&](std::size_t p) {
            out.values[p * m + i] = table->draw(out.values[p * m + i - 1], u[p * m + i]);
        });
    }
    return out;
}

/// |H_{t-s}(H_t^{-1}(z)) - H_s^{-1}(z)|, the scalar identity behind the martingale
/// property of 1/(H_t^{-1}(z) - X_t).
inline double martingale_residual(const CharacteristicPair& pair, cplx z, double s, double t, double T) {
    require(0.0 <= s && s <= t && t <= T, Errc::InvalidArgument, "need 0 <= s <= t <= T");
    require(z.imag() > 0.0, Errc::LowerHalfPlane, "z must lie in the upper half-plane");
    (void)inverse_flow_H(pair, z, T);  // throws OutsideDomain unless z is in H_T(C+)
    const cplx wt = inverse_flow_H(pair, z, t);
    const cplx ws = s == 0.0 ? z : inverse_flow_H(pair, z, s);
    return std::abs(flow_H(pair, wt, t - s) - ws);
}

}  // namespace monolev
