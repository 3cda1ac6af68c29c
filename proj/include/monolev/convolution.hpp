#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "measure.hpp"
#include "parallel.hpp"
#include "transform.hpp"

namespace monolev {

struct ConvolutionOptions {
    std::size_t grid_n = 2001;
    /// Equal-mass nodes standing in for the density of the first argument.
    std::size_t density_nodes = 512;
    std::size_t node_budget = 10000;
    InversionOptions inversion;
};

/// delta_y |> nu, whose reciprocal transform is H_nu - y.
inline DiscretizedMeasure shift_convolve(double y, const DiscretizedMeasure& nu, const ConvolutionOptions& opt = {}) {
    require(nu.is_probability(), Errc::NotProbability, "shift_convolve needs a probability measure");
    AutoInversionOptions ao;
    ao.n = opt.grid_n;
    ao.inversion = opt.inversion;
    return invert_auto(CauchyEvaluator::shifted(CauchyEvaluator::from_measure(nu), y), ao);
}

/// Quadrature nodes (y_i, w_i) for a measure: atoms as they are, the density collapsed to
/// `k` equal-mass nodes placed at the conditional mean of each quantile cell.
inline std::vector<Atom> mixture_nodes(const DiscretizedMeasure& mu, std::size_t k) {
    std::vector<Atom> nodes = mu.atoms();
    if (!mu.has_density() || k == 0) return nodes;
    const double dmass = mu.density_mass();
    if (dmass <= 0.0) return nodes;
    const InverseCdf icdf(make_measure({}, mu.density(), false));
    constexpr int sub = 8;
    for (std::size_t i = 0; i < k; ++i) {
        double y = 0.0;
        for (int s = 0; s < sub; ++s) {
            const double u = (static_cast<double>(i) + (s + 0.5) / sub) / static_cast<double>(k);
            y += icdf.quantile(u * icdf.total());
        }
        nodes.push_back({y / sub, dmass / static_cast<double>(k)});
    }
    return nodes;
}

/// Monotone convolution mu |> nu as the mixture \int (delta_y |> nu) dmu(y).
inline DiscretizedMeasure mono_convolve(const DiscretizedMeasure& mu, const DiscretizedMeasure& nu,
                                        const ConvolutionOptions& opt = {}) {
    require(mu.is_probability() && nu.is_probability(), Errc::NotProbability,
            "mono_convolve needs probability measures");
    const std::size_t needed = mu.atoms().size() + (mu.has_density() ? opt.density_nodes : 0);
    if (needed > opt.node_budget)
        fail(Errc::NodeBudgetExceeded, std::to_string(needed) + " mixture components exceed the budget of " +
                                           std::to_string(opt.node_budget));
    const std::vector<Atom> nodes = mixture_nodes(mu, opt.density_nodes);

    // One grid covers every shifted kernel, so the pieces mix on shared nodes.
    auto [mlo, mhi] = mu.support();
    auto [nlo, nhi] = nu.support();
    const auto grid = detail::padded_grid(nlo + std::min(mlo, 0.0), nhi + std::max(mhi, 0.0), opt.grid_n);
    const ShiftedInverter inverter(CauchyEvaluator::from_measure(nu), grid, opt.inversion);

    std::vector<std::pair<double, DiscretizedMeasure>> parts(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t i) { parts[i] = {nodes[i].mass, inverter.invert(nodes[i].position)}; });

    // Purely atomic pieces may have dropped their density; give every piece the shared grid.
    bool any_density = false;
    for (const auto& p : parts) any_density = any_density || p.second.has_density();
    if (any_density) {
        for (auto& p : parts) {
            if (p.second.has_density()) continue;
            DensityGrid zero{grid.lo, grid.hi, std::vector<double>(grid.n, 0.0)};
            p.second = make_measure(p.second.atoms(), std::move(zero));
        }
    }
    return mixture(parts);
}

/// Cross-check route: invert H_mu(H_nu(z)) directly.
inline DiscretizedMeasure mono_convolve_by_composition(const DiscretizedMeasure& mu, const DiscretizedMeasure& nu,
                                                       const ConvolutionOptions& opt = {}) {
    require(mu.is_probability() && nu.is_probability(), Errc::NotProbability,
            "mono_convolve needs probability measures");
    AutoInversionOptions ao;
    ao.n = opt.grid_n;
    ao.inversion = opt.inversion;
    return invert_auto(CauchyEvaluator::composed(CauchyEvaluator::from_measure(mu), CauchyEvaluator::from_measure(nu)),
                       ao);
}

}  // namespace monolev
