#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "io.hpp"
#include "transform.hpp"

namespace monolev {

/// Every verification tolerance in one place. Field names double as JSON keys.
struct Tolerances {
    double normalization = 1e-6;         // mass of a probability measure, T_t 1
    double odd_moment = 1e-9;            // odd moments of symmetric measures
    double moment_quadrature = 1e-3;     // quadrature moments of tabulated densities
    double round_trip_l1 = 1e-3;         // invert(FromMeasure(mu)) vs mu
    double pick_slack = 1e-9;            // Im H(z) >= Im z - slack |z|
    double arcsine_density = 2e-3;       // max abs density error on |x| <= 0.95 sqrt(2t)
    double marginal_mass = 1e-4;         // raw recovered mass of the arcsine marginal
    double flow_closed_form = 1e-8;      // flow vs sqrt(z^2 - 2t)
    double drift_flow = 1e-10;           // flow vs z + a t
    double drift_atom = 1e-6;            // marginal atom at -a t
    double atom = 1e-6;                  // detected atom position and mass
    double im_monotone = 1e-12;          // allowed decrease of Im along a forward flow
    double semigroup_law = 1e-7;         // H_{s+t} vs H_s o H_t
    double abel = 1e-6;                  // Abel equation residual
    double schurmann = 1e-12;            // cocycle and coboundary identities
    double contour_moment = 1e-4;        // contour moments vs marginal quadrature
    double independence = 1e-12;         // monotone independence residuals, H composition
    double resolvent_identity = 1e-10;   // conditional expectation of the resolvent
    double conditional_expectation = 1e-12;
    double marginal_fidelity = 1e-10;    // Jacobi factor moments vs the measure
    double witness_gap = 1e-12;          // smallest gap counted as a trace-failure witness
    double corollary_T = 1e-6;           // E_1(f(X_1 + X_2)) vs (Tf)(X_1)
    double convolution_moment = 2e-3;    // mono_convolve moments vs matrix model
    double mean_additivity = 1e-6;
    double route_l1 = 2e-3;              // mixture route vs composition route
    double affinity_l1 = 1e-3;
    double noncommutativity = 0.01;      // minimum third-moment gap
    double chapman_kolmogorov = 5e-3;
    double generator_order = 0.9;        // minimum observed convergence order
    double generator_pin = 1e-6;         // script_L at closed-form points
    double martingale = 1e-7;
    double mc_sigmas = 3.0;              // Monte-Carlo agreement in standard errors
    double errata_consistent = 1e-5;     // implemented formula vs oracle
    double errata_flag = 1e-3;           // printed formula counts as inconsistent above this gap
};

inline Json tolerances_to_json(const Tolerances& t);
inline Tolerances tolerances_from_json(const Json& j, const std::string& path = "$.tolerances");

namespace detail {

template <class F>
void for_each_tolerance(Tolerances& t, F&& f) {
    f("normalization", t.normalization);
    f("odd_moment", t.odd_moment);
    f("moment_quadrature", t.moment_quadrature);
    f("round_trip_l1", t.round_trip_l1);
    f("pick_slack", t.pick_slack);
    f("arcsine_density", t.arcsine_density);
    f("marginal_mass", t.marginal_mass);
    f("flow_closed_form", t.flow_closed_form);
    f("drift_flow", t.drift_flow);
    f("drift_atom", t.drift_atom);
    f("atom", t.atom);
    f("im_monotone", t.im_monotone);
    f("semigroup_law", t.semigroup_law);
    f("abel", t.abel);
    f("schurmann", t.schurmann);
    f("contour_moment", t.contour_moment);
    f("independence", t.independence);
    f("resolvent_identity", t.resolvent_identity);
    f("conditional_expectation", t.conditional_expectation);
    f("marginal_fidelity", t.marginal_fidelity);
    f("witness_gap", t.witness_gap);
    f("corollary_T", t.corollary_T);
    f("convolution_moment", t.convolution_moment);
    f("mean_additivity", t.mean_additivity);
    f("route_l1", t.route_l1);
    f("affinity_l1", t.affinity_l1);
    f("noncommutativity", t.noncommutativity);
    f("chapman_kolmogorov", t.chapman_kolmogorov);
    f("generator_order", t.generator_order);
    f("generator_pin", t.generator_pin);
    f("martingale", t.martingale);
    f("mc_sigmas", t.mc_sigmas);
    f("errata_consistent", t.errata_consistent);
    f("errata_flag", t.errata_flag);
}

}  // namespace detail

inline Json tolerances_to_json(const Tolerances& t) {
    Tolerances copy = t;
    Json j = Json::object();
    detail::for_each_tolerance(copy, [&](const char* k, double& v) { j[k] = v; });
    return j;
}

/// Overrides defaults with the fields present in j.
inline Tolerances tolerances_from_json(const Json& j, const std::string& path) {
    if (!j.is_object()) detail::schema_fail(path, "expected an object");
    Tolerances t;
    std::size_t seen = 0;
    detail::for_each_tolerance(t, [&](const char* k, double& v) {
        if (!j.contains(k)) return;
        ++seen;
        v = detail::json_number(j[k], path + "." + k);
        if (!(v > 0.0)) detail::schema_fail(path + "." + k, "tolerance must be positive");
    });
    if (seen != j.size())
        for (const auto& [key, value] : j.items()) {
            bool known = false;
            detail::for_each_tolerance(t, [&](const char* k, double&) { known = known || key == k; });
            if (!known) detail::schema_fail(path + "." + key, "unknown tolerance");
        }
    return t;
}

struct RunConfig {
    CharacteristicPair pair;
    std::optional<double> poisson_lambda;  // set when the pair has the form (-l/2, (l/2) delta_1)
    std::optional<InversionGrid> grid;
    std::uint64_t seed = 0;
    std::size_t n_paths = 100000;
    Tolerances tolerances;
};

/// lambda when pair = (-lambda/2, (lambda/2) delta_1).
inline std::optional<double> infer_poisson_lambda(const CharacteristicPair& pair) {
    if (!pair.has_rho() || pair.rho->has_density() || pair.rho->atoms().size() != 1) return std::nullopt;
    const Atom& at = pair.rho->atoms().front();
    if (at.position != 1.0 || !(at.mass > 0.0)) return std::nullopt;
    if (std::abs(pair.a + at.mass) > 1e-12 * at.mass) return std::nullopt;
    return 2.0 * at.mass;
}

inline InversionGrid grid_from_json(const Json& g, const std::string& path) {
    if (!g.is_object()) detail::schema_fail(path, "expected {lo, hi, n}");
    detail::reject_unknown_keys(g, path, {"lo", "hi", "n"});
    for (const char* k : {"lo", "hi", "n"})
        if (!g.contains(k)) detail::schema_fail(path + "." + k, "missing field");
    InversionGrid grid;
    grid.lo = detail::json_number(g["lo"], path + ".lo");
    grid.hi = detail::json_number(g["hi"], path + ".hi");
    grid.n = detail::json_count(g["n"], path + ".n");
    if (!(grid.lo < grid.hi)) detail::schema_fail(path, "lo must be below hi");
    if (grid.n < 3) detail::schema_fail(path + ".n", "need at least three nodes");
    return grid;
}

/// A run configuration {pair, grid, seed, n_paths, tolerances}, where pair is an inline
/// object or a path relative to the config file. A bare pair object {a, rho} is
/// accepted as the whole configuration.
inline RunConfig config_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
    if (!j.is_object()) detail::schema_fail("$", "expected an object");
    const bool bare = !j.contains("pair") && (j.contains("a") || j.contains("rho"));
    RunConfig cfg;
    if (bare) {
        cfg.pair = pair_from_json(j, "$");
    } else {
        detail::reject_unknown_keys(j, "$", {"pair", "grid", "seed", "n_paths", "tolerances"});
        if (!j.contains("pair")) detail::schema_fail("$.pair", "missing field");
        const Json& p = j["pair"];
        if (p.is_string()) {
            const std::filesystem::path file = base_dir / p.get<std::string>();
            try {
                cfg.pair = pair_from_json(read_json_file(file.string()), "$.pair(" + file.string() + ")");
            } catch (const Error& e) {
                if (e.code() == Errc::SchemaViolation) throw;
                detail::schema_fail("$.pair", e.what());
            }
        } else {
            cfg.pair = pair_from_json(p, "$.pair");
        }
        if (j.contains("grid")) cfg.grid = grid_from_json(j["grid"], "$.grid");
        if (j.contains("seed")) cfg.seed = detail::json_count(j["seed"], "$.seed");
        if (j.contains("n_paths")) {
            cfg.n_paths = detail::json_count(j["n_paths"], "$.n_paths");
            if (cfg.n_paths == 0) detail::schema_fail("$.n_paths", "must be positive");
        }
        if (j.contains("tolerances")) cfg.tolerances = tolerances_from_json(j["tolerances"]);
    }
    cfg.poisson_lambda = infer_poisson_lambda(cfg.pair);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    return config_from_json(read_json_file(path), std::filesystem::path(path).parent_path());
}

}  // namespace monolev
