#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "convolution.hpp"
#include "errata.hpp"
#include "markov.hpp"
#include "matrix_oracle.hpp"
#include "semigroup.hpp"
#include "transform.hpp"

namespace monolev {

struct Check {
    std::string suite;
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    std::string relation;  // "<=" or ">="
    bool pass = false;
    std::string error;  // set when the measurement itself threw
};

struct VerifyReport {
    std::vector<Check> checks;
    std::vector<ErratumEntry> errata;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }

    Json to_json() const {
        auto num = [](double v) {
            if (std::isinf(v)) return Json(v > 0 ? "inf" : "-inf");
            return std::isfinite(v) ? Json(v) : Json(nullptr);
        };
        Json j = Json::object();
        Json cs = Json::array();
        std::size_t failed = 0;
        for (const auto& c : checks) {
            Json e = {{"suite", c.suite}, {"name", c.name}, {"value", num(c.value)}, {"tolerance", c.tolerance},
                      {"relation", c.relation}, {"verdict", c.pass ? "pass" : "fail"}};
            if (!c.error.empty()) e["error"] = c.error;
            cs.push_back(e);
            failed += c.pass ? 0 : 1;
        }
        j["checks"] = cs;
        if (!errata.empty()) {
            Json es = Json::array();
            for (const auto& e : errata) {
                auto cj = [&](cplx v) { return Json::array({num(v.real()), num(v.imag())}); };
                es.push_back({{"name", e.name},
                              {"detail", e.detail},
                              {"printed", cj(e.printed_value)},
                              {"implemented", cj(e.implemented_value)},
                              {"oracle", cj(e.oracle_value)},
                              {"printed_gap", num(e.printed_gap)},
                              {"implemented_gap", num(e.implemented_gap)},
                              {"printed_over_oracle", cj(e.ratio)},
                              {"printed_consistent", e.printed_gap <= e.implemented_gap * 10.0 + 1e-9}});
            }
            j["errata"] = es;
        }
        j["summary"] = {{"checks", checks.size()}, {"failed", failed}, {"verdict", failed == 0 ? "pass" : "fail"}};
        return j;
    }
};

inline const std::vector<std::string>& verify_suites() {
    static const std::vector<std::string> s{"measure", "transform", "semigroup", "convolution",
                                            "independence", "markov", "martingale", "errata"};
    return s;
}

namespace detail {

class Recorder {
public:
    Recorder(VerifyReport& r, std::string suite) : report_(r), suite_(std::move(suite)) {}

    void le(const std::string& name, double value, double tol) { add(name, value, tol, "<=", value <= tol); }
    void ge(const std::string& name, double value, double tol) { add(name, value, tol, ">=", value >= tol); }

    /// Runs a measurement; a thrown Error becomes a failed check under `name`.
    void guard(const std::string& name, const std::function<void()>& body) {
        try {
            body();
        } catch (const Error& e) {
            report_.checks.push_back({suite_, name, std::nan(""), 0.0, "", false, e.what()});
        }
    }

private:
    void add(const std::string& name, double value, double tol, const char* rel, bool ok) {
        report_.checks.push_back({suite_, name, value, tol, rel, ok && !std::isnan(value), {}});
    }

    VerifyReport& report_;
    std::string suite_;
};

inline std::vector<std::pair<std::string, CharacteristicPair>> example_pairs() {
    return {{"drift", pairs::drift(0.7)}, {"brownian", pairs::brownian()}, {"poisson", pairs::poisson(1.0)}};
}

inline double arcsine_pdf(double x, double t) {
    const double r = 2.0 * t - x * x;
    return r > 0.0 ? 1.0 / (M_PI * std::sqrt(r)) : 0.0;
}

// Observed order log10(e(h)/e(h/10)). Errors at rounding level (the difference quotient
// divides ~1e-13 noise by h) mean the quotient is exact, reported as order infinity.
inline double observed_order(double e_coarse, double e_fine) {
    if (e_coarse < 1e-8 && e_fine < 1e-8) return std::numeric_limits<double>::infinity();
    return std::log10(e_coarse / std::max(e_fine, 1e-300));
}

inline CMatrix matrix_power(const CMatrix& m, int k) {
    CMatrix out = CMatrix::Identity(m.rows(), m.cols());
    for (int i = 0; i < k; ++i) out = out * m;
    return out;
}

inline cplx random_upper(std::mt19937_64& rng, double re, double im_lo, double im_hi) {
    std::uniform_real_distribution<double> ur(-re, re), ui(im_lo, im_hi);
    return {ur(rng), ui(rng)};
}

inline void suite_measure(VerifyReport& rep, const Tolerances& tol, std::mt19937_64& rng) {
    Recorder r(rep, "measure");
    const auto arc = measures::arcsine(1.0);
    const auto bern = measures::bernoulli();
    r.le("arcsine_normalization", std::abs(total_mass(arc) - 1.0), tol.normalization);
    r.le("bernoulli_odd_moments", std::max(std::abs(moment(bern, 1)), std::abs(moment(bern, 3))), tol.odd_moment);
    {
        const double s = std::sqrt(2.0);
        double worst = 0.0;
        for (int k : {1, 3, 5}) worst = std::max(worst, std::abs(moment(arc, k)) / std::pow(s, k));
        r.le("arcsine_odd_moments", worst, tol.odd_moment);
    }
    r.le("arcsine_half_second_moment",
         std::abs(integrate(measures::arcsine(0.5), TestFunction::monomial(2)).value.real() - 0.5), tol.moment_quadrature);
    const std::size_t n = 100000;
    const double ks_tol = 2.0 / std::sqrt(static_cast<double>(n));
    r.le("ks_arcsine", kolmogorov_distance(sample(arc, n, rng), arc), ks_tol);
    r.le("ks_bernoulli", kolmogorov_distance(sample(bern, n, rng), bern), ks_tol);
    r.le("ks_dirac", kolmogorov_distance(sample(measures::dirac(0.3), n, rng), measures::dirac(0.3)), ks_tol);
}

inline void suite_transform(VerifyReport& rep, const Tolerances& tol, std::mt19937_64& rng) {
    Recorder r(rep, "transform");
    r.guard("pick_property", [&] {
        const std::vector<std::pair<std::string, CauchyEvaluator>> evs{
            {"from_measure", CauchyEvaluator::from_measure(measures::arcsine(1.0))},
            {"closed_form_bm", CauchyEvaluator::closed_form_bm(1.0)},
            {"closed_form_drift", CauchyEvaluator::closed_form_drift(0.7, 1.0)},
            {"from_flow", CauchyEvaluator::from_flow(pairs::poisson(1.0), 0.5)},
            {"shifted", CauchyEvaluator::shifted(CauchyEvaluator::from_measure(measures::bernoulli()), 1.0)},
            {"composed", CauchyEvaluator::composed(CauchyEvaluator::closed_form_bm(0.5),
                                                   CauchyEvaluator::from_measure(measures::bernoulli()))}};
        for (const auto& [name, ev] : evs) {
            double worst = -std::numeric_limits<double>::infinity();
            for (int i = 0; i < 200; ++i) {
                const cplx z = random_upper(rng, 3.0, 1e-3, 3.0);
                worst = std::max(worst, (z.imag() - eval_H(ev, z).imag()) / std::abs(z));
            }
            r.le("pick_property." + name, worst, tol.pick_slack);
        }
    });
    r.guard("arcsine_marginal", [&] {
        const Inversion inv = invert_auto_report(CauchyEvaluator::from_flow(pairs::brownian(), 1.0));
        const auto& d = inv.measure.density();
        require(d.has_value(), Errc::MassDeficit, "no density recovered");
        const double edge = 0.95 * std::sqrt(2.0);
        double worst = 0.0;
        for (std::size_t j = 0; j < d->size(); ++j)
            if (std::abs(d->node(j)) <= edge) worst = std::max(worst, std::abs(d->values[j] - arcsine_pdf(d->node(j), 1.0)));
        r.le("arcsine_density_max_error", worst, tol.arcsine_density);
        r.le("arcsine_raw_mass", std::abs(inv.report.raw_mass - 1.0), tol.marginal_mass);
        r.le("arcsine_atom_count", static_cast<double>(inv.measure.atoms().size()), 0.0);
    });
    r.guard("round_trip", [&] {
        for (const auto& [name, mu] : std::vector<std::pair<std::string, DiscretizedMeasure>>{
                 {"dirac", measures::dirac(0.0)}, {"bernoulli", measures::bernoulli()}, {"arcsine", measures::arcsine(1.0)}})
            r.le("round_trip_l1." + name, l1_distance(invert_auto(CauchyEvaluator::from_measure(mu)), mu), tol.round_trip_l1);
    });
    r.guard("shifted_bernoulli_atoms", [&] {
        // delta_1 |> Bernoulli: G = z / (z^2 - z - 1), poles (1 +- sqrt 5)/2 with residues z/(2z - 1).
        const auto mu = shift_convolve(1.0, measures::bernoulli());
        double worst = mu.atoms().size() == 2 ? 0.0 : 1.0;
        for (double s : {-1.0, 1.0}) {
            const double p = 0.5 * (1.0 + s * std::sqrt(5.0));
            const double m = p / (2.0 * p - 1.0);
            double best = 1.0;
            for (const auto& a : mu.atoms()) best = std::min(best, std::abs(a.position - p) + std::abs(a.mass - m));
            worst = std::max(worst, best);
        }
        r.le("shifted_bernoulli_atoms", worst, tol.atom);
    });
    r.guard("decay", [&] {
        // |z G(z) - 1| <= s / (|z| - s) for support bound s.
        const auto mu = measures::arcsine(1.0);
        const double s = mu.support_bound();
        double worst = 0.0;
        for (int i = 0; i < 16; ++i) {
            const cplx z = std::polar(10.0 * s, (i + 0.5) * M_PI / 16.0);
            const double g = std::abs(z * eval_G(CauchyEvaluator::from_measure(mu), z) - 1.0);
            worst = std::max(worst, g * (std::abs(z) - s) / s);
        }
        r.le("decay_ratio", worst, 1.0);
    });
}

inline void suite_semigroup(VerifyReport& rep, const Tolerances& tol, std::mt19937_64& rng) {
    Recorder r(rep, "semigroup");
    r.guard("closed_form_flow", [&] {
        std::uniform_real_distribution<double> ut(0.01, 2.0);
        double worst = 0.0;
        for (int i = 0; i < 50; ++i) {
            const cplx z = random_upper(rng, 2.0, 0.05, 2.0);
            const double t = ut(rng);
            worst = std::max(worst, std::abs(flow_H(pairs::brownian(), z, t) - pick_sqrt(z * z - 2.0 * t)));
        }
        r.le("brownian_flow_vs_closed_form", worst, tol.flow_closed_form);
    });
    r.guard("drift", [&] {
        const auto p = pairs::drift(0.7);
        double flow_gap = 0.0;
        for (double t : {0.5, 1.0, 2.0}) flow_gap = std::max(flow_gap, std::abs(flow_H(p, cplx(0.3, 1.0), t) - cplx(0.3 + 0.7 * t, 1.0)));
        r.le("drift_flow", flow_gap, tol.drift_flow);
        double atom_gap = 0.0;
        for (double t : {0.5, 1.0}) {
            const auto mu = marginal(p, t);
            atom_gap = std::max(atom_gap, mu.atoms().size() == 1 && !mu.has_density()
                                              ? std::abs(mu.atoms()[0].position + 0.7 * t) + std::abs(mu.atoms()[0].mass - 1.0)
                                              : 1.0);
        }
        r.le("drift_marginal_atom", atom_gap, tol.drift_atom);
    });
    for (const auto& [name, p] : example_pairs()) {
        r.guard("abel." + name, [&, &name = name, &p = p] {
            double worst = 0.0;
            for (double t : {0.25, 1.0})
                for (cplx z : {cplx(0.0, 1.0), cplx(0.5, 2.0), cplx(-1.0, 0.3)}) worst = std::max(worst, abel_residual(p, z, t));
            r.le("abel_residual." + name, worst, tol.abel);
        });
        r.guard("semigroup_law." + name, [&, &name = name, &p = p] {
            std::uniform_real_distribution<double> u(0.05, 1.0);
            double worst = 0.0, lift = 0.0;
            for (int i = 0; i < 10; ++i) {
                const cplx z = random_upper(rng, 2.0, 0.1, 2.0);
                const double s = u(rng), t = u(rng);
                worst = std::max(worst, std::abs(flow_H(p, z, s + t) - flow_H(p, flow_H(p, z, t), s)));
                FlowOptions fo;
                fo.record_trajectory = true;
                const auto traj = flow_trajectory(p, z, t, fo).trajectory;
                for (std::size_t k = 1; k < traj.size(); ++k) lift = std::max(lift, traj[k - 1].imag() - traj[k].imag());
            }
            r.le("semigroup_law." + name, worst, tol.semigroup_law);
            r.le("imaginary_part_decrease." + name, lift, tol.im_monotone);
        });
    }
    for (const auto& [name, p] : example_pairs()) {
        if (!p.has_rho()) continue;
        r.guard("generator_consistency." + name, [&, &name = name, &p = p] {
            const cplx z(0.3, 1.0);
            auto err = [&](double h) { return std::abs((flow_H(p, z, h) - z) / h - eval_A(p, z)); };
            r.ge("flow_generator_order." + name, observed_order(err(1e-3), err(1e-4)), tol.generator_order);
            const auto f = TestFunction::polynomial({0.0, 1.0, 1.0, 1.0, 1.0});
            auto lerr = [&](double h) {
                const auto m = moments_via_contour(p, h, 4);
                return std::abs((m[1] + m[2] + m[3] + m[4]) / h - L_apply(p, f).real());
            };
            r.ge("L_vs_semigroup_order." + name, observed_order(lerr(1e-2), lerr(1e-3)), tol.generator_order);
        });
        r.guard("schurmann." + name, [&, &name = name, &p = p] {
            const auto x = TestFunction::monomial(1), x2 = TestFunction::monomial(2), one = TestFunction::constant(1.0);
            double worst = 0.0;
            for (const auto& [f, g] : std::vector<std::pair<TestFunction, TestFunction>>{{x, x}, {x, x2}, {x2, x}, {x, one}}) {
                const auto res = schurmann_verify(p, f, g);
                worst = std::max({worst, res.cocycle, res.coboundary});
            }
            r.le("schurmann_identities." + name, worst, tol.schurmann);
        });
    }
    r.guard("contour_moments", [&] {
        const auto m = moments_via_contour(pairs::brownian(), 1.0, 4);
        r.le("contour_moments.brownian", std::max({std::abs(m[0] - 1.0), std::abs(m[1]), std::abs(m[2] - 1.0),
                                                   std::abs(m[3]), std::abs(m[4] - 1.5)}),
             tol.contour_moment);
        r.le("contour_mean.drift", std::abs(moments_via_contour(pairs::drift(0.7), 1.0, 1)[1] + 0.7), tol.flow_closed_form);
        r.le("contour_mean.poisson", std::abs(moments_via_contour(pairs::poisson(1.0), 1.0, 1)[1] - 0.5), tol.contour_moment);
    });
}

inline void suite_convolution(VerifyReport& rep, const Tolerances& tol, std::mt19937_64&) {
    Recorder r(rep, "convolution");
    const auto bern = measures::bernoulli();
    r.guard("bernoulli_moments", [&] {
        const auto conv = mono_convolve(bern, bern);
        const auto model = model_from_measures({bern, bern}, 2);
        double worst = 0.0;
        for (int k = 0; k <= 4; ++k) worst = std::max(worst, std::abs(moment(conv, k) - moments_of_sum(model, k)));
        r.le("bernoulli_vs_matrix_moments", worst, tol.convolution_moment);
    });
    r.guard("mean_additivity", [&] {
        const auto mu = measures::two_point(-0.5, 1.0, 0.3);
        const auto nu = measures::two_point(0.0, 2.0, 0.25);
        r.le("mean_additivity", std::abs(moment(mono_convolve(mu, nu), 1) - moment(mu, 1) - moment(nu, 1)), tol.mean_additivity);
    });
    r.guard("route_agreement", [&] {
        const auto arc = measures::arcsine(0.5);
        r.le("route_l1.bernoulli_arcsine", l1_distance(mono_convolve(bern, arc), mono_convolve_by_composition(bern, arc)),
             tol.route_l1);
        r.le("route_l1.bernoulli_bernoulli",
             l1_distance(mono_convolve(bern, bern), mono_convolve_by_composition(bern, bern)), tol.route_l1);
    });
    r.guard("affinity", [&] {
        const auto m1 = measures::dirac(-1.0), m2 = measures::two_point(0.0, 1.0, 0.5);
        const auto mix = mixture({{0.3, m1}, {0.7, m2}});
        const auto lhs = mono_convolve(mix, bern);
        const auto a = mono_convolve(m1, bern), b = mono_convolve(m2, bern);
        r.le("affinity_l1", l1_distance(lhs, mixture({{0.3, a}, {0.7, b}})), tol.affinity_l1);
    });
    r.guard("associativity", [&] {
        const auto da = measures::dirac(0.4), db = measures::dirac(-0.3);
        r.le("associativity_l1",
             l1_distance(mono_convolve(mono_convolve(da, bern), db), mono_convolve(da, mono_convolve(bern, db))),
             tol.affinity_l1);
    });
    r.guard("noncommutativity", [&] {
        const auto b01 = measures::two_point(0.0, 1.0, 0.5), d1 = measures::dirac(1.0);
        r.ge("third_moment_gap", std::abs(moment(mono_convolve(b01, d1), 3) - moment(mono_convolve(d1, b01), 3)),
             tol.noncommutativity);
    });
}

inline void suite_independence(VerifyReport& rep, const Tolerances& tol, std::mt19937_64& rng) {
    Recorder r(rep, "independence");
    const auto bern = measures::bernoulli();
    const auto two = model_from_measures({bern, bern}, 2);
    const auto three = model_from_measures({measures::two_point(-0.5, 1.0, 0.4), bern, measures::dirac(0.7)}, 2);
    r.guard("conditions", [&] {
        for (const auto& [name, m] : std::vector<std::pair<std::string, const MatrixModel*>>{{"two", &two}, {"three", &three}}) {
            const auto res = check_monotone_independence(*m, 100, rng);
            r.le("condition_a." + name, res.a, tol.independence);
            r.le("condition_b." + name, res.b, tol.independence);
            r.le("H_composition." + name, H_composition_residual(*m, cplx(0.3, 1.0)), tol.independence);
        }
    });
    r.guard("resolvent_identity", [&] {
        r.le("resolvent_identity.2i", resolvent_identity_residual(two, cplx(0.0, 2.0)), tol.resolvent_identity);
        r.le("resolvent_identity.3", resolvent_identity_residual(two, cplx(3.0, 0.0)), tol.resolvent_identity);
        r.le("resolvent_identity.three_factor", resolvent_identity_residual(three, cplx(0.2, 1.0)), tol.resolvent_identity);
    });
    r.guard("conditional_expectation", [&] {
        const CMatrix X = two.factor(0).op, Y = two.factor(1).op;
        double worst = (conditional_E1(two, two.X(0)) - X).norm();
        const CMatrix Y2 = Y * Y;
        worst = std::max(worst, (conditional_E1(two, two.embed(1, Y2)) -
                                 two.factor(1).omega.dot(Y2 * two.factor(1).omega) * CMatrix::Identity(2, 2))
                                    .norm());
        std::uniform_int_distribution<int> len(1, 5), which(0, 1);
        for (int i = 0; i < 100; ++i) {
            CMatrix Z = CMatrix::Identity(two.dim(), two.dim());
            for (int k = len(rng); k > 0; --k) Z = Z * two.X(static_cast<std::size_t>(which(rng)));
            const CMatrix E = conditional_E1(two, Z);
            worst = std::max(worst, std::abs(two.factor(0).omega.dot(E * two.factor(0).omega) - two.state(Z)));
        }
        r.le("conditional_expectation", worst, tol.conditional_expectation);
    });
    r.guard("corollary_T", [&] {
        double worst = 0.0;
        for (const auto& f : {TestFunction::resolvent(cplx(0.0, 2.0)), TestFunction::monomial(2), TestFunction::constant(1.0)})
            worst = std::max(worst, corollary_T_residual(two, f));
        r.le("corollary_T", worst, tol.corollary_T);
    });
    r.guard("trace_failure", [&] {
        r.ge("trace_failure_gap", trace_failure_demo(two, rng).gap, tol.witness_gap);
        double none = 0.0;
        try {
            trace_failure_demo(model_from_measures({bern, measures::dirac(0.5)}, 2), rng);
            none = 1.0;
        } catch (const Error& e) {
            if (e.code() != Errc::NoWitnessFound) throw;
        }
        r.le("trace_failure_dim1_no_witness", none, 0.0);
    });
    r.guard("marginal_fidelity", [&] {
        const auto arc = measures::arcsine(1.0);
        const auto m = model_from_measures({arc, bern}, 4);
        double worst = 0.0;
        CMatrix Xk = CMatrix::Identity(m.dim(), m.dim());
        for (int k = 0; k <= 7; ++k) {
            worst = std::max(worst, std::abs(m.state(Xk) - moment(arc, k)));
            Xk = Xk * m.X(0);
        }
        r.le("marginal_fidelity", worst, tol.marginal_fidelity);
    });
    r.guard("ordering", [&] {
        const auto a = measures::two_point(0.0, 1.0, 0.5), b = measures::dirac(1.0);
        r.ge("ordering_sensitivity", std::abs(moments_of_sum(model_from_measures({a, b}, 2), 3) -
                                              moments_of_sum(model_from_measures({b, a}, 2), 3)),
             tol.noncommutativity);
    });
}

inline void suite_markov(VerifyReport& rep, const Tolerances& tol, std::mt19937_64& rng, std::size_t n_paths) {
    Recorder r(rep, "markov");
    const std::vector<std::pair<std::string, TestFunction>> fs{
        {"x", TestFunction::monomial(1)}, {"x2", TestFunction::monomial(2)}, {"resolvent_2i", TestFunction::resolvent(cplx(0.0, 2.0))}};
    for (const auto& [name, p] : example_pairs()) {
        r.guard("chapman_kolmogorov." + name, [&, &name = name, &p = p] {
            const double x = 0.3;
            double worst = 0.0;
            for (double s : {0.25, 0.5}) {
                const auto K = kernel(p, s, x);
                for (double t : {0.25, 0.5})
                    for (const auto& [fname, f] : fs) {
                        const TestFunction inner = TestFunction::black_box({[&, t, f = f](double y) { return apply_T(p, t, f, y); }, {}, {}});
                        worst = std::max(worst, std::abs(apply_T(p, s + t, f, x) - integrate(K, inner).value));
                    }
            }
            r.le("chapman_kolmogorov." + name, worst, tol.chapman_kolmogorov);
        });
        r.guard("unitality." + name, [&, &name = name, &p = p] {
            ApplyOptions q;
            q.force_quadrature = true;
            double worst = 0.0;
            for (double t : {0.25, 1.0})
                for (double x : {-0.5, 0.7}) worst = std::max(worst, std::abs(apply_T(p, t, TestFunction::constant(1.0), x, q) - 1.0));
            r.le("unitality." + name, worst, tol.normalization);
        });
        r.guard("generator_order." + name, [&, &name = name, &p = p] {
            double order = std::numeric_limits<double>::infinity();
            for (const auto& f : {TestFunction::monomial(2), TestFunction::polynomial({0.0, 0.3, -0.5, 1.0, 0.25})})
                for (double x : {-0.5, 0.0, 0.7}) {
                    auto err = [&](double h) { return std::abs((apply_T(p, h, f, x) - f(x)) / h - script_L(p, f, x)); };
                    order = std::min(order, observed_order(err(1e-2), err(1e-3)));
                }
            r.ge("generator_order." + name, order, tol.generator_order);
        });
    }
    r.guard("generator_pin", [&] {
        const auto bm = pairs::brownian();
        const auto cosf = TestFunction::real_black_box([](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
                                                       [](double x) { return -std::cos(x); });
        double worst = 0.0;
        for (const auto& f : {TestFunction::monomial(2), TestFunction::polynomial({0.0, 0.0, 1.0, 1.0}), cosf})
            worst = std::max(worst, std::abs(script_L(bm, f, 0.0) - 0.5 * f.d2(0.0)));
        for (double x : {-1.0, -0.3, 0.0, 0.4, 1.5}) worst = std::max(worst, std::abs(script_L(bm, TestFunction::monomial(2), x) - 1.0));
        r.le("generator_pin", worst, tol.generator_pin);
    });
    r.guard("joint_moments", [&] {
        const auto bm = pairs::brownian();
        const double s = 0.5, t = 1.0;
        const auto model = model_from_moments({moments_via_contour(bm, s, 7), moments_via_contour(bm, t - s, 7)}, 4);
        const CMatrix Xs = model.X(0), Xt = model.sum();
        const auto paths = sample_path(bm, {s, t}, n_paths, rng);
        double worst = 0.0;
        for (int fk : {1, 2})
            for (int gk : {1, 2}) {
                const double oracle = model.state(matrix_power(Xs, fk) * matrix_power(Xt, gk)).real();
                double sum = 0.0, sum2 = 0.0;
                for (std::size_t i = 0; i < paths.n_paths; ++i) {
                    const double v = std::pow(paths.at(i, 0), fk) * std::pow(paths.at(i, 1), gk);
                    sum += v;
                    sum2 += v * v;
                }
                const double n = static_cast<double>(paths.n_paths);
                const double mean = sum / n;
                const double se = std::sqrt(std::max(sum2 / n - mean * mean, 0.0) / n);
                worst = std::max(worst, std::abs(mean - oracle) / se);
            }
        r.le("joint_moments_standard_errors", worst, tol.mc_sigmas);
    });
}

inline void suite_martingale(VerifyReport& rep, const Tolerances& tol, std::mt19937_64& rng) {
    Recorder r(rep, "martingale");
    const double T = 1.0;
    for (const auto& [name, p] : example_pairs()) {
        r.guard("martingale." + name, [&, &name = name, &p = p] {
            std::uniform_real_distribution<double> u(0.0, T);
            double worst = 0.0;
            for (int i = 0; i < 20; ++i) {
                const cplx z = flow_H(p, random_upper(rng, 2.0, 0.2, 2.0), T);
                double s = u(rng), t = u(rng);
                if (s > t) std::swap(s, t);
                worst = std::max(worst, martingale_residual(p, z, s, t, T));
            }
            r.le("martingale_residual." + name, worst, tol.martingale);
        });
    }
}

inline void suite_errata(VerifyReport& rep, const Tolerances& tol) {
    Recorder r(rep, "errata");
    r.guard("errata", [&] {
        rep.errata = errata_report();
        for (const auto& e : rep.errata) {
            r.le(e.name + ".implemented_gap", e.implemented_gap, tol.errata_consistent);
            r.ge(e.name + ".printed_gap", e.printed_gap, tol.errata_flag);
        }
    });
}

}  // namespace detail

/// Runs one suite by name, or every suite for "all".
inline VerifyReport run_verification(const std::string& suite, const Tolerances& tol = {}, std::uint64_t seed = 0,
                                     std::size_t n_paths = 100000) {
    const auto& names = verify_suites();
    require(suite == "all" || std::find(names.begin(), names.end(), suite) != names.end(), Errc::InvalidArgument,
            "unknown suite '" + suite + "'");
    VerifyReport rep;
    for (std::size_t i = 0; i < names.size(); ++i) {
        const std::string& s = names[i];
        if (suite != "all" && suite != s) continue;
        std::mt19937_64 rng(seed + 1000003ull * i);
        if (s == "measure") detail::suite_measure(rep, tol, rng);
        if (s == "transform") detail::suite_transform(rep, tol, rng);
        if (s == "semigroup") detail::suite_semigroup(rep, tol, rng);
        if (s == "convolution") detail::suite_convolution(rep, tol, rng);
        if (s == "independence") detail::suite_independence(rep, tol, rng);
        if (s == "markov") detail::suite_markov(rep, tol, rng, n_paths);
        if (s == "martingale") detail::suite_martingale(rep, tol, rng);
        if (s == "errata") detail::suite_errata(rep, tol);
    }
    return rep;
}

}  // namespace monolev
