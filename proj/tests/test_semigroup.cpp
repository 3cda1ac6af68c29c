#include <catch2/catch_amalgamated.hpp>

#include "monolev/semigroup.hpp"
#include "support.hpp"

using namespace monolev;
using Catch::Approx;

namespace {

std::vector<CharacteristicPair> example_pairs() { return {pairs::drift(0.7), pairs::brownian(), pairs::poisson(1.0)}; }

bool has_code(const std::function<void()>& f, Errc c) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == c;
    }
    return false;
}

}  // namespace

TEST_CASE("Pick function examples", "[semigroup]") {
    CHECK(eval_A(pairs::drift(0.3), cplx(1.0, 2.0)) == cplx(0.3, 0.0));
    const cplx a = eval_A(pairs::brownian(), cplx(0.0, 1.0));
    CHECK(std::abs(a - cplx(0.0, 1.0)) < 1e-15);
    // -0.5 + 0.5 / (1 - 2i)
    const cplx p = eval_A(pairs::poisson(1.0), cplx(0.0, 2.0));
    CHECK(std::abs(p - cplx(-0.4, 0.2)) < 1e-15);
}

TEST_CASE("trivial pair is rejected", "[semigroup]") {
    CHECK(has_code([] { make_characteristic_pair(0.0, std::nullopt); }, Errc::InvalidArgument));
}

TEST_CASE("flow closed forms", "[semigroup]") {
    testing::Gen g(1);
    for (int i = 0; i < 50; ++i) {
        const cplx z = g.upper();
        const double t = g.uniform(0.01, 2.0);
        CHECK(std::abs(flow_H(pairs::brownian(), z, t) - testing::upper_sqrt(z * z - 2.0 * t)) <= 1e-8);
        CHECK(std::abs(flow_H(pairs::drift(0.7), z, t) - (z + 0.7 * t)) <= 1e-10);
        CHECK(std::abs(inverse_flow_H(pairs::brownian(), z, t) - testing::upper_sqrt(z * z + 2.0 * t)) <= 1e-8);
        CHECK(std::abs(inverse_flow_H(pairs::drift(0.7), z, t) - (z - 0.7 * t)) <= 1e-10);
    }
    CHECK(flow_H(pairs::brownian(), cplx(0.2, 0.3), 0.0) == cplx(0.2, 0.3));
}

TEST_CASE("inverse flow leaves the image", "[semigroup]") {
    // H_1(C+) for the Brownian pair excludes points close to the real axis.
    CHECK(has_code([] { inverse_flow_H(pairs::brownian(), cplx(0.0, 1e-3), 1.0); }, Errc::OutsideDomain));
}

TEST_CASE("forward and inverse flows round trip", "[semigroup][property]") {
    testing::Gen g(2);
    for (const auto& p : example_pairs())
        for (int i = 0; i < 20; ++i) {
            const cplx z = g.upper();
            const double t = g.uniform(0.05, 1.0);
            CHECK(std::abs(inverse_flow_H(p, flow_H(p, z, t), t) - z) <= 1e-8);
        }
}

TEST_CASE("semigroup law and monotone Im along trajectories", "[semigroup][property]") {
    testing::Gen g(3);
    for (const auto& p : example_pairs())
        for (int i = 0; i < 20; ++i) {
            const cplx z = g.upper();
            const double s = g.uniform(0.01, 1.0), t = g.uniform(0.01, 1.0);
            CHECK(std::abs(flow_H(p, z, s + t) - flow_H(p, flow_H(p, z, t), s)) <= 1e-7);
            FlowOptions fo;
            fo.record_trajectory = true;
            const auto tr = flow_trajectory(p, z, t, fo).trajectory;
            for (std::size_t k = 1; k < tr.size(); ++k) CHECK(tr[k].imag() >= tr[k - 1].imag() - 1e-12);
        }
}

TEST_CASE("flows are injective at desk scale", "[semigroup][property]") {
    testing::Gen g(4);
    for (const auto& p : example_pairs())
        for (int i = 0; i < 100; ++i) {
            const cplx z1 = g.upper(), z2 = g.upper();
            CHECK(std::abs(flow_H(p, z1, 0.5) - flow_H(p, z2, 0.5)) >= 1e-9 * std::abs(z1 - z2));
        }
}

TEST_CASE("generator consistency is first order", "[semigroup]") {
    for (const auto& p : {pairs::brownian(), pairs::poisson(1.0)}) {
        const cplx z(0.3, 1.0);
        const double e3 = std::abs((flow_H(p, z, 1e-3) - z) / 1e-3 - eval_A(p, z));
        const double e4 = std::abs((flow_H(p, z, 1e-4) - z) / 1e-4 - eval_A(p, z));
        CHECK(std::log10(e3 / e4) >= 0.9);
        CHECK(e3 <= 10.0 * 1e-3);
    }
}

TEST_CASE("Abel residual", "[semigroup]") {
    CHECK(abel_residual(pairs::drift(0.7), cplx(0.0, 1.0), 1.0) <= 1e-12);
    CHECK(abel_residual(pairs::brownian(), cplx(0.0, 1.0), 1.0) <= 1e-8);
    CHECK(abel_residual(pairs::poisson(1.0), cplx(0.0, 2.0), 0.5) <= 1e-6);
    testing::Gen g(5);
    for (const auto& p : example_pairs())
        for (double t : {0.25, 1.0})
            for (int i = 0; i < 5; ++i) CHECK(abel_residual(p, g.upper(), t) <= 1e-6);
}

TEST_CASE("Abel residual detects a wrong endpoint", "[semigroup]") {
    // Integrating 1/A = -z from z to H_t(z) gives (z^2 - w^2)/2 = t; a perturbed time misses it.
    const cplx z(0.0, 1.0);
    const cplx w = flow_H(pairs::brownian(), z, 1.1);
    CHECK(std::abs(0.5 * (z * z - w * w) - 1.0) == Approx(0.1).margin(1e-8));
}

TEST_CASE("marginals", "[semigroup]") {
    const auto d0 = marginal(pairs::poisson(1.0), 0.0);
    REQUIRE(d0.atoms().size() == 1);
    CHECK(d0.atoms()[0].position == 0.0);

    const auto drift = marginal(pairs::drift(0.7), 2.0);
    REQUIRE(drift.atoms().size() == 1);
    CHECK(!drift.has_density());
    CHECK(drift.atoms()[0].position == Approx(-1.4).margin(1e-6));

    const auto bm = marginal(pairs::brownian(), 1.0);
    CHECK(bm.atoms().empty());
    CHECK(moment(bm, 2) == Approx(1.0).margin(1e-4));
    const auto& d = *bm.density();
    double worst = 0.0;
    for (std::size_t j = 0; j < d.size(); ++j)
        if (std::abs(d.node(j)) <= 0.95 * std::sqrt(2.0)) worst = std::max(worst, std::abs(d.values[j] - testing::arcsine_pdf(d.node(j), 1.0)));
    CHECK(worst <= 2e-3);
}

TEST_CASE("Poisson marginal keeps an atom at the origin", "[semigroup]") {
    // Near w = 0, A(w) = (lambda/2) w / (1 - w) ~ (lambda/2) w, so H_t(z) ~ e^{lambda t/2} z and
    // the atom at 0 has mass e^{-lambda t/2}.
    for (double t : {0.25, 1.0}) {
        const auto mu = marginal(pairs::poisson(1.0), t);
        double m0 = 0.0;
        for (const auto& a : mu.atoms())
            if (std::abs(a.position) < 1e-6) m0 += a.mass;
        CHECK(m0 == Approx(std::exp(-0.5 * t)).margin(1e-6));
        CHECK(moment(mu, 1) == Approx(0.5 * t).margin(1e-4));
    }
}

TEST_CASE("L_apply case formula", "[semigroup]") {
    const auto x = TestFunction::monomial(1), x2 = TestFunction::monomial(2), x3 = TestFunction::monomial(3);
    const auto one = TestFunction::constant(1.0);
    for (const auto& p : example_pairs()) {
        CHECK(std::abs(L_apply(p, one)) == 0.0);
        CHECK(L_apply(p, x).real() == Approx(-p.a).margin(1e-15));
        // L(x^k) = \int x^{k-2} drho for k >= 2
        const double rho0 = p.rho_mass();
        double rho1 = 0.0;
        if (p.rho)
            for (const auto& a : p.rho->atoms()) rho1 += a.mass * a.position;
        CHECK(L_apply(p, x2).real() == Approx(rho0).margin(1e-14));
        CHECK(L_apply(p, x3).real() == Approx(rho1).margin(1e-14));
    }
}

TEST_CASE("L is the derivative of the semigroup at zero", "[semigroup]") {
    const auto f = TestFunction::polynomial({0.0, 1.0, 1.0, 1.0, 1.0});
    for (const auto& p : {pairs::brownian(), pairs::poisson(1.0)}) {
        auto err = [&](double h) {
            const auto m = moments_via_contour(p, h, 4);
            return std::abs((m[1] + m[2] + m[3] + m[4]) / h - L_apply(p, f).real());
        };
        CHECK(std::log10(err(1e-2) / err(1e-3)) >= 0.9);
    }
}

TEST_CASE("Schurmann identities", "[semigroup]") {
    const auto x = TestFunction::monomial(1), x2 = TestFunction::monomial(2), one = TestFunction::constant(1.0);
    for (const auto& p : {pairs::brownian(), pairs::poisson(2.0)}) {
        CHECK(std::abs(L_apply(p, x2) - p.rho_mass()) <= 1e-12);
        const auto r = schurmann_verify(p, x, x);
        CHECK(r.coboundary <= 1e-12);
        const auto r2 = schurmann_verify(p, x, x2);
        CHECK(r2.cocycle <= 1e-12);
        CHECK(r2.coboundary <= 1e-12);
        CHECK(schurmann_verify(p, x, one).cocycle == 0.0);
    }
}

TEST_CASE("Schurmann identities on random pairs", "[semigroup][property]") {
    testing::Gen g(6);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Atom> atoms;
        for (int i = g.integer(1, 4); i > 0; --i) atoms.push_back({g.uniform(-1.0, 1.0), g.uniform(0.1, 1.0)});
        if (g.uniform() < 0.5) atoms.push_back({0.0, g.uniform(0.1, 1.0)});
        const auto p = make_characteristic_pair(g.uniform(-1.0, 1.0), make_measure(atoms, std::nullopt, false));
        const auto f = TestFunction::polynomial({g.uniform(-1, 1), g.uniform(-1, 1), g.uniform(-1, 1)});
        const auto h = TestFunction::polynomial({g.uniform(-1, 1), g.uniform(-1, 1)});
        const auto r = schurmann_verify(p, f, h);
        CHECK(r.cocycle <= 1e-12);
        CHECK(r.coboundary <= 1e-12);
    }
}

TEST_CASE("contour moments", "[semigroup]") {
    const auto m = moments_via_contour(pairs::brownian(), 1.0, 6);
    for (int k = 0; k <= 6; ++k) CHECK(m[static_cast<std::size_t>(k)] == Approx(testing::arcsine_moment(k, 1.0)).margin(1e-4));
    CHECK(moment_via_contour(pairs::drift(0.7), 1.5, 1) == Approx(-1.05).margin(1e-8));
    CHECK(has_code([] { moments_via_contour(pairs::brownian(), 1.0, 17); }, Errc::OrderTooHigh));
    ContourOptions tiny;
    tiny.radius = 0.5;
    CHECK(has_code([&] { moments_via_contour(pairs::brownian(), 1.0, 2, tiny); }, Errc::RadiusTooSmall));
}

TEST_CASE("transition polynomial matches the Brownian closed form", "[semigroup]") {
    // T_t x^2 (y) = y^2 + t
    const auto c = transition_polynomial(pairs::brownian(), 0.7, 2);
    CHECK(c[2][0] == Approx(0.7).margin(1e-10));
    CHECK(c[2][1] == Approx(0.0).margin(1e-10));
    CHECK(c[2][2] == Approx(1.0).margin(1e-10));
}
