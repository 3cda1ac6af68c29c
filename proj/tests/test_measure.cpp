#include <catch2/catch_amalgamated.hpp>

#include "monolev/measure.hpp"
#include "support.hpp"

using namespace monolev;
using Catch::Approx;

TEST_CASE("make_measure normalizes within tolerance and rejects bad input", "[measure]") {
    const auto mu = make_measure({{0.0, 0.5 + 4e-7}, {1.0, 0.5}});
    CHECK(total_mass(mu) == Approx(1.0).margin(1e-15));
    CHECK_THROWS_MATCHES(make_measure({{0.0, 0.5}, {1.0, 0.4}}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) { return e.code() == Errc::NotProbability; }));
    CHECK_THROWS_AS(make_measure({{0.0, -0.1}}, std::nullopt, false), Error);
    CHECK_THROWS_AS(make_measure({}, std::nullopt, false), Error);
    CHECK_THROWS_AS(make_measure({}, DensityGrid{1.0, 0.0, {1.0, 1.0}}, false), Error);
}

TEST_CASE("moment zero is the total mass", "[measure]") {
    const auto arc = measures::arcsine(1.0);
    CHECK(moment(arc, 0) == total_mass(arc));
    const auto rho = make_measure({{0.5, 2.0}}, DensityGrid{-1.0, 1.0, {0.0, 1.0, 0.0}}, false);
    CHECK(moment(rho, 0) == total_mass(rho));
    CHECK(total_mass(rho) == Approx(3.0).margin(1e-12));
}

TEST_CASE("integrate examples", "[measure]") {
    CHECK(integrate(measures::bernoulli(), TestFunction::constant(1.0)).value.real() == Approx(1.0).margin(1e-6));
    CHECK(integrate(measures::arcsine(0.5), TestFunction::monomial(2)).value.real() == Approx(0.5).margin(1e-3));
    const cplx r = integrate(measures::dirac(0.0), TestFunction::resolvent(cplx(0.0, 2.0))).value;
    CHECK(r.real() == Approx(0.0).margin(1e-15));
    CHECK(r.imag() == Approx(-0.5).margin(1e-15));
}

TEST_CASE("arcsine table reproduces closed-form moments", "[measure]") {
    for (double t : {0.5, 1.0, 2.0}) {
        const auto arc = measures::arcsine(t);
        for (int k = 0; k <= 6; ++k) CHECK(moment(arc, k) == Approx(testing::arcsine_moment(k, t)).margin(2e-3 * std::pow(2 * t, k / 2.0)));
    }
}

TEST_CASE("symmetric measures have vanishing odd moments", "[measure][property]") {
    testing::Gen g(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Atom> atoms;
        for (int i = g.integer(1, 4); i > 0; --i) {
            const double x = g.uniform(0.0, 2.0), m = g.uniform(0.1, 1.0);
            atoms.push_back({x, m});
            atoms.push_back({-x, m});
        }
        std::optional<DensityGrid> d;
        if (g.uniform() < 0.5) {
            const double r = g.uniform(0.5, 2.0);
            DensityGrid grid{-r, r, std::vector<double>(201)};
            for (std::size_t j = 0; j < grid.size(); ++j) grid.values[j] = std::exp(-grid.node(j) * grid.node(j));
            d = grid;
        }
        const auto mu = make_measure(atoms, d, false);
        const double scale = mu.support_bound();
        for (int k : {1, 3, 5}) CHECK(std::abs(moment(mu, k)) <= 1e-9 * std::pow(std::max(scale, 1.0), k) * total_mass(mu));
    }
}

TEST_CASE("sampling", "[measure]") {
    std::mt19937_64 rng(5);
    const auto s = sample(measures::dirac(0.25), 5, rng);
    for (double x : s) CHECK(x == 0.25);

    const std::size_t n = 100000;
    const double bound = 2.0 / std::sqrt(static_cast<double>(n));
    const auto arc = measures::arcsine(1.0);
    const auto xs = sample(arc, n, rng);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    CHECK(std::abs(mean) <= 3.0 * 1.0 / std::sqrt(static_cast<double>(n)));
    CHECK(kolmogorov_distance(xs, arc) <= bound);

    const auto bern = measures::bernoulli();
    const auto bs = sample(bern, n, rng);
    double plus = 0.0;
    for (double x : bs) plus += x == 1.0 ? 1.0 : 0.0;
    CHECK(std::abs(plus / static_cast<double>(n) - 0.5) <= 3.0 / (2.0 * std::sqrt(static_cast<double>(n))));
    CHECK(kolmogorov_distance(bs, bern) <= bound);
    CHECK(kolmogorov_distance(sample(measures::dirac(1.0), n, rng), measures::dirac(1.0)) <= bound);

    CHECK_THROWS_AS(sample(make_measure({{0.0, 2.0}}, std::nullopt, false), 3, rng), Error);
}

TEST_CASE("sampling is deterministic given the seed", "[measure]") {
    std::mt19937_64 a(42), b(42);
    CHECK(sample(measures::arcsine(1.0), 1000, a) == sample(measures::arcsine(1.0), 1000, b));
}

TEST_CASE("inverse CDF is monotone and consistent with the CDF", "[measure][property]") {
    testing::Gen g(3);
    for (int trial = 0; trial < 20; ++trial) {
        const auto mu = mixture({{0.4, g.atomic(g.integer(1, 5))}, {0.6, g.atomic(g.integer(1, 5))}});
        const InverseCdf inv(mu);
        double prev = -1e300;
        for (int i = 1; i < 100; ++i) {
            const double q = inv.quantile(i / 100.0);
            CHECK(q >= prev);
            prev = q;
            CHECK(inv.cdf(q) >= i / 100.0 - 1e-12);
        }
    }
}

TEST_CASE("l1 distance of shifted Diracs is the shift", "[measure]") {
    CHECK(l1_distance(measures::dirac(0.0), measures::dirac(0.3)) == Approx(0.3).epsilon(1e-9));
    CHECK(l1_distance(measures::arcsine(1.0), measures::arcsine(1.0)) == 0.0);
}
