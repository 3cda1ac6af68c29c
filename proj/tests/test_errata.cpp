#include <catch2/catch_amalgamated.hpp>

#include "monolev/errata.hpp"

using namespace monolev;
using Catch::Approx;

namespace {

const ErratumEntry& entry(const std::vector<ErratumEntry>& r, const std::string& name) {
    for (const auto& e : r)
        if (e.name == name) return e;
    FAIL("missing entry " << name);
    return r.front();
}

}  // namespace

TEST_CASE("implemented formulas match the derivative of the semigroup", "[errata]") {
    const auto r = errata_report();
    REQUIRE(r.size() == 6);
    for (const auto& e : r) CHECK(e.implemented_gap <= 1e-5);
}

TEST_CASE("printed formulas are flagged", "[errata]") {
    const auto r = errata_report();
    for (const auto& e : r) CHECK(e.printed_gap > 1e-3);
    // For (0, delta_0) the printed integrand is the negative of the correct one.
    const auto& bm = entry(r, "brownian_generator");
    CHECK(bm.ratio.real() == Approx(-1.0).margin(1e-6));
    CHECK(std::abs(bm.ratio.imag()) <= 1e-9);
}

TEST_CASE("Brownian generator by hand", "[errata]") {
    // f = 0.3x - 0.5x^2 + x^3 + x^4/4: (f(0) - f(x) + x f'(x)) / x^2 = -0.5 + 2x + 0.75x^2
    const auto f = TestFunction::polynomial({0.0, 0.3, -0.5, 1.0, 0.25});
    const double x = 0.7;
    const double expect = -0.5 + 2.0 * x + 0.75 * x * x;
    CHECK(std::abs(script_L(pairs::brownian(), f, x) - expect) <= 1e-12);
    CHECK(std::abs(generator_oracle(pairs::brownian(), f, x) - expect) <= 1e-5);
    CHECK(std::abs(printed::brownian_generator(f, x) + expect) <= 1e-12);
}
