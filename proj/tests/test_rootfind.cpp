#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "tailrisk/errors.hpp"
#include "tailrisk/rootfind.hpp"

using namespace tailrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ExpSum random_expsum(std::mt19937_64& gen) {
    std::uniform_int_distribution<int> terms(1, 10);
    std::uniform_real_distribution<double> slope(-3, 3), coeff(0, 10);
    const int d = terms(gen);
    std::vector<double> c(d), s(d);
    for (int i = 0; i < d; ++i) {
        do c[i] = coeff(gen);
        while (!(c[i] > 0.0));
        s[i] = slope(gen);
    }
    return ExpSum(c, s);
}

}  // namespace

TEST_CASE("single exponential") {
    const ExpSum h({1.0}, {1.0});
    const auto set = exceedance_set(h, 50.0);
    REQUIRE(set.size() == 1);
    CHECK_THAT(set.intervals()[0].lo, WithinRel(std::log(50.0), 1e-12));
    CHECK(set.intervals()[0].hi == kInf);
}

TEST_CASE("quadratic in e^x") {
    const ExpSum h({1.0, 1.0}, {1.0, 2.0});
    const auto set = exceedance_set(h, 6.0);
    REQUIRE(set.size() == 1);
    CHECK_THAT(set.intervals()[0].lo, WithinRel(std::log(2.0), 1e-12));
}

TEST_CASE("cosh-like sum has two branches") {
    const ExpSum h({1.0, 1.0}, {-1.0, 1.0});
    const double r = std::log((3 + std::sqrt(5.0)) / 2);
    const auto set = exceedance_set(h, 3.0);
    REQUIRE(set.size() == 2);
    CHECK(set.intervals()[0].lo == -kInf);
    CHECK_THAT(set.intervals()[0].hi, WithinRel(-r, 1e-12));
    CHECK_THAT(set.intervals()[1].lo, WithinRel(r, 1e-12));
    CHECK(set.intervals()[1].hi == kInf);
    for (double x = -3; x < 3; x += 1e-4) {
        if (std::abs(std::abs(x) - r) < 1e-6) continue;
        CHECK(set.contains(x) == (h(x) > 3.0));
    }

    const auto b = psi_bounds(h, 3.0);
    REQUIRE(b.lower);
    REQUIRE(b.upper);
    CHECK_THAT(*b.lower, WithinRel(-r, 1e-12));
    CHECK_THAT(*b.upper, WithinRel(r, 1e-12));
    CHECK_FALSE(b.everywhere);
}

TEST_CASE("non-negative domain") {
    const ExpSum h({1.0, 1.0}, {-1.0, 1.0});
    const auto set = exceedance_set(h, 3.0, Domain::NonNegative);
    REQUIRE(set.size() == 1);
    CHECK(set.intervals()[0].lo > 0.0);
    const auto all = exceedance_set(ExpSum({4.0}, {-1.0}), 3.0, Domain::NonNegative);
    REQUIRE(all.size() == 1);
    CHECK(all.intervals()[0].lo == 0.0);
    CHECK_THAT(all.intervals()[0].hi, WithinRel(std::log(4.0 / 3.0), 1e-12));
}

TEST_CASE("psi bounds by slope sign") {
    SECTION("all positive") {
        const auto b = psi_bounds(ExpSum({1, 2}, {0.5, 1.5}), 10.0);
        CHECK_FALSE(b.lower);
        CHECK(b.upper);
    }
    SECTION("all negative") {
        const auto b = psi_bounds(ExpSum({1, 2}, {-0.5, -1.5}), 10.0);
        CHECK(b.lower);
        CHECK_FALSE(b.upper);
    }
    SECTION("minimum above level covers the line") {
        const ExpSum h({1, 1}, {-1, 1});
        const auto b = psi_bounds(h, 1.5);
        CHECK(b.everywhere);
        const auto set = exceedance_set(h, 1.5);
        REQUIRE(set.size() == 1);
        CHECK(set.intervals()[0].lo == -kInf);
        CHECK(set.intervals()[0].hi == kInf);
        for (double x = -5; x < 5; x += 1e-4) CHECK(h(x) > 1.5);
    }
}

TEST_CASE("zero slopes fold into the level") {
    const ExpSum h({2.0, 1.0}, {0.0, 1.0});
    const auto set = exceedance_set(h, 5.0);
    REQUIRE(set.size() == 1);
    CHECK_THAT(set.intervals()[0].lo, WithinRel(std::log(3.0), 1e-12));
    CHECK(exceedance_set(ExpSum({2.0}, {0.0}), 5.0).empty());
    CHECK(exceedance_set(ExpSum({7.0}, {0.0}), 5.0).size() == 1);
}

TEST_CASE("huge arguments stay finite in log space") {
    const ExpSum h = ExpSum::from_log_coeffs({-20.0, 0.0}, {40.0, -3.0});
    const double level = 5e5;
    const auto set = exceedance_set(h, level);
    REQUIRE_FALSE(set.empty());
    for (const auto& iv : set.intervals()) {
        for (double e : {iv.lo, iv.hi})
            if (std::isfinite(e)) CHECK(std::abs(h.log_value(e) - std::log(level)) <= 1e-8);
    }
}

TEST_CASE("random instances agree with a grid scan") {
    std::mt19937_64 gen(77);
    for (int rep = 0; rep < 100; ++rep) {
        const ExpSum h = random_expsum(gen);
        const double level = std::exp(std::uniform_real_distribution<double>(-1, 6)(gen));
        const auto set = exceedance_set(h, level);
        REQUIRE(set.size() <= 2);
        std::vector<double> ends;
        for (const auto& iv : set.intervals()) {
            for (double e : {iv.lo, iv.hi}) {
                if (!std::isfinite(e)) continue;
                ends.push_back(e);
                CHECK(std::abs(h(e) - level) <= 1e-8 * level);
            }
        }
        for (double x = -50; x <= 50; x += 1e-2) {
            bool near = false;
            for (double e : ends) near = near || std::abs(x - e) < 1e-6;
            if (!near) REQUIRE(set.contains(x) == (h(x) > level));
        }
    }
}

TEST_CASE("raising the level shrinks the set") {
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 200; ++rep) {
        const ExpSum h = random_expsum(gen);
        const double lo = std::exp(std::uniform_real_distribution<double>(-1, 4)(gen));
        const auto a = exceedance_set(h, lo);
        const auto b = exceedance_set(h, lo * 1.7);
        CHECK(b.subset_of(a));
    }
}

TEST_CASE("interval set basics") {
    const auto s = IntervalSet::pair({-kInf, -1}, {2, kInf});
    CHECK(s.contains(-5));
    CHECK_FALSE(s.contains(0));
    CHECK_FALSE(s.contains(-1));
    CHECK(s.contains(2));
    const auto cut = s.intersect({-3, 3});
    REQUIRE(cut.size() == 2);
    CHECK(cut.intervals()[0].lo == -3);
    CHECK(cut.intervals()[1].hi == 3);
    CHECK(IntervalSet::pair({0, 2}, {1, 3}).size() == 1);
    CHECK(IntervalSet::single({1, 1}).empty());
}

TEST_CASE("expsum rejects non-positive coefficients") {
    CHECK_THROWS_AS(ExpSum({1.0, 0.0}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(ExpSum({1.0}, {1.0, 2.0}), ValidationError);
}
