#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cmath>
#include <vector>

#include "tailrisk/errors.hpp"
#include "tailrisk/model.hpp"
#include "tailrisk/random.hpp"
#include "tailrisk/tails.hpp"

using namespace tailrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Kolmogorov-Smirnov distance of a sample against a continuous CDF.
template <class Cdf>
double ks_distance(std::vector<double> xs, Cdf cdf) {
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double dmax = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double f = cdf(xs[i]);
        dmax = std::max({dmax, (i + 1) / n - f, f - i / n});
    }
    return dmax;
}

double sphere_marginal_cdf(int d, double x) {
    const double h = 0.5 * (d - 1);
    return boost::math::ibeta(h, h, 0.5 * (1.0 + x));
}

}  // namespace

TEST_CASE("streams are reproducible and distinct") {
    RngStream a(42, 7), b(42, 7), c(42, 8), e(43, 7);
    bool differs_stream = false, differs_seed = false;
    for (int k = 0; k < 100; ++k) {
        const auto x = a();
        CHECK(x == b());
        differs_stream = differs_stream || x != c();
        differs_seed = differs_seed || x != e();
    }
    CHECK(differs_stream);
    CHECK(differs_seed);

    RngStream n1(1, 1), n2(1, 1);
    for (int k = 0; k < 11; ++k) CHECK(n1.normal() == n2.normal());
}

TEST_CASE("uniform stays inside the open unit interval") {
    RngStream rng(3, 3);
    for (int k = 0; k < 100000; ++k) {
        const double u = rng.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
    }
}

TEST_CASE("normal draws: mean, variance, KS") {
    RngStream rng(17, 0);
    const int n = 1'000'000;
    std::vector<double> xs(n);
    normal_vector(rng, xs);
    double s = 0, s2 = 0;
    for (double x : xs) {
        s += x;
        s2 += x * x;
    }
    const double mean = s / n;
    CHECK(std::abs(mean) < 4e-3);
    CHECK_THAT(s2 / n - mean * mean, WithinRel(1.0, 0.01));
    xs.resize(100000);
    CHECK(ks_distance(xs, normal_cdf) < 1.95 / std::sqrt(1e5));
}

TEST_CASE("sphere uniform vectors") {
    RngStream rng(5, 1);
    const int d = 10, n = 1'000'000;
    double s = 0, s2 = 0;
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd u = sphere_uniform(rng, d);
        if (k < 1000) CHECK_THAT(u.norm(), WithinAbs(1.0, 1e-15));
        s += u[0];
        s2 += u[0] * u[0];
    }
    CHECK(std::abs(s / n) < 4 * std::sqrt(1.0 / d / n));
    CHECK_THAT(s2 / n, WithinRel(1.0 / d, 0.01));
}

TEST_CASE("stratification index") {
    RngStream rng(8, 8);
    const std::vector<double> w1{1, 0, 0};
    for (int k = 0; k < 1000; ++k) CHECK(stratification_index(rng, w1) == 0);

    const std::vector<double> w2{1, 1};
    const CategoricalSampler two(w2);
    const int n = 1'000'000;
    int hits = 0;
    for (int k = 0; k < n; ++k) hits += two(rng) == 0;
    CHECK(std::abs(hits / double(n) - 0.5) < 4 * std::sqrt(0.25 / n));

    const std::vector<double> zero{0, 0};
    CHECK_THROWS_AS(CategoricalSampler(zero), NumericalError);
    const std::vector<double> neg{1, -1};
    CHECK_THROWS_AS(CategoricalSampler(neg), ValidationError);
}

TEST_CASE("stratification on the benchmark model marginals") {
    const ModelSpec m = benchmark_model(0.0);
    std::vector<double> w;
    for (int i = 0; i < 10; ++i) w.push_back(marginal_tail(m, i, 20000.0));
    double total = 0;
    for (double x : w) total += x;
    const double p = w[9] / total;
    const CategoricalSampler s(w);
    RngStream rng(1, 9);
    const int n = 1'000'000;
    int hits = 0;
    for (int k = 0; k < n; ++k) hits += s(rng) == 9;
    CHECK(std::abs(hits / double(n) - p) < 4 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("importance sampling sphere component") {
    RngStream rng(21, 0);
    const int n = 1'000'000;
    SECTION("a = b = 1 is uniform") {
        double s = 0;
        for (int k = 0; k < n; ++k) s += sphere_component_is(rng, 1, 1).value;
        CHECK(std::abs(s / n) < 4 * std::sqrt(1.0 / 3.0 / n));
    }
    SECTION("a = 10, b = 0.5 mass near the pole") {
        const double oracle = 0.68284842453445466693;
        int hits = 0;
        for (int k = 0; k < n; ++k) {
            const auto c = sphere_component_is(rng, 10, 0.5);
            CHECK_THAT(c.one_minus + c.one_plus, WithinRel(2.0, 1e-14));
            hits += c.value > 0.9;
        }
        CHECK(std::abs(hits / double(n) - oracle) < 4 * std::sqrt(oracle * (1 - oracle) / n));
    }
    SECTION("a = b = 2 moments") {
        double s = 0, s2 = 0;
        for (int k = 0; k < n; ++k) {
            const double x = sphere_component_is(rng, 2, 2).value;
            s += x;
            s2 += x * x;
        }
        CHECK(std::abs(s / n) < 4 * std::sqrt(0.2 / n));
        CHECK_THAT(s2 / n - (s / n) * (s / n), WithinRel(0.2, 0.02));
    }
}

TEST_CASE("importance weights reproduce the sphere measure") {
    // Sphere mass of (0.5, 1) for d = 5 is 5/32.
    const int d = 5, n = 1'000'000;
    const double oracle = 0.15625;
    for (double b : {0.3, 1.0, 4.34}) {
        RngStream rng(4, static_cast<std::uint64_t>(b * 100));
        double s = 0, s2 = 0;
        for (int k = 0; k < n; ++k) {
            const auto c = sphere_component_is(rng, 10, b);
            double z = 0;
            if (c.value > 0.5 && c.value < 1.0)
                z = std::exp(log_sphere_density(d, c.one_minus, c.one_plus) -
                             log_is_density(10, b, c.one_minus, c.one_plus));
            s += z;
            s2 += z * z;
        }
        const double mean = s / n, se = std::sqrt((s2 / n - mean * mean) / n);
        CHECK(std::abs(mean - oracle) < 4 * se);
    }
}

TEST_CASE("conditional sphere completion") {
    RngStream rng(12, 0);
    SECTION("d = 2, theta = 0 gives +-1 evenly") {
        const int n = 100000;
        int plus = 0;
        for (int k = 0; k < n; ++k) {
            const Eigen::VectorXd v = conditional_sphere_rest(rng, 2, 0.0, 0);
            CHECK(v[0] == 0.0);
            CHECK_THAT(std::abs(v[1]), WithinAbs(1.0, 1e-15));
            plus += v[1] > 0;
        }
        CHECK(std::abs(plus / double(n) - 0.5) < 4 * std::sqrt(0.25 / n));
    }
    SECTION("unit norm and fixed slot") {
        for (int k = 0; k < 1000; ++k) {
            const Eigen::VectorXd v = conditional_sphere_rest(rng, 6, 0.73, 4);
            CHECK(v[4] == 0.73);
            CHECK_THAT(v.norm(), WithinAbs(1.0, 1e-14));
        }
    }
    SECTION("domain") {
        CHECK_THROWS_AS(conditional_sphere_rest(rng, 3, 1.0, 0), DomainError);
        CHECK_THROWS_AS(conditional_sphere_rest(rng, 3, -1.5, 0), DomainError);
    }
    SECTION("composition with the true marginal is sphere uniform") {
        for (int d : {3, 5}) {
            const double h = 0.5 * (d - 1);
            const int n = 100000;
            std::vector<std::vector<double>> coords(d, std::vector<double>(n));
            for (int k = 0; k < n; ++k) {
                const double theta = sphere_component_is(rng, h, h).value;
                const Eigen::VectorXd v = conditional_sphere_rest(rng, d, theta, 1);
                for (int i = 0; i < d; ++i) coords[i][k] = v[i];
            }
            for (int i = 0; i < d; ++i)
                CHECK(ks_distance(coords[i], [d](double x) { return sphere_marginal_cdf(d, x); }) <
                      1.95 / std::sqrt(double(n)));
        }
    }
}
