#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "tailrisk/errors.hpp"
#include "tailrisk/harness.hpp"

using namespace tailrisk;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

RunStats strip_timing(RunStats s) {
    s.wall_time = s.time_per_5e5 = 0.0;
    s.efficiency = std::isnan(s.efficiency) ? 0.0 : (s.estimator.method == Method::CMC ? s.efficiency : 0.0);
    return s;
}

bool same(const RunStats& a, const RunStats& b) {
    return a.estimator == b.estimator && a.u == b.u && a.n == b.n && a.mean == b.mean &&
           a.per_rep_std == b.per_rep_std && a.cv == b.cv && a.se_of_mean == b.se_of_mean &&
           a.failures == b.failures && a.clamped == b.clamped && a.heuristic == b.heuristic;
}

ModelSpec pair_model() {
    ModelSpec m;
    m.lambda = Eigen::VectorXd::Ones(2);
    m.beta = Eigen::VectorXd::Ones(2);
    m.sigma = common_correlation(2, 0.5);
    m.radial = RadialLaw::chi_root(2);
    return m;
}

}  // namespace

TEST_CASE("moments merge like one pass") {
    Moments all, a, b;
    for (int k = 0; k < 1000; ++k) {
        const double x = std::sin(k * 0.37) * 3 + k * 1e-3;
        all.push(x);
        (k < 400 ? a : b).push(x);
    }
    a.merge(b);
    CHECK(a.count() == all.count());
    CHECK_THAT(a.mean(), WithinRel(all.mean(), 1e-13));
    CHECK_THAT(a.variance(), WithinRel(all.variance(), 1e-12));
    Moments empty;
    empty.merge(all);
    CHECK(empty == all);
}

TEST_CASE("constant estimator") {
    const RunOptions opts{1, 1};
    const RunStats s = run(pair_model(), 0.0, EstimatorKind{Method::CMC}, 5000, opts);
    CHECK(s.mean == 1.0);
    CHECK(s.per_rep_std == 0.0);
    CHECK(s.cv == 0.0);
    CHECK(s.efficiency == 1.0);
    CHECK_THROWS_AS(run(pair_model(), 10.0, EstimatorKind{Method::CMC}, 1, opts), ValidationError);
}

TEST_CASE("results do not depend on the worker count") {
    const auto ctx = make_context(benchmark_model(0.4), 40000.0);
    for (auto method : {Method::MAK, Method::RN, Method::CMC}) {
        const EstimatorKind k{method};
        const RunStats one = run(ctx, k, 10'000, RunOptions{5, 1});
        const RunStats four = run(ctx, k, 10'000, RunOptions{5, 4});
        const RunStats three = run(ctx, k, 10'000, RunOptions{5, 3});
        CHECK(same(one, four));
        CHECK(same(one, three));
    }
}

TEST_CASE("a merged run equals the full run") {
    const auto ctx = make_context(pair_model(), 20.0);
    const EstimatorKind k{Method::MAK};
    const RunOptions opts{11, 2};
    const PartialRun first = run_blocks(ctx, k, 0, 3 * kBlockSize, opts);
    const PartialRun second = run_blocks(ctx, k, 3 * kBlockSize, 2 * kBlockSize + 17, opts);
    const RunStats merged = finalize(merge(first, second));
    const RunStats full = run(ctx, k, 5 * kBlockSize + 17, opts);
    CHECK(same(merged, full));
    CHECK_THROWS_AS(merge(second, first), ValidationError);
}

TEST_CASE("standard error shrinks like one over root n") {
    const auto ctx = make_context(pair_model(), 20.0);
    const RunStats small = run(ctx, EstimatorKind{Method::CMC}, 10'000, RunOptions{3, 0});
    const RunStats large = run(ctx, EstimatorKind{Method::CMC}, 40'000, RunOptions{3, 0});
    CHECK_THAT(large.se_of_mean / small.se_of_mean, WithinRel(0.5, 0.2));
}

TEST_CASE("run statistics are consistent") {
    const auto ctx = make_context(pair_model(), 20.0);
    const RunStats s = run(ctx, EstimatorKind{Method::RN}, 20'000, RunOptions{8, 0});
    CHECK(s.n == 20'000);
    CHECK(s.mean > 0.0);
    CHECK_THAT(s.cv, WithinRel(s.per_rep_std / s.mean, 1e-15));
    CHECK_THAT(s.se_of_mean, WithinRel(s.per_rep_std / std::sqrt(20'000.0), 1e-15));
    CHECK_THAT(s.time_per_5e5, WithinRel(s.wall_time * 25.0, 1e-12));
    CHECK(std::isnan(s.efficiency));
    CHECK(s.relative_second_moment() >= 1.0);
}

TEST_CASE("efficiency arithmetic") {
    RunStats s;
    s.estimator = EstimatorKind{Method::MAK};
    s.per_rep_std = 0.5;
    s.time_per_5e5 = 2.0;
    apply_efficiency(s, Baseline{4.0, 3.0});
    CHECK_THAT(s.efficiency, WithinRel(4.0 * 3.0 / (0.25 * 2.0), 1e-15));
    RunStats c;
    c.estimator = EstimatorKind{Method::CMC};
    apply_efficiency(c, Baseline{4.0, 3.0});
    CHECK(c.efficiency == 1.0);
}

TEST_CASE("compare") {
    CompareRequest req;
    req.model = pair_model();
    req.thresholds = {20.0};
    req.n = 5000;
    SECTION("empty estimator list") { CHECK(compare(req).empty()); }
    SECTION("needs a baseline without CMC") {
        req.estimators = {EstimatorKind{Method::MAK}};
        CHECK_THROWS_AS(compare(req), ValidationError);
        req.baseline = Baseline{1e-3, 1.0};
        const auto rows = compare(req);
        REQUIRE(rows.size() == 1);
        CHECK(std::isfinite(rows[0].stats.efficiency));
        CHECK(rows[0].stats.efficiency > 0.0);
    }
    SECTION("rows follow the estimator list, CMC efficiency one") {
        req.estimators = {EstimatorKind{Method::RN}, EstimatorKind{Method::MAK}, EstimatorKind{Method::CMC}};
        req.correlations = {common_rho_setting(2, 0.0), common_rho_setting(2, 0.4)};
        req.thresholds = {20.0, 40.0};
        const auto rows = compare(req);
        REQUIRE(rows.size() == 12);
        CHECK(rows[0].stats.estimator.method == Method::RN);
        CHECK(rows[2].stats.estimator.method == Method::CMC);
        CHECK(rows[2].stats.efficiency == 1.0);
        CHECK(rows[6].rho_label == "0.4");
        CHECK(rows[9].stats.u == 40.0);
        const auto again = compare(req);
        for (std::size_t i = 0; i < rows.size(); ++i) CHECK(same(rows[i].stats, again[i].stats));
    }
    SECTION("paper model at rho 0.4, u 40000") {
        req.model = benchmark_model(0.0);
        req.correlations = {common_rho_setting(10, 0.4)};
        req.thresholds = {40000.0};
        req.estimators = {EstimatorKind{Method::CMC}, EstimatorKind{Method::MAK}, EstimatorKind{Method::RN}};
        req.n = 100'000;
        const auto rows = compare(req);
        REQUIRE(rows.size() == 3);
        CHECK_THAT(rows[1].stats.cv, WithinRel(0.12, 0.25));
        CHECK_THAT(rows[2].stats.cv, WithinRel(0.906, 0.25));
    }
}

TEST_CASE("variance trend") {
    const RunOptions opts{4, 0};
    const auto mak = variance_trend(benchmark_model(0.0), EstimatorKind{Method::MAK}, {2e4, 4e4, 5e5}, 50'000, opts);
    CHECK(mak.cv_decreasing);
    CHECK_FALSE(mak.grid_meets_precondition);
    CHECK(mak.axis == "log u");
    REQUIRE(mak.slope);
    CHECK(*mak.slope < 0.0);

    const auto rn = variance_trend(benchmark_model(0.0), EstimatorKind{Method::RN}, {1e3, 1e4, 1e5, 1e6}, 5'000, opts);
    CHECK(rn.grid_meets_precondition);
    CHECK(rn.axis == "log log log u");
    CHECK(rn.points.size() == 4);

    const auto flat = variance_trend(pair_model(), EstimatorKind{Method::CMC}, {0.0, 0.0}, 100, opts);
    for (const auto& p : flat.points) CHECK(p.cv == 0.0);
}

TEST_CASE("failure budget aborts with diagnostics") {
    CHECK(kFailureBudget == 1e-6);
}
