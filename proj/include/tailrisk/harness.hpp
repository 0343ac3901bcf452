#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tailrisk/errors.hpp"
#include "tailrisk/estimators.hpp"

namespace tailrisk {

// Welford accumulator with Chan's pairwise merge.
class Moments {
public:
    void push(double x) noexcept {
        ++n_;
        const double delta = x - mean_;
        mean_ += delta / static_cast<double>(n_);
        m2_ += delta * (x - mean_);
    }

    void merge(const Moments& other) noexcept;

    std::int64_t count() const noexcept { return n_; }
    double mean() const noexcept { return mean_; }
    double m2() const noexcept { return m2_; }
    double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

    bool operator==(const Moments&) const = default;

private:
    std::int64_t n_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Replications are grouped into blocks of consecutive stream ids; the block
// partition is fixed by the absolute stream id, so results never depend on
// the worker count.
inline constexpr std::int64_t kBlockSize = 1024;
inline constexpr double kFailureBudget = 1e-6;

struct RunOptions {
    std::uint64_t seed = 1;
    int threads = 0;  // 0 = hardware concurrency
};

int resolve_threads(int requested);

// Thrown when failed root solves exceed the budget; carries the partial run.
class NumericalAbort : public NumericalError {
public:
    NumericalAbort(const std::string& what, std::int64_t failures, std::int64_t attempted)
        : NumericalError(what), failures(failures), attempted(attempted) {}
    std::int64_t failures;
    std::int64_t attempted;
};

struct PartialRun {
    EstimatorKind kind;
    double u = 0.0;
    std::uint64_t first_stream = 0;
    std::int64_t count = 0;
    std::vector<Moments> blocks;
    double wall_time = 0.0;
    std::int64_t failures = 0;
    std::int64_t clamped = 0;
    bool heuristic = false;
};

struct RunStats {
    EstimatorKind estimator;
    double u = 0.0;
    std::int64_t n = 0;
    double mean = 0.0;
    double per_rep_std = 0.0;
    double cv = 0.0;
    double se_of_mean = 0.0;
    // Timing columns: environment specific, excluded from determinism checks.
    double wall_time = 0.0;
    double time_per_5e5 = 0.0;
    double efficiency = 0.0;  // NaN when no baseline is known
    std::int64_t failures = 0;
    std::int64_t clamped = 0;
    bool heuristic = false;

    double variance() const noexcept { return per_rep_std * per_rep_std; }
    // Relative error E[(Z/alpha)^2] with alpha estimated by the mean.
    double relative_second_moment() const noexcept { return 1.0 + cv * cv; }
    // log E[Z^2] / log alpha, which tends to 2 for logarithmically efficient estimators.
    double log_efficiency_ratio() const noexcept;
};

// Runs streams [first_stream, first_stream + count); first_stream and, unless
// it is the tail of a run, count must be multiples of kBlockSize.
PartialRun run_blocks(const ReplicationContext& ctx, const EstimatorKind& kind, std::uint64_t first_stream,
                      std::int64_t count, const RunOptions& opts);
// Concatenates consecutive stream ranges.
PartialRun merge(PartialRun first, const PartialRun& second);
RunStats finalize(const PartialRun& run);

RunStats run(const ReplicationContext& ctx, const EstimatorKind& kind, std::int64_t n, const RunOptions& opts);
RunStats run(const ModelSpec& m, double u, const EstimatorKind& kind, std::int64_t n, const RunOptions& opts,
             const ContextOptions& ctx_opts = {});

struct Baseline {
    double variance = 0.0;
    double time_per_5e5 = 0.0;
};

Baseline baseline_of(const RunStats& cmc_stats);
// (Var_CMC x time_CMC) / (Var_est x time_est), times per 5e5 replications.
void apply_efficiency(RunStats& stats, const Baseline& baseline);

struct CorrelationSetting {
    std::string label;
    Eigen::MatrixXd sigma;
};

CorrelationSetting common_rho_setting(int d, double rho);

struct CompareRequest {
    ModelSpec model;
    std::vector<CorrelationSetting> correlations;  // empty = the model's own sigma
    std::vector<double> thresholds;
    std::vector<EstimatorKind> estimators;
    std::int64_t n = 100000;
    std::int64_t cmc_n = 0;  // 0 = same as n
    RunOptions run;
    ContextOptions context;
    std::optional<Baseline> baseline;  // used when CMC is not in the list
};

struct TableRow {
    std::string rho_label;
    RunStats stats;
};

std::vector<TableRow> compare(const CompareRequest& req);

struct TrendReport {
    EstimatorKind estimator;
    std::vector<RunStats> points;
    std::string axis;              // transform of u used for the fit
    std::optional<double> slope;   // least squares slope of log CV against the axis
    bool grid_meets_precondition = false;  // >= 4 points spanning >= 2 decades
    bool cv_decreasing = false;
};

TrendReport variance_trend(const ModelSpec& m, const EstimatorKind& kind, const std::vector<double>& thresholds,
                           std::int64_t n, const RunOptions& opts, const ContextOptions& ctx_opts = {});

}  // namespace tailrisk
