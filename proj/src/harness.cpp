#include "tailrisk/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace tailrisk {

void Moments::merge(const Moments& other) noexcept {
    if (other.n_ == 0) return;
    if (n_ == 0) {
        *this = other;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double total = na + nb;
    const double delta = other.mean_ - mean_;
    mean_ += delta * (nb / total);
    m2_ += other.m2_ + delta * delta * (na * nb / total);
    n_ += other.n_;
}

double RunStats::log_efficiency_ratio() const noexcept {
    const double second = variance() * static_cast<double>(n - 1) / static_cast<double>(n) + mean * mean;
    return std::log(second) / std::log(mean);
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

namespace {

constexpr int kMaxRedraws = 100;

struct BlockResult {
    Moments moments;
    std::int64_t failures = 0;
    std::int64_t clamped = 0;
};

BlockResult run_block(const ReplicationContext& ctx, const EstimatorKind& kind, std::uint64_t seed,
                      std::uint64_t first, std::int64_t count) {
    BlockResult out;
    Workspace ws(ctx.dim());
    for (std::int64_t r = 0; r < count; ++r) {
        RngStream rng(seed, first + static_cast<std::uint64_t>(r));
        for (int attempt = 0;; ++attempt) {
            try {
                out.moments.push(sample(ctx, kind, rng, ws));
                break;
            } catch (const NumericalError&) {
                ++out.failures;
                if (attempt + 1 >= kMaxRedraws) throw;
            }
        }
    }
    out.clamped = ws.clamped;
    return out;
}

}  // namespace

PartialRun run_blocks(const ReplicationContext& ctx, const EstimatorKind& kind, std::uint64_t first_stream,
                      std::int64_t count, const RunOptions& opts) {
    check_supported(ctx, kind);
    PartialRun out;
    out.kind = kind;
    out.u = ctx.u;
    out.first_stream = first_stream;
    out.count = count;
    out.heuristic = is_heuristic(ctx, kind);
    const std::int64_t nblocks = (count + kBlockSize - 1) / kBlockSize;
    std::vector<BlockResult> results(static_cast<std::size_t>(nblocks));

    const auto start = std::chrono::steady_clock::now();
    std::atomic<std::int64_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (;;) {
            const std::int64_t b = next.fetch_add(1);
            if (b >= nblocks) return;
            const std::int64_t begin = b * kBlockSize;
            const std::int64_t len = std::min(kBlockSize, count - begin);
            try {
                results[static_cast<std::size_t>(b)] =
                    run_block(ctx, kind, opts.seed, first_stream + static_cast<std::uint64_t>(begin), len);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(nblocks);
                return;
            }
        }
    };
    const int threads = static_cast<int>(std::min<std::int64_t>(resolve_threads(opts.threads), std::max<std::int64_t>(nblocks, 1)));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error) std::rethrow_exception(error);

    out.blocks.reserve(results.size());
    for (const auto& r : results) {
        out.blocks.push_back(r.moments);
        out.failures += r.failures;
        out.clamped += r.clamped;
    }
    if (static_cast<double>(out.failures) > kFailureBudget * static_cast<double>(count)) {
        std::ostringstream os;
        os << kind.name() << " at u = " << ctx.u << ": " << out.failures << " failed root solves in " << count
           << " replications exceed the budget of " << kFailureBudget;
        throw NumericalAbort(os.str(), out.failures, count);
    }
    return out;
}

PartialRun merge(PartialRun first, const PartialRun& second) {
    if (second.first_stream != first.first_stream + static_cast<std::uint64_t>(first.count))
        throw ValidationError("merge needs consecutive stream ranges");
    if (first.count % kBlockSize != 0) throw ValidationError("merge needs the first range to be block aligned");
    first.blocks.insert(first.blocks.end(), second.blocks.begin(), second.blocks.end());
    first.count += second.count;
    first.wall_time += second.wall_time;
    first.failures += second.failures;
    first.clamped += second.clamped;
    return first;
}

RunStats finalize(const PartialRun& run) {
    Moments total;
    for (const auto& b : run.blocks) total.merge(b);
    RunStats s;
    s.estimator = run.kind;
    s.u = run.u;
    s.n = total.count();
    s.mean = total.mean();
    s.per_rep_std = std::sqrt(total.variance());
    s.cv = s.mean > 0.0 ? s.per_rep_std / s.mean : std::numeric_limits<double>::quiet_NaN();
    s.se_of_mean = s.n > 0 ? s.per_rep_std / std::sqrt(static_cast<double>(s.n)) : 0.0;
    s.wall_time = run.wall_time;
    s.time_per_5e5 = s.n > 0 ? run.wall_time * 5e5 / static_cast<double>(s.n) : 0.0;
    s.efficiency = std::numeric_limits<double>::quiet_NaN();
    s.failures = run.failures;
    s.clamped = run.clamped;
    s.heuristic = run.heuristic;
    return s;
}

RunStats run(const ReplicationContext& ctx, const EstimatorKind& kind, std::int64_t n, const RunOptions& opts) {
    if (n < 2) throw ValidationError("a run needs at least 2 replications");
    RunStats s = finalize(run_blocks(ctx, kind, 0, n, opts));
    if (kind.method == Method::CMC) s.efficiency = 1.0;
    return s;
}

RunStats run(const ModelSpec& m, double u, const EstimatorKind& kind, std::int64_t n, const RunOptions& opts,
             const ContextOptions& ctx_opts) {
    ContextOptions co = ctx_opts;
    if (kind.method == Method::RN) co.is_a = kind.a;
    return run(make_context(m, u, co), kind, n, opts);
}

Baseline baseline_of(const RunStats& cmc_stats) {
    return Baseline{cmc_stats.variance(), cmc_stats.time_per_5e5};
}

void apply_efficiency(RunStats& stats, const Baseline& baseline) {
    if (stats.estimator.method == Method::CMC) {
        stats.efficiency = 1.0;
        return;
    }
    stats.efficiency = (baseline.variance * baseline.time_per_5e5) / (stats.variance() * stats.time_per_5e5);
}

CorrelationSetting common_rho_setting(int d, double rho) {
    std::ostringstream os;
    os << rho;
    return {os.str(), common_correlation(d, rho)};
}

std::vector<TableRow> compare(const CompareRequest& req) {
    std::vector<TableRow> rows;
    if (req.estimators.empty()) return rows;
    const bool has_cmc = std::any_of(req.estimators.begin(), req.estimators.end(),
                                     [](const EstimatorKind& k) { return k.method == Method::CMC; });
    if (!has_cmc && !req.baseline) throw ValidationError("compare needs CMC in the estimator list or a stored baseline");

    std::vector<CorrelationSetting> settings = req.correlations;
    if (settings.empty()) settings.push_back({"model", req.model.sigma});
    const std::int64_t cmc_n = req.cmc_n > 0 ? req.cmc_n : req.n;

    for (const auto& setting : settings) {
        ModelSpec m = req.model;
        m.sigma = setting.sigma;
        for (double u : req.thresholds) {
            const ReplicationContext ctx = make_context(m, u, req.context);
            for (const auto& k : req.estimators) check_supported(ctx, k);

            auto run_one = [&](const EstimatorKind& k) {
                RunOptions opts = req.run;
                opts.seed = derive_seed(req.run.seed, static_cast<std::uint64_t>(k.method) + 1);
                const std::int64_t n = k.method == Method::CMC ? cmc_n : req.n;
                if (k.method == Method::RN && k.a != req.context.is_a) {
                    ContextOptions co = req.context;
                    co.is_a = k.a;
                    return run(make_context(m, u, co), k, n, opts);
                }
                return run(ctx, k, n, opts);
            };

            std::optional<RunStats> cmc_stats;
            Baseline baseline = req.baseline.value_or(Baseline{});
            if (has_cmc) {
                cmc_stats = run_one(EstimatorKind{Method::CMC});
                baseline = baseline_of(*cmc_stats);
            }
            for (const auto& k : req.estimators) {
                RunStats s = (k.method == Method::CMC) ? *cmc_stats : run_one(k);
                apply_efficiency(s, baseline);
                rows.push_back({setting.label, s});
            }
        }
    }
    return rows;
}

TrendReport variance_trend(const ModelSpec& m, const EstimatorKind& kind, const std::vector<double>& thresholds,
                           std::int64_t n, const RunOptions& opts, const ContextOptions& ctx_opts) {
    TrendReport rep;
    rep.estimator = kind;
    std::vector<double> us = thresholds;
    std::sort(us.begin(), us.end());
    for (double u : us) rep.points.push_back(run(m, u, kind, n, opts, ctx_opts));

    rep.grid_meets_precondition = us.size() >= 4 && us.front() > 0.0 && us.back() / us.front() >= 100.0;
    rep.cv_decreasing = rep.points.size() >= 2;
    for (std::size_t k = 1; k < rep.points.size(); ++k) {
        if (!(rep.points[k].cv < rep.points[k - 1].cv)) rep.cv_decreasing = false;
    }

    std::function<double(double)> axis;
    switch (kind.method) {
    case Method::RN:
        rep.axis = "log log log u";
        axis = [](double u) { return std::log(std::log(std::log(u))); };
        break;
    case Method::ZR:
        rep.axis = "log log u";
        axis = [](double u) { return std::log(std::log(u)); };
        break;
    default:
        rep.axis = "log u";
        axis = [](double u) { return std::log(u); };
        break;
    }
    std::vector<double> xs, ys;
    for (const auto& p : rep.points) {
        const double x = axis(p.u);
        if (std::isfinite(x) && p.cv > 0.0 && std::isfinite(p.cv)) {
            xs.push_back(x);
            ys.push_back(std::log(p.cv));
        }
    }
    if (xs.size() >= 2) {
        const double n_pts = static_cast<double>(xs.size());
        double mx = 0.0, my = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            mx += xs[k] / n_pts;
            my += ys[k] / n_pts;
        }
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            sxx += (xs[k] - mx) * (xs[k] - mx);
            sxy += (xs[k] - mx) * (ys[k] - my);
        }
        if (sxx > 0.0) rep.slope = sxy / sxx;
    }
    return rep;
}

}  // namespace tailrisk
