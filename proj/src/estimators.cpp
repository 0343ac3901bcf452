#include "tailrisk/estimators.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <span>
#include <sstream>

#include "tailrisk/errors.hpp"
#include "tailrisk/rootfind.hpp"
#include "tailrisk/tails.hpp"

namespace tailrisk {

namespace {

constexpr std::string_view kNames[] = {"CMC", "AK", "MAK", "ZR", "RN"};

// [lo, hi] of t with coeff_i * t >= rhs_i for every i != j; empty when infeasible.
Interval max_constraint(int j, const Eigen::VectorXd& coeff, auto&& rhs, int d) {
    Interval iv{-kInf, kInf};
    for (int i = 0; i < d; ++i) {
        if (i == j) continue;
        const double k = coeff[i];
        const double r = rhs(i);
        if (k > 0.0) {
            iv.lo = std::max(iv.lo, r / k);
        } else if (k < 0.0) {
            iv.hi = std::min(iv.hi, r / k);
        } else if (r > 0.0) {
            return {0.0, 0.0};
        }
    }
    return iv;
}

// log of int_0^1 (T(theta)/T(1))^2 f(theta)^2 / f_IS(a, b, theta) dtheta with T the
// single-risk conditional exceedance probability.
double log_single_risk_moment(const ModelSpec& m, int j, double u, double a, double b) {
    const int d = m.dim();
    const double level = std::log(u / m.lambda[j]) / (m.beta[j] * m.gamma);
    const double log_t1 = std::log(m.radial.tail(level));
    const double log_cf = 2.0 * log_sphere_density_const(d) - log_is_density_const(a, b);
    boost::math::quadrature::tanh_sinh<double> integrator;
    auto integrand = [&](double theta, double xc) {
        if (theta <= 0.0) return 0.0;
        const double one_minus = (xc > 0.0) ? xc : 1.0 - theta;
        const double t = m.radial.tail(level / theta);
        if (!(t > 0.0)) return 0.0;
        const double lf = (d - 3) * (std::log(one_minus) + std::log1p(theta));
        const double lis = (a - 1.0) * std::log1p(theta) + (b - 1.0) * std::log(one_minus);
        return std::exp(2.0 * (std::log(t) - log_t1) + lf - lis + log_cf);
    };
    const double v = integrator.integrate(integrand, 0.0, 1.0, 1e-9);
    return std::log(v);
}

double is_b_for(const ModelSpec& m, int j, double u, const ContextOptions& opts, bool& fallback) {
    fallback = false;
    if (opts.b_tuning == BTuning::Fixed) return opts.fixed_b;
    if (opts.b_tuning == BTuning::SecondMoment) {
        const double level = std::log(u / m.lambda[j]);
        const int d = m.dim();
        if (d >= 2 && level > 0.0 && m.radial.tail(level / (m.beta[j] * m.gamma)) > 0.0) {
            const double hi = std::min(20.0, 0.95 * (d - 1));
            const double lo = std::min(0.05, 0.5 * hi);
            const auto best = boost::math::tools::brent_find_minima(
                [&](double lb) { return log_single_risk_moment(m, j, u, opts.is_a, std::exp(lb)); }, std::log(lo),
                std::log(hi), 20);
            if (std::isfinite(best.second)) return std::exp(best.first);
        }
        fallback = true;
        return 1.0;
    }
    const double e = (u > m.lambda[j] && u > 1.0) ? estar(m, j, u) : std::nan("");
    if (opts.b_tuning == BTuning::LogRatio) {
        const double b = is_tuning_b(m, j, u);
        if (std::isfinite(b) && b > 0.0) return b;
        fallback = true;
    }
    if (std::isfinite(e)) {
        const double scale = u * std::log(u) / e;
        if (scale > std::exp(1.0)) return 1.0 / std::log(scale);
    }
    // Threshold below the regime where the scaling is meaningful: no tilt.
    fallback = true;
    return 1.0;
}

}  // namespace

std::string EstimatorKind::name() const {
    std::string out(kNames[static_cast<int>(method)]);
    if (method == Method::RN && a != kDefaultIsShapeA) {
        std::ostringstream os;
        os << "(a=" << a << ')';
        out += os.str();
    }
    return out;
}

std::string valid_estimator_names() {
    std::string out;
    for (auto n : kNames) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

EstimatorKind parse_estimator(std::string_view name, double a) {
    std::string upper(name);
    std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char ch) { return std::toupper(ch); });
    for (std::size_t k = 0; k < std::size(kNames); ++k) {
        if (upper == kNames[k]) {
            if (!(a > 0.0)) throw ValidationError("RN shape a must be positive");
            return EstimatorKind{static_cast<Method>(k), a};
        }
    }
    throw ValidationError("unknown estimator '" + std::string(name) + "'; valid names: " + valid_estimator_names());
}

std::vector<double> ReplicationContext::is_b_values() const {
    std::vector<double> out;
    for (const auto& s : strata) out.push_back(s.is_b);
    return out;
}

ReplicationContext make_context(const ModelSpec& m, double u, const ContextOptions& opts) {
    validate(m);
    ReplicationContext ctx;
    ctx.model = m;
    ctx.u = u;
    const int d = m.dim();
    ctx.factors = factorize_all(m.sigma);
    ctx.log_lambda = m.lambda.array().log();
    ctx.scale = m.beta * m.gamma;
    ctx.strat_weights.resize(d);
    for (int i = 0; i < d; ++i) {
        try {
            ctx.strat_weights[i] = marginal_tail(m, i, u);
        } catch (const NumericalError&) {
            ctx.strat_weights[i] = 0.0;
        }
    }
    ctx.strat_total = 0.0;
    for (double w : ctx.strat_weights) ctx.strat_total += w;
    // CMC and ZR still run when every marginal tail underflows; the
    // stratified estimators refuse in check_supported.
    if (ctx.strat_total > 0.0) ctx.strat = CategoricalSampler(ctx.strat_weights);

    ctx.independent_gaussian = m.is_gaussian() && m.sigma.isIdentity(0.0);
    ctx.identical_marginals = true;
    for (int i = 1; i < d; ++i) {
        if (m.lambda[i] != m.lambda[0] || m.beta[i] != m.beta[0]) ctx.identical_marginals = false;
    }

    ctx.strata.resize(d);
    for (int j = 0; j < d; ++j) {
        Stratum& s = ctx.strata[j];
        s.factor = ctx.factors.factor(j);
        s.drive_slope = ctx.scale.cwiseProduct(s.factor.col(0));
        s.rest_scaled = ctx.scale.asDiagonal() * s.factor.rightCols(d - 1);
        s.max_coeff = m.gamma * (Eigen::VectorXd::Constant(d, m.beta[j]) - m.beta.cwiseProduct(s.factor.col(0)));
        s.is_b = is_b_for(m, j, u, opts, s.b_fallback);
        if (s.b_fallback) ++ctx.b_fallbacks;
    }
    return ctx;
}

Workspace::Workspace(int d)
    : n(d), y(d), theta(d), dir(d), c(d), log_coeffs(static_cast<std::size_t>(d)), slopes(static_cast<std::size_t>(d)) {}

void check_supported(const ReplicationContext& ctx, const EstimatorKind& kind) {
    const bool stratified = kind.method == Method::MAK || kind.method == Method::RN;
    if (stratified && !(ctx.strat_total > 0.0))
        throw NumericalError("all marginal tails underflow at u = " + std::to_string(ctx.u) +
                             ": threshold too extreme for stratification");
    if ((kind.method == Method::MAK || kind.method == Method::AK) && !ctx.model.is_gaussian())
        throw ValidationError(kind.name() +
                              " conditions on Gaussian coordinates and needs the log-Gaussian (chi) radial law");
    if (kind.method == Method::RN && !(kind.a > 0.0)) throw ValidationError("RN shape a must be positive");
}

bool is_heuristic(const ReplicationContext& ctx, const EstimatorKind& kind) {
    return kind.method == Method::AK && !(ctx.independent_gaussian && ctx.identical_marginals);
}

// ---- crude Monte Carlo --------------------------------------------------------

double cmc(const ReplicationContext& ctx, RngStream& rng, Workspace& ws) {
    if (!(ctx.u > 0.0)) return 1.0;
    const int d = ctx.dim();
    const Eigen::MatrixXd& a = ctx.strata[0].factor;
    if (ctx.model.is_gaussian()) {
        normal_vector(rng, std::span<double>(ws.n.data(), static_cast<std::size_t>(d)));
        ws.y.noalias() = a * ws.n;
    } else {
        sphere_uniform(rng, std::span<double>(ws.dir.data(), static_cast<std::size_t>(d)));
        const double r = ctx.model.radial.quantile(rng.uniform());
        ws.y.noalias() = r * (a * ws.dir);
    }
    double s = 0.0;
    for (int i = 0; i < d; ++i) s += std::exp(ctx.log_lambda[i] + ctx.scale[i] * ws.y[i]);
    return s > ctx.u ? 1.0 : 0.0;
}

// ---- classical conditional MC (AK) -----------------------------------------

double ak_classic(const ReplicationContext& ctx, RngStream& rng, Workspace& ws) {
    const int d = ctx.dim();
    if (!(ctx.u > 0.0)) return 1.0;
    // Conditioning index: the last one for identical marginals, uniform otherwise.
    int k = d - 1;
    if (!ctx.identical_marginals) k = static_cast<int>(rng.uniform() * d);
    if (k >= d) k = d - 1;

    const Eigen::MatrixXd& a = ctx.strata[0].factor;
    normal_vector(rng, std::span<double>(ws.n.data(), static_cast<std::size_t>(d)));
    ws.y.noalias() = a * ws.n;
    double rest_sum = 0.0;
    double rest_max = 0.0;
    for (int i = 0; i < d; ++i) {
        if (i == k) continue;
        const double x = std::exp(ctx.log_lambda[i] + ctx.scale[i] * ws.y[i]);
        rest_sum += x;
        rest_max = std::max(rest_max, x);
    }
    const double level = std::max(ctx.u - rest_sum, rest_max);
    const double tail = level > 0.0 ? normal_tail((std::log(level) - ctx.log_lambda[k]) / ctx.scale[k]) : 1.0;
    return d * tail;
}

// ---- stratified conditional MC (MAK) ----------------------------------------------

double mak_partial(const ReplicationContext& ctx, int j, RngStream& rng, Workspace& ws) {
    const int d = ctx.dim();
    if (d > 1) normal_vector(rng, std::span<double>(ws.n.data(), static_cast<std::size_t>(d - 1)));
    return mak_conditional(ctx, j, std::span<const double>(ws.n.data(), static_cast<std::size_t>(d - 1)), ws);
}

double mak_conditional(const ReplicationContext& ctx, int j, std::span<const double> n_rest, Workspace& ws) {
    const int d = ctx.dim();
    const Stratum& s = ctx.strata[j];
    if (static_cast<int>(n_rest.size()) != d - 1) throw ValidationError("mak_conditional needs d - 1 coordinates");
    if (d > 1) {
        const Eigen::Map<const Eigen::VectorXd> rest(n_rest.data(), d - 1);
        ws.c.noalias() = s.rest_scaled * rest;
    } else {
        ws.c.setZero();
    }
    if (!(ctx.u > 0.0)) {
        // Only the max condition remains.
        const Interval mx = max_constraint(j, s.max_coeff,
                                           [&](int i) { return ctx.log_lambda[i] - ctx.log_lambda[j] + ws.c[i]; }, d);
        return normal_interval_mass(mx.lo, mx.hi);
    }
    for (int i = 0; i < d; ++i) {
        ws.log_coeffs[i] = ctx.log_lambda[i] + ws.c[i];
        ws.slopes[i] = s.drive_slope[i];
    }
    const IntervalSet exceed = exceedance_set_log(ExpSumView{ws.log_coeffs, ws.slopes}, std::log(ctx.u));
    if (exceed.empty()) return 0.0;
    const Interval mx = max_constraint(j, s.max_coeff,
                                       [&](int i) { return ctx.log_lambda[i] - ctx.log_lambda[j] + ws.c[i]; }, d);
    if (mx.empty()) return 0.0;
    double p = 0.0;
    for (const auto& iv : exceed.intersect(mx).intervals()) p += normal_interval_mass(iv.lo, iv.hi);
    return p;
}

double mak(const ReplicationContext& ctx, RngStream& rng, Workspace& ws) {
    const int j = ctx.strat(rng);
    return ctx.strat_total * mak_partial(ctx, j, rng, ws) / ctx.strat_weights[j];
}

// ---- polar conditioning (ZR, RN) -----------------------------------------------------

namespace {

// P(R in {r >= 0 : h(r) > u} intersected with `window`) for h(r) = sum lambda_i e^{slope_i r}.
double radial_probability(const ReplicationContext& ctx, Workspace& ws, Interval window) {
    if (!(ctx.u > 0.0)) return ctx.model.radial.interval_mass(window.lo, window.hi);
    const IntervalSet exceed = exceedance_set_log(ExpSumView{ws.log_coeffs, ws.slopes}, std::log(ctx.u),
                                                  Domain::NonNegative);
    double p = 0.0;
    for (const auto& iv : exceed.intersect(window).intervals()) p += ctx.model.radial.interval_mass(iv.lo, iv.hi);
    return p;
}

// Given the direction Theta in ws.theta, P(S > u, X_j = max | Theta).
double conditional_max_probability(const ReplicationContext& ctx, int j, Workspace& ws) {
    const int d = ctx.dim();
    for (int i = 0; i < d; ++i) {
        ws.log_coeffs[i] = ctx.log_lambda[i];
        ws.slopes[i] = ctx.scale[i] * ws.theta[i];
    }
    // X_j >= X_i  <=>  r (slope_j - slope_i) >= log(lambda_i / lambda_j)
    for (int i = 0; i < d; ++i) ws.c[i] = ws.slopes[j] - ws.slopes[i];
    Interval window = max_constraint(j, ws.c, [&](int i) { return ctx.log_lambda[i] - ctx.log_lambda[j]; }, d);
    window.lo = std::max(window.lo, 0.0);
    if (window.empty()) return 0.0;
    return radial_probability(ctx, ws, window);
}

}  // namespace

double zr_original(const ReplicationContext& ctx, RngStream& rng, Workspace& ws) {
    if (!(ctx.u > 0.0)) return 1.0;
    const int d = ctx.dim();
    sphere_uniform(rng, std::span<double>(ws.dir.data(), static_cast<std::size_t>(d)));
    ws.theta.noalias() = ctx.strata[0].factor * ws.dir;
    return zr_conditional(ctx, ws.theta, ws);
}

double zr_conditional(const ReplicationContext& ctx, const Eigen::VectorXd& theta, Workspace& ws) {
    if (!(ctx.u > 0.0)) return 1.0;
    const int d = ctx.dim();
    for (int i = 0; i < d; ++i) {
        ws.log_coeffs[i] = ctx.log_lambda[i];
        ws.slopes[i] = ctx.scale[i] * theta[i];
    }
    return radial_probability(ctx, ws, Interval{0.0, kInf});
}

double rn_partial(const ReplicationContext& ctx, int j, double a, double b, RngStream& rng, Workspace& ws) {
    const int d = ctx.dim();
    if (d == 1) return ctx.strat_weights[0];
    const SphereComponent theta = sphere_component_is(rng, a, b);
    if (theta.clamped) ++ws.clamped;
    conditional_sphere_rest(rng, theta, 0, std::span<double>(ws.dir.data(), static_cast<std::size_t>(d)));
    ws.theta.noalias() = ctx.strata[j].factor * ws.dir;
    ws.theta[j] = theta.value;
    const double p = conditional_max_probability(ctx, j, ws);
    if (p == 0.0) return 0.0;
    const double log_weight = log_sphere_density(d, theta.one_minus, theta.one_plus) -
                              log_is_density(a, b, theta.one_minus, theta.one_plus);
    return p * std::exp(log_weight);
}

double rn_partial(const ReplicationContext& ctx, int j, double a, RngStream& rng, Workspace& ws) {
    return rn_partial(ctx, j, a, ctx.strata[j].is_b, rng, ws);
}

double max_conditional(const ReplicationContext& ctx, int j, const Eigen::VectorXd& theta, Workspace& ws) {
    ws.theta = theta;
    return conditional_max_probability(ctx, j, ws);
}

double rn_partial_nominal(const ReplicationContext& ctx, int j, RngStream& rng, Workspace& ws) {
    const int d = ctx.dim();
    sphere_uniform(rng, std::span<double>(ws.dir.data(), static_cast<std::size_t>(d)));
    ws.theta.noalias() = ctx.strata[j].factor * ws.dir;
    return conditional_max_probability(ctx, j, ws);
}

double rn(const ReplicationContext& ctx, double a, RngStream& rng, Workspace& ws) {
    const int j = ctx.strat(rng);
    return ctx.strat_total * rn_partial(ctx, j, a, rng, ws) / ctx.strat_weights[j];
}

double sample(const ReplicationContext& ctx, const EstimatorKind& kind, RngStream& rng, Workspace& ws) {
    switch (kind.method) {
    case Method::CMC: return cmc(ctx, rng, ws);
    case Method::AK: return ak_classic(ctx, rng, ws);
    case Method::MAK: return mak(ctx, rng, ws);
    case Method::ZR: return zr_original(ctx, rng, ws);
    case Method::RN: return rn(ctx, kind.a, rng, ws);
    }
    return 0.0;
}

double cmc(const ReplicationContext& ctx, RngStream& rng) {
    Workspace ws(ctx.dim());
    return cmc(ctx, rng, ws);
}
double mak(const ReplicationContext& ctx, RngStream& rng) {
    Workspace ws(ctx.dim());
    return mak(ctx, rng, ws);
}
double mak_partial(const ReplicationContext& ctx, int j, RngStream& rng) {
    Workspace ws(ctx.dim());
    return mak_partial(ctx, j, rng, ws);
}
double rn(const ReplicationContext& ctx, double a, RngStream& rng) {
    Workspace ws(ctx.dim());
    return rn(ctx, a, rng, ws);
}
double zr_original(const ReplicationContext& ctx, RngStream& rng) {
    Workspace ws(ctx.dim());
    return zr_original(ctx, rng, ws);
}
double ak_classic(const ReplicationContext& ctx, RngStream& rng) {
    Workspace ws(ctx.dim());
    return ak_classic(ctx, rng, ws);
}

}  // namespace tailrisk
