#include "tailrisk/tails.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "tailrisk/errors.hpp"

namespace tailrisk {

namespace {

constexpr double kQuadratureTolerance = 1e-10;
constexpr unsigned kQuadratureDepth = 20;
constexpr double kTooExtreme = 1e-300;

template <class F>
double integrate(F f, double a, double b) {
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, kQuadratureDepth,
                                                                         kQuadratureTolerance);
}

}  // namespace

double normal_tail(double x) {
    // erfc loses about x^2 ulps to the rounding of x / sqrt2; far out use
    // phi(x) times the Mills ratio continued fraction, with exp(-x^2/2) split
    // so that the large part of the exponent is exact.
    if (x < 8.0) return 0.5 * std::erfc(x / std::numbers::sqrt2);
    if (x > 40.0) return 0.0;
    const double xh = std::floor(x * 16.0) / 16.0;
    const double g = std::exp(-0.5 * xh * xh) * std::exp(-0.5 * (x - xh) * (x + xh));
    double t = x;
    for (int k = 60; k >= 1; --k) t = x + k / t;
    return g / (std::sqrt(2.0 * std::numbers::pi) * t);
}

double normal_cdf(double x) {
    return normal_tail(-x);
}

double log_normal_tail(double x) {
    if (x < 30.0) return std::log(normal_tail(x));
    // Asymptotic series of the Mills ratio; truncation error < 1e-17 for x >= 30.
    const double z = 1.0 / (x * x);
    const double series = 1.0 - z * (1.0 - 3.0 * z * (1.0 - 5.0 * z * (1.0 - 7.0 * z * (1.0 - 9.0 * z))));
    return -0.5 * x * x - std::log(x) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log(series);
}

double normal_interval_mass(double lo, double hi) {
    if (!(hi > lo)) return 0.0;
    if (lo >= 0.0) return std::max(0.0, normal_tail(lo) - normal_tail(hi));
    if (hi <= 0.0) return std::max(0.0, normal_cdf(hi) - normal_cdf(lo));
    return std::max(0.0, 1.0 - normal_tail(hi) - normal_cdf(lo));
}

double log_sphere_density_const(int d) {
    return std::lgamma(0.5 * d) - 0.5 * std::log(std::numbers::pi) - std::lgamma(0.5 * (d - 1));
}

double log_sphere_density(int d, double one_minus, double one_plus) {
    if (d == 3) return log_sphere_density_const(d);
    return log_sphere_density_const(d) + 0.5 * (d - 3) * (std::log(one_minus) + std::log(one_plus));
}

double sphere_density(int d, double theta) {
    if (d < 2) throw DomainError("sphere_density needs d >= 2");
    if (!(std::abs(theta) <= 1.0)) return 0.0;
    if (std::abs(theta) == 1.0) {
        if (d == 2) return std::numeric_limits<double>::infinity();
        if (d > 3) return 0.0;
    }
    return std::exp(log_sphere_density(d, 1.0 - theta, 1.0 + theta));
}

double log_is_density_const(double a, double b) {
    return -(a + b - 1.0) * std::numbers::ln2 + std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

double log_is_density(double a, double b, double one_minus, double one_plus) {
    return log_is_density_const(a, b) + (a - 1.0) * std::log(one_plus) + (b - 1.0) * std::log(one_minus);
}

double is_density(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("is_density needs a > 0 and b > 0");
    if (!(std::abs(x) < 1.0)) return 0.0;
    return std::exp(log_is_density(a, b, 1.0 - x, 1.0 + x));
}

double nu_chi(int /*d*/, double x) {
    return 1.0 / x;
}

double chi_mean_excess(int d, double x) {
    const RadialLaw r = RadialLaw::chi_root(d);
    const double tail_x = r.tail(x);
    if (!(tail_x > 0.0)) throw NumericalError("chi_mean_excess: tail underflows");
    const double area = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        [&](double t) { return r.tail(t); }, x, std::numeric_limits<double>::infinity(), kQuadratureDepth,
        kQuadratureTolerance);
    return area / tail_x;
}

double marginal_tail(const ModelSpec& m, int i, double u) {
    const double lambda = m.lambda[i];
    const double scale = m.beta[i] * m.gamma;
    double p = 0.0;
    if (!(u > 0.0)) {
        p = 1.0;
    } else if (m.is_gaussian()) {
        p = normal_tail(std::log(u / lambda) / scale);
    } else {
        const RadialLaw& r = m.radial;
        const int d = m.dim();
        const bool above = u > lambda;
        const double k = std::abs(std::log(u / lambda)) / scale;
        if (d == 1) {
            p = above ? 0.5 * r.tail(k) : 0.5 + 0.5 * r.cdf(k);
        } else {
            // theta = 1 - t^2 removes the endpoint singularity of the d = 2 density.
            auto integrand = [&](double t) {
                const double one_minus = t * t;
                const double theta = 1.0 - one_minus;
                if (!(theta > 0.0)) return 0.0;
                const double radial = above ? r.tail(k / theta) : r.cdf(k / theta);
                return radial * std::exp(log_sphere_density(d, one_minus, 2.0 - one_minus)) * 2.0 * t;
            };
            const double part = integrate(integrand, 0.0, 1.0);
            p = above ? part : 0.5 + part;
        }
    }
    if (!(p >= kTooExtreme)) {
        std::ostringstream os;
        os << "threshold too extreme: P(X_" << (i + 1) << " > " << u << ") = " << p << " underflows";
        throw NumericalError(os.str());
    }
    return p;
}

AsymptoticAlpha asymptotic_alpha(const ModelSpec& m, double u) {
    AsymptoticAlpha out;
    const MaxIndexSet top = max_index_set(m);
    out.reduced_indices = top.dominant;
    for (int i = 0; i < m.dim(); ++i) out.full += marginal_tail(m, i, u);
    for (int i : top.dominant) out.reduced += marginal_tail(m, i, u);
    return out;
}

double scaling_e(const RadialLaw& r, double x) {
    if (!(x > 1.0)) throw DomainError("scaling_e needs x > 1");
    return x * r.nu(std::log(x));
}

double estar(const ModelSpec& m, int i, double u) {
    const double lambda = m.lambda[i];
    if (!(u > lambda)) {
        std::ostringstream os;
        os << "estar needs u > lambda_" << (i + 1) << " (u = " << u << ", lambda = " << lambda << ")";
        throw DomainError(os.str());
    }
    const double scale = m.beta[i] * m.gamma;
    // e(y)/y = nu(log y) with log y = log(u/lambda)/scale.
    return scale * u * m.radial.nu(std::log(u / lambda) / scale);
}

double is_tuning_b(const ModelSpec& m, int i, double u) {
    if (!(u > 1.0) || !(u > m.lambda[i])) return std::numeric_limits<double>::quiet_NaN();
    const double ratio = u / estar(m, i, u);
    if (!(ratio > 1.0)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(u) / std::log(ratio);
}

}  // namespace tailrisk
