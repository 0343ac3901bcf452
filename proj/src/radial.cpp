#include "tailrisk/radial.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <limits>
#include <utility>

#include "tailrisk/errors.hpp"

namespace tailrisk {

RadialLaw RadialLaw::chi_root(int dof) {
    if (dof < 1) throw ValidationError("chi-root radial law needs dof >= 1");
    RadialLaw r;
    r.kind_ = Kind::ChiRoot;
    r.name_ = "chi";
    r.dof_ = dof;
    return r;
}

RadialLaw RadialLaw::weibull(double shape, double scale) {
    if (!(shape > 0.0) || !(scale > 0.0))
        throw ValidationError("weibull radial law needs shape > 0 and scale > 0");
    RadialLaw r;
    r.kind_ = Kind::Weibull;
    r.name_ = "weibull";
    r.p1_ = shape;
    r.p2_ = scale;
    return r;
}

RadialLaw RadialLaw::custom(std::string name, Functions fns) {
    if (!fns.tail || !fns.quantile || !fns.nu)
        throw ValidationError("custom radial law '" + name + "' must supply tail, quantile and nu");
    RadialLaw r;
    r.kind_ = Kind::Custom;
    r.name_ = std::move(name);
    r.fns_ = std::move(fns);
    return r;
}

double RadialLaw::tail(double x) const {
    if (!(x > 0.0)) return 1.0;
    if (std::isinf(x)) return 0.0;
    switch (kind_) {
    case Kind::ChiRoot:
        return boost::math::gamma_q(0.5 * dof_, 0.5 * x * x);
    case Kind::Weibull:
        return std::exp(-std::pow(x / p2_, p1_));
    case Kind::Custom:
        return fns_.tail(x);
    }
    return 0.0;
}

double RadialLaw::cdf(double x) const {
    if (!(x > 0.0)) return 0.0;
    if (std::isinf(x)) return 1.0;
    switch (kind_) {
    case Kind::ChiRoot:
        return boost::math::gamma_p(0.5 * dof_, 0.5 * x * x);
    case Kind::Weibull:
        return -std::expm1(-std::pow(x / p2_, p1_));
    case Kind::Custom:
        return fns_.cdf ? fns_.cdf(x) : 1.0 - fns_.tail(x);
    }
    return 1.0;
}

double RadialLaw::quantile(double p) const {
    if (!(p > 0.0)) return std::numeric_limits<double>::infinity();
    if (p >= 1.0) return 0.0;
    switch (kind_) {
    case Kind::ChiRoot:
        return std::sqrt(2.0 * boost::math::gamma_q_inv(0.5 * dof_, p));
    case Kind::Weibull:
        return p2_ * std::pow(-std::log(p), 1.0 / p1_);
    case Kind::Custom:
        return fns_.quantile(p);
    }
    return 0.0;
}

double RadialLaw::nu(double x) const {
    switch (kind_) {
    case Kind::ChiRoot:
        return 1.0 / x;
    case Kind::Weibull:
        return std::pow(p2_, p1_) * std::pow(x, 1.0 - p1_) / p1_;
    case Kind::Custom:
        return fns_.nu(x);
    }
    return 0.0;
}

double RadialLaw::interval_mass(double lo, double hi) const {
    lo = std::max(lo, 0.0);
    if (!(hi > lo)) return 0.0;
    const double tail_lo = tail(lo);
    if (tail_lo < 0.5) {
        return std::max(0.0, tail_lo - tail(hi));
    }
    return std::max(0.0, cdf(hi) - cdf(lo));
}

}  // namespace tailrisk
