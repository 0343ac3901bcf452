#pragma once

#include <functional>
#include <string>

namespace tailrisk {

// Distribution of the elliptical radius R > 0, restricted to laws in the
// Gumbel max-domain of attraction: tail(x + s*nu(x)) / tail(x) -> exp(-s).
//
// Built-in laws are evaluated directly; custom laws carry user callables.
// `quantile(p)` inverts the tail, i.e. tail(quantile(p)) == p.
class RadialLaw {
public:
    enum class Kind { ChiRoot, Weibull, Custom };

    struct Functions {
        std::function<double(double)> tail;
        std::function<double(double)> quantile;
        std::function<double(double)> nu;
        std::function<double(double)> cdf;  // optional; defaults to 1 - tail
    };

    // R^2 ~ chi-square with `dof` degrees of freedom. With dof == d this is the
    // radius of a d-dimensional standard Gaussian vector.
    static RadialLaw chi_root(int dof);
    // P(R > x) = exp(-(x/scale)^shape).
    static RadialLaw weibull(double shape, double scale = 1.0);
    static RadialLaw custom(std::string name, Functions fns);

    Kind kind() const noexcept { return kind_; }
    const std::string& name() const noexcept { return name_; }
    int dof() const noexcept { return dof_; }
    double shape() const noexcept { return p1_; }
    double scale() const noexcept { return p2_; }

    double tail(double x) const;
    double cdf(double x) const;
    double quantile(double p) const;
    double nu(double x) const;

    // P(lo < R < hi) evaluated from whichever side avoids cancellation.
    double interval_mass(double lo, double hi) const;

private:
    RadialLaw() = default;

    Kind kind_ = Kind::ChiRoot;
    std::string name_;
    int dof_ = 0;
    double p1_ = 0.0;
    double p2_ = 0.0;
    Functions fns_;
};

}  // namespace tailrisk
