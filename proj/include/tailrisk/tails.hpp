#pragma once

#include <vector>

#include "tailrisk/model.hpp"

namespace tailrisk {

// P(N > x) for standard normal N, via erfc.
double normal_tail(double x);
double normal_cdf(double x);
// log P(N > x); finite far beyond the double underflow point.
double log_normal_tail(double x);
// P(lo < N < hi), evaluated on the side that avoids cancellation.
double normal_interval_mass(double lo, double hi);

// Marginal density of one coordinate of a uniform point on the unit sphere
// of R^d: Gamma(d/2)/(sqrt(pi) Gamma((d-1)/2)) (1 - t^2)^{(d-3)/2}.
double sphere_density(int d, double theta);
double log_sphere_density_const(int d);
// Same density from exact 1 - theta and 1 + theta.
double log_sphere_density(int d, double one_minus, double one_plus);

// Importance density of a sphere coordinate, a shifted Beta(a, b) on (-1, 1).
double is_density(double a, double b, double x);
double log_is_density_const(double a, double b);
double log_is_density(double a, double b, double one_minus, double one_plus);

// Scaling function of the chi-root law, nu(x) = 1/x.
double nu_chi(int d, double x);
// E[R - x | R > x] for the chi-root law, by quadrature (diagnostic).
double chi_mean_excess(int d, double x);

// P(X_i > u) for risk i (0-based). Closed form in the Gaussian case,
// adaptive quadrature over the sphere coordinate otherwise.
// Throws NumericalError("threshold too extreme") below 1e-300.
double marginal_tail(const ModelSpec& m, int i, double u);

struct AsymptoticAlpha {
    double full = 0.0;            // sum over all i of P(X_i > u)
    double reduced = 0.0;         // sum over the max-beta, max-lambda indices
    std::vector<int> reduced_indices;
};

AsymptoticAlpha asymptotic_alpha(const ModelSpec& m, double u);

// e(x) = x * nu(log x), the scaling function of exp(R).
double scaling_e(const RadialLaw& r, double x);

// Model-adjusted scaling e_i*(u) = beta_i g u e(y)/y, y = (u/lambda_i)^{1/(beta_i g)}.
// For the chi-root law this is (beta_i g)^2 u / log(u/lambda_i).
double estar(const ModelSpec& m, int i, double u);
inline double xi(const ModelSpec& m, int i, double u) { return estar(m, i, u) / u; }

// Importance-sampling parameter b = log(u) / log(u / e_i*(u)). Meaningful only
// when e_i*(u) < u; returns NaN otherwise.
double is_tuning_b(const ModelSpec& m, int i, double u);

}  // namespace tailrisk
