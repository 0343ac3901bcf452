#pragma once

#include <Eigen/Dense>
#include <vector>

#include "tailrisk/radial.hpp"

namespace tailrisk {

// Aggregated risk S = sum_i lambda_i * exp(beta_i * gamma * Y_i) with
// Y = A N (Gaussian case) or Y = R * A U (elliptical case), A A^T = sigma.
struct ModelSpec {
    Eigen::VectorXd lambda;
    Eigen::VectorXd beta;
    double gamma = 1.0;
    Eigen::MatrixXd sigma;
    RadialLaw radial = RadialLaw::chi_root(1);

    int dim() const noexcept { return static_cast<int>(lambda.size()); }

    // True when R is the chi-root law of the model dimension, i.e. the risks
    // are jointly log-Gaussian.
    bool is_gaussian() const noexcept;
};

// Marginal log-normal parametrisation: log X_i ~ N(mu_i, sigma2_i) with
// Gaussian correlation matrix `corr`.
struct LogNormalParams {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma2;
    Eigen::MatrixXd corr;

    static LogNormalParams common_rho(Eigen::VectorXd mu, Eigen::VectorXd sigma2, double rho);
};

struct MaxIndexSet {
    std::vector<int> J;          // indices attaining max beta (0-based)
    std::vector<int> dominant;   // subset of J attaining max lambda within J
    double beta_max = 0.0;
    double lambda_max = 0.0;
    int dm() const noexcept { return static_cast<int>(dominant.size()); }
};

inline constexpr double kTieTolerance = 1e-12;

// Throws ValidationError on any violated invariant. Positive definiteness is
// checked via the smallest eigenvalue, which is named in the message.
void validate(const ModelSpec& m);
void validate_correlation(const Eigen::MatrixXd& sigma);

Eigen::MatrixXd common_correlation(int d, double rho);

ModelSpec from_lognormal(const LogNormalParams& p);
LogNormalParams to_lognormal(const ModelSpec& m);

MaxIndexSet max_index_set(const ModelSpec& m);

// d = 10, mu_i = i - 10, sigma2_i = i, common correlation rho.
ModelSpec benchmark_model(double rho);

}  // namespace tailrisk
