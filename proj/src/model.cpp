#include "tailrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "tailrisk/errors.hpp"

namespace tailrisk {

namespace {

constexpr double kStructureTolerance = 1e-12;

void require_positive(const Eigen::VectorXd& v, const char* what) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0) || !std::isfinite(v[i])) {
            std::ostringstream os;
            os << what << '[' << i << "] = " << v[i] << " must be positive and finite";
            throw ValidationError(os.str());
        }
    }
}

}  // namespace

bool ModelSpec::is_gaussian() const noexcept {
    return radial.kind() == RadialLaw::Kind::ChiRoot && radial.dof() == dim();
}

void validate_correlation(const Eigen::MatrixXd& sigma) {
    const Eigen::Index d = sigma.rows();
    if (d == 0 || sigma.cols() != d) throw ValidationError("correlation matrix must be square and non-empty");
    for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(sigma(i, i) - 1.0) > kStructureTolerance) {
            std::ostringstream os;
            os << "correlation matrix diagonal entry (" << i << ',' << i << ") = " << sigma(i, i) << ", expected 1";
            throw ValidationError(os.str());
        }
        for (Eigen::Index j = 0; j < i; ++j) {
            if (std::abs(sigma(i, j) - sigma(j, i)) > kStructureTolerance) {
                std::ostringstream os;
                os << "correlation matrix is not symmetric at (" << i << ',' << j << ')';
                throw ValidationError(os.str());
            }
            if (!(std::abs(sigma(i, j)) <= 1.0)) {
                std::ostringstream os;
                os << "correlation entry (" << i << ',' << j << ") = " << sigma(i, j) << " outside [-1, 1]";
                throw ValidationError(os.str());
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma, Eigen::EigenvaluesOnly);
    const double smallest = eig.eigenvalues().minCoeff();
    if (!(smallest > 0.0)) {
        std::ostringstream os;
        os.precision(6);
        os << "correlation matrix is not positive definite: smallest eigenvalue " << smallest;
        throw ValidationError(os.str());
    }
}

void validate(const ModelSpec& m) {
    const int d = m.dim();
    if (d < 1) throw ValidationError("model needs at least one risk");
    if (m.beta.size() != d) throw ValidationError("beta must have the same length as lambda");
    if (m.sigma.rows() != d || m.sigma.cols() != d) throw ValidationError("sigma must be d x d");
    require_positive(m.lambda, "lambda");
    require_positive(m.beta, "beta");
    if (!(m.gamma > 0.0) || !std::isfinite(m.gamma)) throw ValidationError("gamma must be positive and finite");
    validate_correlation(m.sigma);
    if (m.radial.kind() == RadialLaw::Kind::ChiRoot && m.radial.dof() != d)
        throw ValidationError("chi-root radial law must have dof equal to the model dimension");
}

Eigen::MatrixXd common_correlation(int d, double rho) {
    Eigen::MatrixXd s = Eigen::MatrixXd::Constant(d, d, rho);
    s.diagonal().setOnes();
    return s;
}

LogNormalParams LogNormalParams::common_rho(Eigen::VectorXd mu, Eigen::VectorXd sigma2, double rho) {
    const auto d = static_cast<int>(mu.size());
    return LogNormalParams{std::move(mu), std::move(sigma2), common_correlation(d, rho)};
}

ModelSpec from_lognormal(const LogNormalParams& p) {
    const auto d = static_cast<int>(p.mu.size());
    if (d < 1) throw ValidationError("lognormal block needs at least one risk");
    if (p.sigma2.size() != d) throw ValidationError("sigma2 must have the same length as mu");
    require_positive(p.sigma2, "sigma2");
    ModelSpec m;
    m.lambda = p.mu.array().exp();
    m.beta = p.sigma2.array().sqrt();
    m.gamma = 1.0;
    m.sigma = p.corr;
    m.radial = RadialLaw::chi_root(d);
    validate(m);
    return m;
}

LogNormalParams to_lognormal(const ModelSpec& m) {
    LogNormalParams p;
    p.mu = m.lambda.array().log();
    p.sigma2 = (m.beta.array() * m.gamma).square();
    p.corr = m.sigma;
    return p;
}

MaxIndexSet max_index_set(const ModelSpec& m) {
    MaxIndexSet out;
    const int d = m.dim();
    out.beta_max = m.beta.maxCoeff();
    const double beta_cut = out.beta_max * (1.0 - kTieTolerance);
    out.lambda_max = 0.0;
    for (int i = 0; i < d; ++i) {
        if (m.beta[i] >= beta_cut) {
            out.J.push_back(i);
            out.lambda_max = std::max(out.lambda_max, m.lambda[i]);
        }
    }
    const double lambda_cut = out.lambda_max * (1.0 - kTieTolerance);
    for (int i : out.J) {
        if (m.lambda[i] >= lambda_cut) out.dominant.push_back(i);
    }
    return out;
}

ModelSpec benchmark_model(double rho) {
    constexpr int d = 10;
    Eigen::VectorXd mu(d), sigma2(d);
    for (int i = 0; i < d; ++i) {
        mu[i] = (i + 1) - 10.0;
        sigma2[i] = i + 1.0;
    }
    return from_lognormal(LogNormalParams::common_rho(mu, sigma2, rho));
}

}  // namespace tailrisk
