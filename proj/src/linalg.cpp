#include "tailrisk/linalg.hpp"

#include <cmath>
#include <sstream>

#include "tailrisk/errors.hpp"

namespace tailrisk {

Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a) {
    const Eigen::Index d = a.rows();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
        double pivot = a(j, j);
        for (Eigen::Index k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
        if (!(pivot > kCholeskyPivotTolerance)) {
            std::ostringstream os;
            os << "Cholesky breakdown: leading minor of order " << (j + 1)
               << " is not positive definite (pivot " << pivot << ")";
            throw ValidationError(os.str());
        }
        const double ljj = std::sqrt(pivot);
        l(j, j) = ljj;
        for (Eigen::Index i = j + 1; i < d; ++i) {
            double s = a(i, j);
            for (Eigen::Index k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            l(i, j) = s / ljj;
        }
    }
    return l;
}

Eigen::MatrixXd driver_factor(const Eigen::MatrixXd& sigma, int j) {
    const auto d = static_cast<int>(sigma.rows());
    Eigen::PermutationMatrix<Eigen::Dynamic> swap(d);
    swap.setIdentity();
    swap.applyTranspositionOnTheRight(0, j);
    const Eigen::MatrixXd permuted = swap.transpose() * sigma * swap;
    Eigen::MatrixXd l = cholesky_lower(permuted);
    Eigen::MatrixXd a = swap * l;
    // Exact unit row; the Cholesky of a unit-diagonal matrix gives 1 only up to rounding.
    a.row(j).setZero();
    a(j, 0) = 1.0;
    return a;
}

FactorizationSet factorize_all(const Eigen::MatrixXd& sigma) {
    const auto d = static_cast<int>(sigma.rows());
    std::vector<Eigen::MatrixXd> factors;
    factors.reserve(d);
    for (int j = 0; j < d; ++j) factors.push_back(driver_factor(sigma, j));
    return FactorizationSet(std::move(factors), std::vector<int>(d, 0));
}

}  // namespace tailrisk
