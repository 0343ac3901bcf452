#pragma once

#include <Eigen/Dense>
#include <vector>

namespace tailrisk {

// One factor per risk index j: A^(j) (A^(j))^T = sigma and row j of A^(j) is
// the unit vector e_{driver(j)}, so Y_j is driven by a single coordinate.
class FactorizationSet {
public:
    FactorizationSet() = default;
    FactorizationSet(std::vector<Eigen::MatrixXd> factors, std::vector<int> drivers)
        : factors_(std::move(factors)), drivers_(std::move(drivers)) {}

    int size() const noexcept { return static_cast<int>(factors_.size()); }
    const Eigen::MatrixXd& factor(int j) const { return factors_.at(j); }
    int driver(int j) const { return drivers_.at(j); }

private:
    std::vector<Eigen::MatrixXd> factors_;
    std::vector<int> drivers_;
};

inline constexpr double kCholeskyPivotTolerance = 1e-12;

// Lower-triangular L with L L^T = a. Throws ValidationError naming the
// leading minor whose pivot falls below kCholeskyPivotTolerance.
Eigen::MatrixXd cholesky_lower(const Eigen::MatrixXd& a);

// Factor with row j equal to e_0: swap j <-> 0, factor, swap rows back.
Eigen::MatrixXd driver_factor(const Eigen::MatrixXd& sigma, int j);

FactorizationSet factorize_all(const Eigen::MatrixXd& sigma);

inline Eigen::VectorXd transform(const Eigen::MatrixXd& a, const Eigen::VectorXd& n) {
    return a * n;
}

}  // namespace tailrisk
