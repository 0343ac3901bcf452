#pragma once

#include <Eigen/Dense>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tailrisk/linalg.hpp"
#include "tailrisk/model.hpp"
#include "tailrisk/random.hpp"

namespace tailrisk {

enum class Method { CMC, AK, MAK, ZR, RN };

struct EstimatorKind {
    Method method = Method::CMC;
    double a = 10.0;  // Beta shape on the (1 + x) side, RN only

    std::string name() const;
    bool operator==(const EstimatorKind&) const = default;
};

inline constexpr double kDefaultIsShapeA = 10.0;

// Accepts CMC, AK, MAK, ZR, RN (case-insensitive). Throws ValidationError
// listing the valid names otherwise.
EstimatorKind parse_estimator(std::string_view name, double a = kDefaultIsShapeA);
std::string valid_estimator_names();

// How the importance-sampling shape b is chosen per stratum j.
enum class BTuning {
    // Minimises the single-risk approximation of the stratum second moment,
    //   int_0^1 P(lambda_j e^{R theta beta_j g} > u)^2 f(theta)^2 / f_IS(a, b, theta) dtheta,
    // over b in (0, min(20, d - 1)), where the integral is finite.
    SecondMoment,
    // b = log(u) / log(u / e_j*(u)); falls back to InverseLogScale where
    // e_j*(u) >= u makes it undefined or negative.
    LogRatio,
    // b = 1 / log(u log(u) / e_j*(u)).
    InverseLogScale,
    Fixed,
};

struct ContextOptions {
    BTuning b_tuning = BTuning::SecondMoment;
    double fixed_b = 1.0;
    double is_a = kDefaultIsShapeA;  // shape a the b search assumes
};

// Per-stratum precomputation for factor A^(j) (row j is e_0).
struct Stratum {
    Eigen::MatrixXd factor;
    // Gaussian conditioning on N_{-0}: beta_i g Y_i = drive_slope_i * t + (rest_scaled * N_rest)_i.
    Eigen::VectorXd drive_slope;
    Eigen::MatrixXd rest_scaled;
    // gamma (beta_j - beta_i a_{i0}); X_j >= X_i  <=>  max_coeff_i * t >= log(lambda_i/lambda_j) + c_i.
    Eigen::VectorXd max_coeff;
    double is_b = 1.0;
    bool b_fallback = false;
};

// Everything an estimator replication needs that depends only on (model, u).
struct ReplicationContext {
    ModelSpec model;
    double u = 0.0;
    FactorizationSet factors;
    std::vector<double> strat_weights;  // P(X_i > u)
    double strat_total = 0.0;
    CategoricalSampler strat;
    std::vector<Stratum> strata;
    Eigen::VectorXd log_lambda;
    Eigen::VectorXd scale;  // beta_i * gamma
    bool independent_gaussian = false;
    bool identical_marginals = false;
    int b_fallbacks = 0;

    int dim() const noexcept { return model.dim(); }
    std::vector<double> is_b_values() const;
};

ReplicationContext make_context(const ModelSpec& m, double u, const ContextOptions& opts = {});

// Scratch buffers reused across replications by one worker.
struct Workspace {
    explicit Workspace(int d);

    Eigen::VectorXd n, y, theta, dir, c;
    std::vector<double> log_coeffs, slopes;
    long clamped = 0;  // IS draws clamped at the sphere poles
};

// Each estimator returns one unbiased sample of alpha(u) = P(S > u) (AK only
// for independent risks). Indices are 0-based.
double cmc(const ReplicationContext& ctx, RngStream& rng, Workspace& ws);
double ak_classic(const ReplicationContext& ctx, RngStream& rng, Workspace& ws);
double mak_partial(const ReplicationContext& ctx, int j, RngStream& rng, Workspace& ws);
double mak(const ReplicationContext& ctx, RngStream& rng, Workspace& ws);
double zr_original(const ReplicationContext& ctx, RngStream& rng, Workspace& ws);
double rn_partial(const ReplicationContext& ctx, int j, double a, double b, RngStream& rng, Workspace& ws);
double rn_partial(const ReplicationContext& ctx, int j, double a, RngStream& rng, Workspace& ws);
double rn(const ReplicationContext& ctx, double a, RngStream& rng, Workspace& ws);
// Conditional estimator of P(S > u, X_j = max) given Theta with Theta_j drawn
// from its nominal law (no importance weight).
double rn_partial_nominal(const ReplicationContext& ctx, int j, RngStream& rng, Workspace& ws);

// Conditional kernels with the random input supplied by the caller.
// MAK stratum j given the non-driver normals N_{-j} (d - 1 values).
double mak_conditional(const ReplicationContext& ctx, int j, std::span<const double> n_rest, Workspace& ws);
// P(S > u, X_j = max | Theta) with S = sum lambda_i exp(beta_i g R Theta_i).
double max_conditional(const ReplicationContext& ctx, int j, const Eigen::VectorXd& theta, Workspace& ws);
// P(S > u | Theta), the unstratified polar kernel.
double zr_conditional(const ReplicationContext& ctx, const Eigen::VectorXd& theta, Workspace& ws);

double sample(const ReplicationContext& ctx, const EstimatorKind& kind, RngStream& rng, Workspace& ws);

// Throws ValidationError when `kind` cannot run on this model (MAK needs the
// log-Gaussian law).
void check_supported(const ReplicationContext& ctx, const EstimatorKind& kind);

// AK output is flagged heuristic unless the risks are iid log-Gaussian. With
// independent non-identical risks the symmetrized form is still unbiased.
bool is_heuristic(const ReplicationContext& ctx, const EstimatorKind& kind);

// Convenience overloads allocating their own workspace.
double cmc(const ReplicationContext& ctx, RngStream& rng);
double mak(const ReplicationContext& ctx, RngStream& rng);
double mak_partial(const ReplicationContext& ctx, int j, RngStream& rng);
double rn(const ReplicationContext& ctx, double a, RngStream& rng);
double zr_original(const ReplicationContext& ctx, RngStream& rng);
double ak_classic(const ReplicationContext& ctx, RngStream& rng);

}  // namespace tailrisk
