#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "fglm/datagen.hpp"
#include "fglm/expfam.hpp"
#include "fglm/funcspace.hpp"

namespace fglm {

/// m = max(1, round(c_m n^(1/(alpha+2beta)))), N = round(c_N n^zeta) clamped to [m, n-2].
struct TuningRule {
    double c_m = 1.0;
    double c_N = 2.0;
    std::optional<double> zeta;   ///< defaults to the midpoint of the admissible interval
};

struct Tuning {
    std::size_t m = 0;
    std::size_t N = 0;
    double zeta = 0.0;
};

/// Open interval ((alpha+2beta-1)^-1, (2+2alpha)^-1) that zeta must lie in.
std::pair<double, double> zeta_interval(double alpha, double beta_s) noexcept;

Tuning tuning(std::size_t n, double alpha, double beta_s, const TuningRule& rule = {});

struct NewtonConfig {
    double tol = 1e-10;            ///< stop when sup |gradient| <= tol * n
    int max_iter = 100;
    /// |g| beyond this is treated as an estimate at infinity. The gradient test usually
    /// fires first on separable data, so a converged fit whose fitted means have collapsed
    /// onto boundary responses is flagged as separated as well.
    double separation_bound = 1e3;
};

struct MleFit {
    Eigen::VectorXd g_hat;         ///< (g_0, ..., g_N)
    int iterations = 0;
    double grad_norm = 0.0;        ///< sup norm of the log-likelihood gradient at g_hat
    double objective = 0.0;
    bool converged = false;
    bool separated = false;
    std::vector<double> objective_trace;  ///< start value plus the accumulated gain of each accepted step
};

/// Log-likelihood sum_i y_i eta_i - psi(eta_i) with eta_i = g_0 + sum_j g_j scores(i,j).
double conditional_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores,
                          const ExpFamily& family, const Eigen::VectorXd& g);

/// Unconstrained conditional MLE over R^(N+1) by damped Newton with step halving.
/// Requires N + 1 <= n. A non-finite objective at an accepted iterate raises
/// NumericalError; hitting max_iter leaves `converged` false.
MleFit fit_mle(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores, const ExpFamily& family,
               const NewtonConfig& config = {});

struct FitResult {
    MleFit mle;
    FunctionRep slope_hat;   ///< sum_{j<=m} g_j phi~_j
    std::size_t m = 0;
    std::size_t N = 0;
};

/// FPCA, tuning, MLE over the first N scores, truncation to the first m eigenfunctions.
/// Throws ValidationError when n < 8.
FitResult estimate_slope(const Dataset& ds, const ExpFamily& family, double alpha, double beta_s,
                         const TuningRule& rule = {}, const NewtonConfig& config = {});

/// Integrated squared error ||B - b_hat||^2.
double loss(const FunctionRep& b_hat, const GroundTruth& gt);

}  // namespace fglm
