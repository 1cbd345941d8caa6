#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fglm/expfam.hpp"
#include "fglm/funcspace.hpp"

namespace fglm {

enum class MeanMode { zero, bumps };

struct GroundTruthOptions {
    double a = 0.5;
    MeanMode mu_mode = MeanMode::zero;
};

/// A member f = (K, a, mu, B) of the parameter class F(R, alpha, beta), truncated
/// to K_trunc Karhunen-Loeve terms. theta and b are indexed from k = 1 at [0].
struct GroundTruth {
    double alpha = 0.0;
    double beta_s = 0.0;
    double R = 0.0;
    double a = 0.0;
    FunctionRep mu;
    std::vector<double> theta;
    std::vector<double> b;
    std::size_t k_trunc = 0;
    ExpFamily family{Family::gaussian};

    FunctionRep slope() const { return FunctionRep(b); }
};

/// theta_k = k^-alpha, b_k = (-1)^(k+1) k^-beta, R = max(2^(alpha+1), 1 + |a| + ||mu||).
/// Throws ValidationError unless alpha > 1, beta_s > (alpha+3)/2 and k_trunc >= 4.
GroundTruth make_ground_truth(double alpha, double beta_s, const ExpFamily& family,
                              std::size_t k_trunc, const GroundTruthOptions& options = {});

struct ClassMembershipReport {
    bool theta_decreasing = true;
    bool theta_upper = true;    ///< R k^-alpha >= theta_k
    bool theta_gap = true;      ///< theta_k >= theta_{k+1} + (alpha/R) k^(-alpha-1)
    bool pairwise_gap = true;   ///< theta_k - theta_j >= (k^-alpha - j^-alpha)/R, all k < j
    bool slope_decay = true;    ///< |b_k| <= R k^-beta
    bool intercept = true;      ///< |a| <= R
    bool mean_norm = true;      ///< ||mu|| <= R

    bool ok() const noexcept {
        return theta_decreasing && theta_upper && theta_gap && pairwise_gap && slope_decay &&
               intercept && mean_norm;
    }
};

/// Exhaustive check of the class conditions, including every pair k < j <= K_trunc.
ClassMembershipReport check_membership(const GroundTruth& gt);

/// Simulated sample. Rows are observations; columns are cosine coefficients.
/// `scores` (coefficients of X_i - mu) is present only for simulated data.
struct Dataset {
    Eigen::MatrixXd x;        ///< n x K coefficient matrix of X_i
    Eigen::MatrixXd scores;   ///< n x K, z_{i,k}; empty when loaded from file
    Eigen::VectorXd y;
    Eigen::VectorXd lambda_true;

    std::size_t n() const noexcept { return static_cast<std::size_t>(x.rows()); }
    std::size_t basis_size() const noexcept { return static_cast<std::size_t>(x.cols()); }
    FunctionRep curve(std::size_t i) const;
};

/// z_{i,k} ~ N(0, theta_k) independent, lambda_i = a + <X_i, B>, y_i ~ Q_{lambda_i}.
/// Deterministic given (gt, n, seed). Throws ValidationError when n < 2.
Dataset sample_dataset(const GroundTruth& gt, std::size_t n, std::uint64_t seed);

/// n^((1-2 beta)/(alpha+2 beta)).
double rho_n(double n, double alpha, double beta_s) noexcept;

/// sum_{k>m} b_k^2 over the truncated truth.
double slope_tail_sq(const GroundTruth& gt, std::size_t m) noexcept;

/// sum_{k>N} theta_k b_k^2: the variance of the linear-predictor truncation error.
double predictor_tail_variance(const GroundTruth& gt, std::size_t n_terms) noexcept;

}  // namespace fglm
