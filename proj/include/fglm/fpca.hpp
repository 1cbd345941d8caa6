#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "fglm/datagen.hpp"
#include "fglm/funcspace.hpp"

namespace fglm {

/// Descending eigensystem of a symmetric matrix. Column k of `vectors` pairs with values[k].
struct EigenSystem {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};

/// Empirical spectral objects of a functional sample, all in coefficient space.
struct SpectralEstimate {
    FunctionRep xbar;
    Eigen::MatrixXd cov;           ///< K x K sample covariance, divisor n-1
    Eigen::VectorXd theta_tilde;   ///< descending, clamped at 0; exactly 0 from index n-1 on
    Eigen::MatrixXd phi_tilde;     ///< K x K, column k is the k-th eigenfunction's coefficients
    Eigen::MatrixXd scores;        ///< n x N centred scores <X_i - Xbar, phi~_k>

    FunctionRep eigenfunction(std::size_t k) const;  ///< 1-based
};

FunctionRep sample_mean(const Dataset& ds);

/// (n-1)^-1 sum_i (c_i - cbar)(c_i - cbar)^T. Throws ValidationError when n < 2.
Eigen::MatrixXd sample_cov(const Dataset& ds);

/// Full descending eigensystem of a dense symmetric matrix. Eigenvalues below
/// zero are clamped to 0; each eigenvector's largest-magnitude entry is made
/// positive so that output is reproducible. Throws ValidationError when the
/// input is not symmetric to within 1e-10 (relative to its largest entry).
EigenSystem eigendecompose(const Eigen::MatrixXd& cov);

/// n x n_scores matrix of <X_i - xbar, phi~_k>, k = 1..n_scores.
Eigen::MatrixXd compute_scores(const Dataset& ds, const FunctionRep& xbar,
                               const Eigen::MatrixXd& phi_tilde, std::size_t n_scores);

/// Mean, covariance, eigensystem and the first `n_scores` score columns.
SpectralEstimate run_fpca(const Dataset& ds, std::size_t n_scores);

}  // namespace fglm
