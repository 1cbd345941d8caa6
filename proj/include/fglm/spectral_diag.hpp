#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "fglm/expfam.hpp"
#include "fglm/random.hpp"

namespace fglm {

// ---------------------------------------------------------------------------
// Perturbation of symmetric operators
//
// T has eigenpairs (theta_k, e_k), T~ = T + Delta has (theta~_k, e~_k), both
// sorted descending. All vectors below are expressed in the e-basis, so e_k is
// the k-th unit vector. Indices are 0-based.
// ---------------------------------------------------------------------------

struct PerturbationPair {
    Eigen::MatrixXd T;
    Eigen::MatrixXd T_tilde;
    Eigen::VectorXd theta;          ///< eigenvalues of T, descending
    Eigen::MatrixXd e;              ///< eigenvectors of T (columns), ambient coordinates
    Eigen::VectorXd theta_tilde;
    Eigen::MatrixXd e_tilde;
    double delta_op = 0.0;          ///< ||Delta||_2
    double delta_hs = 0.0;          ///< ||Delta||_F

    /// Throws ValidationError unless both matrices are square, equal-sized and
    /// symmetric to 1e-10.
    static PerturbationPair make(Eigen::MatrixXd T, Eigen::MatrixXd T_tilde);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(T.rows()); }
};

/// Sign-aligned perturbation vectors, all in the e-basis.
///   sigma(j,k) = <e_j, e~_k>,  sign_k = sign(sigma(k,k)) with sign(0) = +1
///   f_k = sign_k e~_k - e_k
///   Lambda(k,j) = T~_{j,k} / (theta_k - theta_j) for j != k, 0 on the diagonal
///   r_k = f_k - Lambda_k
///   gap_k = min_{j != k} |theta_j - theta_k|
struct AlignedEigenData {
    Eigen::MatrixXd sigma;
    Eigen::VectorXi sign;
    Eigen::MatrixXd t_tilde_e;      ///< <e_j, T~ e_k>
    Eigen::MatrixXd lambda;         ///< row k is Lambda_k
    Eigen::MatrixXd f;              ///< column k is f_k
    Eigen::MatrixXd r;              ///< column k is r_k
    Eigen::VectorXd gap;

    /// Hypothesis gap_k > 5 delta.
    bool admissible(std::size_t k, double delta) const { return gap[static_cast<Eigen::Index>(k)] > 5.0 * delta; }
};

AlignedEigenData align(const PerturbationPair& pair);

struct EigenvalueReport {
    double max_diff = 0.0;     ///< max_j |theta_j - theta~_j|
    double ratio = 0.0;        ///< max_diff / delta_op (0 when delta_op = 0)
    bool violated = false;     ///< max_diff > delta_op + 1e-10
    bool violated_hs = false;  ///< same bound with the Frobenius norm
};

EigenvalueReport check_eigenvalue_bound(const PerturbationPair& pair);

struct EigenvectorReport {
    bool admissible = false;
    double f_norm = 0.0;
    double lambda_norm = 0.0;
    bool violated = false;     ///< ||f_k|| > 3 ||Lambda_k|| + 1e-10
};

EigenvectorReport check_eigenvector_bound(const PerturbationPair& pair, const AlignedEigenData& al,
                                          std::size_t k);

struct FkDecompositionReport {
    bool admissible = false;
    double diag_error = 0.0;     ///< |<r_k, e_k> + ||f_k||^2 / 2|
    double max_offdiag_ratio = 0.0;  ///< max_j |<r_k,e_j>| / (5 delta ||Lambda_k|| / |theta_k - theta_j|)
    bool violated_diag = false;
    bool violated_offdiag = false;
};

FkDecompositionReport check_fk_decomposition(const PerturbationPair& pair, const AlignedEigenData& al,
                                             std::size_t k);

struct ProjectionReport {
    double d_norm = 0.0;              ///< ||(H~_J - H_J) B||
    double main_norm = 0.0;           ///< first-order term
    double remainder_sq = 0.0;        ///< ||rho||^2, rho = D - main
    double identity_error = 0.0;      ///< ||D - (main + R_J B)||, R_J B built term by term
    double r1 = 0.0;
    double r2 = 0.0;
    double ratio = 0.0;               ///< ||rho||^2 / (R1 + delta^2 R2); 0 when both vanish
};

/// Eigenprojection perturbation for B = sum_k b_k e_k and the index set J.
/// The first-order term is sum_{k in J, j not in J} Lambda(k,j) (b_j e_k + b_k e_j).
/// Throws ValidationError if some k in J has gap_k <= 5 delta_op.
ProjectionReport check_projection_bound(const PerturbationPair& pair, const AlignedEigenData& al,
                                        const std::vector<std::size_t>& J, const Eigen::VectorXd& b);

/// T = Q diag(k^-alpha) Q^T with Haar-random Q and Delta = eps * S / ||S||_2 for a
/// symmetric Gaussian S. If T + Delta is indefinite, both matrices are shifted by the
/// same multiple of the identity (eigenvectors, gaps and Delta are unchanged).
PerturbationPair random_pair(std::size_t dim, double alpha, double eps, Rng& rng);

struct PerturbationRow {
    std::size_t instance = 0;
    std::uint64_t seed = 0;
    std::size_t dim = 0;
    double alpha = 0.0;
    double eps = 0.0;
    double delta_op = 0.0;
    double delta_hs = 0.0;
    std::size_t admissible = 0;         ///< number of k with gap_k > 5 delta
    double eigval_ratio = 0.0;
    bool eigval_violation = false;
    bool eigval_hs_violation = false;
    double eigvec_ratio = 0.0;          ///< max_k ||f_k|| / (3 ||Lambda_k||) over admissible k
    bool eigvec_violation = false;
    double fk_diag_error = 0.0;
    double fk_offdiag_ratio = 0.0;
    bool fk_violation = false;
    std::size_t proj_size = 0;
    double proj_identity_error = 0.0;
    double proj_ratio = 0.0;
};

/// `reps` instances with dim uniform on [2, max_dim], alpha uniform on [1.1, 2.5] and
/// eps cycling through {0.001, 0.01, 0.05 * min gap}. Instance i uses seed
/// derive_seed(seed, 0, i), so rows do not depend on execution order.
std::vector<PerturbationRow> run_perturbation_suite(std::size_t reps, std::size_t max_dim,
                                                    std::uint64_t seed);

// ---------------------------------------------------------------------------
// MLE linearization: g_hat = gamma + J_n^{-1/2} (W_n + r_n)
// ---------------------------------------------------------------------------

struct LinearizationResult {
    double residual = 0.0;       ///< |r_n| = |J^{1/2}(g_hat - gamma) - W_n|
    double w_max = 0.0;          ///< max_i |J^{-1/2} xi_i|
    double w_bound = 0.0;        ///< eps1 eps2 / (2 G(1) N_+)
    double W_norm = 0.0;
    double W_bound = 0.0;        ///< sqrt(N_+ / eps2)
    bool hypotheses_hold = false;
    bool violated = false;       ///< hypotheses hold and residual > eps1
    bool converged = false;
};

/// One evaluation for a fixed design `xi` (n x N_+, first column all ones) and responses y.
LinearizationResult linearization_residual(const Eigen::MatrixXd& xi, const Eigen::VectorXd& y,
                                           const Eigen::VectorXd& gamma, const ExpFamily& family,
                                           double eps1 = 0.5, double eps2 = 0.1);

struct LinearizationReport {
    std::size_t reps = 0;
    std::size_t hypothesis_count = 0;   ///< replications where both hypotheses hold
    std::size_t violations = 0;         ///< among those
    std::size_t unconditional_violations = 0;  ///< residual > eps1 over all replications
    double max_residual = 0.0;
    double w_max = 0.0;
    double w_bound = 0.0;
    double rate_bound = 0.0;            ///< 2 eps2 + 4 sqrt(2 eps2 (1 - 2 eps2) / reps)
    std::vector<double> residuals;
};

/// Fixed design xi_i = (1, z_i), z_{i,k} ~ N(0, k^-2), drawn once from `seed`;
/// responses redrawn in each of `reps` replications from Q_{xi_i' gamma}.
/// gamma has N + 1 entries.
LinearizationReport check_mle_linearization(std::size_t n, const ExpFamily& family,
                                            const Eigen::VectorXd& gamma, std::size_t reps,
                                            std::uint64_t seed, double eps1 = 0.5,
                                            double eps2 = 0.1);

// ---------------------------------------------------------------------------
// A_n = n^-1 sum eta_i eta_i' psi''(gamma' D eta_i) and its expectation B_n
// ---------------------------------------------------------------------------

/// r_j = E nu^j psi''(abar + kappa nu), nu ~ N(0,1), j = 0, 1, 2.
struct BnMoments {
    double abar = 0.0;
    double kappa = 0.0;
    double r0 = 0.0;
    double r1 = 0.0;
    double r2 = 0.0;
};

BnMoments bn_moments(const ExpFamily& family, double abar, double kappa,
                     std::size_t quadrature_points = 64);

/// diag(F, r0 I_{N-1}) with F = [[r0, r1], [r1, r2]], in coordinates rotated so that
/// gamma' D eta = abar + kappa eta_1. Dimension N + 1.
Eigen::MatrixXd bn_block_form(const BnMoments& mom, std::size_t N);

/// B_n in the original coordinates: [[r0, r1 u'], [r1 u, r0 I + (r2 - r0) u u']]
/// with u the unit direction of (D_k gamma_k)_{k>=1}.
Eigen::MatrixXd bn_matrix(const ExpFamily& family, const Eigen::VectorXd& gamma,
                          const Eigen::VectorXd& D, std::size_t quadrature_points = 64);

struct AnBnReport {
    std::size_t n = 0;
    std::size_t N = 0;
    std::size_t reps = 0;
    BnMoments moments;
    Eigen::MatrixXd B;
    Eigen::MatrixXd mean_A;
    double max_entry_z = 0.0;          ///< max |mean A - B| / SE over entries
    double mean_op_dist = 0.0;         ///< average ||A_n - B_n||_2
    double mean_sq_op_dist = 0.0;      ///< average ||A_n - B_n||_2^2
    double binv_norm = 0.0;            ///< ||B_n^-1||_2
    double binv_bound = 0.0;           ///< max((r0 + r2)/(r0 r2 - r1^2), 1/r0)
};

AnBnReport check_An_Bn(std::size_t n, const ExpFamily& family, const Eigen::VectorXd& gamma,
                       const Eigen::VectorXd& D, std::size_t reps, std::uint64_t seed);

/// Default profile: N = floor(n^0.2), gamma_0 = 0.3, gamma_k = (-1)^(k+1) k^-3,
/// D = diag(1, k^-1) (square roots of theta_k = k^-2).
struct AnBnProfile {
    Eigen::VectorXd gamma;
    Eigen::VectorXd D;
};
AnBnProfile an_bn_profile(std::size_t n);

// ---------------------------------------------------------------------------
// Weighted chi-square maximal inequality
// ---------------------------------------------------------------------------

struct ChisqTailRow {
    double x = 0.0;
    double threshold = 0.0;   ///< 4 T (log n + x)
    double estimate = 0.0;    ///< Monte Carlo P{max_i W_i > threshold}
    double se = 0.0;
    double bound = 0.0;       ///< 2 e^-x
    bool within = false;      ///< estimate <= bound + 4 se
};

/// W_i = sum_k tau_k eta_{i,k}^2 with the same weight profile for each i.
std::vector<ChisqTailRow> check_chisq_maximal(std::size_t n, const std::vector<double>& tau,
                                              const std::vector<double>& x_grid, std::size_t reps,
                                              std::uint64_t seed);

}  // namespace fglm
