#include "fglm/spectral_diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fglm/errors.hpp"
#include "fglm/estimator.hpp"
#include "fglm/quadrature.hpp"

namespace fglm {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void require_symmetric(const MatrixXd& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        throw ValidationError(std::string(what) + ": matrix must be square and nonempty");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ValidationError(std::string(what) + ": matrix is not symmetric");
    }
}

// Descending eigensystem without clamping (perturbed operators may be indefinite).
void descending_eigen(const MatrixXd& m, VectorXd& values, MatrixXd& vectors) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m);
    if (solver.info() != Eigen::Success) throw NumericalError("eigensolver failed");
    const Index d = m.rows();
    values = solver.eigenvalues().reverse();
    vectors = solver.eigenvectors().rowwise().reverse();
    (void)d;
}

double spectral_norm_sym(const MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

PerturbationPair PerturbationPair::make(MatrixXd T, MatrixXd T_tilde) {
    require_symmetric(T, "PerturbationPair");
    require_symmetric(T_tilde, "PerturbationPair");
    if (T.rows() != T_tilde.rows()) throw ValidationError("PerturbationPair: size mismatch");
    PerturbationPair p;
    p.T = std::move(T);
    p.T_tilde = std::move(T_tilde);
    descending_eigen(p.T, p.theta, p.e);
    descending_eigen(p.T_tilde, p.theta_tilde, p.e_tilde);
    const MatrixXd delta = p.T_tilde - p.T;
    p.delta_op = spectral_norm_sym(0.5 * (delta + delta.transpose()));
    p.delta_hs = delta.norm();
    return p;
}

AlignedEigenData align(const PerturbationPair& pair) {
    const Index d = pair.T.rows();
    AlignedEigenData al;
    al.sigma = pair.e.transpose() * pair.e_tilde;
    al.t_tilde_e = pair.e.transpose() * pair.T_tilde * pair.e;
    al.sign.resize(d);
    al.lambda = MatrixXd::Zero(d, d);
    al.f.resize(d, d);
    al.r.resize(d, d);
    al.gap.resize(d);
    for (Index k = 0; k < d; ++k) {
        al.sign[k] = al.sigma(k, k) >= 0.0 ? 1 : -1;
        double gap = std::numeric_limits<double>::infinity();
        for (Index j = 0; j < d; ++j) {
            if (j == k) continue;
            const double diff = pair.theta[k] - pair.theta[j];
            gap = std::min(gap, std::abs(diff));
            al.lambda(k, j) = diff != 0.0 ? al.t_tilde_e(j, k) / diff
                                          : std::numeric_limits<double>::quiet_NaN();
        }
        al.gap[k] = gap;
        VectorXd fk = static_cast<double>(al.sign[k]) * al.sigma.col(k);
        fk[k] -= 1.0;
        al.f.col(k) = fk;
        al.r.col(k) = fk - al.lambda.row(k).transpose();
    }
    return al;
}

EigenvalueReport check_eigenvalue_bound(const PerturbationPair& pair) {
    EigenvalueReport rep;
    rep.max_diff = (pair.theta - pair.theta_tilde).cwiseAbs().maxCoeff();
    rep.ratio = pair.delta_op > 0.0 ? rep.max_diff / pair.delta_op : 0.0;
    rep.violated = rep.max_diff > pair.delta_op + 1e-10;
    rep.violated_hs = rep.max_diff > pair.delta_hs + 1e-10;
    return rep;
}

EigenvectorReport check_eigenvector_bound(const PerturbationPair& pair, const AlignedEigenData& al,
                                          std::size_t k) {
    const auto ki = static_cast<Index>(k);
    EigenvectorReport rep;
    rep.admissible = al.admissible(k, pair.delta_op);
    rep.f_norm = al.f.col(ki).norm();
    rep.lambda_norm = al.lambda.row(ki).norm();
    rep.violated = rep.admissible && rep.f_norm > 3.0 * rep.lambda_norm + 1e-10;
    return rep;
}

FkDecompositionReport check_fk_decomposition(const PerturbationPair& pair, const AlignedEigenData& al,
                                             std::size_t k) {
    const auto ki = static_cast<Index>(k);
    FkDecompositionReport rep;
    rep.admissible = al.admissible(k, pair.delta_op);
    const double f_sq = al.f.col(ki).squaredNorm();
    rep.diag_error = std::abs(al.r(ki, ki) + 0.5 * f_sq);
    const double lam_norm = al.lambda.row(ki).norm();
    for (Index j = 0; j < al.r.rows(); ++j) {
        if (j == ki) continue;
        const double bound = 5.0 * pair.delta_op * lam_norm / std::abs(pair.theta[ki] - pair.theta[j]);
        const double rkj = std::abs(al.r(j, ki));
        if (bound > 0.0) rep.max_offdiag_ratio = std::max(rep.max_offdiag_ratio, rkj / bound);
        if (rep.admissible && rkj > bound + 1e-10) rep.violated_offdiag = true;
    }
    rep.violated_diag = rep.admissible && rep.diag_error > 1e-10;
    return rep;
}

ProjectionReport check_projection_bound(const PerturbationPair& pair, const AlignedEigenData& al,
                                        const std::vector<std::size_t>& J, const VectorXd& b) {
    const Index d = pair.T.rows();
    if (b.size() != d) throw ValidationError("check_projection_bound: b has the wrong length");
    std::vector<bool> in_j(static_cast<std::size_t>(d), false);
    for (std::size_t k : J) {
        if (k >= static_cast<std::size_t>(d)) throw ValidationError("check_projection_bound: index out of range");
        if (!al.admissible(k, pair.delta_op)) {
            throw ValidationError("check_projection_bound: gap hypothesis fails for an index in J");
        }
        in_j[k] = true;
    }

    // Exact D = (H~_J - H_J) B in e-coordinates.
    VectorXd d_vec = VectorXd::Zero(d);
    for (std::size_t k : J) {
        const auto ki = static_cast<Index>(k);
        d_vec += al.sigma.col(ki) * al.sigma.col(ki).dot(b);
        d_vec[ki] -= b[ki];
    }

    VectorXd main = VectorXd::Zero(d);
    for (std::size_t k : J) {
        const auto ki = static_cast<Index>(k);
        for (Index j = 0; j < d; ++j) {
            if (in_j[static_cast<std::size_t>(j)]) continue;
            main[ki] += al.lambda(ki, j) * b[j];
            main[j] += al.lambda(ki, j) * b[ki];
        }
    }

    // Remainder operator applied to B, one term per k in J.
    VectorXd remainder = VectorXd::Zero(d);
    for (std::size_t k : J) {
        const auto ki = static_cast<Index>(k);
        const VectorXd rk = al.r.col(ki);
        const VectorXd lk = al.lambda.row(ki).transpose();
        remainder += static_cast<double>(al.sign[ki]) * al.sigma.col(ki) * rk.dot(b);
        remainder += al.f.col(ki) * lk.dot(b);
        remainder += rk * b[ki];
    }

    ProjectionReport rep;
    rep.d_norm = d_vec.norm();
    rep.main_norm = main.norm();
    const VectorXd rho = d_vec - main;
    rep.remainder_sq = rho.squaredNorm();
    rep.identity_error = (d_vec - main - remainder).norm();

    double sum_lam_sq = 0.0, cross = 0.0, r2a = 0.0, r2b = 0.0, r2c = 0.0;
    for (std::size_t k : J) {
        const auto ki = static_cast<Index>(k);
        const double lam_sq = al.lambda.row(ki).squaredNorm();
        double lam_b = 0.0, weighted_b = 0.0, inv_gaps = 0.0;
        for (Index j = 0; j < d; ++j) {
            if (j == ki) continue;
            const double gap = std::abs(pair.theta[ki] - pair.theta[j]);
            lam_b += al.lambda(ki, j) * b[j];
            weighted_b += std::abs(b[j]) / gap;
            inv_gaps += 1.0 / gap;
        }
        sum_lam_sq += lam_sq;
        cross += lam_b * lam_b;
        r2a += lam_sq * weighted_b * weighted_b;
        r2b += std::sqrt(lam_sq) * std::abs(b[ki]) * inv_gaps;
        r2c += lam_sq * b[ki] * b[ki] / (al.gap[ki] * al.gap[ki]);
    }
    rep.r1 = sum_lam_sq * cross;
    rep.r2 = r2a + r2b * r2b + r2c;
    const double denom = rep.r1 + pair.delta_op * pair.delta_op * rep.r2;
    if (denom > 0.0) {
        rep.ratio = rep.remainder_sq / denom;
    } else {
        rep.ratio = rep.remainder_sq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
    }
    return rep;
}

PerturbationPair random_pair(std::size_t dim, double alpha, double eps, Rng& rng) {
    if (dim < 1) throw ValidationError("random_pair: dim must be positive");
    const auto d = static_cast<Index>(dim);
    std::normal_distribution<double> normal(0.0, 1.0);

    MatrixXd g(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j < d; ++j) g(i, j) = normal(rng);
    Eigen::HouseholderQR<MatrixXd> qr(g);
    MatrixXd q = qr.householderQ();
    const MatrixXd rmat = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Index i = 0; i < d; ++i) {
        if (rmat(i, i) < 0.0) q.col(i) = -q.col(i);
    }

    VectorXd theta(d);
    for (Index k = 0; k < d; ++k) theta[k] = std::pow(static_cast<double>(k + 1), -alpha);
    MatrixXd T = q * theta.asDiagonal() * q.transpose();
    T = 0.5 * (T + T.transpose());

    MatrixXd s(d, d);
    for (Index i = 0; i < d; ++i)
        for (Index j = 0; j <= i; ++j) s(i, j) = s(j, i) = normal(rng);
    const double s_norm = spectral_norm_sym(s);
    MatrixXd T_tilde = T + (s_norm > 0.0 ? eps / s_norm : 0.0) * s;

    Eigen::SelfAdjointEigenSolver<MatrixXd> check(T_tilde, Eigen::EigenvaluesOnly);
    const double lowest = check.eigenvalues().minCoeff();
    if (lowest < 0.0) {
        const double shift = -lowest;
        T.diagonal().array() += shift;
        T_tilde.diagonal().array() += shift;
    }
    return PerturbationPair::make(std::move(T), std::move(T_tilde));
}

std::vector<PerturbationRow> run_perturbation_suite(std::size_t reps, std::size_t max_dim,
                                                    std::uint64_t seed) {
    if (max_dim < 2) throw ValidationError("perturbation suite: max_dim must be at least 2");
    std::vector<PerturbationRow> rows;
    rows.reserve(reps);
    for (std::size_t i = 0; i < reps; ++i) {
        PerturbationRow row;
        row.instance = i;
        row.seed = derive_seed(seed, 0, i);
        Rng rng(row.seed);
        std::uniform_int_distribution<std::size_t> dim_dist(2, max_dim);
        std::uniform_real_distribution<double> alpha_dist(1.1, 2.5);
        std::uniform_real_distribution<double> unit(-1.0, 1.0);

        PerturbationPair pair;
        AlignedEigenData al;
        for (;;) {
            row.dim = dim_dist(rng);
            row.alpha = alpha_dist(rng);
            double min_gap = std::numeric_limits<double>::infinity();
            for (std::size_t k = 1; k < row.dim; ++k) {
                min_gap = std::min(min_gap, std::pow(static_cast<double>(k), -row.alpha) -
                                                std::pow(static_cast<double>(k + 1), -row.alpha));
            }
            switch (i % 3) {
                case 0: row.eps = 0.001; break;
                case 1: row.eps = 0.01; break;
                default: row.eps = 0.05 * min_gap; break;
            }
            pair = random_pair(row.dim, row.alpha, row.eps, rng);
            al = align(pair);
            row.admissible = 0;
            for (std::size_t k = 0; k < row.dim; ++k) row.admissible += al.admissible(k, pair.delta_op);
            if (row.admissible > 0) break;
        }
        row.delta_op = pair.delta_op;
        row.delta_hs = pair.delta_hs;

        const EigenvalueReport ev = check_eigenvalue_bound(pair);
        row.eigval_ratio = ev.ratio;
        row.eigval_violation = ev.violated;
        row.eigval_hs_violation = ev.violated_hs;

        std::vector<std::size_t> J;
        for (std::size_t k = 0; k < row.dim; ++k) {
            if (!al.admissible(k, pair.delta_op)) continue;
            const EigenvectorReport vec = check_eigenvector_bound(pair, al, k);
            if (vec.lambda_norm > 0.0) {
                row.eigvec_ratio = std::max(row.eigvec_ratio, vec.f_norm / (3.0 * vec.lambda_norm));
            }
            row.eigvec_violation = row.eigvec_violation || vec.violated;
            const FkDecompositionReport fk = check_fk_decomposition(pair, al, k);
            row.fk_diag_error = std::max(row.fk_diag_error, fk.diag_error);
            row.fk_offdiag_ratio = std::max(row.fk_offdiag_ratio, fk.max_offdiag_ratio);
            row.fk_violation = row.fk_violation || fk.violated_diag || fk.violated_offdiag;
            if (unit(rng) >= 0.0) J.push_back(k);
        }
        if (J.empty()) {
            for (std::size_t k = 0; k < row.dim; ++k) {
                if (al.admissible(k, pair.delta_op)) {
                    J.push_back(k);
                    break;
                }
            }
        }
        VectorXd b(static_cast<Index>(row.dim));
        for (Index k = 0; k < b.size(); ++k) b[k] = unit(rng) * std::pow(static_cast<double>(k + 1), -3.0);
        const ProjectionReport proj = check_projection_bound(pair, al, J, b);
        row.proj_size = J.size();
        row.proj_identity_error = proj.identity_error;
        row.proj_ratio = proj.ratio;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------

LinearizationResult linearization_residual(const MatrixXd& xi, const VectorXd& y,
                                           const VectorXd& gamma, const ExpFamily& family,
                                           double eps1, double eps2) {
    const Index n = xi.rows();
    const Index n_plus = xi.cols();
    if (gamma.size() != n_plus || y.size() != n) {
        throw ValidationError("linearization_residual: dimension mismatch");
    }
    const VectorXd lambda = xi * gamma;
    VectorXd weight(n), resid(n);
    for (Index i = 0; i < n; ++i) {
        weight[i] = family.psiddot(lambda[i]);
        resid[i] = y[i] - family.psidot(lambda[i]);
    }
    const MatrixXd info = xi.transpose() * weight.asDiagonal() * xi;
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(info);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
        throw NumericalError("linearization_residual: information matrix is singular");
    }
    const VectorXd root = es.eigenvalues().cwiseSqrt();
    const MatrixXd info_half = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
    const MatrixXd info_inv_half =
        es.eigenvectors() * root.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();

    LinearizationResult out;
    out.w_max = (xi * info_inv_half).rowwise().norm().maxCoeff();
    out.w_bound = eps1 * eps2 / (2.0 * family.envelope(1.0) * static_cast<double>(n_plus));
    const VectorXd W = info_inv_half * (xi.transpose() * resid);
    out.W_norm = W.norm();
    out.W_bound = std::sqrt(static_cast<double>(n_plus) / eps2);
    out.hypotheses_hold = out.w_max <= out.w_bound && out.W_norm <= out.W_bound;

    NewtonConfig cfg;
    cfg.tol = 1e-12;
    const MleFit fit = fit_mle(y, xi.rightCols(n_plus - 1), family, cfg);
    out.converged = fit.converged;
    out.residual = (info_half * (fit.g_hat - gamma) - W).norm();
    out.violated = out.hypotheses_hold && out.residual > eps1;
    return out;
}

LinearizationReport check_mle_linearization(std::size_t n, const ExpFamily& family,
                                            const VectorXd& gamma, std::size_t reps,
                                            std::uint64_t seed, double eps1, double eps2) {
    if (gamma.size() < 1) throw ValidationError("check_mle_linearization: gamma must be nonempty");
    const Index N = gamma.size() - 1;
    if (static_cast<Index>(n) < N + 2) throw ValidationError("check_mle_linearization: n too small");
    const auto rows = static_cast<Index>(n);

    Rng design_rng(derive_seed(seed, 0, 0));
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXd xi(rows, N + 1);
    for (Index i = 0; i < rows; ++i) {
        xi(i, 0) = 1.0;
        for (Index k = 1; k <= N; ++k) xi(i, k) = normal(design_rng) / static_cast<double>(k);
    }
    const VectorXd lambda = xi * gamma;

    LinearizationReport rep;
    rep.reps = reps;
    const double p = std::min(1.0, 2.0 * eps2);
    rep.rate_bound = 2.0 * eps2 + 4.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(std::max<std::size_t>(reps, 1)));
    VectorXd y(rows);
    for (std::size_t r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, 1, r));
        for (Index i = 0; i < rows; ++i) y[i] = sample_response(family, lambda[i], rng);
        const LinearizationResult res = linearization_residual(xi, y, gamma, family, eps1, eps2);
        rep.w_max = res.w_max;
        rep.w_bound = res.w_bound;
        rep.residuals.push_back(res.residual);
        rep.max_residual = std::max(rep.max_residual, res.residual);
        if (res.hypotheses_hold) {
            ++rep.hypothesis_count;
            if (res.violated) ++rep.violations;
        }
        if (res.residual > eps1) ++rep.unconditional_violations;
    }
    return rep;
}

// ---------------------------------------------------------------------------

BnMoments bn_moments(const ExpFamily& family, double abar, double kappa,
                     std::size_t quadrature_points) {
    const NormalQuadrature q = gauss_hermite_normal(quadrature_points);
    BnMoments m;
    m.abar = abar;
    m.kappa = kappa;
    for (std::size_t i = 0; i < q.nodes.size(); ++i) {
        const double nu = q.nodes[i];
        const double w = q.weights[i] * family.psiddot(abar + kappa * nu);
        m.r0 += w;
        m.r1 += w * nu;
        m.r2 += w * nu * nu;
    }
    return m;
}

MatrixXd bn_block_form(const BnMoments& mom, std::size_t N) {
    const auto dim = static_cast<Index>(N + 1);
    MatrixXd B = mom.r0 * MatrixXd::Identity(dim, dim);
    if (N >= 1) {
        B(0, 1) = B(1, 0) = mom.r1;
        B(1, 1) = mom.r2;
    }
    return B;
}

MatrixXd bn_matrix(const ExpFamily& family, const VectorXd& gamma, const VectorXd& D,
                   std::size_t quadrature_points) {
    if (gamma.size() != D.size() || gamma.size() < 1) {
        throw ValidationError("bn_matrix: gamma and D must have equal nonzero length");
    }
    const Index dim = gamma.size();
    const VectorXd v = D.tail(dim - 1).cwiseProduct(gamma.tail(dim - 1));
    const double kappa = v.norm();
    const BnMoments mom = bn_moments(family, D[0] * gamma[0], kappa, quadrature_points);
    MatrixXd B = mom.r0 * MatrixXd::Identity(dim, dim);
    if (kappa > 0.0) {
        const VectorXd u = v / kappa;
        B.block(0, 1, 1, dim - 1) = mom.r1 * u.transpose();
        B.block(1, 0, dim - 1, 1) = mom.r1 * u;
        B.bottomRightCorner(dim - 1, dim - 1) += (mom.r2 - mom.r0) * u * u.transpose();
    }
    return B;
}

AnBnReport check_An_Bn(std::size_t n, const ExpFamily& family, const VectorXd& gamma,
                       const VectorXd& D, std::size_t reps, std::uint64_t seed) {
    if (reps < 2) throw ValidationError("check_An_Bn: need at least two replications");
    if (n < 1) throw ValidationError("check_An_Bn: n must be positive");
    const Index dim = gamma.size();
    AnBnReport rep;
    rep.n = n;
    rep.N = static_cast<std::size_t>(dim - 1);
    rep.reps = reps;
    const VectorXd v = D.tail(dim - 1).cwiseProduct(gamma.tail(dim - 1));
    rep.moments = bn_moments(family, D[0] * gamma[0], v.norm());
    rep.B = bn_matrix(family, gamma, D);

    const VectorXd dg = D.cwiseProduct(gamma);
    const auto rows = static_cast<Index>(n);
    MatrixXd sum = MatrixXd::Zero(dim, dim), sum_sq = MatrixXd::Zero(dim, dim);
    MatrixXd eta(rows, dim);
    VectorXd w(rows);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t r = 0; r < reps; ++r) {
        Rng rng(derive_seed(seed, n, r));
        for (Index i = 0; i < rows; ++i) {
            eta(i, 0) = 1.0;
            for (Index k = 1; k < dim; ++k) eta(i, k) = normal(rng);
            w[i] = family.psiddot(eta.row(i).dot(dg));
        }
        const MatrixXd A = eta.transpose() * w.asDiagonal() * eta / static_cast<double>(n);
        sum += A;
        sum_sq += A.cwiseProduct(A);
        const double dist = spectral_norm_sym(A - rep.B);
        rep.mean_op_dist += dist;
        rep.mean_sq_op_dist += dist * dist;
    }
    const double rd = static_cast<double>(reps);
    rep.mean_A = sum / rd;
    rep.mean_op_dist /= rd;
    rep.mean_sq_op_dist /= rd;
    for (Index i = 0; i < dim; ++i) {
        for (Index j = 0; j < dim; ++j) {
            const double var = std::max(0.0, (sum_sq(i, j) - rd * rep.mean_A(i, j) * rep.mean_A(i, j)) / (rd - 1.0));
            const double se = std::sqrt(var / rd);
            const double diff = std::abs(rep.mean_A(i, j) - rep.B(i, j));
            double z = 0.0;
            if (se > 0.0) {
                z = diff / se;
            } else if (diff > 1e-12) {
                z = std::numeric_limits<double>::infinity();
            }
            rep.max_entry_z = std::max(rep.max_entry_z, z);
        }
    }
    Eigen::SelfAdjointEigenSolver<MatrixXd> es(rep.B, Eigen::EigenvaluesOnly);
    rep.binv_norm = 1.0 / es.eigenvalues().minCoeff();
    const auto& m = rep.moments;
    const double det = m.r0 * m.r2 - m.r1 * m.r1;
    rep.binv_bound = std::max(det > 0.0 ? (m.r0 + m.r2) / det : std::numeric_limits<double>::infinity(),
                              1.0 / m.r0);
    return rep;
}

AnBnProfile an_bn_profile(std::size_t n) {
    const auto N = static_cast<Index>(std::floor(std::pow(static_cast<double>(n), 0.2) + 1e-12));
    AnBnProfile p;
    p.gamma.resize(N + 1);
    p.D.resize(N + 1);
    p.gamma[0] = 0.3;
    p.D[0] = 1.0;
    for (Index k = 1; k <= N; ++k) {
        const double kd = static_cast<double>(k);
        p.gamma[k] = (k % 2 == 1 ? 1.0 : -1.0) * std::pow(kd, -3.0);
        p.D[k] = 1.0 / kd;
    }
    return p;
}

// ---------------------------------------------------------------------------

std::vector<ChisqTailRow> check_chisq_maximal(std::size_t n, const std::vector<double>& tau,
                                              const std::vector<double>& x_grid, std::size_t reps,
                                              std::uint64_t seed) {
    if (n < 1 || tau.empty() || reps < 1) {
        throw ValidationError("check_chisq_maximal: need n >= 1, nonempty weights and reps >= 1");
    }
    if (std::any_of(tau.begin(), tau.end(), [](double t) { return !(t >= 0.0) || !std::isfinite(t); })) {
        throw ValidationError("check_chisq_maximal: weights must be finite and nonnegative");
    }
    const double T = std::accumulate(tau.begin(), tau.end(), 0.0);
    std::vector<ChisqTailRow> rows(x_grid.size());
    for (std::size_t j = 0; j < x_grid.size(); ++j) {
        rows[j].x = x_grid[j];
        rows[j].threshold = 4.0 * T * (std::log(static_cast<double>(n)) + x_grid[j]);
        rows[j].bound = 2.0 * std::exp(-x_grid[j]);
    }
    std::vector<std::size_t> hits(x_grid.size(), 0);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t r = 0; r < reps; ++r) {
        double max_w = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double w = 0.0;
            for (double t : tau) {
                const double z = normal(rng);
                w += t * z * z;
            }
            max_w = std::max(max_w, w);
        }
        for (std::size_t j = 0; j < rows.size(); ++j) hits[j] += max_w > rows[j].threshold;
    }
    const double rd = static_cast<double>(reps);
    for (std::size_t j = 0; j < rows.size(); ++j) {
        const double p = static_cast<double>(hits[j]) / rd;
        rows[j].estimate = p;
        rows[j].se = std::sqrt(p * (1.0 - p) / rd);
        rows[j].within = p <= rows[j].bound + 4.0 * rows[j].se;
    }
    return rows;
}

}  // namespace fglm
