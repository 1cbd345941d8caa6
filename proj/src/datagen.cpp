#include "fglm/datagen.hpp"

#include <cmath>
#include <sstream>

#include "fglm/errors.hpp"

namespace fglm {

GroundTruth make_ground_truth(double alpha, double beta_s, const ExpFamily& family,
                              std::size_t k_trunc, const GroundTruthOptions& options) {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) {
        throw ValidationError("make_ground_truth: alpha must exceed 1");
    }
    if (!(beta_s > (alpha + 3.0) / 2.0) || !std::isfinite(beta_s)) {
        std::ostringstream msg;
        msg << "make_ground_truth: beta must exceed (alpha+3)/2 = " << (alpha + 3.0) / 2.0;
        throw ValidationError(msg.str());
    }
    if (k_trunc < 4) throw ValidationError("make_ground_truth: K_trunc must be at least 4");
    if (!std::isfinite(options.a)) throw ValidationError("make_ground_truth: a must be finite");

    GroundTruth gt;
    gt.alpha = alpha;
    gt.beta_s = beta_s;
    gt.a = options.a;
    gt.k_trunc = k_trunc;
    gt.family = family;
    gt.theta.resize(k_trunc);
    gt.b.resize(k_trunc);
    for (std::size_t k = 1; k <= k_trunc; ++k) {
        const double kd = static_cast<double>(k);
        gt.theta[k - 1] = std::pow(kd, -alpha);
        gt.b[k - 1] = (k % 2 == 1 ? 1.0 : -1.0) * std::pow(kd, -beta_s);
    }
    std::vector<double> mu(k_trunc, 0.0);
    if (options.mu_mode == MeanMode::bumps) {
        for (std::size_t k = 1; k <= 4; ++k) mu[k - 1] = 1.0 / static_cast<double>(k * k);
    }
    gt.mu = FunctionRep(std::move(mu));
    gt.R = std::max(std::pow(2.0, alpha + 1.0), 1.0 + std::abs(gt.a) + std::sqrt(norm_sq(gt.mu)));
    return gt;
}

ClassMembershipReport check_membership(const GroundTruth& gt) {
    ClassMembershipReport rep;
    const std::size_t K = gt.theta.size();
    const double R = gt.R;
    const double alpha = gt.alpha;
    // Rounding slack: the conditions are evaluated on values of size ~k^-alpha.
    const double slack = 1e-14;
    for (std::size_t k = 1; k <= K; ++k) {
        const double kd = static_cast<double>(k);
        const double th = gt.theta[k - 1];
        if (R * std::pow(kd, -alpha) < th * (1.0 - slack)) rep.theta_upper = false;
        if (std::abs(gt.b[k - 1]) > R * std::pow(kd, -gt.beta_s) * (1.0 + slack)) {
            rep.slope_decay = false;
        }
        if (k < K) {
            const double next = gt.theta[k];
            if (!(next < th)) rep.theta_decreasing = false;
            if (th - next < (alpha / R) * std::pow(kd, -alpha - 1.0) * (1.0 - slack)) {
                rep.theta_gap = false;
            }
        }
        for (std::size_t j = k + 1; j <= K; ++j) {
            const double need = (std::pow(kd, -alpha) - std::pow(static_cast<double>(j), -alpha)) / R;
            if (th - gt.theta[j - 1] < need * (1.0 - slack)) rep.pairwise_gap = false;
        }
    }
    rep.intercept = std::abs(gt.a) <= R;
    rep.mean_norm = std::sqrt(norm_sq(gt.mu)) <= R;
    return rep;
}

FunctionRep Dataset::curve(std::size_t i) const {
    std::vector<double> c(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index k = 0; k < x.cols(); ++k) c[static_cast<std::size_t>(k)] = x(static_cast<Eigen::Index>(i), k);
    return FunctionRep(std::move(c));
}

Dataset sample_dataset(const GroundTruth& gt, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw ValidationError("sample_dataset: n must be at least 2");
    const auto K = static_cast<Eigen::Index>(gt.k_trunc);
    const auto rows = static_cast<Eigen::Index>(n);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::VectorXd sd(K), b(K), mu(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        sd[k] = std::sqrt(gt.theta[static_cast<std::size_t>(k)]);
        b[k] = gt.b[static_cast<std::size_t>(k)];
        mu[k] = gt.mu.coeff(static_cast<std::size_t>(k) + 1);
    }
    const double offset = gt.a + mu.dot(b);

    Dataset ds;
    ds.scores.resize(rows, K);
    ds.x.resize(rows, K);
    ds.y.resize(rows);
    ds.lambda_true.resize(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index k = 0; k < K; ++k) ds.scores(i, k) = sd[k] * normal(rng);
        ds.x.row(i) = ds.scores.row(i) + mu.transpose();
        const double lambda = offset + ds.scores.row(i).dot(b);
        ds.lambda_true[i] = lambda;
        ds.y[i] = sample_response(gt.family, lambda, rng);
    }
    return ds;
}

double rho_n(double n, double alpha, double beta_s) noexcept {
    return std::pow(n, (1.0 - 2.0 * beta_s) / (alpha + 2.0 * beta_s));
}

double slope_tail_sq(const GroundTruth& gt, std::size_t m) noexcept {
    double s = 0.0;
    for (std::size_t k = gt.b.size(); k > m; --k) s += gt.b[k - 1] * gt.b[k - 1];
    return s;
}

double predictor_tail_variance(const GroundTruth& gt, std::size_t n_terms) noexcept {
    double s = 0.0;
    for (std::size_t k = gt.b.size(); k > n_terms; --k) {
        s += gt.theta[k - 1] * gt.b[k - 1] * gt.b[k - 1];
    }
    return s;
}

}  // namespace fglm
