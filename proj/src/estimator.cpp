#include "fglm/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fglm/errors.hpp"
#include "fglm/fpca.hpp"

namespace fglm {

std::pair<double, double> zeta_interval(double alpha, double beta_s) noexcept {
    return {1.0 / (alpha + 2.0 * beta_s - 1.0), 1.0 / (2.0 + 2.0 * alpha)};
}

Tuning tuning(std::size_t n, double alpha, double beta_s, const TuningRule& rule) {
    if (n < 8) {
        std::ostringstream msg;
        msg << "tuning: sample size " << n << " is below the minimum n = 8";
        throw ValidationError(msg.str());
    }
    if (!(rule.c_m > 0.0) || !(rule.c_N > 0.0)) {
        throw ValidationError("tuning: c_m and c_N must be positive");
    }
    const auto [lo, hi] = zeta_interval(alpha, beta_s);
    Tuning t;
    t.zeta = rule.zeta.value_or(0.5 * (lo + hi));
    if (!(t.zeta > lo && t.zeta < hi)) {
        std::ostringstream msg;
        msg << "tuning: zeta = " << t.zeta << " outside (" << lo << ", " << hi << ")";
        throw ValidationError(msg.str());
    }
    const double nd = static_cast<double>(n);
    const double m_raw = std::round(rule.c_m * std::pow(nd, 1.0 / (alpha + 2.0 * beta_s)));
    t.m = static_cast<std::size_t>(std::max(1.0, m_raw));
    if (t.m > n - 2) {
        std::ostringstream msg;
        msg << "tuning: n = " << n << " too small for m = " << t.m << " <= N <= n-2";
        throw ValidationError(msg.str());
    }
    const double n_raw = std::round(rule.c_N * std::pow(nd, t.zeta));
    t.N = std::clamp(static_cast<std::size_t>(std::max(0.0, n_raw)), t.m, n - 2);
    return t;
}

namespace {

Eigen::MatrixXd design_matrix(const Eigen::MatrixXd& scores) {
    Eigen::MatrixXd xi(scores.rows(), scores.cols() + 1);
    xi.col(0).setOnes();
    xi.rightCols(scores.cols()) = scores;
    return xi;
}

double loglik(const Eigen::VectorXd& y, const Eigen::VectorXd& eta, const ExpFamily& family) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) s += y[i] * eta[i] - family.psi(eta[i]);
    return s;
}

// L(eta + d) - L(eta), summed term by term from the displacement d itself so that
// gains far below the rounding level of L are still resolved.
double loglik_increment(const Eigen::VectorXd& y, const Eigen::VectorXd& eta,
                        const Eigen::VectorXd& d, const ExpFamily& family) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        s += y[i] * d[i] - family.psi_increment(eta[i], d[i]);
    }
    return s;
}

// A response on the boundary of the mean space whose fitted mean has collapsed onto it
// (|eta| > 30 in the boundary direction) only arises when the likelihood keeps rising
// along a ray, i.e. the MLE sits at infinity.
bool saturated(const Eigen::VectorXd& y, const Eigen::VectorXd& eta, const ExpFamily& family) {
    constexpr double edge = 30.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        switch (family.family()) {
            case Family::gaussian: return false;
            case Family::poisson:
                if (y[i] == 0.0 && eta[i] < -edge) return true;
                break;
            case Family::bernoulli:
                if ((y[i] == 0.0 && eta[i] < -edge) || (y[i] == 1.0 && eta[i] > edge)) return true;
                break;
        }
    }
    return false;
}

double initial_intercept(const Eigen::VectorXd& y, const ExpFamily& family) {
    const double n = static_cast<double>(y.size());
    double ybar = y.mean();
    switch (family.family()) {
        case Family::gaussian: break;
        case Family::poisson: ybar = std::max(ybar, 1.0 / (n + 1.0)); break;
        case Family::bernoulli: ybar = std::clamp(ybar, 1.0 / (n + 1.0), n / (n + 1.0)); break;
    }
    return family.mean_to_lambda(ybar);
}

}  // namespace

double conditional_loglik(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores,
                          const ExpFamily& family, const Eigen::VectorXd& g) {
    const Eigen::VectorXd eta = design_matrix(scores) * g;
    return loglik(y, eta, family);
}

MleFit fit_mle(const Eigen::VectorXd& y, const Eigen::MatrixXd& scores, const ExpFamily& family,
               const NewtonConfig& config) {
    const Eigen::Index n = y.size();
    const Eigen::Index n_plus = scores.cols() + 1;
    if (scores.rows() != n) throw ValidationError("fit_mle: scores and responses disagree on n");
    if (n_plus > n) throw ValidationError("fit_mle: need N + 1 <= n");
    if (!y.allFinite()) throw ValidationError("fit_mle: responses must be finite");

    const Eigen::MatrixXd xi = design_matrix(scores);
    const double grad_tol = config.tol * static_cast<double>(n);

    MleFit fit;
    fit.g_hat = Eigen::VectorXd::Zero(n_plus);
    fit.g_hat[0] = initial_intercept(y, family);

    Eigen::VectorXd eta = xi * fit.g_hat;
    double obj = loglik(y, eta, family);
    if (!std::isfinite(obj)) throw NumericalError("fit_mle: initial objective is not finite");
    fit.objective_trace.push_back(obj);

    Eigen::VectorXd resid(n), weight(n);
    for (;;) {
        for (Eigen::Index i = 0; i < n; ++i) {
            resid[i] = y[i] - family.psidot(eta[i]);
            weight[i] = family.psiddot(eta[i]);
        }
        const Eigen::VectorXd grad = xi.transpose() * resid;
        fit.grad_norm = grad.cwiseAbs().maxCoeff();
        if (!std::isfinite(fit.grad_norm)) throw NumericalError("fit_mle: gradient is not finite");
        if (fit.grad_norm <= grad_tol) {
            fit.converged = true;
            fit.separated = saturated(y, eta, family);
            break;
        }
        if (fit.g_hat.cwiseAbs().maxCoeff() > config.separation_bound) {
            fit.separated = true;
            break;
        }
        if (fit.iterations >= config.max_iter) break;

        Eigen::MatrixXd hess = xi.transpose() * weight.asDiagonal() * xi;
        Eigen::LLT<Eigen::MatrixXd> llt(hess);
        double shift = 1e-8 * hess.trace() / static_cast<double>(n_plus);
        for (int attempt = 0; llt.info() != Eigen::Success && attempt < 64; ++attempt) {
            llt.compute(hess + shift * Eigen::MatrixXd::Identity(n_plus, n_plus));
            shift *= 2.0;
        }
        if (llt.info() != Eigen::Success) throw NumericalError("fit_mle: Hessian factorization failed");
        const Eigen::VectorXd step = llt.solve(grad);

        bool accepted = false;
        double t = 1.0;
        for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
            const Eigen::VectorXd trial = fit.g_hat + t * step;
            const Eigen::VectorXd trial_eta = xi * trial;
            const double gain = loglik_increment(y, eta, xi * (t * step), family);
            if (std::isfinite(gain) && gain >= 0.0 && std::isfinite(loglik(y, trial_eta, family))) {
                fit.g_hat = trial;
                eta = trial_eta;
                obj += gain;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;   // no ascent available at machine precision
        ++fit.iterations;
        fit.objective_trace.push_back(obj);
    }
    fit.objective = loglik(y, eta, family);
    if (fit.separated) fit.converged = false;
    return fit;
}

FitResult estimate_slope(const Dataset& ds, const ExpFamily& family, double alpha, double beta_s,
                         const TuningRule& rule, const NewtonConfig& config) {
    const Tuning t = tuning(ds.n(), alpha, beta_s, rule);
    const std::size_t N = std::min(t.N, ds.basis_size());
    const std::size_t m = std::min(t.m, N);
    const SpectralEstimate spec = run_fpca(ds, N);

    FitResult out;
    out.m = m;
    out.N = N;
    out.mle = fit_mle(ds.y, spec.scores, family, config);
    const auto mi = static_cast<Eigen::Index>(m);
    const Eigen::VectorXd coeffs = spec.phi_tilde.leftCols(mi) * out.mle.g_hat.segment(1, mi);
    out.slope_hat = FunctionRep(std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size()));
    return out;
}

double loss(const FunctionRep& b_hat, const GroundTruth& gt) {
    return norm_sq(gt.slope() - b_hat);
}

}  // namespace fglm
