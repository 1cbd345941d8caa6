#include "catch_amalgamated.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "fglm/datagen.hpp"
#include "fglm/errors.hpp"
#include "fglm/estimator.hpp"
#include "fglm/fpca.hpp"

using namespace fglm;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

const ExpFamily kGaussian{Family::gaussian};
const ExpFamily kPoisson{Family::poisson};
const ExpFamily kBernoulli{Family::bernoulli};

VectorXd vec(std::initializer_list<double> v) {
    VectorXd out(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), out.data());
    return out;
}

}  // namespace

TEST_CASE("tuning rule") {
    const Tuning t = tuning(4096, 2, 3);
    CHECK(t.m == 3);
    CHECK(t.N == 7);
    CHECK(t.zeta == Approx(13.0 / 84.0).epsilon(1e-14));
    const auto [lo, hi] = zeta_interval(2, 3);
    CHECK(lo == Approx(1.0 / 7.0));
    CHECK(hi == Approx(1.0 / 6.0));

    const Tuning small = tuning(8, 2, 3);
    CHECK(small.m >= 1);
    CHECK(small.N >= small.m);
    CHECK(small.N <= 6);

    TuningRule wide;
    wide.c_m = 3.0;
    const Tuning clamped = tuning(8, 2, 3, wide);
    CHECK(clamped.N >= clamped.m);
    CHECK(clamped.N <= 6);
}

TEST_CASE("tuning errors") {
    try {
        tuning(7, 2, 3);
        FAIL("expected an error");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("minimum n = 8") != std::string::npos);
    }
    TuningRule bad;
    bad.zeta = 0.2;
    CHECK_THROWS_AS(tuning(1000, 2, 3, bad), ValidationError);
    bad.zeta = 1.0 / 7.0;
    CHECK_THROWS_AS(tuning(1000, 2, 3, bad), ValidationError);
    TuningRule huge;
    huge.c_m = 50.0;
    CHECK_THROWS_AS(tuning(10, 2, 3, huge), ValidationError);
}

TEST_CASE("intercept-only fits") {
    const MatrixXd none(2, 0);
    MleFit fit = fit_mle(vec({1, 3}), none, kGaussian);
    CHECK(fit.converged);
    CHECK(fit.g_hat[0] == Approx(2.0));
    fit = fit_mle(vec({1, 1}), none, kPoisson);
    CHECK(fit.converged);
    CHECK(std::abs(fit.g_hat[0]) <= 1e-12);
}

TEST_CASE("gaussian fit on two points is least squares") {
    MatrixXd z(2, 1);
    z << -1, 1;
    const MleFit fit = fit_mle(vec({0, 2}), z, kGaussian);
    CHECK(fit.converged);
    CHECK(fit.iterations <= 2);
    CHECK(fit.g_hat[0] == Approx(1.0));
    CHECK(fit.g_hat[1] == Approx(1.0));
    CHECK_THROWS_AS(fit_mle(vec({0, 2}), MatrixXd::Ones(2, 2), kGaussian), ValidationError);
}

TEST_CASE("gaussian Newton matches the normal equations in at most two iterations") {
    Rng rng(3);
    std::normal_distribution<double> z;
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 20 + 9 * trial, N = 1 + trial % 10;
        MatrixXd s(n, N);
        VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index k = 0; k < N; ++k) s(i, k) = z(rng);
            y[i] = 0.3 + z(rng);
        }
        MatrixXd xi(n, N + 1);
        xi.col(0).setOnes();
        xi.rightCols(N) = s;
        const VectorXd ols = (xi.transpose() * xi).ldlt().solve(xi.transpose() * y);
        const MleFit fit = fit_mle(y, s, kGaussian);
        CHECK(fit.iterations <= 2);
        CHECK((fit.g_hat - ols).cwiseAbs().maxCoeff() <= 1e-8);
    }
}

TEST_CASE("solver contract on simulated poisson and bernoulli data") {
    for (const ExpFamily& fam : {kPoisson, kBernoulli}) {
        const GroundTruth gt = make_ground_truth(2, 3, fam, 60);
        for (std::size_t r = 0; r < 10; ++r) {
            const Dataset ds = sample_dataset(gt, 800, derive_seed(31, 0, r));
            const SpectralEstimate s = run_fpca(ds, 6);
            NewtonConfig cfg;
            const MleFit fit = fit_mle(ds.y, s.scores, fam, cfg);
            REQUIRE(fit.converged);
            CHECK(fit.grad_norm <= cfg.tol * 800);
            for (std::size_t i = 1; i < fit.objective_trace.size(); ++i) {
                CHECK(fit.objective_trace[i] >= fit.objective_trace[i - 1]);
            }
            CHECK(fit.objective == Approx(conditional_loglik(ds.y, s.scores, fam, fit.g_hat)));

            // permuting observations leaves the estimate unchanged
            std::vector<Eigen::Index> perm(800);
            std::iota(perm.begin(), perm.end(), 0);
            std::reverse(perm.begin(), perm.end());
            std::rotate(perm.begin(), perm.begin() + 137, perm.end());
            VectorXd y2(800);
            MatrixXd s2(800, s.scores.cols());
            for (Eigen::Index i = 0; i < 800; ++i) {
                y2[i] = ds.y[perm[static_cast<std::size_t>(i)]];
                s2.row(i) = s.scores.row(perm[static_cast<std::size_t>(i)]);
            }
            CHECK((fit_mle(y2, s2, fam, cfg).g_hat - fit.g_hat).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("separable bernoulli data is flagged") {
    MatrixXd s(12, 1);
    VectorXd y(12);
    for (int i = 0; i < 12; ++i) {
        s(i, 0) = i < 6 ? -1.0 - i : 1.0 + i;
        y[i] = i < 6 ? 0.0 : 1.0;
    }
    const MleFit fit = fit_mle(y, s, kBernoulli);
    CHECK_FALSE(fit.converged);
    CHECK(fit.separated);
}

TEST_CASE("responses at the mean give a flat slope") {
    const GroundTruth gt = make_ground_truth(2, 3, kPoisson, 30);
    Dataset ds = sample_dataset(gt, 300, 5);
    ds.y.setConstant(kPoisson.psidot(0.5));
    const FitResult fit = estimate_slope(ds, kPoisson, 2, 3);
    CHECK(fit.mle.g_hat[0] == Approx(0.5));
    CHECK(fit.mle.g_hat.tail(fit.N).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(norm_sq(fit.slope_hat) <= 1e-20);
}

TEST_CASE("slope estimate is the truncated expansion") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 40);
    const Dataset ds = sample_dataset(gt, 500, 8);
    const FitResult fit = estimate_slope(ds, kGaussian, 2, 3);
    const SpectralEstimate s = run_fpca(ds, fit.N);

    FunctionRep manual = FunctionRep::zero(40);
    for (std::size_t j = 1; j <= fit.m; ++j) manual = manual + s.eigenfunction(j) * fit.mle.g_hat[static_cast<Eigen::Index>(j)];
    CHECK(norm_sq(manual - fit.slope_hat) <= 1e-24);

    // loss = sum_{j<=m} (g_j - <B, phi~_j>)^2 + ||B - sum_{j<=m} <B, phi~_j> phi~_j||^2
    double head = 0.0;
    FunctionRep proj = FunctionRep::zero(40);
    for (std::size_t j = 1; j <= fit.m; ++j) {
        const double gamma = inner(gt.slope(), s.eigenfunction(j));
        const double diff = fit.mle.g_hat[static_cast<Eigen::Index>(j)] - gamma;
        head += diff * diff;
        proj = proj + s.eigenfunction(j) * gamma;
    }
    CHECK(loss(fit.slope_hat, gt) == Approx(head + norm_sq(gt.slope() - proj)).epsilon(1e-10));
}

TEST_CASE("loss examples") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 20);
    CHECK(loss(gt.slope(), gt) == 0.0);
    CHECK(loss(FunctionRep{}, gt) == Approx(norm_sq(gt.slope())));
    CHECK(loss(gt.slope() + FunctionRep({1.0}), gt) == Approx(1.0));
}

TEST_CASE("estimation needs eight observations") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 20);
    CHECK_THROWS_AS(estimate_slope(sample_dataset(gt, 7, 1), kGaussian, 2, 3), ValidationError);
    CHECK_NOTHROW(estimate_slope(sample_dataset(gt, 8, 1), kGaussian, 2, 3));
}

TEST_CASE("variance-only bound with a null slope") {
    GroundTruthOptions opt;
    opt.a = 0.0;
    GroundTruth gt = make_ground_truth(2, 3, kGaussian, 50, opt);
    std::fill(gt.b.begin(), gt.b.end(), 0.0);
    const std::size_t n = 2000, reps = 200;
    const std::size_t m = tuning(n, 2, 3).m;
    const double bound = 6.0 * std::pow(static_cast<double>(m), 3.0) / n;
    std::size_t within = 0;
    for (std::size_t r = 0; r < reps; ++r) {
        const FitResult fit = estimate_slope(sample_dataset(gt, n, derive_seed(41, 0, r)), kGaussian, 2, 3);
        within += norm_sq(fit.slope_hat) <= bound;
    }
    CHECK(within >= reps * 95 / 100);
}

TEST_CASE("mean loss falls from n = 1000 to n = 4000") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 200);
    double l1000 = 0.0, l4000 = 0.0;
    for (std::size_t r = 0; r < 100; ++r) {
        l1000 += loss(estimate_slope(sample_dataset(gt, 1000, derive_seed(51, 0, r)), kGaussian, 2, 3).slope_hat, gt);
        l4000 += loss(estimate_slope(sample_dataset(gt, 4000, derive_seed(51, 1, r)), kGaussian, 2, 3).slope_hat, gt);
    }
    CHECK(l4000 < l1000);
}
