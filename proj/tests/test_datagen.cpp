#include "catch_amalgamated.hpp"

#include <cmath>

#include "fglm/datagen.hpp"
#include "fglm/errors.hpp"

using namespace fglm;
using Catch::Approx;

namespace {
const ExpFamily kGaussian{Family::gaussian};
}

TEST_CASE("ground truth coefficients") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 4);
    CHECK(gt.theta[0] == 1.0);
    CHECK(gt.theta[1] == 0.25);
    CHECK(gt.theta[2] == Approx(1.0 / 9.0));
    CHECK(gt.b[0] == 1.0);
    CHECK(gt.b[1] == -0.125);
    CHECK(gt.b[2] == Approx(1.0 / 27.0));
    CHECK(gt.R >= 8.0);
    CHECK(gt.a == 0.5);
    CHECK(norm_sq(gt.mu) == 0.0);
}

TEST_CASE("ground truth domain errors") {
    CHECK_THROWS_AS(make_ground_truth(1.0, 3, kGaussian, 10), ValidationError);
    CHECK_THROWS_AS(make_ground_truth(2, 2.5, kGaussian, 10), ValidationError);
    CHECK_THROWS_AS(make_ground_truth(2, 3, kGaussian, 3), ValidationError);
    CHECK_NOTHROW(make_ground_truth(2, 2.6, kGaussian, 4));
}

TEST_CASE("class membership holds exhaustively") {
    for (double alpha : {1.1, 2.0, 3.0}) {
        for (MeanMode mode : {MeanMode::zero, MeanMode::bumps}) {
            GroundTruthOptions opt;
            opt.mu_mode = mode;
            const GroundTruth gt = make_ground_truth(alpha, (alpha + 3) / 2 + 0.5, kGaussian, 200, opt);
            const auto report = check_membership(gt);
            CHECK(report.ok());
            CHECK(gt.R >= std::pow(2.0, alpha + 1));
            CHECK(gt.R >= 1.0 + std::abs(gt.a) + std::sqrt(norm_sq(gt.mu)));
        }
    }
    GroundTruthOptions bumps;
    bumps.mu_mode = MeanMode::bumps;
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 10, bumps);
    CHECK(gt.mu.coeff(2) == 0.25);
    CHECK(gt.mu.coeff(5) == 0.0);
}

TEST_CASE("membership check detects a broken gap") {
    GroundTruth gt = make_ground_truth(2, 3, kGaussian, 20);
    gt.theta[5] = gt.theta[4];
    CHECK_FALSE(check_membership(gt).ok());
    GroundTruth gt2 = make_ground_truth(2, 3, kGaussian, 20);
    gt2.b[3] = 10.0;
    CHECK_FALSE(check_membership(gt2).slope_decay);
}

TEST_CASE("slope tail against the decay bound") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 200);
    for (std::size_t m : {1, 2, 5, 20, 100}) {
        const double tail = slope_tail_sq(gt, m);
        double direct = 0.0;
        for (std::size_t k = m + 1; k <= 200; ++k) direct += std::pow(static_cast<double>(k), -6.0);
        CHECK(tail == Approx(direct).epsilon(1e-12));
        CHECK(tail <= gt.R * gt.R * std::pow(static_cast<double>(m), -5.0) / 5.0);
    }
}

TEST_CASE("rho_n") {
    CHECK(rho_n(1, 2, 3) == 1.0);
    CHECK(rho_n(256, 2, 3) == Approx(0.03125).epsilon(1e-14));
    CHECK(std::log(rho_n(1e6, 2, 3)) / std::log(1e6) == Approx(-0.625));
}

TEST_CASE("dataset construction identity") {
    GroundTruthOptions opt;
    opt.mu_mode = MeanMode::bumps;
    const GroundTruth gt = make_ground_truth(2, 3, ExpFamily(Family::poisson), 50, opt);
    const Dataset ds = sample_dataset(gt, 5, 42);
    REQUIRE(ds.scores.rows() == 5);
    REQUIRE(ds.scores.cols() == 50);
    REQUIRE(ds.y.size() == 5);
    const double mu_b = inner(gt.mu, gt.slope());
    for (Eigen::Index i = 0; i < 5; ++i) {
        double l = gt.a + mu_b;
        for (Eigen::Index k = 0; k < 50; ++k) l += ds.scores(i, k) * gt.b[static_cast<std::size_t>(k)];
        CHECK(std::abs(ds.lambda_true[i] - l) <= 1e-12);
        CHECK(std::abs(ds.lambda_true[i] - gt.a - inner(ds.curve(static_cast<std::size_t>(i)), gt.slope())) <= 1e-12);
        CHECK(ds.y[i] >= 0.0);
    }
    CHECK_THROWS_AS(sample_dataset(gt, 1, 42), ValidationError);
}

TEST_CASE("datasets are deterministic in the seed") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 30);
    const Dataset a = sample_dataset(gt, 40, 7), b = sample_dataset(gt, 40, 7), c = sample_dataset(gt, 40, 8);
    CHECK(a.x == b.x);
    CHECK(a.y == b.y);
    CHECK(a.x != c.x);
}

TEST_CASE("flat slope gives the intercept mean") {
    GroundTruth gt = make_ground_truth(2, 3, kGaussian, 10);
    std::fill(gt.b.begin(), gt.b.end(), 0.0);
    const Dataset ds = sample_dataset(gt, 10000, 3);
    CHECK(std::abs(ds.y.mean() - 0.5) <= 0.04);
}

TEST_CASE("score variances and the linear-predictor tail") {
    const GroundTruth gt = make_ground_truth(2, 3, kGaussian, 40);
    const Dataset ds = sample_dataset(gt, 100000, 9);
    const double var2 = ds.scores.col(1).squaredNorm() / 100000.0;
    CHECK(std::abs(var2 - 0.25) <= 0.005);

    // Var(lambda - lambda_N) against sum_{k>N} theta_k b_k^2
    const std::size_t N = 2;
    const Eigen::Index n = ds.scores.rows();
    Eigen::VectorXd tail = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = N; k < 40; ++k) tail += ds.scores.col(k) * gt.b[static_cast<std::size_t>(k)];
    const double mean = tail.mean();
    const double var = (tail.array() - mean).square().sum() / static_cast<double>(n - 1);
    const double exact = predictor_tail_variance(gt, N);
    const double se = exact * std::sqrt(2.0 / static_cast<double>(n));
    CHECK(std::abs(var - exact) <= 4.0 * se);
}
