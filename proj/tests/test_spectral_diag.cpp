#include "catch_amalgamated.hpp"

#include <cmath>

#include "fglm/errors.hpp"
#include "fglm/spectral_diag.hpp"

using namespace fglm;
using Catch::Approx;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

PerturbationPair two_by_two() {
    MatrixXd T(2, 2), Tt(2, 2);
    T << 2, 0, 0, 1;
    Tt << 2, 0.1, 0.1, 1;
    return PerturbationPair::make(T, Tt);
}

}  // namespace

TEST_CASE("pair construction validates symmetry") {
    MatrixXd T = MatrixXd::Identity(3, 3), bad = T;
    bad(0, 1) = 1e-3;
    CHECK_THROWS_AS(PerturbationPair::make(T, bad), ValidationError);
    CHECK_THROWS_AS(PerturbationPair::make(T, MatrixXd::Identity(2, 2)), ValidationError);
}

TEST_CASE("unperturbed operator") {
    MatrixXd T = VectorXd::LinSpaced(4, 4, 1).asDiagonal();
    const PerturbationPair p = PerturbationPair::make(T, T);
    const AlignedEigenData al = align(p);
    const auto ev = check_eigenvalue_bound(p);
    CHECK(ev.max_diff == 0.0);
    CHECK(ev.ratio == 0.0);
    for (std::size_t k = 0; k < 4; ++k) {
        const auto vec = check_eigenvector_bound(p, al, k);
        CHECK(vec.f_norm == 0.0);
        CHECK(vec.lambda_norm == 0.0);
        CHECK(check_fk_decomposition(p, al, k).diag_error == 0.0);
    }
    VectorXd b(4);
    b << 1, -0.5, 0.25, 0.1;
    const auto proj = check_projection_bound(p, al, {0, 2}, b);
    CHECK(proj.d_norm == 0.0);
    CHECK(proj.r1 == 0.0);
    CHECK(proj.r2 == 0.0);
    CHECK(proj.ratio == 0.0);
}

TEST_CASE("two by two closed forms") {
    const PerturbationPair p = two_by_two();
    CHECK(p.delta_op == Approx(0.1));
    CHECK(p.delta_hs == Approx(std::sqrt(0.02)));

    const auto ev = check_eigenvalue_bound(p);
    CHECK(ev.max_diff == Approx(2.0099019513592786 - 2.0).epsilon(1e-10));
    CHECK_FALSE(ev.violated);

    const AlignedEigenData al = align(p);
    const auto vec = check_eigenvector_bound(p, al, 0);
    CHECK(vec.admissible);
    CHECK(vec.lambda_norm == Approx(0.1));
    // sigma_1 e~_1 - e_1 with rotation angle atan(0.2)/2
    CHECK(vec.f_norm == Approx(0.0986577248058134).epsilon(1e-12));
    CHECK(vec.f_norm == Approx(2.0 * std::sin(0.25 * std::atan(0.2))).epsilon(1e-12));
    CHECK_FALSE(vec.violated);

    CHECK(al.r(0, 0) == Approx(-0.004866673331929805).epsilon(1e-10));
    const auto fk = check_fk_decomposition(p, al, 0);
    CHECK(fk.diag_error <= 1e-15);
    CHECK_FALSE(fk.violated_offdiag);
}

TEST_CASE("two by two projection difference against the projector oracle") {
    const PerturbationPair p = two_by_two();
    const AlignedEigenData al = align(p);
    VectorXd b(2);
    b << 0, 1;
    const auto rep = check_projection_bound(p, al, {0}, b);

    const double phi = 0.5 * std::atan(0.2);
    VectorXd et(2);
    et << std::cos(phi), std::sin(phi);
    const VectorXd B = p.e * b;
    const VectorXd D = et * et.dot(B) - p.e.col(0) * p.e.col(0).dot(B);
    CHECK(rep.d_norm == Approx(D.norm()).epsilon(1e-12));
    CHECK(rep.d_norm == Approx(std::abs(std::sin(phi))).epsilon(1e-12));
    CHECK(rep.identity_error <= 1e-12);
    CHECK(std::isfinite(rep.ratio));
}

TEST_CASE("gap hypothesis is enforced for the projection check") {
    MatrixXd T(3, 3), Tt(3, 3);
    T << 1, 0, 0, 0, 0.9, 0, 0, 0, 0.1;
    Tt = T;
    Tt(0, 1) = Tt(1, 0) = 0.05;
    const PerturbationPair p = PerturbationPair::make(T, Tt);
    const AlignedEigenData al = align(p);
    CHECK_FALSE(al.admissible(0, p.delta_op));
    CHECK_THROWS_AS(check_projection_bound(p, al, {0}, VectorXd::Ones(3)), ValidationError);
    CHECK_FALSE(check_eigenvector_bound(p, al, 0).admissible);
}

TEST_CASE("structural identities on random pairs") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t dim = 2 + trial % 11;
        const PerturbationPair p = random_pair(dim, 1.1 + 0.007 * trial, trial % 2 ? 0.01 : 0.001, rng);
        const AlignedEigenData al = align(p);
        CHECK(p.delta_op <= p.delta_hs + 1e-15);
        CHECK((p.T - p.T.transpose()).cwiseAbs().maxCoeff() <= 1e-10);
        for (std::size_t k = 0; k < dim; ++k) {
            const auto ki = static_cast<Eigen::Index>(k);
            CHECK(al.sign[ki] * al.sigma(ki, ki) >= 0.0);
            CHECK(al.lambda(ki, ki) == 0.0);
            const VectorXd fk = al.f.col(ki);
            CHECK((fk - al.lambda.row(ki).transpose() - al.r.col(ki)).cwiseAbs().maxCoeff() <= 1e-15);
            for (std::size_t j = 0; j < dim; ++j) {
                const auto ji = static_cast<Eigen::Index>(j);
                CHECK(std::abs(al.lambda(ji, ki) + al.lambda(ki, ji)) <= 1e-12 * std::max(1.0, std::abs(al.lambda(ki, ji))));
            }
        }
        CHECK_FALSE(check_eigenvalue_bound(p).violated_hs);
    }
}

TEST_CASE("randomized perturbation suite") {
    const auto rows = run_perturbation_suite(500, 12, 7);
    REQUIRE(rows.size() == 500);
    double worst = 0.0;
    for (const auto& r : rows) {
        CHECK(r.dim >= 2);
        CHECK(r.dim <= 12);
        CHECK(r.admissible >= 1);
        CHECK_FALSE(r.eigval_violation);
        CHECK_FALSE(r.eigval_hs_violation);
        CHECK_FALSE(r.eigvec_violation);
        CHECK_FALSE(r.fk_violation);
        CHECK(r.proj_identity_error <= 1e-12);
        CHECK(std::isfinite(r.proj_ratio));
        worst = std::max(worst, r.proj_ratio);
    }
    CHECK(worst <= 1e3);
    // the suite is a pure function of its seed
    const auto again = run_perturbation_suite(5, 12, 7);
    for (std::size_t i = 0; i < 5; ++i) CHECK(again[i].proj_ratio == rows[i].proj_ratio);
}

TEST_CASE("gaussian linearization is exact") {
    VectorXd gamma(4);
    gamma << 0.5, 0.3, -0.2, 0.1;
    const auto rep = check_mle_linearization(400, ExpFamily(Family::gaussian), gamma, 20, 3);
    CHECK(rep.max_residual <= 1e-8);
    CHECK(rep.violations == 0);
}

TEST_CASE("noise-free responses give a zero residual") {
    const Eigen::Index n = 50;
    MatrixXd xi(n, 3);
    Rng rng(4);
    std::normal_distribution<double> z;
    for (Eigen::Index i = 0; i < n; ++i) xi.row(i) << 1.0, z(rng), z(rng);
    const ExpFamily pois(Family::poisson);
    const VectorXd y = VectorXd::Constant(n, pois.psidot(0.0));
    const auto res = linearization_residual(xi, y, VectorXd::Zero(3), pois);
    CHECK(res.W_norm <= 1e-12);
    CHECK(res.residual <= 1e-10);
}

TEST_CASE("poisson linearization where the hypotheses are attainable") {
    VectorXd gamma(1);
    gamma << 0.0;
    const auto rep = check_mle_linearization(20000, ExpFamily(Family::poisson), gamma, 100, 5);
    CHECK(rep.w_max <= rep.w_bound);
    REQUIRE(rep.hypothesis_count >= 90);
    CHECK(static_cast<double>(rep.violations) / rep.hypothesis_count <= rep.rate_bound);
}

TEST_CASE("B_n moments") {
    const ExpFamily pois(Family::poisson), gauss(Family::gaussian);
    const auto g = bn_moments(gauss, 0.7, 1.3);
    CHECK(g.r0 == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(g.r1) <= 1e-12);
    CHECK(g.r2 == Approx(1.0).epsilon(1e-12));

    const auto m = bn_moments(pois, 0.3, 0.5);
    CHECK(std::abs(m.r0 - 1.5295904196633787) <= 1e-10);
    // Stein identities for the lognormal weight
    CHECK(m.r1 == Approx(0.5 * m.r0).epsilon(1e-10));
    CHECK(m.r2 == Approx(1.25 * m.r0).epsilon(1e-10));

    VectorXd gamma(3), D(3);
    gamma << 0.0, 0.0, 0.0;
    D << 1.0, 1.0, 0.5;
    CHECK((bn_matrix(pois, gamma, D) - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);
    gamma << 0.1, 0.4, -0.3;
    CHECK((bn_matrix(gauss, gamma, D) - MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-12);

    // the block form is the same matrix in rotated coordinates
    const MatrixXd B = bn_matrix(pois, gamma, D);
    const VectorXd v = D.tail(2).cwiseProduct(gamma.tail(2));
    const MatrixXd F = bn_block_form(bn_moments(pois, 0.1, v.norm()), 2);
    Eigen::SelfAdjointEigenSolver<MatrixXd> e1(B), e2(F);
    CHECK((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Monte Carlo A_n is centred on B_n") {
    const AnBnProfile p = an_bn_profile(500);
    CHECK(p.gamma.size() == 4);
    const auto rep = check_An_Bn(500, ExpFamily(Family::poisson), p.gamma, p.D, 200, 9);
    CHECK(rep.max_entry_z <= 4.0);
    CHECK(rep.binv_norm <= rep.binv_bound + 1e-12);
}

TEST_CASE("chi-square maximal inequality") {
    const std::vector<double> unit{1.0};
    const auto rows = check_chisq_maximal(1, unit, {0.0, 3.0}, 1000000, 2);
    CHECK(rows[0].bound == 2.0);
    CHECK(rows[0].within);
    CHECK(rows[1].threshold == 12.0);
    CHECK(std::abs(rows[1].estimate - 0.0005320055051392504) <= 4.0 * std::sqrt(0.000532 / 1e6));
    CHECK(rows[1].bound == Approx(2.0 * std::exp(-3.0)));
    CHECK(rows[1].within);
    CHECK_THROWS_AS(check_chisq_maximal(0, unit, {1.0}, 10, 1), ValidationError);
}
