#include "catch_amalgamated.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "fglm/errors.hpp"
#include "fglm/expfam.hpp"

using namespace fglm;
using Catch::Approx;

namespace {

const ExpFamily kGaussian{Family::gaussian};
const ExpFamily kPoisson{Family::poisson};
const ExpFamily kBernoulli{Family::bernoulli};
const std::vector<ExpFamily> kAll{kGaussian, kPoisson, kBernoulli};

std::vector<double> linspace(double lo, double hi, std::size_t count) {
    std::vector<double> v(count);
    for (std::size_t i = 0; i < count; ++i) {
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    return v;
}

}  // namespace

TEST_CASE("family lookup by name") {
    CHECK(ExpFamily::from_name("poisson") == kPoisson);
    CHECK(ExpFamily::from_name("bernoulli").name() == "bernoulli");
    CHECK_THROWS_AS(ExpFamily::from_name("gamma"), ValidationError);
}

TEST_CASE("cumulant normalisation and convexity") {
    for (const auto& f : kAll) {
        CHECK(f.psi(0.0) == 0.0);
        for (double l : linspace(-20, 20, 401)) CHECK(f.psiddot(l) > 0.0);
    }
    CHECK(kBernoulli.psidot(0.0) == 0.5);
    CHECK(kPoisson.psiddot(1.0) == Approx(std::exp(1.0)));
}

TEST_CASE("psi_increment agrees with the direct difference") {
    for (const auto& f : kAll) {
        for (double l : linspace(-3, 3, 13)) {
            for (double d : {-0.7, -1e-3, 0.0, 2e-3, 0.4}) {
                CHECK(f.psi_increment(l, d) == Approx(f.psi(l + d) - f.psi(l)).margin(1e-13));
            }
        }
    }
    // cancellation-free for tiny steps: psi(l+d)-psi(l) ~ psidot(l) d
    CHECK(kPoisson.psi_increment(0.5, 1e-12) == Approx(std::exp(0.5) * 1e-12).epsilon(1e-9));
}

TEST_CASE("third-derivative envelope") {
    const auto lam = linspace(-10, 10, 201);
    const auto h = linspace(-3, 3, 61);
    for (const auto& f : kAll) CHECK(verify_envelope(f, lam, h).max_ratio <= 1.0 + 1e-12);
    CHECK(verify_envelope(kGaussian, lam, h).max_ratio == 0.0);

    const std::vector<double> zero{0.0}, one{1.0};
    CHECK(verify_envelope(kPoisson, zero, one).max_ratio == Approx(1.0));

    // |psi'''| = psi'' |1 - 2p|; grid maximum from an independent evaluation
    const auto r = verify_envelope(kBernoulli, linspace(-5, 5, 201), linspace(-2, 2, 81));
    CHECK(r.max_ratio == Approx(0.9866142981514305).epsilon(1e-10));
}

TEST_CASE("growth condition with eps = 0.1") {
    const auto lam = linspace(-20, 20, 801);
    for (const auto& f : kAll) CHECK(verify_growth(f, 0.1, lam) <= 1.0 + 1e-12);
    CHECK(kPoisson.growth_constant(0.1) == Approx(std::exp(2.5)));
    CHECK(kGaussian.growth_constant(0.1) == 1.0);
}

TEST_CASE("Hellinger bound values") {
    CHECK(hellinger_sq_bound(kGaussian, 0.0, 1.0) == 2.0);
    for (const auto& f : kAll) CHECK(hellinger_sq_bound(f, 0.7, 0.0) == 0.0);
    CHECK(hellinger_sq_bound(kPoisson, 0.0, 0.5) == Approx(0.6182704765125481).epsilon(1e-14));
}

TEST_CASE("exact Hellinger: gaussian closed form and numerical integral") {
    CHECK(hellinger_sq_exact(kGaussian, 0.0, 0.0) == 0.0);
    for (double l : {-2.0, 0.0, 3.5}) {
        CHECK(std::abs(hellinger_sq_exact(kGaussian, l, 1.0) - 0.2350061948308091) < 1e-9);
    }
    // integral of (sqrt f - sqrt g)^2 for N(0,1) and N(1,1)
    double s = 0.0;
    const double step = 1e-3;
    for (double y = -12.0; y <= 13.0; y += step) {
        const double a = std::exp(-0.25 * y * y), b = std::exp(-0.25 * (y - 1) * (y - 1));
        s += (a - b) * (a - b);
    }
    s *= step / std::sqrt(2.0 * M_PI);
    CHECK(s == Approx(hellinger_sq_exact(kGaussian, 0.0, 1.0)).epsilon(1e-9));
}

TEST_CASE("exact Hellinger: poisson affinity against a direct sum") {
    const double h2 = hellinger_sq_exact(kPoisson, 0.0, std::log(4.0));
    CHECK(h2 == Approx(0.7869386805747332).epsilon(1e-12));

    // sum_k sqrt(p_k q_k), means 1 and 4
    double aff = 0.0;
    for (int k = 0; k < 200; ++k) {
        const double lp = -1.0 + k * std::log(1.0) - std::lgamma(k + 1.0);
        const double lq = -4.0 + k * std::log(4.0) - std::lgamma(k + 1.0);
        aff += std::exp(0.5 * (lp + lq));
    }
    CHECK(2.0 * (1.0 - aff) == Approx(h2).epsilon(1e-12));
}

TEST_CASE("exact Hellinger stays below the bound, is symmetric and separates points") {
    for (const auto& f : kAll) {
        for (double l : linspace(-3, 3, 13)) {
            for (double d : linspace(-1, 1, 21)) {
                const double exact = hellinger_sq_exact(f, l, d);
                CHECK(exact <= hellinger_sq_bound(f, l, d) + 1e-15);
                CHECK(exact >= 0.0);
                CHECK(exact <= 2.0);
                CHECK(exact == Approx(hellinger_sq_exact(f, l + d, -d)).margin(1e-14));
                if (std::abs(d) > 1e-9) CHECK(exact > 1e-12);
                else CHECK(exact <= 1e-12);
            }
        }
    }
}

TEST_CASE("sampling moments") {
    const std::size_t draws = 100000;
    for (const auto& f : kAll) {
        for (double l : {-1.0, 0.0, 1.0}) {
            Rng rng(derive_seed(5, static_cast<std::uint64_t>(f.family()), static_cast<std::uint64_t>(l + 2)));
            double s = 0.0, s2 = 0.0;
            for (std::size_t i = 0; i < draws; ++i) {
                const double y = sample_response(f, l, rng);
                s += y;
                s2 += y * y;
            }
            const double mean = s / draws;
            const double var = s2 / draws - mean * mean;
            const double se = std::sqrt(f.psiddot(l) / draws);
            CHECK(std::abs(mean - f.psidot(l)) <= 4.0 * se);
            // the variance of y^2 is bounded by the fourth central moment; 4 SE with a crude bound
            CHECK(std::abs(var - f.psiddot(l)) <= 4.0 * std::sqrt((f.psiddot(l) * f.psiddot(l) * 3.0 + f.psiddot(l)) / draws));
        }
    }
}

TEST_CASE("sampling at lambda = 0 matches the stated tolerances") {
    Rng rng(99);
    const std::size_t draws = 100000;
    double g = 0.0, p = 0.0, p2 = 0.0, b = 0.0;
    for (std::size_t i = 0; i < draws; ++i) {
        g += sample_response(kGaussian, 0.0, rng);
        const double y = sample_response(kPoisson, 0.0, rng);
        p += y;
        p2 += y * y;
        b += sample_response(kBernoulli, 0.0, rng);
    }
    CHECK(std::abs(g / draws) <= 0.01);
    CHECK(std::abs(p / draws - 1.0) <= 0.01);
    CHECK(std::abs(p2 / draws - (p / draws) * (p / draws) - 1.0) <= 0.02);
    CHECK(std::abs(b / draws - 0.5) <= 0.005);
}

TEST_CASE("sampling rejects non-finite parameters") {
    Rng rng(1);
    CHECK_THROWS_AS(sample_response(kPoisson, std::numeric_limits<double>::quiet_NaN(), rng), ValidationError);
    CHECK_THROWS_AS(sample_response(kGaussian, std::numeric_limits<double>::infinity(), rng), ValidationError);
}
