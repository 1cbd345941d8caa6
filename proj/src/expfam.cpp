#include "fglm/expfam.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fglm/errors.hpp"

namespace fglm {

namespace {

double softplus(double x) noexcept {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double logistic(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// p(1-p) without cancellation for large |x|.
double logistic_var(double x) noexcept {
    const double e = std::exp(-std::abs(x));
    return e / ((1.0 + e) * (1.0 + e));
}

}  // namespace

ExpFamily ExpFamily::from_name(std::string_view name) {
    if (name == "gaussian") return ExpFamily(Family::gaussian);
    if (name == "poisson") return ExpFamily(Family::poisson);
    if (name == "bernoulli") return ExpFamily(Family::bernoulli);
    throw ValidationError("unknown family '" + std::string(name) +
                          "' (expected gaussian, poisson or bernoulli)");
}

std::string ExpFamily::name() const {
    switch (family_) {
        case Family::gaussian: return "gaussian";
        case Family::poisson: return "poisson";
        case Family::bernoulli: return "bernoulli";
    }
    return "unknown";
}

double ExpFamily::psi(double lambda) const noexcept {
    switch (family_) {
        case Family::gaussian: return 0.5 * lambda * lambda;
        case Family::poisson: return std::expm1(lambda);
        case Family::bernoulli: return softplus(lambda) - std::numbers::ln2;
    }
    return 0.0;
}

double ExpFamily::psi_increment(double from, double d) const noexcept {
    switch (family_) {
        case Family::gaussian: return d * (from + 0.5 * d);
        case Family::poisson: return std::exp(from) * std::expm1(d);
        case Family::bernoulli: {
            // log((1+e^to)/(1+e^from)) = log1p(sigmoid(from) expm1(d))
            const double sig = 1.0 / (1.0 + std::exp(-from));
            const double u = sig * std::expm1(d);
            if (std::isfinite(u) && u > -1.0) return std::log1p(u);
            return psi(from + d) - psi(from);
        }
    }
    return 0.0;
}

double ExpFamily::psidot(double lambda) const noexcept {
    switch (family_) {
        case Family::gaussian: return lambda;
        case Family::poisson: return std::exp(lambda);
        case Family::bernoulli: return logistic(lambda);
    }
    return 0.0;
}

double ExpFamily::psiddot(double lambda) const noexcept {
    switch (family_) {
        case Family::gaussian: return 1.0;
        case Family::poisson: return std::exp(lambda);
        case Family::bernoulli: return logistic_var(lambda);
    }
    return 0.0;
}

double ExpFamily::psidddot(double lambda) const noexcept {
    switch (family_) {
        case Family::gaussian: return 0.0;
        case Family::poisson: return std::exp(lambda);
        case Family::bernoulli: return logistic_var(lambda) * (1.0 - 2.0 * logistic(lambda));
    }
    return 0.0;
}

double ExpFamily::envelope(double h) const noexcept {
    switch (family_) {
        case Family::gaussian: return 1.0;
        case Family::poisson:
        case Family::bernoulli: return std::exp(h);
    }
    return 1.0;
}

double ExpFamily::mean_to_lambda(double mean) const noexcept {
    switch (family_) {
        case Family::gaussian: return mean;
        case Family::poisson: return std::log(mean);
        case Family::bernoulli: return std::log(mean / (1.0 - mean));
    }
    return 0.0;
}

double ExpFamily::growth_constant(double eps) const {
    if (!(eps > 0.0)) throw ValidationError("growth_constant: eps must be positive");
    switch (family_) {
        case Family::gaussian: return 1.0;
        // max_lambda (lambda - eps lambda^2) = 1/(4 eps)
        case Family::poisson: return std::exp(1.0 / (4.0 * eps));
        case Family::bernoulli: return 0.25;
    }
    return 1.0;
}

double ExpFamily::log_affinity(double l1, double l2) const noexcept {
    switch (family_) {
        case Family::gaussian: {
            const double d = l1 - l2;
            return -0.125 * d * d;
        }
        case Family::poisson: {
            const double d = std::exp(0.5 * l1) - std::exp(0.5 * l2);
            return -0.5 * d * d;
        }
        case Family::bernoulli: {
            const double v = psi(0.5 * (l1 + l2)) - 0.5 * psi(l1) - 0.5 * psi(l2);
            return std::min(v, 0.0);
        }
    }
    return 0.0;
}

double sample_response(const ExpFamily& family, double lambda, Rng& rng) {
    if (!std::isfinite(lambda)) throw ValidationError("sample_response: lambda is not finite");
    switch (family.family()) {
        case Family::gaussian: {
            std::normal_distribution<double> dist(lambda, 1.0);
            return dist(rng);
        }
        case Family::poisson: {
            const double mean = std::exp(lambda);
            if (!(mean < 1e15)) throw ValidationError("sample_response: poisson mean overflows");
            std::poisson_distribution<long long> dist(mean);
            return static_cast<double>(dist(rng));
        }
        case Family::bernoulli: {
            std::uniform_real_distribution<double> u(0.0, 1.0);
            return u(rng) < logistic(lambda) ? 1.0 : 0.0;
        }
    }
    return 0.0;
}

double hellinger_sq_bound(const ExpFamily& family, double lambda, double delta) noexcept {
    const double ad = std::abs(delta);
    return delta * delta * family.psiddot(lambda) * (1.0 + ad) * family.envelope(ad);
}

double hellinger_sq_exact(const ExpFamily& family, double lambda, double delta) noexcept {
    const double h2 = -2.0 * std::expm1(family.log_affinity(lambda, lambda + delta));
    return std::clamp(h2, 0.0, 2.0);
}

EnvelopeReport verify_envelope(const ExpFamily& family, std::span<const double> lambda_grid,
                               std::span<const double> h_grid) {
    if (lambda_grid.empty() || h_grid.empty()) {
        throw ValidationError("verify_envelope: grids must be nonempty");
    }
    EnvelopeReport rep;
    for (double l : lambda_grid) {
        for (double h : h_grid) {
            const double ratio = std::abs(family.psidddot(l + h)) /
                                 (family.psiddot(l) * family.envelope(std::abs(h)));
            if (ratio > rep.max_ratio) rep = {ratio, l, h};
        }
    }
    return rep;
}

double verify_growth(const ExpFamily& family, double eps, std::span<const double> lambda_grid) {
    const double c = family.growth_constant(eps);
    double worst = 0.0;
    for (double l : lambda_grid) {
        worst = std::max(worst, family.psiddot(l) / (c * std::exp(eps * l * l)));
    }
    return worst;
}

}  // namespace fglm
