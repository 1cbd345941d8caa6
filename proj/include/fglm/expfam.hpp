#pragma once

#include <span>
#include <string>
#include <string_view>

#include "fglm/random.hpp"

namespace fglm {

enum class Family { gaussian, poisson, bernoulli };

/// One-parameter exponential family dQ_lambda/dQ_0 = exp(lambda*y - psi(lambda)),
/// normalised so that psi(0) = 0. Immutable; cheap to copy.
///
///   gaussian   psi = lambda^2/2          G(h) = 1
///   poisson    psi = e^lambda - 1        G(h) = e^h
///   bernoulli  psi = log(1+e^lambda) - log 2,  G(h) = e^h
///
/// G is an increasing envelope with |psi'''(lambda+h)| <= psi''(lambda) G(|h|).
class ExpFamily {
public:
    explicit ExpFamily(Family family) noexcept : family_(family) {}

    /// Accepts "gaussian", "poisson" or "bernoulli"; throws ValidationError otherwise.
    static ExpFamily from_name(std::string_view name);

    Family family() const noexcept { return family_; }
    std::string name() const;

    double psi(double lambda) const noexcept;
    double psidot(double lambda) const noexcept;
    double psiddot(double lambda) const noexcept;
    double psidddot(double lambda) const noexcept;
    double envelope(double h) const noexcept;
    /// psi(from + d) - psi(from), evaluated without cancellation for small d.
    double psi_increment(double from, double d) const noexcept;

    /// Inverse mean map, used to initialise the intercept. `mean` must lie in
    /// the open mean space of the family.
    double mean_to_lambda(double mean) const noexcept;

    /// Smallest C with psi''(lambda) <= C exp(eps lambda^2) for all real lambda.
    double growth_constant(double eps) const;

    /// psi(mid) - psi(l1)/2 - psi(l2)/2, i.e. the log of the Hellinger affinity
    /// integral sqrt(f_l1 f_l2). Always <= 0.
    double log_affinity(double l1, double l2) const noexcept;

    bool operator==(const ExpFamily&) const = default;

private:
    Family family_;
};

/// Draw y ~ Q_lambda. Throws ValidationError for non-finite lambda.
double sample_response(const ExpFamily& family, double lambda, Rng& rng);

/// delta^2 psi''(lambda) (1+|delta|) G(|delta|).
double hellinger_sq_bound(const ExpFamily& family, double lambda, double delta) noexcept;

/// h^2(Q_lambda, Q_{lambda+delta}) = 2 (1 - exp(log_affinity)), in [0, 2].
double hellinger_sq_exact(const ExpFamily& family, double lambda, double delta) noexcept;

struct EnvelopeReport {
    double max_ratio = 0.0;   ///< max |psi'''(l+h)| / (psi''(l) G(|h|)); must be <= 1
    double at_lambda = 0.0;
    double at_h = 0.0;
};

EnvelopeReport verify_envelope(const ExpFamily& family, std::span<const double> lambda_grid,
                               std::span<const double> h_grid);

/// max over the grid of psi''(lambda) / (C_eps exp(eps lambda^2)); must be <= 1.
double verify_growth(const ExpFamily& family, double eps, std::span<const double> lambda_grid);

}  // namespace fglm
