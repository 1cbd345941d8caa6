#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fglm/expfam.hpp"
#include "fglm/funcspace.hpp"

namespace fglm {

/// Hypercube construction over J = {m+1, ..., 2m} with weights beta_j = R j^-beta and
/// predictor variances theta_k = k^-alpha. The intercept and mean are zero.
struct AssouadConfig {
    std::size_t m = 1;
    double eps = 1.0;
    double R = 1.0;
    double alpha = 2.0;
    double beta_s = 3.0;
    ExpFamily family{Family::gaussian};

    std::size_t j_first() const noexcept { return m + 1; }
    std::size_t j_last() const noexcept { return 2 * m; }
    double beta_weight(std::size_t j) const;
    double theta(std::size_t k) const;
};

/// Throws ValidationError unless m >= 1, eps >= 0, R > 0 and the exponents are finite.
void validate(const AssouadConfig& cfg);

/// B_gamma = eps sum_{j in J} gamma_j beta_j phi_j; gamma has length m, gamma[0] is j = m+1.
FunctionRep hypercube_slope(const AssouadConfig& cfg, const std::vector<int>& gamma);

struct AffinityEstimate {
    double mean = 0.0;          ///< average of 1 - sqrt(min(2, sum_i h^2)) with exact h^2
    double se = 0.0;
    double mean_bound = 0.0;    ///< same, with h^2 replaced by its envelope bound
    std::size_t draws = 0;
};

/// Monte Carlo over n_mc designs of n score rows z_{i,k} ~ N(0, theta_k), k in J,
/// comparing gamma with gamma flipped at coordinate j (j in J, 1-based frequency).
/// Draw d uses seed derive_seed(seed, j, d).
AffinityEstimate affinity_estimate(const AssouadConfig& cfg, std::size_t n, std::size_t j,
                                   const std::vector<int>& gamma, std::size_t n_mc,
                                   std::uint64_t seed);

/// (affinity_floor / 8) eps^2 sum_{j in J} beta_j^2.
double assouad_bound_value(const AssouadConfig& cfg, double affinity_floor);

/// m = max(1, round(n^(1/(alpha+2beta)))) and eps^2 = 1 / (n beta_{m+1}^2 theta_{m+1}),
/// so that n eps^2 beta_j^2 theta_j <= 1 on J with equality at j = m+1.
AssouadConfig calibrated_config(std::size_t n, double alpha, double beta_s, const ExpFamily& family,
                                double R = 1.0);

struct AffinityRow {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t j = 0;
    double eps = 0.0;
    double affinity = 0.0;      ///< minimum over the enumerated gamma
    double se = 0.0;
    double affinity_bound = 0.0;
};

/// One row per (n, j). For m <= 4 every gamma in {0,1}^m is enumerated, otherwise the
/// all-zero and all-one vertices are used; each gamma sees the same design draws.
std::vector<AffinityRow> affinity_table(const std::vector<std::size_t>& n_grid, double alpha,
                                        double beta_s, const ExpFamily& family, std::size_t n_mc,
                                        std::uint64_t seed);

}  // namespace fglm
