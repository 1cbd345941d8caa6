#include "fglm/lowerbound.hpp"

#include <algorithm>
#include <cmath>

#include "fglm/errors.hpp"
#include "fglm/random.hpp"

namespace fglm {

double AssouadConfig::beta_weight(std::size_t j) const {
    return R * std::pow(static_cast<double>(j), -beta_s);
}

double AssouadConfig::theta(std::size_t k) const {
    return std::pow(static_cast<double>(k), -alpha);
}

void validate(const AssouadConfig& cfg) {
    if (cfg.m < 1) throw ValidationError("Assouad config: m must be at least 1");
    if (!(cfg.eps >= 0.0) || !std::isfinite(cfg.eps)) throw ValidationError("Assouad config: eps must be finite and >= 0");
    if (!(cfg.R > 0.0) || !std::isfinite(cfg.R)) throw ValidationError("Assouad config: R must be positive");
    if (!std::isfinite(cfg.alpha) || !std::isfinite(cfg.beta_s)) {
        throw ValidationError("Assouad config: exponents must be finite");
    }
}

FunctionRep hypercube_slope(const AssouadConfig& cfg, const std::vector<int>& gamma) {
    validate(cfg);
    if (gamma.size() != cfg.m) throw ValidationError("hypercube_slope: gamma must have length m");
    std::vector<double> coeffs(cfg.j_last(), 0.0);
    for (std::size_t i = 0; i < cfg.m; ++i) {
        const std::size_t j = cfg.j_first() + i;
        coeffs[j - 1] = gamma[i] ? cfg.eps * cfg.beta_weight(j) : 0.0;
    }
    return FunctionRep(std::move(coeffs));
}

AffinityEstimate affinity_estimate(const AssouadConfig& cfg, std::size_t n, std::size_t j,
                                   const std::vector<int>& gamma, std::size_t n_mc,
                                   std::uint64_t seed) {
    validate(cfg);
    if (gamma.size() != cfg.m) throw ValidationError("affinity_estimate: gamma must have length m");
    if (j < cfg.j_first() || j > cfg.j_last()) throw ValidationError("affinity_estimate: j must lie in J");
    if (n < 1 || n_mc < 1) throw ValidationError("affinity_estimate: n and n_mc must be positive");

    std::vector<double> coef(cfg.m), sd(cfg.m);
    for (std::size_t i = 0; i < cfg.m; ++i) {
        const std::size_t k = cfg.j_first() + i;
        coef[i] = gamma[i] ? cfg.eps * cfg.beta_weight(k) : 0.0;
        sd[i] = std::sqrt(cfg.theta(k));
    }
    const std::size_t flip = j - cfg.j_first();
    const double flip_step = (gamma[flip] ? -1.0 : 1.0) * cfg.eps * cfg.beta_weight(j);

    double sum = 0.0, sum_sq = 0.0, sum_bound = 0.0;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t d = 0; d < n_mc; ++d) {
        Rng rng(derive_seed(seed, j, d));
        double s_exact = 0.0, s_bound = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double lambda = 0.0, z_flip = 0.0;
            for (std::size_t k = 0; k < cfg.m; ++k) {
                const double z = sd[k] * normal(rng);
                lambda += coef[k] * z;
                if (k == flip) z_flip = z;
            }
            const double delta = flip_step * z_flip;
            s_exact += hellinger_sq_exact(cfg.family, lambda, delta);
            s_bound += hellinger_sq_bound(cfg.family, lambda, delta);
        }
        const double v = 1.0 - std::sqrt(std::min(2.0, s_exact));
        sum += v;
        sum_sq += v * v;
        sum_bound += 1.0 - std::sqrt(std::min(2.0, s_bound));
    }
    const double draws = static_cast<double>(n_mc);
    AffinityEstimate est;
    est.draws = n_mc;
    est.mean = sum / draws;
    est.mean_bound = sum_bound / draws;
    if (n_mc > 1) {
        const double var = std::max(0.0, (sum_sq - draws * est.mean * est.mean) / (draws - 1.0));
        est.se = std::sqrt(var / draws);
    }
    return est;
}

double assouad_bound_value(const AssouadConfig& cfg, double affinity_floor) {
    validate(cfg);
    if (!(affinity_floor >= 0.0 && affinity_floor <= 1.0)) {
        throw ValidationError("assouad_bound_value: affinity floor must lie in [0, 1]");
    }
    double sum = 0.0;
    for (std::size_t j = cfg.j_first(); j <= cfg.j_last(); ++j) {
        const double b = cfg.beta_weight(j);
        sum += b * b;
    }
    return affinity_floor / 8.0 * cfg.eps * cfg.eps * sum;
}

AssouadConfig calibrated_config(std::size_t n, double alpha, double beta_s, const ExpFamily& family,
                                double R) {
    if (n < 1) throw ValidationError("calibrated_config: n must be positive");
    AssouadConfig cfg;
    cfg.alpha = alpha;
    cfg.beta_s = beta_s;
    cfg.R = R;
    cfg.family = family;
    const double raw = std::pow(static_cast<double>(n), 1.0 / (alpha + 2.0 * beta_s));
    cfg.m = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(raw)));
    const double b = cfg.beta_weight(cfg.m + 1);
    cfg.eps = 1.0 / std::sqrt(static_cast<double>(n) * b * b * cfg.theta(cfg.m + 1));
    validate(cfg);
    return cfg;
}

std::vector<AffinityRow> affinity_table(const std::vector<std::size_t>& n_grid, double alpha,
                                        double beta_s, const ExpFamily& family, std::size_t n_mc,
                                        std::uint64_t seed) {
    std::vector<AffinityRow> rows;
    for (std::size_t n : n_grid) {
        const AssouadConfig cfg = calibrated_config(n, alpha, beta_s, family);
        std::vector<std::vector<int>> vertices;
        if (cfg.m <= 4) {
            for (std::size_t mask = 0; mask < (std::size_t{1} << cfg.m); ++mask) {
                std::vector<int> g(cfg.m);
                for (std::size_t i = 0; i < cfg.m; ++i) g[i] = static_cast<int>((mask >> i) & 1u);
                vertices.push_back(std::move(g));
            }
        } else {
            vertices.emplace_back(cfg.m, 0);
            vertices.emplace_back(cfg.m, 1);
        }
        for (std::size_t j = cfg.j_first(); j <= cfg.j_last(); ++j) {
            AffinityRow row;
            row.n = n;
            row.m = cfg.m;
            row.j = j;
            row.eps = cfg.eps;
            bool first = true;
            for (const auto& g : vertices) {
                const AffinityEstimate est = affinity_estimate(cfg, n, j, g, n_mc, derive_seed(seed, n, 0));
                if (first || est.mean < row.affinity) {
                    row.affinity = est.mean;
                    row.se = est.se;
                }
                row.affinity_bound = first ? est.mean_bound : std::min(row.affinity_bound, est.mean_bound);
                first = false;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

}  // namespace fglm
