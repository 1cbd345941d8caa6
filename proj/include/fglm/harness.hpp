#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fglm/datagen.hpp"
#include "fglm/estimator.hpp"

namespace fglm {

struct ExperimentConfig {
    std::string family = "gaussian";
    double alpha = 2.0;
    double beta_s = 3.0;
    double a = 0.5;
    MeanMode mu_mode = MeanMode::zero;
    std::size_t K_trunc = 200;
    std::vector<std::size_t> n_grid;
    std::size_t reps = 1;
    std::uint64_t seed = 0;
    double c_m = 1.0;
    double c_N = 2.0;
    std::optional<double> zeta_override;
    double newton_tol = 1e-10;
    int newton_max_iter = 100;
    std::string out_dir = ".";

    TuningRule tuning_rule() const;
    NewtonConfig newton_config() const;
    GroundTruth ground_truth() const;
};

/// Flat `key = value` format, one pair per line, `#` starts a comment. Keys are the
/// field names above; n_grid is a comma-separated list. Unknown or repeated keys,
/// malformed values and missing n_grid are ValidationErrors.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Throws ValidationError on any violated invariant (n_grid strictly increasing with
/// every n >= 8, reps >= 1, finite numerics, admissible class parameters).
void validate(const ExperimentConfig& cfg);

struct RateRow {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t N = 0;
    double mise_mean = 0.0;
    double mise_se = 0.0;       ///< 0 when reps == 1
    std::size_t nonconverged = 0;
};

struct ReplicationRow {
    std::size_t n = 0;
    std::size_t rep = 0;
    std::uint64_t seed = 0;
    double loss = 0.0;
    int iterations = 0;
    bool converged = false;
};

struct RateStudyResult {
    std::vector<RateRow> rows;
    std::vector<ReplicationRow> replications;   ///< (n, rep) order
    bool slope_fitted = false;
    double slope = 0.0;
    double slope_se = 0.0;
    double theoretical = 0.0;   ///< (1 - 2 beta) / (alpha + 2 beta)
};

/// Replication (n_grid[i], r) uses seed derive_seed(cfg.seed, i, r). Work is spread over
/// `jobs` threads (0 means hardware concurrency); output does not depend on jobs.
/// Fewer than three grid points leaves the slope unfitted.
RateStudyResult run_rate_study(const ExperimentConfig& cfg, std::size_t jobs = 1);

/// OLS of log(mise) on log(n). Needs >= 3 points, all mise > 0.
std::pair<double, double> fit_loglog_slope(const std::vector<std::pair<double, double>>& points);

/// 17 significant digits.
std::string format_double(double x);

/// rate_study.csv, slope.csv (only when the slope was fitted) and optionally
/// perreplication.csv under `dir`, created if needed.
void write_rate_study(const RateStudyResult& result, const ExperimentConfig& cfg,
                      const std::filesystem::path& dir, bool per_replication);

/// Reads FGLM_JOBS; 1 when unset or unparsable.
std::size_t default_jobs();

}  // namespace fglm
