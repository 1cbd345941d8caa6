#include "fglm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "fglm/errors.hpp"
#include "fglm/random.hpp"

namespace fglm {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

double parse_real(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
        throw ValidationError("config: " + key + " expects a finite real, got '" + v + "'");
    }
    return out;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
        throw ValidationError("config: " + key + " expects a nonnegative integer, got '" + v + "'");
    }
    return out;
}

// One fitted replication; exceptions carry (n, rep, seed) context.
ReplicationRow run_replication(const ExperimentConfig& cfg, const GroundTruth& gt, std::size_t n_index,
                               std::size_t rep) {
    ReplicationRow row;
    row.n = cfg.n_grid[n_index];
    row.rep = rep;
    row.seed = derive_seed(cfg.seed, n_index, rep);
    const Dataset ds = sample_dataset(gt, row.n, row.seed);
    const FitResult fit = estimate_slope(ds, gt.family, cfg.alpha, cfg.beta_s, cfg.tuning_rule(),
                                         cfg.newton_config());
    row.loss = loss(fit.slope_hat, gt);
    row.iterations = fit.mle.iterations;
    row.converged = fit.mle.converged && !fit.mle.separated;
    return row;
}

std::string context(const ReplicationRow& row) {
    return " (n=" + std::to_string(row.n) + ", rep=" + std::to_string(row.rep) +
           ", seed=" + std::to_string(row.seed) + ")";
}

}  // namespace

TuningRule ExperimentConfig::tuning_rule() const {
    TuningRule r;
    r.c_m = c_m;
    r.c_N = c_N;
    r.zeta = zeta_override;
    return r;
}

NewtonConfig ExperimentConfig::newton_config() const {
    NewtonConfig c;
    c.tol = newton_tol;
    c.max_iter = newton_max_iter;
    return c;
}

GroundTruth ExperimentConfig::ground_truth() const {
    GroundTruthOptions opt;
    opt.a = a;
    opt.mu_mode = mu_mode;
    return make_ground_truth(alpha, beta_s, ExpFamily::from_name(family), K_trunc, opt);
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (value.empty()) throw ValidationError("config: empty value for " + key);
        if (!seen.insert(key).second) throw ValidationError("config: repeated key " + key);

        if (key == "family") {
            ExpFamily::from_name(value);
            cfg.family = value;
        } else if (key == "alpha") {
            cfg.alpha = parse_real(key, value);
        } else if (key == "beta_s") {
            cfg.beta_s = parse_real(key, value);
        } else if (key == "a") {
            cfg.a = parse_real(key, value);
        } else if (key == "mu_mode") {
            if (value == "zero") cfg.mu_mode = MeanMode::zero;
            else if (value == "bumps") cfg.mu_mode = MeanMode::bumps;
            else throw ValidationError("config: mu_mode must be zero or bumps");
        } else if (key == "K_trunc") {
            cfg.K_trunc = parse_unsigned(key, value);
        } else if (key == "n_grid") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ',')) cfg.n_grid.push_back(parse_unsigned(key, trim(item)));
        } else if (key == "reps") {
            cfg.reps = parse_unsigned(key, value);
        } else if (key == "seed") {
            cfg.seed = parse_unsigned(key, value);
        } else if (key == "c_m") {
            cfg.c_m = parse_real(key, value);
        } else if (key == "c_N") {
            cfg.c_N = parse_real(key, value);
        } else if (key == "zeta_override") {
            cfg.zeta_override = parse_real(key, value);
        } else if (key == "newton_tol") {
            cfg.newton_tol = parse_real(key, value);
        } else if (key == "newton_max_iter") {
            const auto v = parse_unsigned(key, value);
            if (v > 1000000) throw ValidationError("config: newton_max_iter too large");
            cfg.newton_max_iter = static_cast<int>(v);
        } else if (key == "out_dir") {
            cfg.out_dir = value;
        } else {
            throw ValidationError("config: unknown key " + key);
        }
    }
    if (cfg.n_grid.empty()) throw ValidationError("config: n_grid is required");
    validate(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file " + path.string());
    return parse_config(in);
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.n_grid.empty()) throw ValidationError("config: n_grid is empty");
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        if (cfg.n_grid[i] < 8) throw ValidationError("config: every n must be at least 8 (minimum n = 8)");
        if (i > 0 && cfg.n_grid[i] <= cfg.n_grid[i - 1]) {
            throw ValidationError("config: n_grid must be strictly increasing");
        }
    }
    if (cfg.reps < 1) throw ValidationError("config: reps must be at least 1");
    if (!(cfg.c_m > 0.0) || !(cfg.c_N > 0.0)) throw ValidationError("config: c_m and c_N must be positive");
    if (!(cfg.newton_tol > 0.0)) throw ValidationError("config: newton_tol must be positive");
    if (cfg.newton_max_iter < 1) throw ValidationError("config: newton_max_iter must be at least 1");
    const GroundTruth gt = cfg.ground_truth();
    for (std::size_t n : cfg.n_grid) tuning(n, cfg.alpha, cfg.beta_s, cfg.tuning_rule());
    (void)gt;
}

RateStudyResult run_rate_study(const ExperimentConfig& cfg, std::size_t jobs) {
    validate(cfg);
    const GroundTruth gt = cfg.ground_truth();
    const std::size_t total = cfg.n_grid.size() * cfg.reps;
    if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
    jobs = std::min(jobs, total);

    RateStudyResult result;
    result.replications.resize(total);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t task = next.fetch_add(1);
            if (task >= total || failed.load()) return;
            const std::size_t n_index = task / cfg.reps;
            const std::size_t rep = task % cfg.reps;
            ReplicationRow ctx;
            ctx.n = cfg.n_grid[n_index];
            ctx.rep = rep;
            ctx.seed = derive_seed(cfg.seed, n_index, rep);
            try {
                result.replications[task] = run_replication(cfg, gt, n_index, rep);
            } catch (const ValidationError& e) {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true)) error = std::make_exception_ptr(ValidationError(e.what() + context(ctx)));
            } catch (const std::exception& e) {
                std::lock_guard lock(error_mutex);
                if (!failed.exchange(true)) error = std::make_exception_ptr(NumericalError(e.what() + context(ctx)));
            }
        }
    };
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<std::pair<double, double>> points;
    for (std::size_t i = 0; i < cfg.n_grid.size(); ++i) {
        RateRow row;
        row.n = cfg.n_grid[i];
        const Tuning t = tuning(row.n, cfg.alpha, cfg.beta_s, cfg.tuning_rule());
        row.m = t.m;
        row.N = std::min(t.N, cfg.K_trunc);
        double sum = 0.0, sum_sq = 0.0;
        for (std::size_t r = 0; r < cfg.reps; ++r) {
            const ReplicationRow& rep = result.replications[i * cfg.reps + r];
            sum += rep.loss;
            sum_sq += rep.loss * rep.loss;
            row.nonconverged += rep.converged ? 0 : 1;
        }
        const double reps = static_cast<double>(cfg.reps);
        row.mise_mean = sum / reps;
        if (cfg.reps > 1) {
            const double var = std::max(0.0, (sum_sq - reps * row.mise_mean * row.mise_mean) / (reps - 1.0));
            row.mise_se = std::sqrt(var / reps);
        }
        result.rows.push_back(row);
        points.emplace_back(static_cast<double>(row.n), row.mise_mean);
    }
    result.theoretical = (1.0 - 2.0 * cfg.beta_s) / (cfg.alpha + 2.0 * cfg.beta_s);
    if (points.size() >= 3) {
        const auto [slope, se] = fit_loglog_slope(points);
        result.slope = slope;
        result.slope_se = se;
        result.slope_fitted = true;
    }
    return result;
}

std::pair<double, double> fit_loglog_slope(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw ValidationError("fit_loglog_slope: need at least three points");
    const double count = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& [n, mise] : points) {
        if (!(n > 0.0) || !(mise > 0.0)) throw ValidationError("fit_loglog_slope: n and mise must be positive");
        mx += std::log(n);
        my += std::log(mise);
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0;
    for (const auto& [n, mise] : points) {
        const double dx = std::log(n) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(mise) - my);
    }
    if (!(sxx > 0.0)) throw ValidationError("fit_loglog_slope: sample sizes must not all coincide");
    const double slope = sxy / sxx;
    double sse = 0.0;
    for (const auto& [n, mise] : points) {
        const double resid = std::log(mise) - my - slope * (std::log(n) - mx);
        sse += resid * resid;
    }
    const double se = std::sqrt(sse / (count - 2.0) / sxx);
    return {slope, se};
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_rate_study(const RateStudyResult& result, const ExperimentConfig& cfg,
                      const std::filesystem::path& dir, bool per_replication) {
    std::filesystem::create_directories(dir);
    auto open = [&](const char* name) {
        std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
        if (!out) throw NumericalError(std::string("cannot write ") + (dir / name).string());
        return out;
    };
    {
        auto out = open("rate_study.csv");
        out << "family,alpha,beta,n,reps,m,N,mise_mean,mise_se,nonconverged\n";
        for (const RateRow& r : result.rows) {
            out << cfg.family << ',' << format_double(cfg.alpha) << ',' << format_double(cfg.beta_s) << ','
                << r.n << ',' << cfg.reps << ',' << r.m << ',' << r.N << ',' << format_double(r.mise_mean)
                << ',' << format_double(r.mise_se) << ',' << r.nonconverged << '\n';
        }
    }
    if (result.slope_fitted) {
        auto out = open("slope.csv");
        out << "slope,se,theoretical\n"
            << format_double(result.slope) << ',' << format_double(result.slope_se) << ','
            << format_double(result.theoretical) << '\n';
    }
    if (per_replication) {
        auto out = open("perreplication.csv");
        out << "n,rep,seed,loss,iterations,converged\n";
        for (const ReplicationRow& r : result.replications) {
            out << r.n << ',' << r.rep << ',' << r.seed << ',' << format_double(r.loss) << ','
                << r.iterations << ',' << (r.converged ? 1 : 0) << '\n';
        }
    }
}

std::size_t default_jobs() {
    const char* env = std::getenv("FGLM_JOBS");
    if (env == nullptr) return 1;
    std::size_t v = 0;
    const std::string s(env);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || v == 0) return 1;
    return v;
}

}  // namespace fglm
