#include "fglm/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "fglm/errors.hpp"
#include "fglm/estimator.hpp"
#include "fglm/harness.hpp"
#include "fglm/lowerbound.hpp"
#include "fglm/spectral_diag.hpp"

namespace fglm {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (!cell.empty() && cell.back() == '\r') cell.pop_back();
        cells.push_back(cell);
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double cell_to_double(const std::string& s, std::size_t row) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        throw ValidationError("dataset row " + std::to_string(row) + ": bad number '" + s + "'");
    }
    return v;
}

// Output either to a file or to the given stream.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (!path.empty() && path != "-") {
            const auto parent = std::filesystem::path(path).parent_path();
            if (!parent.empty()) std::filesystem::create_directories(parent);
            file_.open(path, std::ios::binary | std::ios::trunc);
            if (!file_) throw NumericalError("cannot write " + path);
            stream_ = &file_;
        }
    }
    std::ostream& get() { return *stream_; }

private:
    std::ofstream file_;
    std::ostream* stream_;
};

std::ofstream open_in(const std::filesystem::path& dir, const char* name) {
    std::filesystem::create_directories(dir);
    std::ofstream out(dir / name, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericalError("cannot write " + (dir / name).string());
    return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t v = 0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
            throw ValidationError("bad integer list '" + s + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("empty integer list");
    return out;
}

MeanMode parse_mean_mode(const std::string& s) {
    if (s == "zero") return MeanMode::zero;
    if (s == "bumps") return MeanMode::bumps;
    throw ValidationError("mu-mode must be zero or bumps");
}

const char* flag(bool b) { return b ? "1" : "0"; }

}  // namespace

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
    out << "y,lambda";
    for (std::size_t k = 1; k <= ds.basis_size(); ++k) out << ",x" << k;
    out << '\n';
    for (Eigen::Index i = 0; i < ds.x.rows(); ++i) {
        out << format_double(ds.y[i]) << ',' << format_double(ds.lambda_true[i]);
        for (Eigen::Index k = 0; k < ds.x.cols(); ++k) out << ',' << format_double(ds.x(i, k));
        out << '\n';
    }
}

Dataset read_dataset_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ValidationError("dataset: empty input");
    const auto header = split_csv_line(line);
    std::ptrdiff_t y_col = -1, lambda_col = -1;
    std::vector<std::size_t> x_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "y") y_col = static_cast<std::ptrdiff_t>(c);
        else if (header[c] == "lambda") lambda_col = static_cast<std::ptrdiff_t>(c);
        else if (header[c].size() > 1 && header[c][0] == 'x') x_cols.push_back(c);
    }
    if (y_col < 0 || x_cols.empty()) throw ValidationError("dataset: need a y column and x1..xK columns");

    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw ValidationError("dataset row " + std::to_string(lineno) + ": wrong number of fields");
        }
        std::vector<double> r;
        r.reserve(cells.size());
        for (const auto& c : cells) r.push_back(cell_to_double(c, lineno));
        rows.push_back(std::move(r));
    }
    Dataset ds;
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto K = static_cast<Eigen::Index>(x_cols.size());
    ds.x.resize(n, K);
    ds.y.resize(n);
    ds.lambda_true.resize(lambda_col >= 0 ? n : 0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        ds.y[i] = r[static_cast<std::size_t>(y_col)];
        if (lambda_col >= 0) ds.lambda_true[i] = r[static_cast<std::size_t>(lambda_col)];
        for (Eigen::Index k = 0; k < K; ++k) ds.x(i, k) = r[x_cols[static_cast<std::size_t>(k)]];
    }
    return ds;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Functional GLM slope estimation, rate studies and certification checks", "fglm"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Simulate a dataset and write it as CSV");
    std::string g_family = "gaussian", g_mu = "zero", g_out;
    double g_alpha = 2.0, g_beta = 3.0, g_a = 0.5;
    std::size_t g_n = 0, g_K = 200;
    std::uint64_t g_seed = 0;
    gen->add_option("--family", g_family, "gaussian, poisson or bernoulli");
    gen->add_option("--alpha", g_alpha);
    gen->add_option("--beta", g_beta);
    gen->add_option("--a", g_a, "intercept");
    gen->add_option("--mu-mode", g_mu, "zero or bumps");
    gen->add_option("--K", g_K, "number of basis coefficients");
    gen->add_option("--n", g_n, "sample size")->required();
    gen->add_option("--seed", g_seed);
    gen->add_option("--out", g_out, "output file (stdout when omitted)");

    // estimate
    auto* est = app.add_subcommand("estimate", "Fit the spectral-truncation estimator to a dataset CSV");
    std::string e_data, e_family = "gaussian", e_out = ".";
    double e_alpha = 2.0, e_beta = 3.0, e_cm = 1.0, e_cN = 2.0;
    std::optional<double> e_zeta;
    std::size_t e_grid = 101;
    est->add_option("--data", e_data, "dataset CSV")->required();
    est->add_option("--family", e_family);
    est->add_option("--alpha", e_alpha);
    est->add_option("--beta", e_beta);
    est->add_option("--c-m", e_cm);
    est->add_option("--c-N", e_cN);
    est->add_option("--zeta", e_zeta);
    est->add_option("--grid", e_grid, "number of grid points on [0,1]");
    est->add_option("--out", e_out, "output directory");

    // rate-study
    auto* rate = app.add_subcommand("rate-study", "Monte Carlo MISE over a grid of sample sizes");
    std::string r_config, r_out;
    std::optional<std::uint64_t> r_seed;
    std::size_t r_jobs = default_jobs();
    bool r_per_rep = false;
    rate->add_option("--config", r_config, "key = value config file")->required();
    rate->add_option("--out", r_out, "output directory (overrides out_dir)");
    rate->add_option("--seed", r_seed, "master seed (overrides seed)");
    rate->add_option("--jobs", r_jobs, "worker threads (default FGLM_JOBS or 1)");
    rate->add_flag("--per-replication", r_per_rep, "also write perreplication.csv");

    // perturb-check
    auto* pert = app.add_subcommand("perturb-check", "Randomized eigen-perturbation suite");
    std::size_t p_reps = 500, p_dim = 12;
    std::uint64_t p_seed = 0;
    std::string p_out;
    pert->add_option("--reps", p_reps);
    pert->add_option("--dim", p_dim, "maximum dimension");
    pert->add_option("--seed", p_seed);
    pert->add_option("--out", p_out, "output file (stdout when omitted)");

    // lower-bound
    auto* lb = app.add_subcommand("lower-bound", "Hypercube affinities and the resulting risk bound");
    std::string l_family = "gaussian", l_ngrid = "100,1000,10000", l_out;
    double l_alpha = 2.0, l_beta = 3.0;
    std::size_t l_mc = 200;
    std::uint64_t l_seed = 0;
    lb->add_option("--family", l_family);
    lb->add_option("--alpha", l_alpha);
    lb->add_option("--beta", l_beta);
    lb->add_option("--n", l_ngrid, "comma-separated sample sizes");
    lb->add_option("--n-mc", l_mc, "Monte Carlo designs per estimate");
    lb->add_option("--seed", l_seed);
    lb->add_option("--out", l_out, "output file (stdout when omitted)");

    // diagnostics
    auto* diag = app.add_subcommand("diagnostics", "MLE linearization, A_n/B_n and chi-square maximal checks");
    std::size_t d_reps = 300, d_chisq_reps = 100000;
    std::uint64_t d_seed = 0;
    std::string d_out = ".";
    diag->add_option("--reps", d_reps, "replications for linearization and A_n checks");
    diag->add_option("--chisq-reps", d_chisq_reps);
    diag->add_option("--seed", d_seed);
    diag->add_option("--out", d_out, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        if (*gen) {
            GroundTruthOptions opt;
            opt.a = g_a;
            opt.mu_mode = parse_mean_mode(g_mu);
            const GroundTruth gt = make_ground_truth(g_alpha, g_beta, ExpFamily::from_name(g_family), g_K, opt);
            const Dataset ds = sample_dataset(gt, g_n, g_seed);
            Sink sink(g_out, out);
            write_dataset_csv(ds, sink.get());
            return 0;
        }
        if (*est) {
            std::ifstream in(e_data);
            if (!in) throw ValidationError("cannot open dataset " + e_data);
            const Dataset ds = read_dataset_csv(in);
            TuningRule rule;
            rule.c_m = e_cm;
            rule.c_N = e_cN;
            rule.zeta = e_zeta;
            if (e_grid < 2) throw ValidationError("--grid needs at least 2 points");
            const FitResult fit = estimate_slope(ds, ExpFamily::from_name(e_family), e_alpha, e_beta, rule);
            {
                auto f = open_in(e_out, "coefficients.csv");
                f << "k,coefficient\n";
                const auto c = fit.slope_hat.coeffs();
                for (std::size_t k = 0; k < c.size(); ++k) f << k + 1 << ',' << format_double(c[k]) << '\n';
            }
            {
                auto f = open_in(e_out, "grid.csv");
                f << "t,value\n";
                const std::vector<double> v = evaluate_on_grid(fit.slope_hat, e_grid);
                for (std::size_t j = 0; j < v.size(); ++j) {
                    f << format_double(static_cast<double>(j) / static_cast<double>(e_grid - 1)) << ','
                      << format_double(v[j]) << '\n';
                }
            }
            out << "m=" << fit.m << " N=" << fit.N << " iterations=" << fit.mle.iterations
                << " converged=" << (fit.mle.converged ? "yes" : "no") << '\n';
            return fit.mle.converged ? 0 : 2;
        }
        if (*rate) {
            ExperimentConfig cfg = load_config(r_config);
            if (r_seed) cfg.seed = *r_seed;
            if (!r_out.empty()) cfg.out_dir = r_out;
            const RateStudyResult res = run_rate_study(cfg, r_jobs);
            write_rate_study(res, cfg, cfg.out_dir, r_per_rep);
            if (!res.slope_fitted) {
                err << "rate-study: slope not fitted, n_grid needs at least three sample sizes\n";
                return 1;
            }
            out << "slope=" << format_double(res.slope) << " se=" << format_double(res.slope_se)
                << " theoretical=" << format_double(res.theoretical) << '\n';
            return 0;
        }
        if (*pert) {
            const auto rows = run_perturbation_suite(p_reps, p_dim, p_seed);
            Sink sink(p_out, out);
            auto& f = sink.get();
            f << "instance,seed,dim,alpha,eps,delta_op,delta_hs,admissible,eigval_ratio,eigval_violation,"
                 "eigval_hs_violation,eigvec_ratio,eigvec_violation,fk_diag_error,fk_offdiag_ratio,"
                 "fk_violation,proj_size,proj_identity_error,proj_ratio\n";
            std::size_t bad = 0;
            for (const auto& r : rows) {
                f << r.instance << ',' << r.seed << ',' << r.dim << ',' << format_double(r.alpha) << ','
                  << format_double(r.eps) << ',' << format_double(r.delta_op) << ','
                  << format_double(r.delta_hs) << ',' << r.admissible << ',' << format_double(r.eigval_ratio)
                  << ',' << flag(r.eigval_violation) << ',' << flag(r.eigval_hs_violation) << ','
                  << format_double(r.eigvec_ratio) << ',' << flag(r.eigvec_violation) << ','
                  << format_double(r.fk_diag_error) << ',' << format_double(r.fk_offdiag_ratio) << ','
                  << flag(r.fk_violation) << ',' << r.proj_size << ',' << format_double(r.proj_identity_error)
                  << ',' << format_double(r.proj_ratio) << '\n';
                const bool proj_bad = r.proj_identity_error > 1e-12 || !(r.proj_ratio <= 1e3);
                bad += (r.eigval_violation || r.eigval_hs_violation || r.eigvec_violation || r.fk_violation ||
                        proj_bad);
            }
            if (bad > 0) {
                err << "perturb-check: " << bad << " instance(s) with violations\n";
                return 2;
            }
            return 0;
        }
        if (*lb) {
            const ExpFamily fam = ExpFamily::from_name(l_family);
            const auto grid = parse_size_list(l_ngrid);
            const auto rows = affinity_table(grid, l_alpha, l_beta, fam, l_mc, l_seed);
            Sink sink(l_out, out);
            auto& f = sink.get();
            f << "n,m,j,eps,affinity,se,affinity_bound,bound_value\n";
            for (const auto& r : rows) {
                const AssouadConfig cfg = calibrated_config(r.n, l_alpha, l_beta, fam);
                const double floor = std::clamp(r.affinity, 0.0, 1.0);
                f << r.n << ',' << r.m << ',' << r.j << ',' << format_double(r.eps) << ','
                  << format_double(r.affinity) << ',' << format_double(r.se) << ','
                  << format_double(r.affinity_bound) << ',' << format_double(assouad_bound_value(cfg, floor))
                  << '\n';
            }
            return 0;
        }
        if (*diag) {
            bool ok = true;
            {
                auto f = open_in(d_out, "linearization.csv");
                f << "family,n,N,reps,hypothesis_count,violations,unconditional_violations,max_residual,"
                     "w_max,w_bound,rate_bound\n";
                struct Case { const char* family; std::size_t n; std::vector<double> gamma; };
                const std::vector<Case> cases = {
                    {"gaussian", 500, {0.5, 0.3, -0.2, 0.1}},
                    {"poisson", 5000, {0.2, 0.1, -0.05, 0.02}},
                };
                for (const auto& c : cases) {
                    const Eigen::VectorXd g = Eigen::Map<const Eigen::VectorXd>(c.gamma.data(),
                                                                                static_cast<Eigen::Index>(c.gamma.size()));
                    const auto rep = check_mle_linearization(c.n, ExpFamily::from_name(c.family), g, d_reps, d_seed);
                    f << c.family << ',' << c.n << ',' << g.size() - 1 << ',' << rep.reps << ','
                      << rep.hypothesis_count << ',' << rep.violations << ',' << rep.unconditional_violations
                      << ',' << format_double(rep.max_residual) << ',' << format_double(rep.w_max) << ','
                      << format_double(rep.w_bound) << ',' << format_double(rep.rate_bound) << '\n';
                    if (rep.hypothesis_count > 0 &&
                        static_cast<double>(rep.violations) / static_cast<double>(rep.hypothesis_count) > rep.rate_bound) {
                        ok = false;
                    }
                }
            }
            {
                auto f = open_in(d_out, "an_bn.csv");
                f << "family,n,N,reps,r0,r1,r2,max_entry_z,mean_op_dist,mean_sq_op_dist,binv_norm,binv_bound\n";
                double prev = std::numeric_limits<double>::infinity();
                for (std::size_t n : {500, 2000, 8000}) {
                    const AnBnProfile p = an_bn_profile(n);
                    const auto rep = check_An_Bn(n, ExpFamily(Family::poisson), p.gamma, p.D, d_reps, d_seed);
                    f << "poisson," << n << ',' << rep.N << ',' << rep.reps << ',' << format_double(rep.moments.r0)
                      << ',' << format_double(rep.moments.r1) << ',' << format_double(rep.moments.r2) << ','
                      << format_double(rep.max_entry_z) << ',' << format_double(rep.mean_op_dist) << ','
                      << format_double(rep.mean_sq_op_dist) << ',' << format_double(rep.binv_norm) << ','
                      << format_double(rep.binv_bound) << '\n';
                    if (!(rep.mean_sq_op_dist < prev) || rep.binv_norm > rep.binv_bound + 1e-9) ok = false;
                    prev = rep.mean_sq_op_dist;
                }
            }
            {
                auto f = open_in(d_out, "chisq.csv");
                f << "n,x,threshold,estimate,se,bound,within\n";
                std::vector<double> tau(20);
                for (std::size_t k = 0; k < tau.size(); ++k) tau[k] = 1.0 / static_cast<double>((k + 1) * (k + 1));
                for (std::size_t n : {10, 100}) {
                    for (const auto& r : check_chisq_maximal(n, tau, {1.0, 2.0, 4.0}, d_chisq_reps, derive_seed(d_seed, n, 0))) {
                        f << n << ',' << format_double(r.x) << ',' << format_double(r.threshold) << ','
                          << format_double(r.estimate) << ',' << format_double(r.se) << ','
                          << format_double(r.bound) << ',' << flag(r.within) << '\n';
                        ok = ok && r.within;
                    }
                }
            }
            return ok ? 0 : 2;
        }
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "runtime error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}

}  // namespace fglm
