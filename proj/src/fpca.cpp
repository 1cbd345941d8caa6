#include "fglm/fpca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "fglm/errors.hpp"

namespace fglm {

namespace {

Eigen::VectorXd to_vector(const FunctionRep& f, Eigen::Index len) {
    Eigen::VectorXd v(len);
    for (Eigen::Index k = 0; k < len; ++k) v[k] = f.coeff(static_cast<std::size_t>(k) + 1);
    return v;
}

FunctionRep to_function(const Eigen::VectorXd& v) {
    return FunctionRep(std::vector<double>(v.data(), v.data() + v.size()));
}

}  // namespace

FunctionRep SpectralEstimate::eigenfunction(std::size_t k) const {
    if (k < 1 || k > static_cast<std::size_t>(phi_tilde.cols())) {
        throw ValidationError("eigenfunction index out of range");
    }
    return to_function(phi_tilde.col(static_cast<Eigen::Index>(k) - 1));
}

FunctionRep sample_mean(const Dataset& ds) {
    if (ds.n() < 1) throw ValidationError("sample_mean: empty dataset");
    return to_function(ds.x.colwise().mean().transpose());
}

Eigen::MatrixXd sample_cov(const Dataset& ds) {
    if (ds.n() < 2) throw ValidationError("sample_cov: n must be at least 2");
    const Eigen::RowVectorXd mean = ds.x.colwise().mean();
    const Eigen::MatrixXd centered = ds.x.rowwise() - mean;
    Eigen::MatrixXd cov(centered.cols(), centered.cols());
    cov.setZero();
    cov.selfadjointView<Eigen::Lower>().rankUpdate(centered.transpose());
    cov.triangularView<Eigen::StrictlyUpper>() = cov.transpose();
    return cov / static_cast<double>(ds.n() - 1);
}

EigenSystem eigendecompose(const Eigen::MatrixXd& cov) {
    if (cov.rows() != cov.cols() || cov.rows() == 0) {
        throw ValidationError("eigendecompose: matrix must be square and nonempty");
    }
    const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
        throw ValidationError("eigendecompose: matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw NumericalError("eigendecompose: solver failed");

    const Eigen::Index dim = cov.rows();
    // Solver output is ascending; reverse it, then a stable sort keeps ties in solver order.
    std::vector<Eigen::Index> order(static_cast<std::size_t>(dim));
    std::iota(order.rbegin(), order.rend(), Eigen::Index{0});
    const Eigen::VectorXd& ev = solver.eigenvalues();
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index l, Eigen::Index r) { return ev[l] > ev[r]; });

    EigenSystem out;
    out.values.resize(dim);
    out.vectors.resize(dim, dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
        const Eigen::Index src = order[static_cast<std::size_t>(k)];
        out.values[k] = std::max(0.0, ev[src]);
        Eigen::VectorXd v = solver.eigenvectors().col(src);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        out.vectors.col(k) = v;
    }
    return out;
}

Eigen::MatrixXd compute_scores(const Dataset& ds, const FunctionRep& xbar,
                               const Eigen::MatrixXd& phi_tilde, std::size_t n_scores) {
    if (n_scores > static_cast<std::size_t>(phi_tilde.cols())) {
        throw ValidationError("compute_scores: requested more scores than eigenfunctions");
    }
    if (phi_tilde.rows() != ds.x.cols()) {
        throw ValidationError("compute_scores: eigenfunction length does not match basis size");
    }
    const Eigen::RowVectorXd mean = to_vector(xbar, ds.x.cols()).transpose();
    const auto cols = static_cast<Eigen::Index>(n_scores);
    return (ds.x.rowwise() - mean) * phi_tilde.leftCols(cols);
}

SpectralEstimate run_fpca(const Dataset& ds, std::size_t n_scores) {
    SpectralEstimate est;
    est.xbar = sample_mean(ds);
    est.cov = sample_cov(ds);
    EigenSystem eig = eigendecompose(est.cov);
    // Rank of the centred sample is at most n-1.
    const auto rank = static_cast<Eigen::Index>(ds.n() - 1);
    for (Eigen::Index k = rank; k < eig.values.size(); ++k) eig.values[k] = 0.0;
    est.theta_tilde = std::move(eig.values);
    est.phi_tilde = std::move(eig.vectors);
    est.scores = compute_scores(ds, est.xbar, est.phi_tilde, n_scores);
    return est;
}

}  // namespace fglm
