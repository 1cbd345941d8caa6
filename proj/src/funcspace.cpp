#include "fglm/funcspace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fglm/errors.hpp"

namespace fglm {

CosineBasis::CosineBasis(std::size_t size) : size_(size) {
    if (size == 0) throw ValidationError("CosineBasis: size must be positive");
}

double CosineBasis::value(std::size_t k, double t) const {
    return std::numbers::sqrt2 * std::cos(static_cast<double>(k) * std::numbers::pi * t);
}

namespace {

template <typename Op>
FunctionRep combine(const FunctionRep& f, const FunctionRep& g, Op op) {
    const std::size_t len = std::max(f.basis_size(), g.basis_size());
    std::vector<double> out(len);
    for (std::size_t k = 1; k <= len; ++k) out[k - 1] = op(f.coeff(k), g.coeff(k));
    return FunctionRep(std::move(out));
}

}  // namespace

FunctionRep FunctionRep::operator+(const FunctionRep& other) const {
    return combine(*this, other, [](double a, double b) { return a + b; });
}

FunctionRep FunctionRep::operator-(const FunctionRep& other) const {
    return combine(*this, other, [](double a, double b) { return a - b; });
}

FunctionRep FunctionRep::operator*(double scale) const {
    std::vector<double> out(coeffs_);
    for (double& c : out) c *= scale;
    return FunctionRep(std::move(out));
}

double inner(const FunctionRep& f, const FunctionRep& g) noexcept {
    const std::size_t len = std::min(f.basis_size(), g.basis_size());
    auto fc = f.coeffs();
    auto gc = g.coeffs();
    double s = 0.0;
    for (std::size_t k = 0; k < len; ++k) s += fc[k] * gc[k];
    return s;
}

double norm_sq(const FunctionRep& f) noexcept { return inner(f, f); }

std::vector<double> evaluate_at(const FunctionRep& f, std::span<const double> ts) {
    std::vector<double> out(ts.size(), 0.0);
    auto c = f.coeffs();
    for (std::size_t j = 0; j < ts.size(); ++j) {
        double v = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            v += c[k] * std::cos(static_cast<double>(k + 1) * std::numbers::pi * ts[j]);
        }
        out[j] = std::numbers::sqrt2 * v;
    }
    return out;
}

std::vector<double> evaluate_on_grid(const FunctionRep& f, std::size_t points) {
    if (points < 2) throw ValidationError("evaluate_on_grid: need at least 2 grid points");
    std::vector<double> ts(points);
    for (std::size_t j = 0; j < points; ++j) {
        ts[j] = static_cast<double>(j) / static_cast<double>(points - 1);
    }
    return evaluate_at(f, ts);
}

}  // namespace fglm
