#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace fglm {

/// Orthonormal cosine system phi_k(t) = sqrt(2) cos(k pi t), k = 1..size, on L2[0,1].
class CosineBasis {
public:
    explicit CosineBasis(std::size_t size);

    std::size_t size() const noexcept { return size_; }

    /// phi_k(t) for 1-based k.
    double value(std::size_t k, double t) const;

private:
    std::size_t size_;
};

/// A function on [0,1] stored by its coefficients in the cosine basis.
/// Coefficient vectors of different lengths are compared by zero padding.
class FunctionRep {
public:
    FunctionRep() = default;
    explicit FunctionRep(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {}

    static FunctionRep zero(std::size_t basis_size) {
        return FunctionRep(std::vector<double>(basis_size, 0.0));
    }

    std::size_t basis_size() const noexcept { return coeffs_.size(); }
    std::span<const double> coeffs() const noexcept { return coeffs_; }

    /// 1-based coefficient lookup, zero beyond the stored length.
    double coeff(std::size_t k) const noexcept {
        return (k >= 1 && k <= coeffs_.size()) ? coeffs_[k - 1] : 0.0;
    }

    FunctionRep operator+(const FunctionRep& other) const;
    FunctionRep operator-(const FunctionRep& other) const;
    FunctionRep operator*(double scale) const;

private:
    std::vector<double> coeffs_;
};

double inner(const FunctionRep& f, const FunctionRep& g) noexcept;
double norm_sq(const FunctionRep& f) noexcept;

/// Values f(t_j) at `points` equally spaced nodes t_j = j/(points-1), j = 0..points-1.
/// Throws ValidationError when points < 2.
std::vector<double> evaluate_on_grid(const FunctionRep& f, std::size_t points);

/// Values of f at arbitrary locations in [0,1].
std::vector<double> evaluate_at(const FunctionRep& f, std::span<const double> ts);

}  // namespace fglm
