#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace fglm {

/// Gauss-Hermite rule rescaled to the standard normal: E f(Z) ~ sum_i weights[i] f(nodes[i]).
struct NormalQuadrature {
    std::vector<double> nodes;
    std::vector<double> weights;

    double expectation(const std::function<double(double)>& f) const;
};

/// `points`-node rule (exact for polynomials of degree < 2*points). Nodes are
/// found by Newton iteration on the orthonormal Hermite recurrence.
NormalQuadrature gauss_hermite_normal(std::size_t points);

}  // namespace fglm
