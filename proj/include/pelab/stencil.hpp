#pragma once

#include <vector>

namespace pelab {

// Finite-difference weights (Fornberg). Returns w[k][j], the weight of x[j]
// in the k-th derivative at x0, for k = 0..max_deriv.
std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& x,
                                            int max_deriv);

// Weights q[j] with sum_j q[j] f(x[j]) = integral of the interpolant over [a, b].
std::vector<double> integration_weights(double a, double b, const std::vector<double>& x);

}  // namespace pelab
