#pragma once

#include <complex>
#include <vector>

#include "pelab/geometry.hpp"

namespace pelab {

struct SolveOptions {
    double tol = 1e-10;
    int max_iter = 50;
    double damping = 0.5;  // backtracking factor
};

struct SolveReport {
    int iterations = 0;
    std::vector<double> residuals;  // sup-norm, one per iterate including the initial guess
};

RadialScalarField solve_shifted_scalar(const WarpedMetric& g, double c, const RadialScalarField& rhs,
                                       const SolveOptions& opts = {});

// Indicial data of the rough Laplacian on symmetric 2-tensors: weight r = 2, i0 = 2n - 4.
// With shift -2 this reproduces the Einstein operator on trace-free tensors at the
// hyperbolic metric.
constexpr int tensor_weight = 2;
constexpr double tensor_i0(int n) { return 2.0 * n - 4.0; }

RadialSymmetric2Tensor solve_shifted_tensor(const WarpedMetric& g, double c,
                                            const RadialSymmetric2Tensor& rhs,
                                            const SolveOptions& opts = {});

struct IndicialReport {
    int n = 0;
    double c = 0.0;
    int weight_r = 0;
    double i0 = 0.0;
    std::complex<double> roots[2];
    double radius = 0.0;     // meaningful when !imaginary
    bool imaginary = false;  // radius^2 < 0
};

IndicialReport indicial_roots(int n, double c, int weight_r, double i0);

struct Thresholds {
    double lambda2 = 0.0;  // least c with a positive indicial radius
    double lambda1 = 0.0;  // least c with radius above (n-1)/2
};

Thresholds threshold_c(int n, int weight_r, double i0);

// Solves 2 Delta f + |df|^2 - (scal + n(n-1)) + 2(n-1) f = 0 with f = 0 at R_max.
RadialScalarField solve_entropy_potential(const WarpedMetric& g, const SolveOptions& opts = {},
                                          SolveReport* report = nullptr,
                                          const Vec* initial_guess = nullptr);

struct YamabeResult {
    RadialScalarField w;
    WarpedMetric gbar;
    SolveReport report;
};

// e^{2w} g with scal + n(n-1) equal to target (zero when omitted), w = 0 at R_max.
YamabeResult solve_yamabe(const WarpedMetric& g, const SolveOptions& opts = {},
                          const Vec* target = nullptr);

enum class OperatorKind {
    ShiftedScalar,      // Delta + c on functions
    Einstein,           // Delta_E on the full radial class
    EinsteinTraceFree,  // Delta_E restricted to a = -(n-1) b
    EinsteinPureTrace,  // Delta_E restricted to a = b
};

struct EigenResult {
    double lambda_min = 0.0;
    RadialSymmetric2Tensor mode;  // scalar modes are returned as a = b = phi
    int iterations = 0;
};

EigenResult lowest_eigenvalue(OperatorKind kind, const WarpedMetric& g, const SolveOptions& opts = {},
                              double c = 0.0);

// Matrix of the selected operator on the interior nodes (Dirichlet at R_max) together
// with the diagonal of the L2(dV_g) mass matrix in the same unknowns.
void restricted_operator(OperatorKind kind, const WarpedMetric& g, double c, SpMat& A, Vec& mass);

}  // namespace pelab
