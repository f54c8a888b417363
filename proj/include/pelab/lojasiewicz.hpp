#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pelab/elliptic.hpp"

namespace pelab {

using Mat = Eigen::MatrixXd;

/// A real-analytic function on R^dim with a critical point at the origin.
struct AnalyticFunctional {
    int dim = 0;
    std::function<double(const Vec&)> eval;
    std::function<Vec(const Vec&)> grad;
    std::function<Mat(const Vec&)> hess;
    std::string formula;
    // Samples inside this ball keep every point where Phi is evaluated in the image of N.
    double reduction_radius = 1.0;
};

// -|x|^2, -|x|^4, -x1^2 - x2^4, -x1^2 + x2^3.
AnalyticFunctional neg_square(int dim);
AnalyticFunctional neg_quartic(int dim);
AnalyticFunctional quadratic_quartic();
AnalyticFunctional quadratic_cubic();

struct KernelProjection {
    Mat basis;      // orthonormal columns spanning ker hess(0)
    Mat projector;  // basis * basis^T
    Vec eigenvalues;
    double condition_d0n = 0.0;  // condition number of hess(0) + projector
};

KernelProjection kernel_projection(const AnalyticFunctional& F, double rel_tol = 1e-10);

// N(x) = grad F(x) + P x.
Vec n_map(const AnalyticFunctional& F, const KernelProjection& K, const Vec& x);
// Phi(y) = N^{-1}(y) by a chord iteration with the fixed derivative hess(0) + P.
Vec invert_n(const AnalyticFunctional& F, const KernelProjection& K, const Vec& y,
             const SolveOptions& opts = {1e-14, 200, 0.5});

// G = F o Phi and its gradient (hess F(Phi y) + P)^{-1} grad F(Phi y).
double reduced_value(const AnalyticFunctional& F, const KernelProjection& K, const Vec& y);
Vec reduced_gradient(const AnalyticFunctional& F, const KernelProjection& K, const Vec& y);

struct LemmaCheck {
    std::string lemma;  // "round_trip", "lipschitz", "gradient_comparison", "value_comparison"
    int sample = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
};

struct LemmaSummary {
    std::string lemma;
    double worst_ratio = 0.0;
    bool finite = true;
};

struct ReductionResult {
    KernelProjection kernel;
    double theta = 0.0;
    double c = 0.0;
    std::vector<LemmaCheck> lemma_checks;
    std::vector<LemmaSummary> summary;
};

// Uniform points in the ball of the given radius.
std::vector<Vec> sample_ball(int dim, int count, double radius, std::uint64_t seed);

std::vector<LemmaCheck> verify_lemmas(const AnalyticFunctional& F, const std::vector<Vec>& samples);
std::vector<LemmaSummary> summarize(const std::vector<LemmaCheck>& checks);

struct ExponentFit {
    double theta = 0.0;
    double c = 0.0;
};

// Largest theta on a 0.01 grid for which the worst ratio |F(x) - F(0)|^{2-theta} / |grad F(x)|^2
// over all sample and kernel directions does not grow as the directions are scaled towards the origin.
ExponentFit ls_exponent(const AnalyticFunctional& F, const std::vector<Vec>& samples);

ReductionResult reduce(const AnalyticFunctional& F, const std::vector<Vec>& samples);

struct GradientFlowPoint {
    double t = 0.0;
    Vec x;
    double value = 0.0;
    double grad_norm_sq = 0.0;
};

// Explicit RK4 integration of x' = grad F(x) (ascent) or -grad F(x).
std::vector<GradientFlowPoint> gradient_flow(const AnalyticFunctional& F, const Vec& x0, double dt,
                                             int steps, bool ascent);

std::string lemma_checks_csv(const std::vector<LemmaCheck>& checks);

}  // namespace pelab
