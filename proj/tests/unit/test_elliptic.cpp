#include <cmath>

#include "doctest.h"
#include "pelab/elliptic.hpp"
#include "pelab/errors.hpp"
#include "pelab/perturbation.hpp"

using namespace pelab;

namespace {
double sup(const Vec& x) { return x.cwiseAbs().maxCoeff(); }
const SolveOptions tight{1e-12, 80, 0.5};
}  // namespace

TEST_CASE("indicial radius of the shifted scalar Laplacian") {
    for (int n : {3, 4, 5, 7})
        for (double c : {0.0, 0.25, 1.0, 10.0}) {
            const auto rep = indicial_roots(n, c, 0, 0.0);
            CHECK_FALSE(rep.imaginary);
            CHECK(rep.radius == doctest::Approx(std::sqrt(std::pow((n - 1) / 2.0, 2) + c)));
            // Roots of c + s(n-1-s).
            for (const auto& s : rep.roots) CHECK(std::abs(c + s * (n - 1.0 - s)) < 1e-12);
        }
    CHECK(indicial_roots(3, -2.0, 0, 0.0).imaginary);
}

TEST_CASE("Einstein operator configuration has radius (n-1)/2") {
    for (int n : {3, 4, 5, 6}) CHECK(indicial_roots(n, -2.0, tensor_weight, tensor_i0(n)).radius == doctest::Approx((n - 1) / 2.0));
}

TEST_CASE("thresholds bracket the sign change of the indicial discriminant") {
    for (int n : {3, 4, 5}) {
        const auto t = threshold_c(n, tensor_weight, tensor_i0(n));
        CHECK(t.lambda1 >= t.lambda2);
        if (t.lambda2 > 0.0) {
            CHECK(indicial_roots(n, t.lambda2 - 1e-6, tensor_weight, tensor_i0(n)).imaginary);
            CHECK_FALSE(indicial_roots(n, t.lambda2 + 1e-6, tensor_weight, tensor_i0(n)).imaginary);
        }
        CHECK(indicial_roots(n, t.lambda1 + 1e-9, tensor_weight, tensor_i0(n)).radius >= (n - 1) / 2.0 - 1e-6);
    }
}

namespace {
double manufactured_error(int N) {
    const int n = 4;
    const double c = 2.0;
    const auto grid = RadialGrid::uniform(n, N, 20.0);
    const Vec& r = grid.r();
    const Vec f = (-r.array().square()).exp().matrix();
    Vec rhs(grid.size());
    for (int k = 0; k < grid.size(); ++k) {
        const double x = r(k);
        rhs(k) = (-(4.0 * x * x - 2.0) + (n - 1) * 2.0 * x / std::tanh(x) + c) * f(k);
    }
    const auto sol = solve_shifted_scalar(hyperbolic_reference(grid), c, {grid, rhs}, tight);
    return sup(sol.values - f);
}
}  // namespace

TEST_CASE("shifted scalar solve against a manufactured solution") {
    const double e1 = manufactured_error(800), e2 = manufactured_error(1600);
    CHECK(e1 < 1e-6);
    CHECK(std::log2(e1 / e2) > 3.5);
}

TEST_CASE("entropy potential of the reference vanishes") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    SolveReport rep;
    const auto f = solve_entropy_potential(hyperbolic_reference(grid), tight, &rep);
    CHECK(sup(f.values) < 1e-12);
}

TEST_CASE("entropy potential satisfies its Euler-Lagrange equation") {
    const int n = 4;
    const auto grid = RadialGrid::uniform(n, 800, 20.0);
    PerturbationSpec ps;
    ps.amplitude = 0.05;
    const auto g = add_tensor(hyperbolic_reference(grid), generate_perturbation(ps, grid));
    SolveReport rep;
    const auto f = solve_entropy_potential(g, tight, &rep);
    CHECK(rep.residuals.back() < 1e-11);
    // Monotone until roundoff.
    for (size_t i = 1; i < rep.residuals.size(); ++i)
        if (rep.residuals[i - 1] > 1e-12) CHECK(rep.residuals[i] < rep.residuals[i - 1]);
    const Vec df = grid.ops().d1_even * f.values;
    const Vec el = 2.0 * scalar_laplacian(g, f).values + ((-2.0 * g.u).array().exp() * df.array().square()).matrix() -
                   curvature(g).scal_dev + 2.0 * (n - 1) * f.values;
    CHECK(sup(el.head(grid.size() - 1)) < 1e-10);
}

TEST_CASE("Yamabe solve reaches the target scalar curvature") {
    const int n = 4;
    const auto grid = RadialGrid::uniform(n, 800, 20.0);
    PerturbationSpec ps;
    ps.amplitude = 0.02;
    const auto g = add_tensor(hyperbolic_reference(grid), generate_perturbation(ps, grid));
    const auto y = solve_yamabe(g, tight);
    const Vec dev = curvature(y.gbar).scal_dev;
    CHECK(sup(dev.head(grid.size() - 1)) < 1e-9);
    CHECK(y.w.values(grid.size() - 1) == 0.0);

    const Vec target = 0.01 * random_bumps(grid, 0.5, 2.0, 1, 3, 9).f.cwiseAbs();
    const auto yt = solve_yamabe(g, tight, &target);
    CHECK(sup((curvature(yt.gbar).scal_dev - target).head(grid.size() - 1)) < 1e-9);
}

TEST_CASE("Yamabe solve on the reference is the identity") {
    const auto grid = RadialGrid::uniform(4, 200, 15.0);
    CHECK(sup(solve_yamabe(hyperbolic_reference(grid), tight).w.values) < 1e-14);
}

TEST_CASE("lowest eigenvalue of the shifted scalar Laplacian approaches the bottom of the spectrum") {
    // Spectrum of Delta on H^n starts at (n-1)^2/4; Dirichlet truncation lies above and decreases in R.
    const int n = 3;
    double prev = INFINITY;
    for (double R : {8.0, 12.0, 16.0}) {
        const auto grid = RadialGrid::uniform(n, static_cast<int>(R * 40), R);
        const double lam = lowest_eigenvalue(OperatorKind::ShiftedScalar, hyperbolic_reference(grid), tight, 0.0).lambda_min;
        CHECK(lam > 1.0);
        CHECK(lam < prev);
        // For n = 3 the radial problem is explicit: lambda = 1 + (pi / R)^2.
        CHECK(lam == doctest::Approx(1.0 + std::pow(M_PI / R, 2)).epsilon(1e-6));
        prev = lam;
    }
}
