#include <cmath>

#include "doctest.h"
#include "pelab/errors.hpp"
#include "pelab/geometry.hpp"

using namespace pelab;

namespace {

double sup(const Vec& x) { return x.cwiseAbs().maxCoeff(); }

// Interior nodes at least `margin` away from R_max.
int interior(const RadialGrid& grid, double margin) {
    int k = 0;
    while (k < grid.size() && grid.r()(k) < grid.R_max() - margin) ++k;
    return k;
}

}  // namespace

TEST_CASE("hyperbolic reference is Einstein with K = -1") {
    for (int n : {3, 4, 5}) {
        const auto grid = RadialGrid::uniform(n, 400, 20.0);
        const auto c = curvature(hyperbolic_reference(grid));
        CHECK(sup(c.scal_dev) == 0.0);
        CHECK(sup(c.K_rad_dev) == 0.0);
        CHECK(sup((c.scal.array() + n * (n - 1.0)).matrix()) < 1e-9);
        CHECK(sup((c.K_tan.array() + 1.0).matrix()) < 1e-12);
    }
}

namespace {
double conformal_scal_error(int N) {
    // scal(e^{2w} ghat) = e^{-2w} (-n(n-1) - 2(n-1) lap w - (n-2)(n-1) |dw|^2), lap = w'' + (n-1) coth(r) w'.
    const int n = 4;
    const auto grid = RadialGrid::uniform(n, N, 20.0);
    const Vec& r = grid.r();
    const Vec w = (0.05 * (-r.array().square()).exp()).matrix();
    const auto c = curvature(conformal(hyperbolic_reference(grid), w));
    double worst = 0.0;
    for (int k = 0; k < interior(grid, 1.0); ++k) {
        const double x = r(k), wk = w(k);
        const double w1 = -2.0 * x * wk, w2 = (4.0 * x * x - 2.0) * wk;
        const double lap = w2 + (n - 1) * w1 / std::tanh(x);
        const double exact = std::exp(-2.0 * wk) * (-n * (n - 1.0) - 2.0 * (n - 1) * lap - (n - 2.0) * (n - 1) * w1 * w1);
        worst = std::max(worst, std::abs(c.scal(k) - exact));
        CHECK(c.scal_dev(k) == doctest::Approx(c.scal(k) + n * (n - 1.0)).epsilon(1e-9).scale(1.0));
    }
    return worst;
}

double gaussian_laplacian_error(int N) {
    const int n = 3;
    const auto grid = RadialGrid::uniform(n, N, 20.0);
    const Vec& r = grid.r();
    const RadialScalarField f{grid, (-r.array().square()).exp().matrix()};
    const Vec L = scalar_laplacian(hyperbolic_reference(grid), f).values;
    double worst = 0.0;
    for (int k = 0; k < interior(grid, 1.0); ++k) {
        const double x = r(k), fk = f.values(k);
        const double exact = -(4.0 * x * x - 2.0) * fk + (n - 1) * 2.0 * x / std::tanh(x) * fk;
        worst = std::max(worst, std::abs(L(k) - exact));
    }
    return worst;
}
}  // namespace

TEST_CASE("scalar curvature of a conformal metric matches the closed form at fourth order") {
    const double e1 = conformal_scal_error(800), e2 = conformal_scal_error(1600);
    MESSAGE("conformal scal error " << e1 << " -> " << e2);
    CHECK(e1 < 1e-5);
    CHECK(std::log2(e1 / e2) > 3.5);
}

TEST_CASE("flux-form Laplacian of a Gaussian converges at fourth order") {
    const double e1 = gaussian_laplacian_error(800), e2 = gaussian_laplacian_error(1600);
    MESSAGE("laplacian error " << e1 << " -> " << e2);
    CHECK(e1 < 1e-5);
    CHECK(std::log2(e1 / e2) > 3.5);
}

TEST_CASE("ball volume of the hyperbolic 3-space") {
    for (double R : {1.0, 4.5, 9.0}) {
        const double exact = 4.0 * M_PI * (std::sinh(2.0 * R) / 4.0 - R / 2.0);
        double err[2];
        for (int i = 0; i < 2; ++i) {
            const auto grid = RadialGrid::uniform(3, 800 << i, 10.0);
            const RadialScalarField one{grid, Vec::Ones(grid.size())};
            err[i] = std::abs(integrate_ball(hyperbolic_reference(grid), one, R) / exact - 1.0);
        }
        MESSAGE("ball volume R=" << R << " rel error " << err[0] << " -> " << err[1]);
        CHECK(err[0] < 1e-7);
        CHECK(std::log2(err[0] / err[1]) > 3.5);
    }
}

TEST_CASE("curvature action of the metric itself is the Ricci tensor") {
    // Fixes the index convention: (R h)_ij = R_ikjl h^kl gives R g = Ric.
    for (int n : {3, 4, 5}) {
        const auto grid = RadialGrid::uniform(n, 200, 10.0);
        const auto ghat = hyperbolic_reference(grid);
        const RadialSymmetric2Tensor one{grid, Vec::Ones(grid.size()), Vec::Ones(grid.size())};
        const auto Rg = curvature_action(ghat, one);
        CHECK(sup((Rg.a.array() + (n - 1.0)).matrix()) < 1e-12);
        CHECK(sup((Rg.b.array() + (n - 1.0)).matrix()) < 1e-12);
    }
}

TEST_CASE("Einstein operator is the rough Laplacian minus twice the curvature action") {
    const int n = 4;
    const auto grid = RadialGrid::uniform(n, 400, 20.0);
    const auto g = hyperbolic_reference(grid);
    RadialSymmetric2Tensor h{grid, (-grid.r().array().square()).exp().matrix(), Vec::Zero(grid.size())};
    h.b = 0.5 * h.a;
    const auto E = einstein_operator(g, h);
    const auto L = tensor_laplacian(g, h);
    const auto Rh = curvature_action(g, h);
    // On ghat, R acts on frame components with K = -1.
    CHECK(sup(Rh.a + (n - 1) * h.b) < 1e-12);
    CHECK(sup(E.a - L.a + 2.0 * Rh.a) < 1e-12);
    const SpMat M = einstein_operator_matrix(g);
    Vec x(2 * grid.size());
    x << h.a, h.b;
    const Vec y = M * x;
    CHECK(sup(y.head(grid.size()) - E.a) < 1e-9);
    CHECK(sup(y.tail(grid.size()) - E.b) < 1e-9);
}

TEST_CASE("DeTurck vector vanishes at the reference and on conformal scalings obeys the closed form") {
    const int n = 4;
    const auto grid = RadialGrid::uniform(n, 800, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    CHECK(sup(deturck_vector(ghat, ghat).values) == 0.0);
    // For u = v = w: W^r = -(n - 2) e^{-2w} w'.
    const Vec& r = grid.r();
    const Vec w = (0.05 * (-r.array().square()).exp()).matrix();
    const auto W = deturck_vector(conformal(ghat, w), ghat).values;
    double worst = 0.0;
    for (int k = 0; k < interior(grid, 1.0); ++k)
        worst = std::max(worst, std::abs(W(k) + std::exp(-2.0 * w(k)) * (n - 2) * (-2.0 * r(k) * w(k))));
    CHECK(worst < 1e-7);
}

TEST_CASE("admissibility and finiteness guards") {
    const auto grid = RadialGrid::uniform(4, 100, 10.0);
    auto g = hyperbolic_reference(grid);
    g.u(grid.size() - 1) = 1e-3;
    CHECK_THROWS_AS(require_admissible(g), Error);
    g.u(3) = NAN;
    CHECK_THROWS_AS(require_finite(g), Error);
}
