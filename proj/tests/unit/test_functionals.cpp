#include <cmath>

#include "doctest.h"
#include "pelab/errors.hpp"
#include "pelab/functionals.hpp"
#include "pelab/perturbation.hpp"

using namespace pelab;

namespace {
const SolveOptions tight{1e-12, 80, 0.5};

RadialSymmetric2Tensor draw(const RadialGrid& grid, PerturbationKind kind, double amp, std::uint64_t seed) {
    PerturbationSpec s;
    s.kind = kind;
    s.amplitude = amp;
    s.r_lo = 0.5;
    s.r_hi = 3.0;
    s.seed = seed;
    return generate_perturbation(s, grid);
}
}  // namespace

TEST_CASE("extrapolation recovers A + B exp(-kappa R)") {
    std::vector<double> R{10, 12, 14, 16, 18}, Q;
    for (double x : R) Q.push_back(1.25 - 3.0 * std::exp(-0.7 * x));
    const auto e = extrapolate_limit(R, Q);
    // kappa is searched on a geometric grid with ratio 1500^(1/600).
    CHECK(e.kappa == doctest::Approx(0.7).epsilon(0.013));
    CHECK(e.value == doctest::Approx(1.25).epsilon(1e-5));
    CHECK(e.residual < 1e-5);
}

TEST_CASE("extrapolation rejects growing increments") {
    std::vector<double> R{10, 12, 14, 16, 18}, Q;
    for (double x : R) Q.push_back(std::exp(0.3 * x));
    CHECK_THROWS_AS(extrapolate_limit(R, Q), Error);
    CHECK_THROWS_AS(extrapolate_limit({1, 2, 3}, {1, 1, 1}), Error);
}

TEST_CASE("all functionals vanish at the reference") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    CHECK(volume_renormalized_mass(ghat, ghat) == 0.0);
    CHECK(s_functional(ghat, ghat) == 0.0);
    CHECK(std::abs(entropy(ghat, ghat, tight).mu) < 1e-12);
}

TEST_CASE("renormalized volume of a conformal metric against direct quadrature") {
    // RV = |S^{n-1}| int (e^{n w} - 1) sinh^{n-1} dr for u = v = w, by Simpson on a fine grid.
    const int n = 4;
    auto wfun = [](double r) { return 0.03 * std::exp(-r * r); };
    const int M = 20000;
    const double b = 8.0, dx = b / M;
    double s = 0.0;
    for (int i = 0; i <= M; ++i) {
        const double x = i * dx;
        const double f = std::expm1(n * wfun(x)) * std::pow(std::sinh(x), n - 1);
        s += f * ((i == 0 || i == M) ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    const double exact = 2.0 * M_PI * M_PI * s * dx / 3.0;  // |S^3| = 2 pi^2
    double err[2];
    for (int i = 0; i < 2; ++i) {
        const auto grid = RadialGrid::uniform(n, 800 << i, 20.0);
        Vec w(grid.size());
        for (int k = 0; k < grid.size(); ++k) w(k) = wfun(grid.r()(k));
        const auto g = conformal(hyperbolic_reference(grid), w);
        err[i] = std::abs(renormalized_volume_limit(g, hyperbolic_reference(grid)).value / exact - 1.0);
    }
    CHECK(err[0] < 1e-7);
    CHECK(std::log2(err[0] / err[1]) > 3.5);
}

TEST_CASE("ADM flux of a compactly supported perturbation vanishes outside the support") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    const auto g = add_tensor(ghat, draw(grid, PerturbationKind::RandomCompact, 0.05, 1));
    for (double R : {5.0, 10.0, 18.0}) CHECK(adm_mass_at_radius(g, ghat, R) == 0.0);
    CHECK_THROWS_AS(adm_mass_at_radius(g, ghat, 25.0), Error);
}

TEST_CASE("reference is critical: first variations are zero to roundoff") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    const auto h = draw(grid, PerturbationKind::RandomCompact, 1.0, 3);
    const double e = 1e-6;
    const auto gp = add_tensor(ghat, {grid, e * h.a, e * h.b});
    const auto gm = add_tensor(ghat, {grid, -e * h.a, -e * h.b});
    // Odd parts cancel: a linear term would leave (F(+) - F(-)) / 2 of order e.
    CHECK(std::abs(s_functional(gp, ghat) - s_functional(gm, ghat)) < 1e-12);
    CHECK(std::abs(entropy(gp, ghat, tight).mu - entropy(gm, ghat, tight).mu) < 1e-12);
}

TEST_CASE("hyperbolic metric is a local maximum of the entropy") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    for (std::uint64_t seed : {1, 2, 3, 4}) {
        const auto g = add_tensor(ghat, draw(grid, PerturbationKind::RandomCompact, 1e-2, seed));
        CHECK(entropy(g, ghat, tight).mu < 0.0);
    }
}

TEST_CASE("W at the entropy potential is mu, and the transcribed integrand differs") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    const auto g = add_tensor(ghat, draw(grid, PerturbationKind::RandomCompact, 0.05, 5));
    const auto e = entropy(g, ghat, tight);
    CHECK(w_functional(g, e.f) == doctest::Approx(e.mu).epsilon(1e-12));
    // mu is the infimum over f.
    const RadialScalarField f2{grid, e.f.values + 0.01 * random_bumps(grid, 0.5, 2.0, 1, 2, 3).f};
    CHECK(w_functional(g, f2) > e.mu);
    const double R = 15.0;
    CHECK(w_functional_at_radius(g, e.f, R, WIntegrand::Transcribed) !=
          doctest::Approx(w_functional_at_radius(g, e.f, R)).epsilon(1e-3));
}

TEST_CASE("functional report is consistent with the single functionals") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    const auto g = add_tensor(ghat, draw(grid, PerturbationKind::Conformal, 0.02, 6));
    const auto rep = functional_report(g, ghat, tight);
    CHECK(rep.m_vr.value == volume_renormalized_mass(g, ghat));
    CHECK(rep.s_value.value == s_functional(g, ghat));
    CHECK(rep.w_value.value == doctest::Approx(rep.mu).epsilon(1e-12));
    const auto csv = radius_table_csv(rep);
    CHECK(csv.rfind("R,m_adm,rv,partial_sum\n", 0) == 0);
    const Json j = to_json(rep);
    CHECK(j.contains("m_vr"));
}
