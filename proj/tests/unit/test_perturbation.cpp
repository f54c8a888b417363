#include <cmath>

#include "doctest.h"
#include "pelab/errors.hpp"
#include "pelab/perturbation.hpp"

using namespace pelab;

namespace {
const RadialGrid& grid() {
    static const auto g = RadialGrid::uniform(4, 4000, 20.0);
    return g;
}
}  // namespace

TEST_CASE("zero amplitude gives the zero tensor") {
    PerturbationSpec s;
    s.amplitude = 0.0;
    const auto h = generate_perturbation(s, grid());
    CHECK(h.a.cwiseAbs().maxCoeff() == 0.0);
    CHECK(h.b.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kinds satisfy their algebraic relations") {
    PerturbationSpec s;
    s.kind = PerturbationKind::Conformal;
    auto h = generate_perturbation(s, grid());
    CHECK((h.a - h.b).cwiseAbs().maxCoeff() == 0.0);
    s.kind = PerturbationKind::TraceFree;
    h = generate_perturbation(s, grid());
    CHECK((h.a + 3.0 * h.b).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(h.a.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("amplitude is the C2 norm and the support is respected") {
    for (auto kind : {PerturbationKind::Conformal, PerturbationKind::TraceFree, PerturbationKind::RandomCompact,
                      PerturbationKind::DivergenceFree}) {
        PerturbationSpec s;
        s.kind = kind;
        s.amplitude = 3e-3;
        const auto h = generate_perturbation(s, grid());
        // The amplitude uses the analytic bump derivatives, c2_norm grid derivatives.
        CHECK(c2_norm(h) == doctest::Approx(3e-3).epsilon(1e-3));
        const Vec& r = grid().r();
        for (int k = 0; k < grid().size(); ++k)
            if (r(k) < s.r_lo || r(k) > s.r_hi) {
                CHECK(h.a(k) == 0.0);
                CHECK(h.b(k) == 0.0);
            }
    }
}

TEST_CASE("generation is deterministic in the seed") {
    PerturbationSpec s;
    const auto h1 = generate_perturbation(s, grid());
    const auto h2 = generate_perturbation(s, grid());
    CHECK(h1.a == h2.a);
    CHECK(h1.b == h2.b);
    s.seed = 8;
    CHECK_FALSE(generate_perturbation(s, grid()).a == h1.a);
}

TEST_CASE("divergence-free kind has vanishing divergence") {
    // div h = a' + (n-1) coth(r) (a - b) for the radial tensor against the hyperbolic metric.
    // b is built from the analytic a', so the residual is the grid derivative error.
    PerturbationSpec s;
    s.kind = PerturbationKind::DivergenceFree;
    s.r_hi = 3.0;
    double rel[2];
    for (int i = 0; i < 2; ++i) {
        const auto g = RadialGrid::uniform(4, 2000 << i, 20.0);
        const auto h = generate_perturbation(s, g);
        const Vec& r = g.r();
        const Vec da = g.ops().d1_even * h.a;
        double worst = 0.0;
        for (int k = 0; k < g.size(); ++k)
            worst = std::max(worst, std::abs(da(k) + 3.0 / std::tanh(r(k)) * (h.a(k) - h.b(k))));
        rel[i] = worst / da.cwiseAbs().maxCoeff();
    }
    CHECK(rel[0] < 1e-3);
    CHECK(std::log2(rel[0] / rel[1]) > 3.5);
}

TEST_CASE("bad specs are rejected") {
    PerturbationSpec s;
    s.r_lo = 5.0;
    s.r_hi = 4.0;
    CHECK_THROWS_AS(generate_perturbation(s, grid()), Error);
    s = PerturbationSpec{};
    s.r_hi = 25.0;
    CHECK_THROWS_AS(generate_perturbation(s, grid()), Error);
    s = PerturbationSpec{};
    s.bumps = 0;
    CHECK_THROWS_AS(generate_perturbation(s, grid()), Error);
    CHECK_THROWS_AS(perturbation_kind_from_string("scalar"), Error);
}
