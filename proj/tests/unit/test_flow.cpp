#include <cmath>

#include "doctest.h"
#include "pelab/errors.hpp"
#include "pelab/flow.hpp"
#include "pelab/perturbation.hpp"

using namespace pelab;

namespace {
double sup(const Vec& x) { return x.cwiseAbs().maxCoeff(); }

WarpedMetric perturbed(const RadialGrid& grid, double sup_size, std::uint64_t seed) {
    PerturbationSpec ps;
    ps.amplitude = 1.0;
    ps.seed = seed;
    auto h = generate_perturbation(ps, grid);
    const double s = sup_size / sup_norm(h);
    h.a *= s;
    h.b *= s;
    return add_tensor(hyperbolic_reference(grid), h);
}
}  // namespace

TEST_CASE("pull-back by the identity is the identity") {
    const auto grid = RadialGrid::uniform(4, 200, 15.0);
    const auto g = perturbed(grid, 1e-2, 1);
    const Vec z = Vec::Zero(grid.size());
    const auto p = pull_back(g, z, z);
    CHECK(sup(p.u - g.u) < 1e-15);
    CHECK(sup(p.v - g.v) < 1e-15);
}

TEST_CASE("pull-backs of the reference stay on its orbit") {
    // sigma = eps r exp(-r^2) is odd and decays fast. Both defects are interpolation and
    // quadrature error and must shrink at fourth order.
    double orbit[2], scal[2];
    for (int i = 0; i < 2; ++i) {
        const auto grid = RadialGrid::uniform(4, 400 << i, 20.0);
        const Vec& r = grid.r();
        const double eps = 0.05;
        const Vec e = (-r.array().square()).exp().matrix();
        const Vec sigma = (eps * r.array() * e.array()).matrix();
        const Vec dsigma = (eps * (1.0 - 2.0 * r.array().square()) * e.array()).matrix();
        const auto g = pull_back(hyperbolic_reference(grid), sigma, dsigma);
        CHECK(sup(g.u) > 1e-2);
        orbit[i] = orbit_distance(g);
        scal[i] = sup(curvature(g).scal_dev);
        const Vec bad = (-2.0 * Vec::Ones(grid.size())).eval();
        CHECK_THROWS_AS(pull_back(hyperbolic_reference(grid), sigma, bad), Error);
    }
    MESSAGE("orbit " << orbit[0] << " -> " << orbit[1] << ", scal " << scal[0] << " -> " << scal[1]);
    CHECK(orbit[0] < 1e-6);
    CHECK(scal[0] < 1e-3);
    CHECK(std::log2(orbit[0] / orbit[1]) > 3.5);
    CHECK(std::log2(scal[0] / scal[1]) > 3.5);
}

TEST_CASE("the reference is a fixed point of both gauges") {
    const auto grid = RadialGrid::uniform(4, 200, 15.0);
    const auto ghat = hyperbolic_reference(grid);
    for (Gauge gauge : {Gauge::DeTurck, Gauge::EntropyGradient}) {
        FlowConfig cfg;
        cfg.gauge = gauge;
        FlowStepper st(ghat, cfg);
        FlowState s;
        s.g = ghat;
        const auto out = st.step(s, 0.04);
        CHECK(sup(out.g.u) < 1e-14);
        CHECK(sup(out.g.v) < 1e-14);
    }
}

TEST_CASE("entropy-gauge state is the pull-back of the DeTurck state") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    const auto ghat = hyperbolic_reference(grid);
    const auto g0 = perturbed(grid, 1e-2, 2);
    FlowConfig d, e;
    e.gauge = Gauge::EntropyGradient;
    FlowStepper sd(ghat, d), se(ghat, e);
    FlowState xd, xe;
    xd.g = xe.g = g0;
    for (int i = 0; i < 5; ++i) {
        xd = sd.step(xd, 0.01);
        xe = se.step(xe, 0.01);
    }
    CHECK(sup(xe.carrier.u - xd.g.u) < 1e-14);
    const auto back = pull_back(xe.carrier, xe.sigma, xe.dsigma);
    CHECK(sup(back.u - xe.g.u) < 1e-14);
    CHECK(sup(xe.sigma) > 0.0);
}

TEST_CASE("flow from a small perturbation converges with nondecreasing entropy") {
    const auto grid = RadialGrid::uniform(4, 400, 20.0);
    FlowConfig cfg;
    const auto traj = run_flow(perturbed(grid, 1e-2, 4), cfg);
    CHECK(traj.verdict == Verdict::Converged);
    for (size_t k = 1; k < traj.states.size(); ++k) CHECK(traj.states[k].mu >= traj.states[k - 1].mu - 1e-8);
    CHECK(traj.states.back().grad_norm <= cfg.conv_tol);
    CHECK(traj.has_theta);
    CHECK(trajectory_csv(traj).rfind("t,mu,grad_norm,hnorm_inf,hnorm_l2,dist,mu_direct\n", 0) == 0);
}

TEST_CASE("rate fit picks the right branch on synthetic data") {
    std::vector<double> t, de, dp;
    for (int k = 0; k < 40; ++k) {
        t.push_back(0.25 * k);
        de.push_back(0.3 * std::exp(-1.7 * 0.25 * k));
        dp.push_back(0.3 * std::pow(0.25 * k + 1.0, -1.5));
    }
    const auto fe = fit_convergence_rate(t, de);
    CHECK(fe.exponential);
    CHECK(fe.rate == doctest::Approx(1.7).epsilon(1e-6));
    const auto fp = fit_convergence_rate(t, dp);
    CHECK_FALSE(fp.exponential);
    CHECK(fp.beta == doctest::Approx(1.5).epsilon(1e-3));
}

TEST_CASE("Lojasiewicz fit on the gradient flow of -|x|^4 gives theta 1/2") {
    // |F|^{3/2} = |grad F|^2 / 16 for F = -|x|^4.
    const auto F = neg_quartic(2);
    const auto pts = gradient_flow(F, Vec{{0.3, -0.2}}, 0.05, 4000, false);
    std::vector<double> mu, gn;
    for (const auto& p : pts) {
        mu.push_back(p.value);
        gn.push_back(std::sqrt(p.grad_norm_sq));
    }
    const auto fit = fit_lojasiewicz(mu, gn, 1e-14);
    CHECK(fit.theta == doctest::Approx(0.5).epsilon(0.05));
    CHECK(fit.c == doctest::Approx(1.0 / 16.0).epsilon(0.05));
}

TEST_CASE("growth bound holds along the escaping flow of -x1^2 + x2^3") {
    const auto probe = instability_probe(quadratic_cubic(), Vec{{0.0, 1e-2}}, 0.01, 20000, 0.5);
    CHECK(probe.trajectory.verdict == Verdict::Escaped);
    CHECK(probe.growth.ok);
    const auto& s = probe.trajectory.states;
    for (size_t k = 1; k < s.size(); ++k) CHECK(s[k].mu >= s[k - 1].mu);
}

TEST_CASE("instability probe refuses a start below the critical value") {
    const auto grid = RadialGrid::uniform(4, 200, 15.0);
    CHECK_THROWS_AS(instability_probe(perturbed(grid, 1e-2, 5), FlowConfig{}), Error);
}

TEST_CASE("flow config validation") {
    FlowConfig c;
    c.dt_init = -1.0;
    CHECK_THROWS_AS(validate(c), Error);
    c = FlowConfig{};
    c.cfl = 0.0;
    CHECK_THROWS_AS(validate(c), Error);
    CHECK(gauge_from_string("deturck") == Gauge::DeTurck);
    CHECK_THROWS_AS(gauge_from_string("ricci"), Error);
}
