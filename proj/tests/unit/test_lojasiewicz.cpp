#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "pelab/lojasiewicz.hpp"

using namespace pelab;

TEST_CASE("kernel projector is an orthogonal projection") {
    for (const auto& F : {neg_square(3), neg_quartic(3), quadratic_quartic(), quadratic_cubic()}) {
        const auto K = kernel_projection(F);
        const Mat& P = K.projector;
        CHECK((P * P - P).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((P - P.transpose()).cwiseAbs().maxCoeff() < 1e-12);
        CHECK(std::isfinite(K.condition_d0n));
    }
    CHECK(kernel_projection(neg_square(3)).basis.cols() == 0);
    CHECK(kernel_projection(neg_quartic(3)).basis.cols() == 3);
    CHECK(kernel_projection(quadratic_quartic()).basis.cols() == 1);
}

TEST_CASE("Phi inverts N") {
    const auto F = quadratic_quartic();
    const auto K = kernel_projection(F);
    for (const auto& x : sample_ball(2, 20, 0.1, 3)) {
        const Vec back = invert_n(F, K, n_map(F, K, x));
        CHECK((back - x).norm() < 1e-10);
    }
}

TEST_CASE("reduced gradient matches finite differences of the reduced value") {
    const auto F = quadratic_quartic();
    const auto K = kernel_projection(F);
    const Vec y{{0.03, -0.04}};
    const Vec g = reduced_gradient(F, K, y);
    const double e = 1e-5;
    for (int i = 0; i < 2; ++i) {
        Vec yp = y, ym = y;
        yp(i) += e;
        ym(i) -= e;
        CHECK(g(i) == doctest::Approx((reduced_value(F, K, yp) - reduced_value(F, K, ym)) / (2 * e)).epsilon(1e-6));
    }
}

TEST_CASE("sampling is deterministic and inside the ball") {
    const auto a = sample_ball(3, 50, 0.2, 11);
    const auto b = sample_ball(3, 50, 0.2, 11);
    REQUIRE(a.size() == 50);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i] == b[i]);
        CHECK(a[i].norm() <= 0.2);
    }
}

TEST_CASE("Lojasiewicz exponents of the model functionals") {
    const auto samples = sample_ball(2, 100, 0.1, 7);
    const auto sq = ls_exponent(neg_square(2), samples);
    CHECK(sq.theta == doctest::Approx(1.0));
    CHECK(sq.c == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(ls_exponent(neg_quartic(2), samples).theta == doctest::Approx(0.5).epsilon(0.02));
    CHECK(ls_exponent(quadratic_quartic(), samples).theta == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("reduction lemma constants are finite") {
    for (const auto& F : {neg_square(2), neg_quartic(2), quadratic_quartic(), quadratic_cubic()}) {
        const auto samples = sample_ball(F.dim, 60, std::min(0.1, F.reduction_radius), 5);
        const auto res = reduce(F, samples);
        REQUIRE_FALSE(res.summary.empty());
        for (const auto& s : res.summary) CHECK(s.finite);
        const auto csv = lemma_checks_csv(res.lemma_checks);
        CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(res.lemma_checks.size()) + 1);
    }
}

TEST_CASE("gradient flow of -|x|^2 decays exponentially") {
    const auto pts = gradient_flow(neg_square(2), Vec{{0.1, 0.0}}, 0.01, 100, true);
    // x' = -2x.
    CHECK(pts.back().x(0) == doctest::Approx(0.1 * std::exp(-2.0 * pts.back().t)).epsilon(1e-8));
}
