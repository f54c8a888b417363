#include <cmath>

#include "doctest.h"
#include "pelab/errors.hpp"
#include "pelab/io.hpp"
#include "pelab/rng.hpp"
#include "pelab/stencil.hpp"

using namespace pelab;

TEST_CASE("fd_weights reproduce the classical central stencils") {
    const auto w = fd_weights(0.0, {-1.0, 0.0, 1.0}, 2);
    CHECK(w[1][0] == doctest::Approx(-0.5));
    CHECK(w[1][1] == doctest::Approx(0.0));
    CHECK(w[1][2] == doctest::Approx(0.5));
    CHECK(w[2][0] == doctest::Approx(1.0));
    CHECK(w[2][1] == doctest::Approx(-2.0));
    const auto w5 = fd_weights(0.0, {-2.0, -1.0, 0.0, 1.0, 2.0}, 1);
    CHECK(w5[1][0] == doctest::Approx(1.0 / 12));
    CHECK(w5[1][1] == doctest::Approx(-8.0 / 12));
}

TEST_CASE("integration weights are exact for cubics") {
    const std::vector<double> x{0.0, 0.5, 1.0, 1.5};
    const auto q = integration_weights(0.2, 1.3, x);
    double s = 0.0;
    for (size_t j = 0; j < x.size(); ++j) s += q[j] * x[j] * x[j] * x[j];
    CHECK(s == doctest::Approx((std::pow(1.3, 4) - std::pow(0.2, 4)) / 4).epsilon(1e-13));
}

TEST_CASE("grid quadrature and interpolation") {
    const auto grid = RadialGrid::uniform(3, 400, 10.0);
    const Vec F = grid.r().array().sin().matrix();
    const double exact = 1.0 - std::cos(7.3);
    const auto fine = RadialGrid::uniform(3, 800, 10.0);
    const double e1 = std::abs(grid.integrate(F, 7.3) - exact);
    const double e2 = std::abs(fine.integrate(fine.r().array().sin().matrix(), 7.3) - exact);
    CHECK(e1 < 1e-8);
    CHECK(std::log2(e1 / e2) > 3.5);
    const Vec c = grid.r().array().cos().matrix();
    CHECK(grid.interpolate(c, 2.345, Parity::Even) == doctest::Approx(std::cos(2.345)).epsilon(1e-10));
    CHECK(grid.interpolate(c, 2.345, Parity::Even, 1) == doctest::Approx(-std::sin(2.345)).epsilon(1e-8));
    CHECK_THROWS_AS(RadialGrid::uniform(3, 4, 10.0), Error);
}

TEST_CASE("counter rng is a pure function of seed, stream and counter") {
    CounterRng a(7, 1), b(7, 1), c(7, 2);
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
    CHECK(a.at(0) == x);
    for (int i = 0; i < 1000; ++i) {
        const double u = a.uniform();
        CHECK((u >= 0.0 && u < 1.0));
    }
}

TEST_CASE("format_double round-trips") {
    for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0}) CHECK(std::stod(format_double(x)) == x);
}

TEST_CASE("sha256 of a known message") {
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("metric csv round trip is exact") {
    const auto grid = RadialGrid::uniform(4, 50, 5.0);
    WarpedMetric g{grid, 1e-3 * grid.r().array().cos().matrix(), 1e-2 * (-grid.r().array()).exp().matrix()};
    const auto back = metric_from_csv(metric_to_csv(g), grid);
    CHECK(back.u == g.u);
    CHECK(back.v == g.v);
}
