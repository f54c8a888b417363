#include "pelab/geometry.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "pelab/errors.hpp"
#include "pelab/pointwise.hpp"

namespace pelab {

namespace {

double log_sinh(double r) { return r + std::log1p(-std::exp(-2.0 * r)) - std::log(2.0); }

Vec coth_vec(const Vec& r) { return r.array().tanh().inverse().matrix(); }

constexpr double origin_switch = 1.0;

}  // namespace

RadialScalarField make_scalar(const RadialGrid& grid, const Vec& values) {
    if (values.size() != grid.size())
        throw Error(ErrorCode::GridMismatch, "scalar field length does not match grid");
    return {grid, values};
}

RadialScalarField zero_scalar(const RadialGrid& grid) { return {grid, Vec::Zero(grid.size())}; }

RadialSymmetric2Tensor make_tensor(const RadialGrid& grid, const Vec& a, const Vec& b) {
    if (a.size() != grid.size() || b.size() != grid.size())
        throw Error(ErrorCode::GridMismatch, "tensor components do not match grid");
    return {grid, a, b};
}

RadialSymmetric2Tensor zero_tensor(const RadialGrid& grid) {
    return {grid, Vec::Zero(grid.size()), Vec::Zero(grid.size())};
}

void require_same_grid(const RadialGrid& a, const RadialGrid& b) {
    if (!a.same_as(b)) throw Error(ErrorCode::GridMismatch, "fields live on different grids");
}

void require_finite(const WarpedMetric& g) {
    if (g.u.size() != g.grid.size() || g.v.size() != g.grid.size())
        throw Error(ErrorCode::GridMismatch, "metric profile length does not match grid");
    if (!g.u.allFinite() || !g.v.allFinite())
        throw Error(ErrorCode::NonFiniteProfile, "u or v has non-finite entries");
}

void require_admissible(const WarpedMetric& g, double decay_tol) {
    require_finite(g);
    const int last = g.grid.size() - 1;
    if (std::abs(g.u(last)) > decay_tol || std::abs(g.v(last)) > decay_tol)
        throw Error(ErrorCode::NonAdmissibleMetric,
                    "profile does not decay at R_max (|u| = " + std::to_string(std::abs(g.u(last))) +
                        ", |v| = " + std::to_string(std::abs(g.v(last))) + ")");
}

WarpedMetric hyperbolic_reference(const RadialGrid& grid) {
    return {grid, Vec::Zero(grid.size()), Vec::Zero(grid.size())};
}

CurvatureData curvature(const WarpedMetric& g) {
    require_finite(g);
    const auto& ops = g.grid.ops();
    const int n = g.grid.n();
    const Vec du = ops.d1_even * g.u;
    const Vec dv = ops.d1_even * g.v;
    const Vec d2v = ops.d2_even * g.v;
    const int N = g.grid.size();

    CurvatureData c;
    c.K_rad_dev.resize(N);
    c.K_tan_dev.resize(N);
    for (int k = 0; k < N; ++k) {
        const auto p = point_curvature<double>(g.grid.r()(k), g.u(k), g.v(k), du(k), dv(k), d2v(k));
        c.K_rad_dev(k) = p.krad_dev;
        c.K_tan_dev(k) = p.ktan_dev;
    }
    c.ric_rr_dev = (n - 1) * c.K_rad_dev;
    c.ric_tt_dev = c.K_rad_dev + (n - 2) * c.K_tan_dev;
    c.scal_dev = 2.0 * (n - 1) * c.K_rad_dev + double(n - 1) * (n - 2) * c.K_tan_dev;
    c.K_rad = c.K_rad_dev.array() - 1.0;
    c.K_tan = c.K_tan_dev.array() - 1.0;
    c.ric_rr = (n - 1) * c.K_rad;
    c.ric_tt = c.K_rad + (n - 2) * c.K_tan;
    c.scal = 2.0 * (n - 1) * c.K_rad + double(n - 1) * (n - 2) * c.K_tan;
    return c;
}

SpMat scalar_laplacian_matrix(const WarpedMetric& g) {
    require_finite(g);
    const auto& ops = g.grid.ops();
    const int n = g.grid.n();
    const int N = g.grid.size();
    const Vec uh = ops.ih * g.u;
    const Vec vh = ops.ih * g.v;
    Vec lK(N), lM(N);
    for (int m = 0; m < N; ++m) lK(m) = -uh(m) + (n - 1) * (vh(m) + log_sinh(ops.r_half(m)));
    for (int k = 0; k < N; ++k) lM(k) = g.u(k) + (n - 1) * (g.v(k) + log_sinh(g.grid.r()(k)));

    // -(1/M_k) div_{km} K_m, assembled as ratios so that nothing overflows.
    SpMat B = ops.div;
    for (int col = 0; col < B.outerSize(); ++col)
        for (SpMat::InnerIterator it(B, col); it; ++it)
            it.valueRef() = -it.value() * std::exp(lK(it.col()) - lM(it.row()));
    SpMat Lc = B * ops.dh;

    // The flux behaves like r^n at the origin, which the staggered stencil does not
    // resolve; rows with r < origin_switch use the expanded nodal form instead.
    const Vec du = ops.d1_even * g.u;
    const Vec dv = ops.d1_even * g.v;
    const Vec coth = coth_vec(g.grid.r());
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(Lc.nonZeros());
    for (int col = 0; col < Lc.outerSize(); ++col)
        for (SpMat::InnerIterator it(Lc, col); it; ++it)
            if (g.grid.r()(it.row()) >= origin_switch) t.emplace_back(it.row(), it.col(), it.value());
    auto add_nodal = [&](const SpMat& D, const Vec& coef) {
        for (int col = 0; col < D.outerSize(); ++col)
            for (SpMat::InnerIterator it(D, col); it; ++it)
                if (g.grid.r()(it.row()) < origin_switch)
                    t.emplace_back(it.row(), it.col(), coef(it.row()) * it.value());
    };
    const Vec e2u = (-2.0 * g.u).array().exp();
    const Vec b1 = -du + (n - 1) * (dv + coth);
    add_nodal(ops.d2_even, -e2u);
    add_nodal(ops.d1_even, -e2u.cwiseProduct(b1));
    SpMat L(N, N);
    L.setFromTriplets(t.begin(), t.end());
    L.prune(0.0);
    return L;
}

RadialScalarField scalar_laplacian(const WarpedMetric& g, const RadialScalarField& f) {
    require_same_grid(g.grid, f.grid);
    return {g.grid, scalar_laplacian_matrix(g) * f.values};
}

Vec sphere_mean_curvature(const WarpedMetric& g) {
    const Vec dv = g.grid.ops().d1_even * g.v;
    return ((-g.u).array().exp() * (dv + coth_vec(g.grid.r())).array()).matrix();
}

SpMat tensor_laplacian_matrix(const WarpedMetric& g) {
    const int N = g.grid.size();
    const int n = g.grid.n();
    const SpMat L = scalar_laplacian_matrix(g);
    const Vec H = sphere_mean_curvature(g);
    const Vec H2 = H.array().square();
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(2 * L.nonZeros() + 4 * N);
    for (int col = 0; col < L.outerSize(); ++col)
        for (SpMat::InnerIterator it(L, col); it; ++it) {
            t.emplace_back(it.row(), it.col(), it.value());
            t.emplace_back(N + it.row(), N + it.col(), it.value());
        }
    for (int k = 0; k < N; ++k) {
        t.emplace_back(k, k, 2.0 * (n - 1) * H2(k));
        t.emplace_back(k, N + k, -2.0 * (n - 1) * H2(k));
        t.emplace_back(N + k, k, -2.0 * H2(k));
        t.emplace_back(N + k, N + k, 2.0 * H2(k));
    }
    SpMat M(2 * N, 2 * N);
    M.setFromTriplets(t.begin(), t.end());
    return M;
}

RadialSymmetric2Tensor tensor_laplacian(const WarpedMetric& g, const RadialSymmetric2Tensor& h) {
    require_same_grid(g.grid, h.grid);
    const int n = g.grid.n();
    const SpMat L = scalar_laplacian_matrix(g);
    const Vec H2 = sphere_mean_curvature(g).array().square();
    const Vec c = h.a - h.b;
    const Vec Lb = L * h.b;
    RadialSymmetric2Tensor out{g.grid, Vec(), Vec()};
    out.a = L * c + 2.0 * (n - 1) * H2.cwiseProduct(c) + Lb;
    out.b = -2.0 * H2.cwiseProduct(c) + Lb;
    return out;
}

RadialSymmetric2Tensor curvature_action(const WarpedMetric& g, const RadialSymmetric2Tensor& h) {
    require_same_grid(g.grid, h.grid);
    const int n = g.grid.n();
    const auto c = curvature(g);
    RadialSymmetric2Tensor out{g.grid, Vec(), Vec()};
    out.a = (n - 1) * c.K_rad.cwiseProduct(h.b);
    out.b = c.K_rad.cwiseProduct(h.a) + (n - 2) * c.K_tan.cwiseProduct(h.b);
    return out;
}

RadialSymmetric2Tensor einstein_operator(const WarpedMetric& g, const RadialSymmetric2Tensor& h) {
    auto lap = tensor_laplacian(g, h);
    const auto rh = curvature_action(g, h);
    lap.a -= 2.0 * rh.a;
    lap.b -= 2.0 * rh.b;
    return lap;
}

SpMat einstein_operator_matrix(const WarpedMetric& g) {
    const int N = g.grid.size();
    const int n = g.grid.n();
    const auto c = curvature(g);
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < N; ++k) {
        t.emplace_back(k, N + k, -2.0 * (n - 1) * c.K_rad(k));
        t.emplace_back(N + k, k, -2.0 * c.K_rad(k));
        t.emplace_back(N + k, N + k, -2.0 * (n - 2) * c.K_tan(k));
    }
    SpMat R(2 * N, 2 * N);
    R.setFromTriplets(t.begin(), t.end());
    SpMat M = tensor_laplacian_matrix(g) + R;
    return M;
}

Vec volume_density(const WarpedMetric& g) {
    const int n = g.grid.n();
    const int N = g.grid.size();
    const double omega = sphere_area(n);
    Vec d(N);
    for (int k = 0; k < N; ++k)
        d(k) = omega * std::exp(g.u(k) + (n - 1) * (g.v(k) + log_sinh(g.grid.r()(k))));
    return d;
}

Vec volume_weights(const WarpedMetric& g) {
    return g.grid.ops().quad.cwiseProduct(volume_density(g));
}

double integrate_ball(const WarpedMetric& g, const RadialScalarField& f, double R) {
    require_same_grid(g.grid, f.grid);
    require_finite(g);
    const Vec F = f.values.cwiseProduct(volume_density(g));
    return g.grid.integrate(F, R);
}

double inner_product(const WarpedMetric& g, const RadialScalarField& f1, const RadialScalarField& f2) {
    require_same_grid(g.grid, f1.grid);
    require_same_grid(g.grid, f2.grid);
    return volume_weights(g).dot(f1.values.cwiseProduct(f2.values));
}

double inner_product(const WarpedMetric& g, const RadialSymmetric2Tensor& h1,
                     const RadialSymmetric2Tensor& h2) {
    require_same_grid(g.grid, h1.grid);
    require_same_grid(g.grid, h2.grid);
    const int n = g.grid.n();
    const Vec pt = h1.a.cwiseProduct(h2.a) + (n - 1) * h1.b.cwiseProduct(h2.b);
    return volume_weights(g).dot(pt);
}

RadialScalarField deturck_vector(const WarpedMetric& g, const WarpedMetric& ghat) {
    require_same_grid(g.grid, ghat.grid);
    require_finite(g);
    require_finite(ghat);
    const auto& ops = g.grid.ops();
    const int n = g.grid.n();
    const Vec du = ops.d1_even * g.u;
    const Vec dv = ops.d1_even * g.v;
    const Vec duh = ops.d1_even * ghat.u;
    const Vec dvh = ops.d1_even * ghat.v;
    const Vec coth = coth_vec(g.grid.r());
    const int N = g.grid.size();
    Vec w(N);
    for (int k = 0; k < N; ++k) {
        const double e2u = std::exp(-2.0 * g.u(k));
        const double ehat = std::exp(2.0 * (ghat.v(k) - g.v(k)) - 2.0 * ghat.u(k));
        const double diff = std::expm1(2.0 * (ghat.v(k) - g.v(k)) - 2.0 * ghat.u(k)) -
                            std::expm1(-2.0 * g.u(k));
        w(k) = e2u * (du(k) - duh(k)) +
               (n - 1) * (coth(k) * diff + ehat * dvh(k) - e2u * dv(k));
    }
    return {g.grid, w};
}

RadialScalarField deturck_vector_derivative(const WarpedMetric& g, const WarpedMetric& ghat) {
    require_same_grid(g.grid, ghat.grid);
    require_finite(g);
    require_finite(ghat);
    const auto& ops = g.grid.ops();
    const int n = g.grid.n();
    const Vec du = ops.d1_even * g.u, d2u = ops.d2_even * g.u;
    const Vec dv = ops.d1_even * g.v, d2v = ops.d2_even * g.v;
    const Vec duh = ops.d1_even * ghat.u, d2uh = ops.d2_even * ghat.u;
    const Vec dvh = ops.d1_even * ghat.v, d2vh = ops.d2_even * ghat.v;
    const Vec& r = g.grid.r();
    const Vec coth = coth_vec(r);
    const int N = g.grid.size();
    Vec dw(N);
    for (int k = 0; k < N; ++k) {
        const double e2u = std::exp(-2.0 * g.u(k));
        const double X = 2.0 * (ghat.v(k) - g.v(k)) - 2.0 * ghat.u(k);
        const double dX = 2.0 * (dvh(k) - dv(k)) - 2.0 * duh(k);
        const double eX = std::exp(X);
        const double diff = std::expm1(X) - std::expm1(-2.0 * g.u(k));
        const double ddiff = eX * dX + 2.0 * du(k) * e2u;
        const double csch2 = 1.0 / (std::sinh(r(k)) * std::sinh(r(k)));
        dw(k) = e2u * (d2u(k) - d2uh(k) - 2.0 * du(k) * (du(k) - duh(k))) +
                (n - 1) * (-csch2 * diff + coth(k) * ddiff + eX * (dX * dvh(k) + d2vh(k)) -
                           e2u * (d2v(k) - 2.0 * du(k) * dv(k)));
    }
    return {g.grid, dw};
}

RadialSymmetric2Tensor lie_derivative(const WarpedMetric& g, const RadialScalarField& w) {
    require_same_grid(g.grid, w.grid);
    return lie_derivative(g, w, RadialScalarField{g.grid, g.grid.ops().d1_odd * w.values});
}

RadialSymmetric2Tensor lie_derivative(const WarpedMetric& g, const RadialScalarField& w,
                                      const RadialScalarField& dw) {
    require_same_grid(g.grid, w.grid);
    require_same_grid(g.grid, dw.grid);
    const auto& ops = g.grid.ops();
    const Vec du = ops.d1_even * g.u;
    const Vec dv = ops.d1_even * g.v;
    const Vec coth = coth_vec(g.grid.r());
    RadialSymmetric2Tensor out{g.grid, Vec(), Vec()};
    out.a = 2.0 * (du.cwiseProduct(w.values) + dw.values);
    out.b = 2.0 * w.values.cwiseProduct(dv + coth);
    return out;
}

RadialSymmetric2Tensor deturck_term(const WarpedMetric& g, const WarpedMetric& ghat) {
    return lie_derivative(g, deturck_vector(g, ghat), deturck_vector_derivative(g, ghat));
}

RadialSymmetric2Tensor hessian(const WarpedMetric& g, const RadialScalarField& f) {
    require_same_grid(g.grid, f.grid);
    const auto& ops = g.grid.ops();
    const Vec du = ops.d1_even * g.u;
    const Vec dv = ops.d1_even * g.v;
    const Vec df = ops.d1_even * f.values;
    const Vec d2f = ops.d2_even * f.values;
    const Vec e2u = (-2.0 * g.u).array().exp();
    const Vec coth = coth_vec(g.grid.r());
    RadialSymmetric2Tensor out{g.grid, Vec(), Vec()};
    out.a = e2u.cwiseProduct(d2f - du.cwiseProduct(df));
    out.b = e2u.cwiseProduct((dv + coth).cwiseProduct(df));
    return out;
}

WarpedMetric add_tensor(const WarpedMetric& g, const RadialSymmetric2Tensor& h) {
    require_same_grid(g.grid, h.grid);
    if ((h.a.array() <= -1.0).any() || (h.b.array() <= -1.0).any())
        throw Error(ErrorCode::InvalidArgument, "g + h is not positive definite");
    WarpedMetric out = g;
    out.u += 0.5 * h.a.array().log1p().matrix();
    out.v += 0.5 * h.b.array().log1p().matrix();
    return out;
}

RadialSymmetric2Tensor metric_difference(const WarpedMetric& g, const WarpedMetric& ghat) {
    require_same_grid(g.grid, ghat.grid);
    RadialSymmetric2Tensor out{g.grid, Vec(), Vec()};
    out.a = (2.0 * (g.u - ghat.u)).array().expm1().matrix();
    out.b = (2.0 * (g.v - ghat.v)).array().expm1().matrix();
    return out;
}

WarpedMetric conformal(const WarpedMetric& g, const Vec& w) {
    if (w.size() != g.grid.size())
        throw Error(ErrorCode::GridMismatch, "conformal factor length does not match grid");
    WarpedMetric out = g;
    out.u += w;
    out.v += w;
    return out;
}

}  // namespace pelab
