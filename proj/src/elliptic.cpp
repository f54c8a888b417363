#include "pelab/elliptic.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "pelab/errors.hpp"
#include "pelab/pointwise.hpp"

namespace pelab {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Replaces the listed rows by identity rows.
SpMat with_dirichlet_rows(const SpMat& A, const std::vector<int>& rows) {
    std::vector<char> fixed(A.rows(), 0);
    for (int r : rows) fixed[r] = 1;
    Triplets t;
    t.reserve(A.nonZeros());
    for (int col = 0; col < A.outerSize(); ++col)
        for (SpMat::InnerIterator it(A, col); it; ++it)
            if (!fixed[it.row()]) t.emplace_back(it.row(), it.col(), it.value());
    for (int r : rows) t.emplace_back(r, r, 1.0);
    SpMat out(A.rows(), A.cols());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

SpMat diagonal(const Vec& d) {
    SpMat D(d.size(), d.size());
    D.reserve(Eigen::VectorXi::Constant(d.size(), 1));
    for (int k = 0; k < d.size(); ++k) D.insert(k, k) = d(k);
    return D;
}

SpMat shifted(const SpMat& A, double c) {
    SpMat I(A.rows(), A.cols());
    I.setIdentity();
    return A + c * I;
}

// Principal submatrix keeping the listed indices.
SpMat submatrix(const SpMat& A, const std::vector<int>& keep) {
    std::vector<int> pos(A.rows(), -1);
    for (size_t i = 0; i < keep.size(); ++i) pos[keep[i]] = static_cast<int>(i);
    Triplets t;
    for (int col = 0; col < A.outerSize(); ++col)
        for (SpMat::InnerIterator it(A, col); it; ++it)
            if (pos[it.row()] >= 0 && pos[it.col()] >= 0) t.emplace_back(pos[it.row()], pos[it.col()], it.value());
    SpMat out(keep.size(), keep.size());
    out.setFromTriplets(t.begin(), t.end());
    return out;
}

Vec solve_sparse(const SpMat& A, const Vec& b) {
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::SingularSystem, "sparse LU failed");
    Vec x = lu.solve(b);
    if (lu.info() != Eigen::Success || !x.allFinite())
        throw Error(ErrorCode::SingularSystem, "sparse solve failed");
    // One step of refinement.
    const Vec r = b - A * x;
    x += lu.solve(r);
    return x;
}

double sup_interior(const Vec& r, int skip_last) {
    return r.head(r.size() - skip_last).cwiseAbs().maxCoeff();
}

}  // namespace

RadialScalarField solve_shifted_scalar(const WarpedMetric& g, double c, const RadialScalarField& rhs,
                                       const SolveOptions& opts) {
    require_same_grid(g.grid, rhs.grid);
    if (!(c > 0.0)) throw Error(ErrorCode::ShiftNotPositive, "c = " + std::to_string(c));
    const int N = g.grid.size();
    const SpMat A = shifted(scalar_laplacian_matrix(g), c);
    Vec b = rhs.values;
    b(N - 1) = 0.0;
    const Vec x = solve_sparse(with_dirichlet_rows(A, {N - 1}), b);
    const double res = sup_interior(A * x - rhs.values, 1);
    const double scale = std::max(rhs.values.head(N - 1).cwiseAbs().maxCoeff(), 1e-300);
    if (res > opts.tol * scale && res > 1e-300)
        throw Error(ErrorCode::SingularSystem,
                    "residual " + std::to_string(res / scale) + " above tolerance after direct solve");
    return {g.grid, x};
}

RadialSymmetric2Tensor solve_shifted_tensor(const WarpedMetric& g, double c,
                                            const RadialSymmetric2Tensor& rhs,
                                            const SolveOptions& opts) {
    require_same_grid(g.grid, rhs.grid);
    const int n = g.grid.n();
    const double thr = threshold_c(n, tensor_weight, tensor_i0(n)).lambda2;
    if (!(c > thr))
        throw Error(ErrorCode::ShiftBelowThreshold,
                    "c = " + std::to_string(c) + " is not above " + std::to_string(thr));
    const int N = g.grid.size();
    const SpMat A = shifted(tensor_laplacian_matrix(g), c);
    Vec b(2 * N);
    b << rhs.a, rhs.b;
    const Vec full = b;
    b(N - 1) = 0.0;
    b(2 * N - 1) = 0.0;
    const Vec x = solve_sparse(with_dirichlet_rows(A, {N - 1, 2 * N - 1}), b);
    Vec r = A * x - full;
    r(N - 1) = 0.0;
    r(2 * N - 1) = 0.0;
    const double res = r.cwiseAbs().maxCoeff();
    Vec bi = full;
    bi(N - 1) = 0.0;
    bi(2 * N - 1) = 0.0;
    const double scale = std::max(bi.cwiseAbs().maxCoeff(), 1e-300);
    if (res > opts.tol * scale && res > 1e-300)
        throw Error(ErrorCode::SingularSystem,
                    "residual " + std::to_string(res / scale) + " above tolerance after direct solve");
    return {g.grid, x.head(N), x.tail(N)};
}

IndicialReport indicial_roots(int n, double c, int weight_r, double i0) {
    IndicialReport rep;
    rep.n = n;
    rep.c = c;
    rep.weight_r = weight_r;
    rep.i0 = i0;
    const double mid = 0.5 * (n - 1) - weight_r;
    const double disc = mid * mid + i0 + c;
    const std::complex<double> root = std::sqrt(std::complex<double>(disc, 0.0));
    rep.roots[0] = mid - root;
    rep.roots[1] = mid + root;
    rep.imaginary = disc < 0.0;
    rep.radius = rep.imaginary ? 0.0 : std::sqrt(disc);
    return rep;
}

Thresholds threshold_c(int n, int weight_r, double i0) {
    const double mid = 0.5 * (n - 1) - weight_r;
    const double half = 0.5 * (n - 1);
    return {std::max(0.0, -i0 - mid * mid), std::max(0.0, half * half - mid * mid - i0)};
}

RadialScalarField solve_entropy_potential(const WarpedMetric& g, const SolveOptions& opts,
                                          SolveReport* report, const Vec* initial_guess) {
    require_admissible(g);
    const int n = g.grid.n();
    const int N = g.grid.size();
    const auto& ops = g.grid.ops();
    const Vec scal_dev = curvature(g).scal_dev;
    const SpMat L = scalar_laplacian_matrix(g);
    const Vec e2u = (-2.0 * g.u).array().exp();
    const SpMat base = with_dirichlet_rows(shifted(2.0 * L, 2.0 * (n - 1)), {N - 1});

    auto residual = [&](const Vec& f) {
        const Vec df = ops.d1_even * f;
        Vec r = 2.0 * (L * f) + e2u.cwiseProduct(df.cwiseProduct(df)) - scal_dev + 2.0 * (n - 1) * f;
        r(N - 1) = f(N - 1);
        return r;
    };

    Vec f = initial_guess ? *initial_guess : Vec(scal_dev / (2.0 * (n - 1)));
    f(N - 1) = 0.0;
    Vec r = residual(f);
    double rn = r.cwiseAbs().maxCoeff();
    SolveReport rep;
    rep.residuals.push_back(rn);
    int polish = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (rn <= opts.tol && polish >= 2) break;
        if (rn <= opts.tol) ++polish;
        const Vec df = ops.d1_even * f;
        SpMat J = base + SpMat((2.0 * e2u.cwiseProduct(df)).asDiagonal() * ops.d1_even);
        J = with_dirichlet_rows(J, {N - 1});
        const Vec step = solve_sparse(J, -r);
        double alpha = 1.0;
        Vec f_new = f + step;
        Vec r_new = residual(f_new);
        double rn_new = r_new.cwiseAbs().maxCoeff();
        while (rn > opts.tol && rn_new > (1.0 - 1e-4 * alpha) * rn && alpha > 1e-8) {
            alpha *= opts.damping;
            f_new = f + alpha * step;
            r_new = residual(f_new);
            rn_new = r_new.cwiseAbs().maxCoeff();
        }
        if (rn <= opts.tol && !(rn_new <= opts.tol)) break;  // polishing must not undo convergence
        if (!(rn_new < rn) && rn > opts.tol)
            throw Error(ErrorCode::NewtonDiverged, "entropy potential: line search failed at residual " +
                                                       std::to_string(rn));
        f = f_new;
        r = r_new;
        rn = rn_new;
        rep.residuals.push_back(rn);
        rep.iterations = it + 1;
    }
    if (!(rn <= opts.tol))
        throw Error(ErrorCode::NewtonDiverged,
                    "entropy potential: residual " + std::to_string(rn) + " after " +
                        std::to_string(opts.max_iter) + " iterations");
    if (report) *report = rep;
    return {g.grid, f};
}

YamabeResult solve_yamabe(const WarpedMetric& g, const SolveOptions& opts, const Vec* target) {
    require_admissible(g);
    const int n = g.grid.n();
    const int N = g.grid.size();
    const auto& ops = g.grid.ops();
    const Vec& r = g.grid.r();
    const Vec rho = target ? *target : Vec(Vec::Zero(N));
    if (rho.size() != N) throw Error(ErrorCode::GridMismatch, "target length does not match grid");
    const double kappa = 2.0 / (n - 2);

    struct Eval {
        Vec res;
        Vec pw, pw1, pv2;  // partials with respect to w, w' and w'' (through V'')
    };
    auto evaluate = [&](const Vec& w, bool jac) {
        const Vec U = g.u + w, V = g.v + w;
        const Vec dU = ops.d1_even * U, dV = ops.d1_even * V, d2V = ops.d2_even * V;
        Eval e;
        e.res.resize(N);
        if (jac) {
            e.pw.resize(N);
            e.pw1.resize(N);
            e.pv2.resize(N);
        }
        for (int k = 0; k < N; ++k) {
            if (!jac) {
                e.res(k) = point_scal_dev<double>(n, r(k), U(k), V(k), dU(k), dV(k), d2V(k)) - rho(k);
                continue;
            }
            // Seeding U and V together gives the w-partial directly.
            const Dual a = point_scal_dev<Dual>(n, r(k), Dual(U(k), 1), Dual(V(k), 1), Dual(dU(k)),
                                                Dual(dV(k)), Dual(d2V(k)));
            const Dual b = point_scal_dev<Dual>(n, r(k), Dual(U(k)), Dual(V(k)), Dual(dU(k), 1),
                                                Dual(dV(k), 1), Dual(d2V(k)));
            const Dual c = point_scal_dev<Dual>(n, r(k), Dual(U(k)), Dual(V(k)), Dual(dU(k)),
                                                Dual(dV(k)), Dual(d2V(k), 1));
            e.res(k) = a.v - rho(k);
            e.pw(k) = a.d;
            e.pw1(k) = b.d;
            e.pv2(k) = c.d;
        }
        e.res(N - 1) = w(N - 1);
        return e;
    };

    // z = phi - 1 keeps relative precision where w is far below machine epsilon.
    Vec phi = Vec::Zero(N);
    auto w_of = [&](const Vec& z) { return Vec(kappa * z.array().log1p().matrix()); };
    Eval e = evaluate(w_of(phi), true);
    double rn = e.res.cwiseAbs().maxCoeff();
    YamabeResult out{{g.grid, Vec()}, g, {}};
    out.report.residuals.push_back(rn);
    int polish = 0;
    for (int it = 0; it < opts.max_iter; ++it) {
        if (rn <= opts.tol && polish >= 2) break;
        if (rn <= opts.tol) ++polish;
        const Vec dwdphi = (kappa / (1.0 + phi.array())).matrix();
        SpMat Jw = SpMat(e.pw1.asDiagonal() * ops.d1_even) + SpMat(e.pv2.asDiagonal() * ops.d2_even);
        Jw += diagonal(e.pw);
        SpMat J = with_dirichlet_rows(SpMat(Jw * dwdphi.asDiagonal()), {N - 1});
        Vec rhs = -e.res;
        rhs(N - 1) = -phi(N - 1);
        const Vec step = solve_sparse(J, rhs);
        if ((phi + step).minCoeff() <= -1.0)
            throw Error(ErrorCode::NegativeConformalFactor,
                        "Newton step drives the conformal factor through zero");
        double alpha = 1.0;
        Vec phi_new = phi + step;
        Eval e_new = evaluate(w_of(phi_new), true);
        double rn_new = e_new.res.cwiseAbs().maxCoeff();
        while (rn > opts.tol && rn_new > (1.0 - 1e-4 * alpha) * rn && alpha > 1e-8) {
            alpha *= opts.damping;
            phi_new = phi + alpha * step;
            e_new = evaluate(w_of(phi_new), true);
            rn_new = e_new.res.cwiseAbs().maxCoeff();
        }
        if (rn <= opts.tol && !(rn_new <= opts.tol)) break;
        if (!(rn_new < rn) && rn > opts.tol)
            throw Error(ErrorCode::NewtonDiverged,
                        "yamabe: line search failed at residual " + std::to_string(rn));
        phi = phi_new;
        e = e_new;
        rn = rn_new;
        out.report.residuals.push_back(rn);
        out.report.iterations = it + 1;
    }
    if (!(rn <= opts.tol))
        throw Error(ErrorCode::NewtonDiverged, "yamabe: residual " + std::to_string(rn) + " after " +
                                                   std::to_string(opts.max_iter) + " iterations");
    out.w.values = w_of(phi);
    out.gbar = conformal(g, out.w.values);
    return out;
}

void restricted_operator(OperatorKind kind, const WarpedMetric& g, double c, SpMat& A, Vec& mass) {
    require_finite(g);
    const int n = g.grid.n();
    const int N = g.grid.size();
    const Vec W = volume_weights(g);
    std::vector<int> interior(N - 1);
    for (int k = 0; k < N - 1; ++k) interior[k] = k;

    switch (kind) {
        case OperatorKind::ShiftedScalar: {
            A = submatrix(shifted(scalar_laplacian_matrix(g), c), interior);
            mass = W.head(N - 1);
            return;
        }
        case OperatorKind::Einstein: {
            std::vector<int> keep = interior;
            for (int k = 0; k < N - 1; ++k) keep.push_back(N + k);
            A = submatrix(einstein_operator_matrix(g), keep);
            mass.resize(2 * (N - 1));
            mass << W.head(N - 1), (n - 1) * W.head(N - 1);
            return;
        }
        case OperatorKind::EinsteinTraceFree: {
            const auto cd = curvature(g);
            const Vec H2 = sphere_mean_curvature(g).array().square();
            const Vec diag = 2.0 * n * H2 - 2.0 * (-(n - 1) * cd.K_rad + (n - 2) * cd.K_tan);
            A = submatrix(SpMat(scalar_laplacian_matrix(g) + diagonal(diag)), interior);
            mass = W.head(N - 1);
            return;
        }
        case OperatorKind::EinsteinPureTrace: {
            const Vec diag = (-2.0 / n) * curvature(g).scal;
            A = submatrix(SpMat(scalar_laplacian_matrix(g) + diagonal(diag)), interior);
            mass = W.head(N - 1);
            return;
        }
    }
}

EigenResult lowest_eigenvalue(OperatorKind kind, const WarpedMetric& g, const SolveOptions& opts,
                              double c) {
    SpMat A;
    Vec mass;
    restricted_operator(kind, g, c, A, mass);
    const int m = static_cast<int>(A.rows());
    const Vec s = mass.array().sqrt();
    const Vec sinv = s.cwiseInverse();

    // Estimate from the symmetrized similarity transform, then refine on A itself.
    Eigen::MatrixXd S = s.asDiagonal() * Eigen::MatrixXd(A) * sinv.asDiagonal();
    S = 0.5 * (S + S.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::IterationStalled, "dense eigensolver failed");
    double lambda = es.eigenvalues()(0);
    Vec x = sinv.asDiagonal() * es.eigenvectors().col(0);

    const double sigma = lambda - 1e-7 * std::max(1.0, std::abs(lambda));
    SpMat I(m, m);
    I.setIdentity();
    Eigen::SparseLU<SpMat> lu;
    lu.compute(SpMat(A - sigma * I));
    if (lu.info() != Eigen::Success) throw Error(ErrorCode::IterationStalled, "shifted factorization failed");

    auto mnorm = [&](const Vec& y) { return std::sqrt(y.dot(mass.cwiseProduct(y))); };
    x /= mnorm(x);
    int it = 0;
    bool done = false;
    for (; it < std::max(opts.max_iter, 1); ++it) {
        Vec y = lu.solve(x);
        if (!y.allFinite()) throw Error(ErrorCode::IterationStalled, "inverse iteration produced NaN");
        y /= mnorm(y);
        const Vec Ay = A * y;
        const double lam_new = y.dot(mass.cwiseProduct(Ay));
        const double res = mnorm(Ay - lam_new * y);
        const bool small = std::abs(lam_new - lambda) <= 1e-12 * std::max(1.0, std::abs(lam_new));
        x = y;
        lambda = lam_new;
        if (small && res <= std::sqrt(opts.tol) * std::max(1.0, std::abs(lambda))) {
            done = true;
            ++it;
            break;
        }
    }
    if (!done) throw Error(ErrorCode::IterationStalled, "inverse iteration did not settle");

    const int N = g.grid.size();
    const int n = g.grid.n();
    EigenResult out;
    out.lambda_min = lambda;
    out.iterations = it;
    out.mode = zero_tensor(g.grid);
    switch (kind) {
        case OperatorKind::Einstein:
            out.mode.a.head(N - 1) = x.head(N - 1);
            out.mode.b.head(N - 1) = x.tail(N - 1);
            break;
        case OperatorKind::EinsteinTraceFree:
            out.mode.b.head(N - 1) = x;
            out.mode.a = -(n - 1) * out.mode.b;
            break;
        default:
            out.mode.a.head(N - 1) = x;
            out.mode.b = out.mode.a;
    }
    const double norm = std::sqrt(inner_product(g, out.mode, out.mode));
    out.mode.a /= norm;
    out.mode.b /= norm;
    return out;
}

}  // namespace pelab
