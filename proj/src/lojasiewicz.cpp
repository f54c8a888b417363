#include "pelab/lojasiewicz.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>

#include "pelab/errors.hpp"
#include "pelab/io.hpp"
#include "pelab/rng.hpp"

namespace pelab {

AnalyticFunctional neg_square(int dim) {
    AnalyticFunctional F;
    F.dim = dim;
    F.eval = [](const Vec& x) { return -x.squaredNorm(); };
    F.grad = [](const Vec& x) { return Vec(-2.0 * x); };
    F.hess = [dim](const Vec&) { return Mat(-2.0 * Mat::Identity(dim, dim)); };
    F.formula = "-|x|^2";
    return F;
}

AnalyticFunctional neg_quartic(int dim) {
    AnalyticFunctional F;
    F.dim = dim;
    F.eval = [](const Vec& x) { return -std::pow(x.squaredNorm(), 2); };
    F.grad = [](const Vec& x) { return Vec(-4.0 * x.squaredNorm() * x); };
    F.hess = [dim](const Vec& x) {
        return Mat(-4.0 * x.squaredNorm() * Mat::Identity(dim, dim) - 8.0 * x * x.transpose());
    };
    F.formula = "-|x|^4";
    return F;
}

AnalyticFunctional quadratic_quartic() {
    AnalyticFunctional F;
    F.dim = 2;
    F.eval = [](const Vec& x) { return -x(0) * x(0) - std::pow(x(1), 4); };
    F.grad = [](const Vec& x) { return Vec{{-2.0 * x(0), -4.0 * std::pow(x(1), 3)}}; };
    F.hess = [](const Vec& x) { return Mat{{-2.0, 0.0}, {0.0, -12.0 * x(1) * x(1)}}; };
    F.formula = "-x1^2 - x2^4";
    return F;
}

AnalyticFunctional quadratic_cubic() {
    AnalyticFunctional F;
    F.dim = 2;
    F.eval = [](const Vec& x) { return -x(0) * x(0) + std::pow(x(1), 3); };
    F.grad = [](const Vec& x) { return Vec{{-2.0 * x(0), 3.0 * x(1) * x(1)}}; };
    F.hess = [](const Vec& x) { return Mat{{-2.0, 0.0}, {0.0, 6.0 * x(1)}}; };
    F.formula = "-x1^2 + x2^3";
    // N(0, x2) = (0, 3 x2^2 + x2) only reaches y2 >= -1/12.
    F.reduction_radius = 0.05;
    return F;
}

KernelProjection kernel_projection(const AnalyticFunctional& F, double rel_tol) {
    const Mat L = F.hess(Vec::Zero(F.dim));
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (L + L.transpose()));
    KernelProjection K;
    K.eigenvalues = es.eigenvalues();
    const double scale = K.eigenvalues.cwiseAbs().maxCoeff();
    std::vector<int> idx;
    for (int i = 0; i < F.dim; ++i)
        if (std::abs(K.eigenvalues(i)) <= rel_tol * scale) idx.push_back(i);
    K.basis.resize(F.dim, idx.size());
    for (size_t j = 0; j < idx.size(); ++j) K.basis.col(j) = es.eigenvectors().col(idx[j]);
    K.projector = K.basis * K.basis.transpose();
    const Eigen::JacobiSVD<Mat> svd(L + K.projector);
    const Vec s = svd.singularValues();
    K.condition_d0n = s(s.size() - 1) > 0.0 ? s(0) / s(s.size() - 1) : std::numeric_limits<double>::infinity();
    return K;
}

Vec n_map(const AnalyticFunctional& F, const KernelProjection& K, const Vec& x) {
    return F.grad(x) + K.projector * x;
}

Vec invert_n(const AnalyticFunctional& F, const KernelProjection& K, const Vec& y, const SolveOptions& opts) {
    const Eigen::PartialPivLU<Mat> lu(F.hess(Vec::Zero(F.dim)) + K.projector);
    Vec x = lu.solve(y);
    const double scale = std::max(y.norm(), 1e-300);
    double prev = std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iter; ++it) {
        const Vec r = n_map(F, K, x) - y;
        const double rn = r.norm();
        if (rn <= opts.tol * scale || rn == 0.0) return x;
        if (!std::isfinite(rn) || (it > 5 && rn > prev))
            throw Error(ErrorCode::NewtonDiverged, "inverse of N diverged: residual " + std::to_string(rn));
        prev = rn;
        x -= lu.solve(r);
    }
    const double rn = (n_map(F, K, x) - y).norm();
    if (rn <= 1e3 * opts.tol * scale) return x;
    throw Error(ErrorCode::NewtonDiverged, "inverse of N did not converge: residual " + std::to_string(rn));
}

double reduced_value(const AnalyticFunctional& F, const KernelProjection& K, const Vec& y) {
    return F.eval(invert_n(F, K, y));
}

Vec reduced_gradient(const AnalyticFunctional& F, const KernelProjection& K, const Vec& y) {
    const Vec x = invert_n(F, K, y);
    const Mat DN = F.hess(x) + K.projector;
    return DN.transpose().partialPivLu().solve(F.grad(x));
}

std::vector<Vec> sample_ball(int dim, int count, double radius, std::uint64_t seed) {
    CounterRng rng(seed, 0x10a5);
    std::vector<Vec> out;
    for (int i = 0; i < count; ++i) {
        Vec d(dim);
        for (int j = 0; j < dim; ++j) d(j) = rng.normal();
        const double rad = radius * std::pow(rng.uniform(), 1.0 / dim);
        out.push_back(d / d.norm() * rad);
    }
    return out;
}

namespace {

LemmaCheck make_check(const char* lemma, int sample, double lhs, double rhs) {
    double ratio;
    if (rhs > 0.0) ratio = lhs / rhs;
    else ratio = lhs <= 1e-300 ? 0.0 : std::numeric_limits<double>::infinity();
    return {lemma, sample, lhs, rhs, ratio};
}

}  // namespace

std::vector<LemmaCheck> verify_lemmas(const AnalyticFunctional& F, const std::vector<Vec>& samples) {
    const auto K = kernel_projection(F);
    std::vector<LemmaCheck> out;
    const int m = static_cast<int>(samples.size());
    for (int i = 0; i < m; ++i) {
        const Vec& x = samples[i];
        const Vec gx = F.grad(x);
        const double gn = gx.norm();

        const Vec y = n_map(F, K, x);
        const Vec back = invert_n(F, K, y);
        out.push_back(make_check("round_trip", i, (back - x).norm(), std::max(x.norm(), 1e-300)));

        // Phi is evaluated on images of N only: for -x1^2 + x2^3 the image misses y2 < -1/12.
        const Vec& x2 = samples[(i + 1) % m];
        const Vec y2 = n_map(F, K, x2);
        out.push_back(make_check("lipschitz", i, (back - invert_n(F, K, y2)).norm(), (y - y2).norm()));

        const Vec px = K.projector * x;
        double worst = 0.0, worst_lhs = 0.0;
        for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double lhs = reduced_gradient(F, K, px + t * gx).norm();
            const double ratio = gn > 0.0 ? lhs / gn : (lhs <= 1e-300 ? 0.0 : INFINITY);
            if (ratio >= worst) {
                worst = ratio;
                worst_lhs = lhs;
            }
        }
        out.push_back(make_check("gradient_comparison", i, worst_lhs, gn));
        out.push_back(make_check("value_comparison", i, std::abs(F.eval(x) - reduced_value(F, K, px)), gn * gn));
    }
    return out;
}

std::vector<LemmaSummary> summarize(const std::vector<LemmaCheck>& checks) {
    std::vector<LemmaSummary> out;
    for (const auto& c : checks) {
        auto it = std::find_if(out.begin(), out.end(), [&](const LemmaSummary& s) { return s.lemma == c.lemma; });
        if (it == out.end()) {
            out.push_back({c.lemma, 0.0, true});
            it = out.end() - 1;
        }
        it->worst_ratio = std::max(it->worst_ratio, c.ratio);
        it->finite = it->finite && std::isfinite(c.ratio);
    }
    return out;
}

ExponentFit ls_exponent(const AnalyticFunctional& F, const std::vector<Vec>& samples) {
    if (samples.size() < 10) throw Error(ErrorCode::InsufficientData, "need at least 10 samples");
    const auto K = kernel_projection(F);
    const double f0 = F.eval(Vec::Zero(F.dim));
    std::vector<Vec> starts;
    double rmax = 0.0;
    for (const auto& x : samples) {
        if (x.norm() > 0.0) starts.push_back(x);
        rmax = std::max(rmax, x.norm());
    }
    for (int j = 0; j < K.basis.cols(); ++j) {
        starts.push_back(rmax * K.basis.col(j));
        starts.push_back(-rmax * K.basis.col(j));
    }
    constexpr int scales = 25;
    // Per scale, the worst ratio over all rays; a zero of F - F0 on one ray then cannot mask growth.
    std::vector<std::vector<std::pair<double, double>>> pts(scales);  // (log|F - F0|, log|grad F|^2)
    for (const auto& x : starts) {
        for (int k = 0; k < scales; ++k) {
            const Vec p = std::pow(10.0, -k / 4.0) * x;
            const double df = std::abs(F.eval(p) - f0);
            const double g2 = F.grad(p).squaredNorm();
            if (df == 0.0) continue;
            if (g2 == 0.0) throw Error(ErrorCode::InsufficientData, "critical point away from the origin");
            pts[k].emplace_back(std::log(df), std::log(g2));
        }
    }
    for (int i = 100; i >= 1; --i) {
        const double theta = i / 100.0;
        std::vector<double> lm(scales, -INFINITY);
        for (int k = 0; k < scales; ++k)
            for (const auto& [lf, lg] : pts[k]) lm[k] = std::max(lm[k], (2.0 - theta) * lf - lg);
        // Least-squares slope of log max-ratio against log(1/s) over the smallest half of the scales.
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int cnt = 0;
        for (int k = scales / 2; k < scales; ++k) {
            if (!std::isfinite(lm[k])) continue;
            const double xk = k / 4.0 * std::log(10.0);
            sx += xk, sy += lm[k], sxx += xk * xk, sxy += xk * lm[k];
            ++cnt;
        }
        if (cnt < 3) throw Error(ErrorCode::InsufficientData, "too few nonzero samples near the origin");
        const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        if (slope <= 0.005) {
            double worst = 0.0;
            for (double v : lm) worst = std::max(worst, std::exp(v));
            return {theta, worst};
        }
    }
    throw Error(ErrorCode::InsufficientData, "no exponent in (0, 1] bounds the samples");
}

ReductionResult reduce(const AnalyticFunctional& F, const std::vector<Vec>& samples) {
    ReductionResult r;
    r.kernel = kernel_projection(F);
    r.lemma_checks = verify_lemmas(F, samples);
    r.summary = summarize(r.lemma_checks);
    const auto fit = ls_exponent(F, samples);
    r.theta = fit.theta;
    r.c = fit.c;
    return r;
}

std::vector<GradientFlowPoint> gradient_flow(const AnalyticFunctional& F, const Vec& x0, double dt,
                                             int steps, bool ascent) {
    const double sgn = ascent ? 1.0 : -1.0;
    auto rhs = [&](const Vec& x) { return Vec(sgn * F.grad(x)); };
    std::vector<GradientFlowPoint> out;
    Vec x = x0;
    double t = 0.0;
    auto record = [&]() { out.push_back({t, x, F.eval(x), F.grad(x).squaredNorm()}); };
    record();
    for (int i = 0; i < steps; ++i) {
        const Vec k1 = rhs(x);
        const Vec k2 = rhs(x + 0.5 * dt * k1);
        const Vec k3 = rhs(x + 0.5 * dt * k2);
        const Vec k4 = rhs(x + dt * k3);
        x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t += dt;
        if (!x.allFinite()) break;
        record();
    }
    return out;
}

std::string lemma_checks_csv(const std::vector<LemmaCheck>& checks) {
    std::string out = "lemma,sample,lhs,rhs,ratio\n";
    for (const auto& c : checks)
        out += c.lemma + "," + std::to_string(c.sample) + "," + format_double(c.lhs) + "," +
               format_double(c.rhs) + "," + format_double(c.ratio) + "\n";
    return out;
}

}  // namespace pelab
