#include "pelab/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pelab/errors.hpp"
#include "pelab/io.hpp"
#include "pelab/pointwise.hpp"

namespace pelab {

namespace {

double log_sinh(double r) { return r + std::log1p(-std::exp(-2.0 * r)) - std::log(2.0); }

void require_hyperbolic(const WarpedMetric& ghat) {
    if (ghat.u.cwiseAbs().maxCoeff() != 0.0 || ghat.v.cwiseAbs().maxCoeff() != 0.0)
        throw Error(ErrorCode::InvalidArgument, "reference metric must be the hyperbolic metric");
}

// (e^{-f}(f+1) - 1), with a series where the closed form cancels.
double q_of(double f) {
    if (std::abs(f) > 1e-3) return (f + 1.0) * std::exp(-f) - 1.0;
    // sum_{k>=2} (-1)^k (1-k) f^k / k!
    double term = 1.0, sum = 0.0;
    for (int k = 1; k <= 12; ++k) {
        term *= f / k;
        if (k >= 2) sum += ((k % 2) ? -1.0 : 1.0) * (1.0 - k) * term;
    }
    return sum;
}

double integrate_density(const WarpedMetric& g, const Vec& F, double R) {
    return integrate_ball(g, {g.grid, F}, R);
}

}  // namespace

double divergence_defect(const WarpedMetric& g, double R) {
    const auto& grid = g.grid;
    const auto& ops = grid.ops();
    const int n = grid.n();
    const int N = grid.size();
    const Vec du = ops.d1_even * g.u;
    const Vec dv = ops.d1_even * g.v;
    const Vec d2v = ops.d2_even * g.v;
    Vec lin(N), tr(N);
    for (int k = 0; k < N; ++k) {
        lin(k) = point_scal_dev<Dual>(n, grid.r()(k), Dual(0.0, g.u(k)), Dual(0.0, g.v(k)), Dual(0.0, du(k)),
                                      Dual(0.0, dv(k)), Dual(0.0, d2v(k)))
                     .d;
        tr(k) = g.u(k) + (n - 1) * g.v(k);
    }
    const auto ghat = hyperbolic_reference(grid);
    const double u = grid.interpolate(g.u, R, Parity::Even);
    const double v = grid.interpolate(g.v, R, Parity::Even);
    const double dvR = grid.interpolate(g.v, R, Parity::Even, 1);
    const double flux = sphere_area(n) * std::exp((n - 1) * log_sinh(R)) * (n - 1) *
                        (2.0 * (u - v) / std::tanh(R) - 2.0 * dvR);
    return integrate_density(ghat, lin, R) - flux - 2.0 * (n - 1) * integrate_density(ghat, tr, R);
}

double scal_integral(const WarpedMetric& g, const Vec& F, double R) {
    return integrate_density(g, F, R) - divergence_defect(g, R);
}

std::vector<double> extrapolation_radii(const RadialGrid& grid) {
    std::vector<double> R;
    for (int j = 5; j <= 9; ++j) R.push_back(grid.R_max() * j / 10.0);
    return R;
}

LimitEstimate extrapolate_limit(const std::vector<double>& radii, const std::vector<double>& samples,
                                const char* what) {
    if (radii.size() != samples.size() || radii.size() < 4)
        throw Error(ErrorCode::InvalidArgument, "extrapolation needs at least four samples");
    LimitEstimate e;
    e.radii = radii;
    e.samples = samples;
    const size_t m = samples.size();
    double qmax = 0.0, dmax = 0.0;
    for (double q : samples) {
        if (!std::isfinite(q)) throw Error(ErrorCode::LimitNotConverged, std::string(what) + ": non-finite sample");
        qmax = std::max(qmax, std::abs(q));
    }
    std::vector<double> d(m - 1);
    for (size_t j = 0; j + 1 < m; ++j) {
        d[j] = samples[j + 1] - samples[j];
        dmax = std::max(dmax, std::abs(d[j]));
    }
    e.last_increment = d.back();
    // Radial integrals carry roundoff of order 1e-13 from cancelling O(1e3) partial sums.
    const double floor = 1e-10 * qmax + 1e-12;
    if (dmax <= floor) {
        e.value = samples.back();
        e.residual = dmax;
        return e;
    }
    if (!(std::abs(d.back()) <= 0.5 * std::abs(d.front())))
        throw Error(ErrorCode::LimitNotConverged,
                    std::string(what) + ": increments do not decay (first " + format_double(d.front()) +
                        ", last " + format_double(d.back()) + ", scale " + format_double(qmax) + ")");

    double best = INFINITY;
    for (int i = 0; i <= 600; ++i) {
        const double kappa = 0.02 * std::pow(1500.0, i / 600.0);
        // Linear least squares for A, B with basis {1, e^{-kappa (R - R_0)}}.
        double s1 = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
        for (size_t j = 0; j < m; ++j) {
            const double x = std::exp(-kappa * (radii[j] - radii[0]));
            s1 += 1;
            sx += x;
            sxx += x * x;
            sy += samples[j];
            sxy += x * samples[j];
        }
        const double det = s1 * sxx - sx * sx;
        if (std::abs(det) < 1e-300) continue;
        const double A = (sxx * sy - sx * sxy) / det;
        const double B = (s1 * sxy - sx * sy) / det;
        double res = 0.0;
        for (size_t j = 0; j < m; ++j)
            res = std::max(res, std::abs(A + B * std::exp(-kappa * (radii[j] - radii[0])) - samples[j]));
        if (res < best) {
            best = res;
            e.value = A;
            e.kappa = kappa;
            e.residual = res;
        }
    }
    return e;
}

double adm_mass_at_radius(const WarpedMetric& g, const WarpedMetric& ghat, double R) {
    require_same_grid(g.grid, ghat.grid);
    require_hyperbolic(ghat);
    require_finite(g);
    if (R <= 0.0 || R > g.grid.R_max() * (1.0 + 1e-12))
        throw Error(ErrorCode::RadiusOutOfRange, "R = " + std::to_string(R));
    const int n = g.grid.n();
    const auto h = metric_difference(g, ghat);
    const double a = g.grid.interpolate(h.a, R, Parity::Even);
    const double b = g.grid.interpolate(h.b, R, Parity::Even);
    const double db = g.grid.interpolate(h.b, R, Parity::Even, 1);
    const double flux = (n - 1) * ((a - b) / std::tanh(R) - db);
    if (flux == 0.0) return 0.0;
    return sphere_area(n) * std::exp((n - 1) * log_sinh(R)) * flux;
}

double renormalized_volume_at_radius(const WarpedMetric& g, const WarpedMetric& ghat, double R) {
    require_same_grid(g.grid, ghat.grid);
    require_hyperbolic(ghat);
    require_finite(g);
    const int n = g.grid.n();
    const int N = g.grid.size();
    Vec F(N);
    for (int k = 0; k < N; ++k) {
        const double x = std::expm1(g.u(k) + (n - 1) * g.v(k));
        F(k) = x == 0.0 ? 0.0 : x * std::exp((n - 1) * log_sinh(g.grid.r()(k)));
    }
    return sphere_area(n) * g.grid.integrate(F, R);
}

LimitEstimate volume_renormalized_mass_limit(const WarpedMetric& g, const WarpedMetric& ghat) {
    const int n = g.grid.n();
    const auto R = extrapolation_radii(g.grid);
    std::vector<double> Q;
    for (double Rj : R)
        Q.push_back(adm_mass_at_radius(g, ghat, Rj) + 2.0 * (n - 1) * renormalized_volume_at_radius(g, ghat, Rj));
    return extrapolate_limit(R, Q, "m_VR");
}

double volume_renormalized_mass(const WarpedMetric& g, const WarpedMetric& ghat) {
    return volume_renormalized_mass_limit(g, ghat).value;
}

LimitEstimate renormalized_volume_limit(const WarpedMetric& g, const WarpedMetric& ghat) {
    const auto R = extrapolation_radii(g.grid);
    std::vector<double> Q;
    for (double Rj : R) Q.push_back(renormalized_volume_at_radius(g, ghat, Rj));
    return extrapolate_limit(R, Q, "RV");
}

LimitEstimate s_functional_limit(const WarpedMetric& g, const WarpedMetric& ghat) {
    require_admissible(g);
    const int n = g.grid.n();
    const Vec scal_dev = curvature(g).scal_dev;
    const auto R = extrapolation_radii(g.grid);
    std::vector<double> Q;
    for (double Rj : R)
        Q.push_back(scal_integral(g, scal_dev, Rj) - adm_mass_at_radius(g, ghat, Rj) -
                    2.0 * (n - 1) * renormalized_volume_at_radius(g, ghat, Rj));
    return extrapolate_limit(R, Q, "S");
}

double s_functional(const WarpedMetric& g, const WarpedMetric& ghat) {
    return s_functional_limit(g, ghat).value;
}

Vec w_integrand(const WarpedMetric& g, const RadialScalarField& f, WIntegrand form) {
    require_same_grid(g.grid, f.grid);
    const int n = g.grid.n();
    const int N = g.grid.size();
    const Vec df = g.grid.ops().d1_even * f.values;
    const Vec scal_dev = curvature(g).scal_dev;
    Vec out(N);
    for (int k = 0; k < N; ++k) {
        const double grad2 = std::exp(-2.0 * g.u(k)) * df(k) * df(k);
        const double fk = f.values(k);
        if (form == WIntegrand::Consistent)
            out(k) = (grad2 + scal_dev(k)) * std::exp(-fk) - 2.0 * (n - 1) * q_of(fk);
        else
            out(k) = (grad2 + scal_dev(k) - n * (n - 1.0) + fk) * std::exp(-fk);
    }
    return out;
}

double w_functional_at_radius(const WarpedMetric& g, const RadialScalarField& f, double R,
                              WIntegrand form) {
    const int n = g.grid.n();
    const auto ghat = hyperbolic_reference(g.grid);
    return scal_integral(g, w_integrand(g, f, form), R) - adm_mass_at_radius(g, ghat, R) -
           2.0 * (n - 1) * renormalized_volume_at_radius(g, ghat, R);
}

LimitEstimate w_functional_limit(const WarpedMetric& g, const RadialScalarField& f, WIntegrand form) {
    require_admissible(g);
    const auto R = extrapolation_radii(g.grid);
    std::vector<double> Q;
    for (double Rj : R) Q.push_back(w_functional_at_radius(g, f, Rj, form));
    return extrapolate_limit(R, Q, "W");
}

double w_functional(const WarpedMetric& g, const RadialScalarField& f, WIntegrand form) {
    return w_functional_limit(g, f, form).value;
}

EntropyValue entropy(const WarpedMetric& g, const WarpedMetric& ghat, const SolveOptions& opts,
                     const Vec* warm_start) {
    require_same_grid(g.grid, ghat.grid);
    require_hyperbolic(ghat);
    EntropyValue out;
    out.f = solve_entropy_potential(g, opts, &out.report, warm_start);
    out.mu = w_functional(g, out.f);
    return out;
}

RadialSymmetric2Tensor entropy_gradient(const WarpedMetric& g, const WarpedMetric& ghat,
                                        const RadialScalarField* f) {
    require_same_grid(g.grid, ghat.grid);
    require_hyperbolic(ghat);
    require_admissible(g);
    const RadialScalarField fg = f ? *f : solve_entropy_potential(g);
    const auto c = curvature(g);
    const auto hf = hessian(g, fg);
    const Vec w = (-fg.values).array().exp();
    RadialSymmetric2Tensor out{g.grid, Vec(), Vec()};
    out.a = -(c.ric_rr_dev + hf.a).cwiseProduct(w);
    out.b = -(c.ric_tt_dev + hf.b).cwiseProduct(w);
    return out;
}

RadialSymmetric2Tensor s_gradient(const WarpedMetric& g, const WarpedMetric& ghat) {
    require_same_grid(g.grid, ghat.grid);
    require_hyperbolic(ghat);
    const auto c = curvature(g);
    RadialSymmetric2Tensor out{g.grid, Vec(), Vec()};
    out.a = -c.ric_rr_dev + 0.5 * c.scal_dev;
    out.b = -c.ric_tt_dev + 0.5 * c.scal_dev;
    return out;
}

FunctionalReport functional_report(const WarpedMetric& g, const WarpedMetric& ghat,
                                   const SolveOptions& opts) {
    FunctionalReport rep;
    for (int j = 1; j <= 9; ++j) {
        const double R = g.grid.R_max() * j / 10.0;
        rep.m_adm_at.emplace_back(R, adm_mass_at_radius(g, ghat, R));
        rep.rv_at.emplace_back(R, renormalized_volume_at_radius(g, ghat, R));
    }
    rep.m_vr = volume_renormalized_mass_limit(g, ghat);
    rep.s_value = s_functional_limit(g, ghat);
    const auto ent = entropy(g, ghat, opts);
    rep.f = ent.f;
    rep.mu = ent.mu;
    rep.w_value = w_functional_limit(g, ent.f);
    return rep;
}

Json to_json(const LimitEstimate& e) {
    Json j;
    j["value"] = e.value;
    j["residual"] = e.residual;
    j["kappa"] = e.kappa;
    j["last_increment"] = e.last_increment;
    j["radii"] = e.radii;
    j["samples"] = e.samples;
    return j;
}

Json to_json(const FunctionalReport& rep) {
    Json j;
    j["m_vr"] = rep.m_vr.value;
    j["s_value"] = rep.s_value.value;
    j["w_value"] = rep.w_value.value;
    j["mu"] = rep.mu;
    Json flags;
    flags["m_vr"] = to_json(rep.m_vr);
    flags["s_value"] = to_json(rep.s_value);
    flags["w_value"] = to_json(rep.w_value);
    j["convergence"] = flags;
    return j;
}

std::string radius_table_csv(const FunctionalReport& rep) {
    const int n = rep.f.grid.n();
    std::vector<std::vector<double>> rows;
    for (size_t i = 0; i < rep.m_adm_at.size(); ++i) {
        const double R = rep.m_adm_at[i].first;
        const double m = rep.m_adm_at[i].second;
        const double rv = rep.rv_at[i].second;
        rows.push_back({R, m, rv, m + 2.0 * (n - 1) * rv});
    }
    return csv_table({"R", "m_adm", "rv", "partial_sum"}, rows);
}

}  // namespace pelab
