#include "pelab/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pelab/errors.hpp"

namespace pelab {

const char* to_string(Gauge g) { return g == Gauge::DeTurck ? "deturck" : "entropy_gradient"; }

const char* to_string(Verdict v) {
    switch (v) {
        case Verdict::Running: return "Running";
        case Verdict::Converged: return "Converged";
        case Verdict::Escaped: return "Escaped";
        case Verdict::HorizonReached: return "HorizonReached";
        case Verdict::StepFailure: return "StepFailure";
    }
    return "?";
}

Gauge gauge_from_string(const std::string& s) {
    if (s == "deturck") return Gauge::DeTurck;
    if (s == "entropy_gradient" || s == "entropy") return Gauge::EntropyGradient;
    throw Error(ErrorCode::ConfigInvalid, "unknown gauge '" + s + "'");
}

void validate(const FlowConfig& c) {
    auto pos = [](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x)) throw Error(ErrorCode::ConfigInvalid, std::string(name) + " must be positive");
    };
    pos(c.dt_init, "dt_init");
    pos(c.dt_max, "dt_max");
    pos(c.t_max, "t_max");
    pos(c.cfl, "cfl");
    pos(c.conv_tol, "conv_tol");
    pos(c.escape_radius, "escape_radius");
    if (c.diag_every < 1) throw Error(ErrorCode::ConfigInvalid, "diag_every must be positive");
    if (c.max_halvings < 0 || c.grow_after < 1) throw Error(ErrorCode::ConfigInvalid, "bad step control");
    if (c.conv_tol >= c.escape_radius) throw Error(ErrorCode::ConfigInvalid, "conv_tol must be below escape_radius");
    if (c.dt_init > c.dt_max) throw Error(ErrorCode::ConfigInvalid, "dt_init exceeds dt_max");
}

double orbit_distance(const WarpedMetric& g) {
    const auto& grid = g.grid;
    const Vec& r = grid.r();
    const double u0 = grid.interpolate(g.u, 0.0, Parity::Even);
    const double e0 = std::exp(u0);
    const Vec F = (g.u.array().exp() - e0).matrix();
    double worst = 0.0;
    for (int k = 0; k < grid.size(); ++k) {
        const double s = e0 * r(k) + grid.integrate(F, r(k));
        // e^v sinh r / sinh s - 1 via logs, exact at s = r.
        const double ls_r = r(k) + std::log1p(-std::exp(-2.0 * r(k)));
        const double ls_s = s + std::log1p(-std::exp(-2.0 * s));
        worst = std::max(worst, std::abs(std::expm1(g.v(k) + ls_r - ls_s)));
    }
    return worst;
}

WarpedMetric pull_back(const WarpedMetric& g, const Vec& sigma, const Vec& dsigma) {
    const auto& grid = g.grid;
    const int N = grid.size();
    if (sigma.size() != N || dsigma.size() != N) throw Error(ErrorCode::InvalidArgument, "sigma has the wrong size");
    const Vec& r = grid.r();
    WarpedMetric out = g;
    for (int k = 0; k < N; ++k) {
        if (!(r(k) + sigma(k) > 0.0) || !(dsigma(k) > -1.0))
            throw Error(ErrorCode::StepRejected, "gauge diffeomorphism is not increasing");
        const double rho = std::min(r(k) + sigma(k), grid.R_max());
        const double s = rho - r(k);
        out.u(k) = grid.interpolate(g.u, rho, Parity::Even) + std::log1p(dsigma(k));
        // log(sinh(rho) / sinh(r)), exact at s = 0.
        out.v(k) = grid.interpolate(g.v, rho, Parity::Even) +
                   std::log1p(2.0 * std::cosh(0.5 * (rho + r(k))) * std::sinh(0.5 * s) / std::sinh(r(k)));
    }
    return out;
}

RadialSymmetric2Tensor velocity(const FlowState& state, Gauge gauge, const WarpedMetric& ghat,
                                const SolveOptions& opts, RadialScalarField* f_out) {
    const WarpedMetric& g = state.g;
    require_same_grid(g.grid, ghat.grid);
    require_finite(g);
    const auto c = curvature(g);
    RadialSymmetric2Tensor V{g.grid, Vec(), Vec()};
    if (gauge == Gauge::DeTurck) {
        const auto L = deturck_term(g, ghat);
        V.a = -2.0 * c.ric_rr_dev + L.a;
        V.b = -2.0 * c.ric_tt_dev + L.b;
        return V;
    }
    const Vec* warm = state.f.values.size() == g.grid.size() ? &state.f.values : nullptr;
    const auto f = solve_entropy_potential(g, opts, nullptr, warm);
    const auto hf = hessian(g, f);
    V.a = -2.0 * (c.ric_rr_dev + hf.a);
    V.b = -2.0 * (c.ric_tt_dev + hf.b);
    if (f_out) *f_out = f;
    return V;
}

void diagnose(FlowState& s, Gauge gauge, const WarpedMetric& ghat, const SolveOptions& opts) {
    const int N = s.g.grid.size();
    const Vec* warm = s.f.values.size() == N ? &s.f.values : nullptr;
    const auto direct = entropy(s.g, ghat, opts, warm);
    s.f = direct.f;
    s.mu_direct = direct.mu;
    const bool carried = gauge == Gauge::EntropyGradient && s.carrier.u.size() == N;
    const WarpedMetric& rep = carried ? s.carrier : s.g;
    EntropyValue e = direct;
    if (carried) {
        e = entropy(rep, ghat, opts, s.carrier_f.values.size() == N ? &s.carrier_f.values : nullptr);
        s.carrier_f = e.f;
    }
    s.mu = e.mu;
    const auto grad = entropy_gradient(rep, ghat, &e.f);
    s.grad_norm = std::sqrt(std::max(0.0, inner_product(rep, grad, grad)));
    const auto h = metric_difference(s.g, ghat);
    s.hnorm_inf = std::max(h.a.cwiseAbs().maxCoeff(), h.b.cwiseAbs().maxCoeff());
    s.hnorm_l2 = std::sqrt(std::max(0.0, inner_product(ghat, h, h)));
    const auto hr = metric_difference(rep, ghat);
    s.dist = std::max(hr.a.cwiseAbs().maxCoeff(), hr.b.cwiseAbs().maxCoeff());
    s.has_diagnostics = true;
}

FlowStepper::FlowStepper(const WarpedMetric& ghat, const FlowConfig& config) : ghat_(ghat), config_(config) {
    validate(config_);
    const int m = 2 * (ghat.grid.size() - 1);
    J_.resize(m, m);
    const Vec x0 = pack(ghat_);
    FlowState s;
    const double delta = 1e-6;
    for (int j = 0; j < m; ++j) {
        Vec xp = x0, xm = x0;
        xp(j) += delta;
        xm(j) -= delta;
        s.g = unpack(xp, ghat_);
        const Vec vp = pack_velocity(velocity(s, Gauge::DeTurck, ghat_, config_.solver));
        s.g = unpack(xm, ghat_);
        const Vec vm = pack_velocity(velocity(s, Gauge::DeTurck, ghat_, config_.solver));
        J_.col(j) = (vp - vm) / (2.0 * delta);
    }
}

Vec FlowStepper::pack(const WarpedMetric& g) const {
    const int N = g.grid.size();
    Vec x(2 * (N - 1));
    x << g.u.head(N - 1), g.v.head(N - 1);
    return x;
}

WarpedMetric FlowStepper::unpack(const Vec& x, const WarpedMetric& like) const {
    const int N = like.grid.size();
    WarpedMetric g = like;
    g.u.head(N - 1) = x.head(N - 1);
    g.v.head(N - 1) = x.tail(N - 1);
    return g;
}

Vec FlowStepper::pack_velocity(const RadialSymmetric2Tensor& V) const {
    // g_t = V in the frame of g means u_t = a/2 and v_t = b/2.
    const int N = V.grid.size();
    Vec x(2 * (N - 1));
    x << 0.5 * V.a.head(N - 1), 0.5 * V.b.head(N - 1);
    return x;
}

const Eigen::PartialPivLU<Eigen::MatrixXd>& FlowStepper::factor(double dt) {
    auto it = lu_.find(dt);
    if (it == lu_.end()) {
        Eigen::MatrixXd A = -dt * J_;
        A.diagonal().array() += 1.0;
        it = lu_.emplace(dt, std::make_unique<Eigen::PartialPivLU<Eigen::MatrixXd>>(A)).first;
    }
    return *it->second;
}

WarpedMetric FlowStepper::advance(const WarpedMetric& g, double dt) {
    FlowState tmp;
    tmp.g = g;
    const auto V = velocity(tmp, Gauge::DeTurck, ghat_, config_.solver);
    const Vec dx = dt * factor(dt).solve(pack_velocity(V));
    WarpedMetric out = unpack(pack(g) + dx, g);
    if (!out.u.allFinite() || !out.v.allFinite())
        throw Error(ErrorCode::StepRejected, "non-finite profile after step");
    return out;
}

FlowState FlowStepper::step(const FlowState& state, double dt) {
    if (!(dt > 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be positive");
    FlowState out;
    out.t = state.t + dt;
    if (config_.gauge == Gauge::DeTurck) {
        out.g = advance(state.g, dt);
        out.f = state.f;
        return out;
    }
    const auto& grid = ghat_.grid;
    const auto& ops = grid.ops();
    const int N = grid.size();
    const bool fresh = state.carrier.u.size() != N;
    const WarpedMetric& c = fresh ? state.g : state.carrier;
    const Vec sigma = fresh ? Vec::Zero(N) : state.sigma;
    const Vec dsigma = fresh ? Vec::Zero(N) : state.dsigma;
    const Vec* warm = fresh ? (state.f.values.size() == N ? &state.f.values : nullptr) : &state.carrier_f.values;
    const auto f = solve_entropy_potential(c, config_.solver, nullptr, warm);
    // Y = -W - grad f and Y' from nodal derivatives, interpolated to the image points.
    const Vec w = deturck_vector(c, ghat_).values;
    const Vec dw = deturck_vector_derivative(c, ghat_).values;
    const Vec df = ops.d1_even * f.values;
    const Vec d2f = ops.d2_even * f.values;
    const Vec du = ops.d1_even * c.u;
    const Vec& r = grid.r();
    out.sigma = sigma;
    out.dsigma = dsigma;
    for (int k = 0; k + 1 < N; ++k) {
        const double rho = std::clamp(r(k) + sigma(k), 0.0, grid.R_max());
        auto at = [&](const Vec& q, Parity p) { return grid.interpolate(q, rho, p); };
        const double e2u = std::exp(-2.0 * at(c.u, Parity::Even));
        const double fp = at(df, Parity::Odd);
        const double Y = -at(w, Parity::Odd) - e2u * fp;
        const double dY = -at(dw, Parity::Even) - e2u * (at(d2f, Parity::Even) - 2.0 * at(du, Parity::Odd) * fp);
        out.sigma(k) += dt * Y;
        out.dsigma(k) += dt * dY * (1.0 + dsigma(k));
    }
    out.sigma(N - 1) = 0.0;
    out.dsigma(N - 1) = 0.0;
    out.carrier = advance(c, dt);
    out.carrier_f = f;
    out.g = pull_back(out.carrier, out.sigma, out.dsigma);
    out.f = f;
    for (int k = 0; k < N; ++k)
        out.f.values(k) = grid.interpolate(f.values, std::clamp(r(k) + out.sigma(k), 0.0, grid.R_max()), Parity::Even);
    return out;
}

FlowState FlowStepper::adaptive_step(const FlowState& state, double& dt, int* rejections) {
    const Vec x = pack(state.g);
    const double hsup = std::max(state.g.u.cwiseAbs().maxCoeff(), state.g.v.cwiseAbs().maxCoeff());
    for (int k = 0; k <= config_.max_halvings; ++k) {
        try {
            FlowState next = step(state, dt);
            const double change = (pack(next.g) - x).lpNorm<Eigen::Infinity>();
            if (change <= config_.cfl * std::max(hsup, config_.conv_tol)) return next;
        } catch (const Error& e) {
            if (e.code() != ErrorCode::StepRejected && e.code() != ErrorCode::NewtonDiverged &&
                e.code() != ErrorCode::IterationStalled && e.code() != ErrorCode::NonFiniteProfile)
                throw;
        }
        if (rejections) ++*rejections;
        dt *= 0.5;
    }
    throw Error(ErrorCode::StepRejected, "step rejected after " + std::to_string(config_.max_halvings) + " halvings");
}

FlowState step(const FlowState& state, double dt, const FlowConfig& config) {
    FlowStepper stepper(hyperbolic_reference(state.g.grid), config);
    return stepper.step(state, dt);
}

FlowTrajectory run_flow(const WarpedMetric& g0, const FlowConfig& config) {
    FlowStepper stepper(hyperbolic_reference(g0.grid), config);
    return run_flow(stepper, g0);
}

FlowTrajectory run_flow(FlowStepper& stepper, const WarpedMetric& g0) {
    const FlowConfig& cfg = stepper.config();
    const WarpedMetric& ghat = stepper.reference();
    require_same_grid(g0.grid, ghat.grid);
    require_admissible(g0);
    FlowTrajectory traj;
    FlowState s;
    s.g = g0;

    auto record = [&](FlowState& st) -> bool {
        diagnose(st, cfg.gauge, ghat, cfg.solver);
        if (!traj.states.empty()) {
            const double prev = traj.states.back().mu;
            if (st.mu < prev - 1e-8)
                throw Error(ErrorCode::MonotonicityViolated,
                            "mu decreased from " + format_double(prev) + " to " + format_double(st.mu) +
                                " at t = " + format_double(st.t));
        }
        traj.states.push_back(st);
        const double h0 = traj.states.front().hnorm_inf;
        if (h0 > 0.0) traj.growth_constant = std::max(traj.growth_constant, st.hnorm_inf / h0);
        if (st.dist <= cfg.conv_tol && st.grad_norm <= cfg.conv_tol) {
            traj.verdict = Verdict::Converged;
            return true;
        }
        if (st.dist > cfg.escape_radius) {
            traj.verdict = Verdict::Escaped;
            return true;
        }
        if (st.t >= cfg.t_max) {
            traj.verdict = Verdict::HorizonReached;
            return true;
        }
        return false;
    };

    try {
        if (record(s)) return traj;
    } catch (const Error& e) {
        if (e.code() == ErrorCode::MonotonicityViolated) throw;
        traj.verdict = Verdict::StepFailure;
        traj.message = e.what();
        return traj;
    }

    double dt = cfg.dt_init;
    int streak = 0;
    while (true) {
        try {
            const double tried = dt;
            s = stepper.adaptive_step(s, dt, &traj.rejected);
            ++traj.steps;
            streak = dt < tried ? 0 : streak + 1;
            const bool due = traj.steps % cfg.diag_every == 0;
            // Without fresh diagnostics only the horizon can end the run.
            if ((due || s.t >= cfg.t_max) && record(s)) break;
            if (streak >= cfg.grow_after && 2.0 * dt <= cfg.dt_max * (1.0 + 1e-12)) {
                dt *= 2.0;
                streak = 0;
            }
        } catch (const Error& e) {
            if (e.code() == ErrorCode::MonotonicityViolated) throw;
            traj.verdict = Verdict::StepFailure;
            traj.message = e.what();
            break;
        }
    }
    if (traj.verdict == Verdict::Converged) {
        try {
            traj.theta_fit = estimate_lojasiewicz(traj, cfg.solver.tol);
            traj.has_theta = true;
        } catch (const Error&) {
        }
        try {
            traj.rate_fit = fit_convergence_rate(traj);
            traj.has_rate = true;
        } catch (const Error&) {
        }
    }
    return traj;
}

namespace {

bool traj_monotone(const FlowTrajectory& traj, double mu) {
    return traj.states.empty() || mu >= traj.states.back().mu - 1e-8;
}

struct LineFit {
    double slope = 0.0, intercept = 0.0, residual = 0.0;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd A(n, 2);
    Vec b(n);
    for (int i = 0; i < n; ++i) {
        A(i, 0) = x[i];
        A(i, 1) = 1.0;
        b(i) = y[i];
    }
    const Vec c = A.colPivHouseholderQr().solve(b);
    LineFit out{c(0), c(1), 0.0};
    out.residual = std::sqrt((A * c - b).squaredNorm() / n);
    return out;
}

}  // namespace

LojasiewiczFit fit_lojasiewicz(const std::vector<double>& mu, const std::vector<double>& grad_norm,
                               double floor) {
    std::vector<double> x, y;
    for (size_t i = 0; i < mu.size() && i < grad_norm.size(); ++i) {
        if (std::abs(mu[i]) > floor && grad_norm[i] > 0.0 && std::isfinite(mu[i])) {
            x.push_back(2.0 * std::log(grad_norm[i]));
            y.push_back(std::log(std::abs(mu[i])));
        }
    }
    if (x.size() < 10) throw Error(ErrorCode::InsufficientData, "need 10 states with |mu| above the floor");
    const double spread = *std::max_element(x.begin(), x.end()) - *std::min_element(x.begin(), x.end());
    if (spread < 1e-8) throw Error(ErrorCode::InsufficientData, "gradient norm does not vary");
    const auto l = fit_line(x, y);
    if (!(l.slope > 0.0)) throw Error(ErrorCode::InsufficientData, "non-positive slope");
    LojasiewiczFit out;
    out.slope = l.slope;
    out.theta = 2.0 - 1.0 / l.slope;
    out.c = std::exp(l.intercept / l.slope);
    out.residual = l.residual;
    out.points = static_cast<int>(x.size());
    return out;
}

LojasiewiczFit estimate_lojasiewicz(const FlowTrajectory& traj, double solver_tol) {
    std::vector<double> mu, gn;
    for (const auto& s : traj.states) {
        if (!s.has_diagnostics) continue;
        mu.push_back(s.mu);
        gn.push_back(s.grad_norm);
    }
    return fit_lojasiewicz(mu, gn, 10.0 * solver_tol);
}

RateFit fit_convergence_rate(const std::vector<double>& t, const std::vector<double>& dist) {
    std::vector<double> tt, ld;
    for (size_t i = 0; i < t.size() && i < dist.size(); ++i)
        if (dist[i] > 0.0 && std::isfinite(dist[i])) {
            tt.push_back(t[i]);
            ld.push_back(std::log(dist[i]));
        }
    if (tt.size() < 10) throw Error(ErrorCode::InsufficientData, "need 10 positive distances");
    const size_t start = tt.size() / 2;
    std::vector<double> xs(tt.begin() + start, tt.end()), ys(ld.begin() + start, ld.end());
    std::vector<double> lx(xs.size());
    std::transform(xs.begin(), xs.end(), lx.begin(), [](double v) { return std::log(v + 1.0); });
    const auto pw = fit_line(lx, ys);
    const auto ex = fit_line(xs, ys);
    RateFit out;
    out.points = static_cast<int>(xs.size());
    if (ex.residual < pw.residual) {
        out.exponential = true;
        out.beta = std::numeric_limits<double>::infinity();
        out.rate = -ex.slope;
        out.residual = ex.residual;
    } else {
        out.beta = -pw.slope;
        out.residual = pw.residual;
    }
    return out;
}

RateFit fit_convergence_rate(const FlowTrajectory& traj) {
    if (traj.verdict != Verdict::Converged) throw Error(ErrorCode::InsufficientData, "trajectory did not converge");
    std::vector<double> t, d;
    for (const auto& s : traj.states)
        if (s.has_diagnostics) {
            t.push_back(s.t);
            d.push_back(s.dist);
        }
    return fit_convergence_rate(t, d);
}

GrowthCheck check_growth_bound(const std::vector<double>& t, const std::vector<double>& D, double theta,
                               double c, double rel_tol) {
    if (!(theta > 0.0 && theta < 1.0) || !(c > 0.0))
        throw Error(ErrorCode::InvalidArgument, "need 0 < theta < 1 and C > 0");
    GrowthCheck out;
    out.theta = theta;
    out.c = c;
    out.c1 = (1.0 - theta) / c;
    out.worst_margin = -std::numeric_limits<double>::infinity();
    const size_t m = std::min(t.size(), D.size());
    for (size_t i = 0; i < m; ++i) {
        if (!(D[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "D must be positive");
        const double pi = std::pow(D[i], theta - 1.0);
        for (size_t j = i + 1; j < m; ++j) {
            const double margin = std::pow(D[j], theta - 1.0) - (pi - out.c1 * (t[j] - t[i]));
            out.worst_margin = std::max(out.worst_margin, margin);
            ++out.pairs;
            if (margin > rel_tol * pi) out.ok = false;
        }
    }
    return out;
}

ProbeResult instability_probe(const WarpedMetric& g0, const FlowConfig& config) {
    const auto ghat = hyperbolic_reference(g0.grid);
    const auto e = entropy(g0, ghat, config.solver);
    if (!(e.mu > 0.0))
        throw Error(ErrorCode::PreconditionFailed, "mu(g0) = " + format_double(e.mu) + " is not positive");
    ProbeResult out;
    out.trajectory = run_flow(g0, config);
    std::vector<double> t, D, gn;
    for (const auto& s : out.trajectory.states) {
        t.push_back(s.t);
        D.push_back(s.mu);
        gn.push_back(s.grad_norm);
    }
    const auto fit = fit_lojasiewicz(D, gn, 10.0 * config.solver.tol);
    double c = 0.0;
    for (size_t i = 0; i < D.size(); ++i) c = std::max(c, std::pow(D[i], 2.0 - fit.theta) / (gn[i] * gn[i]));
    out.growth = check_growth_bound(t, D, fit.theta, c);
    return out;
}

ProbeResult instability_probe(const AnalyticFunctional& F, const Vec& x0, double dt, int max_steps,
                              double escape_radius) {
    const double f0 = F.eval(Vec::Zero(F.dim));
    if (!(F.eval(x0) - f0 > 0.0)) throw Error(ErrorCode::PreconditionFailed, "F(x0) does not exceed F(0)");
    const auto path = gradient_flow(F, x0, dt, max_steps, true);
    ProbeResult out;
    out.trajectory.verdict = Verdict::HorizonReached;
    std::vector<double> t, D, gn;
    for (const auto& p : path) {
        FlowState s;
        s.t = p.t;
        s.mu = p.value - f0;
        s.grad_norm = std::sqrt(p.grad_norm_sq);
        s.hnorm_inf = s.dist = p.x.lpNorm<Eigen::Infinity>();
        s.hnorm_l2 = p.x.norm();
        s.has_diagnostics = true;
        if (!traj_monotone(out.trajectory, s.mu))
            throw Error(ErrorCode::MonotonicityViolated, "F decreased along the ascent flow");
        out.trajectory.states.push_back(s);
        t.push_back(s.t);
        D.push_back(s.mu);
        gn.push_back(s.grad_norm);
        if (s.hnorm_l2 > escape_radius) {
            out.trajectory.verdict = Verdict::Escaped;
            break;
        }
    }
    out.trajectory.steps = static_cast<int>(out.trajectory.states.size()) - 1;
    const auto fit = fit_lojasiewicz(D, gn, 0.0);
    out.trajectory.theta_fit = fit;
    out.trajectory.has_theta = true;
    double c = 0.0;
    for (size_t i = 0; i < D.size(); ++i) c = std::max(c, std::pow(D[i], 2.0 - fit.theta) / (gn[i] * gn[i]));
    out.growth = check_growth_bound(t, D, fit.theta, c);
    return out;
}

RadialSymmetric2Tensor einstein_heat_action(const WarpedMetric& ghat, const RadialSymmetric2Tensor& h, double dt) {
    require_same_grid(ghat.grid, h.grid);
    if (!(dt >= 0.0)) throw Error(ErrorCode::InvalidArgument, "dt must be nonnegative");
    const int N = ghat.grid.size();
    const SpMat full = einstein_operator_matrix(ghat);
    // Drop the rows and columns of the last node of each component.
    std::vector<int> map(2 * N, -1);
    for (int k = 0; k + 1 < N; ++k) {
        map[k] = k;
        map[N + k] = N - 1 + k;
    }
    std::vector<Eigen::Triplet<double>> t;
    double scale = 0.0;
    for (int c = 0; c < full.outerSize(); ++c)
        for (SpMat::InnerIterator it(full, c); it; ++it)
            if (map[it.row()] >= 0 && map[it.col()] >= 0) {
                t.emplace_back(map[it.row()], map[it.col()], it.value());
                scale = std::max(scale, std::abs(it.value()));
            }
    SpMat A(2 * (N - 1), 2 * (N - 1));
    A.setFromTriplets(t.begin(), t.end());
    Vec y(2 * (N - 1));
    y << h.a.head(N - 1), h.b.head(N - 1);
    // Substeps with |s A|_max <= 1/8 keep the Taylor series short and free of cancellation.
    const int m = std::max(1, static_cast<int>(std::ceil(8.0 * dt * scale)));
    const double s = dt / m;
    for (int i = 0; i < m; ++i) {
        Vec term = y, sum = y;
        for (int k = 1; k < 40; ++k) {
            term = (-s / k) * (A * term);
            sum += term;
            if (term.lpNorm<Eigen::Infinity>() <= 1e-17 * sum.lpNorm<Eigen::Infinity>()) break;
        }
        y = sum;
    }
    RadialSymmetric2Tensor out = zero_tensor(ghat.grid);
    out.a.head(N - 1) = y.head(N - 1);
    out.b.head(N - 1) = y.tail(N - 1);
    return out;
}

std::vector<LinearizationPoint> linearization_errors(FlowStepper& stepper, const RadialSymmetric2Tensor& h,
                                                     const std::vector<double>& dts) {
    if (stepper.config().gauge != Gauge::DeTurck)
        throw Error(ErrorCode::InvalidArgument, "linearization check runs in the DeTurck gauge");
    const WarpedMetric& ghat = stepper.reference();
    std::vector<LinearizationPoint> out;
    for (double dt : dts) {
        FlowState s;
        s.g = add_tensor(ghat, RadialSymmetric2Tensor{h.grid, dt * h.a, dt * h.b});
        const auto next = stepper.step(s, dt);
        const auto d = metric_difference(next.g, ghat);
        const auto H = einstein_heat_action(ghat, h, dt);
        LinearizationPoint p;
        p.dt = dt;
        p.error = std::max((d.a / dt - H.a).cwiseAbs().maxCoeff(), (d.b / dt - H.b).cwiseAbs().maxCoeff());
        if (!out.empty()) p.order = std::log2(out.back().error / p.error);
        out.push_back(p);
    }
    return out;
}

Json to_json(const FlowConfig& c) {
    return Json{{"gauge", to_string(c.gauge)}, {"dt_init", c.dt_init},     {"dt_max", c.dt_max},
                {"t_max", c.t_max},            {"cfl", c.cfl},             {"conv_tol", c.conv_tol},
                {"escape_radius", c.escape_radius}, {"diag_every", c.diag_every},
                {"max_halvings", c.max_halvings},   {"grow_after", c.grow_after}};
}

Json to_json(const FlowTrajectory& traj) {
    Json j{{"verdict", to_string(traj.verdict)},
           {"steps", traj.steps},
           {"rejected", traj.rejected},
           {"recorded", traj.states.size()},
           {"growth_constant", traj.growth_constant}};
    if (!traj.message.empty()) j["message"] = traj.message;
    if (!traj.states.empty()) {
        const auto& s = traj.states.back();
        j["final"] = Json{{"t", s.t}, {"mu", s.mu}, {"grad_norm", s.grad_norm}, {"hnorm_inf", s.hnorm_inf},
                          {"hnorm_l2", s.hnorm_l2}, {"dist", s.dist}, {"mu_direct", s.mu_direct}};
    }
    if (traj.has_theta)
        j["theta_fit"] = Json{{"theta", traj.theta_fit.theta}, {"c", traj.theta_fit.c},
                              {"slope", traj.theta_fit.slope}, {"residual", traj.theta_fit.residual},
                              {"points", traj.theta_fit.points}};
    if (traj.has_rate) {
        Json r{{"exponential", traj.rate_fit.exponential}, {"residual", traj.rate_fit.residual},
               {"points", traj.rate_fit.points}};
        if (traj.rate_fit.exponential) r["rate"] = traj.rate_fit.rate;
        else r["beta"] = traj.rate_fit.beta;
        j["rate_fit"] = r;
    }
    return j;
}

std::string trajectory_csv(const FlowTrajectory& traj) {
    std::vector<std::vector<double>> rows;
    for (const auto& s : traj.states)
        rows.push_back({s.t, s.mu, s.grad_norm, s.hnorm_inf, s.hnorm_l2, s.dist, s.mu_direct});
    return csv_table({"t", "mu", "grad_norm", "hnorm_inf", "hnorm_l2", "dist", "mu_direct"}, rows);
}

}  // namespace pelab
