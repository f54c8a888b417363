#pragma once

#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pelab/elliptic.hpp"
#include "pelab/functionals.hpp"
#include "pelab/geometry.hpp"
#include "pelab/io.hpp"
#include "pelab/lojasiewicz.hpp"

namespace pelab {

enum class Gauge { DeTurck, EntropyGradient };
enum class Verdict { Running, Converged, Escaped, HorizonReached, StepFailure };

const char* to_string(Gauge g);
const char* to_string(Verdict v);
Gauge gauge_from_string(const std::string& s);

struct FlowConfig {
    Gauge gauge = Gauge::DeTurck;
    double dt_init = 0.01;
    double dt_max = 0.04;
    double t_max = 40.0;
    // A step is rejected when it moves (u, v) by more than cfl * max(|h|_inf, conv_tol).
    double cfl = 0.5;
    double conv_tol = 1e-6;
    double escape_radius = 0.5;
    int diag_every = 1;
    int max_halvings = 8;
    // Accepted steps at one dt before it is doubled.
    int grow_after = 3;
    SolveOptions solver{1e-11, 50, 0.5};
};

void validate(const FlowConfig& c);

struct FlowState {
    double t = 0.0;
    WarpedMetric g;
    RadialScalarField f;
    double mu = 0.0;
    double grad_norm = 0.0;  // |grad mu|_{L2(g)}
    double hnorm_inf = 0.0;  // sup of the frame components of g - ghat
    double hnorm_l2 = 0.0;
    // Sup-norm distance of the DeTurck representative to ghat; this is hnorm_inf in the
    // DeTurck gauge. The entropy-gauge limit is hyperbolic only up to a radial diffeomorphism.
    double dist = 0.0;
    // Entropy gauge: mu of g itself. mu and grad_norm are evaluated on the carrier, which lies
    // on the same orbit; the discrete functionals are diffeomorphism invariant only up to
    // discretization error.
    double mu_direct = 0.0;
    bool has_diagnostics = false;
    // Entropy gauge only, empty before the first step: g is the pull-back of the DeTurck
    // solution `carrier` by r -> r + sigma(r), and carrier_f is the potential of the carrier.
    // sigma' is evolved with sigma rather than differentiated.
    WarpedMetric carrier;
    RadialScalarField carrier_f;
    Vec sigma, dsigma;
};

struct RateFit {
    bool exponential = false;
    double beta = 0.0;  // infinity on the exponential branch
    double rate = 0.0;  // decay rate on the exponential branch
    double residual = 0.0;
    int points = 0;
};

struct LojasiewiczFit {
    double theta = 0.0;
    double c = 0.0;
    double slope = 0.0;  // of log|mu| against log|grad mu|^2
    double residual = 0.0;
    int points = 0;
};

struct FlowTrajectory {
    std::vector<FlowState> states;  // recorded states only
    Verdict verdict = Verdict::Running;
    std::string message;
    int steps = 0;
    int rejected = 0;
    // max_t |h(t)|_inf / |h(0)|_inf over recorded states, monitored only.
    double growth_constant = 0.0;
    bool has_theta = false;
    LojasiewiczFit theta_fit;
    bool has_rate = false;
    RateFit rate_fit;
};

// sup_r |e^v sinh r / sinh s(r) - 1| with s the g-distance to the origin; zero exactly on
// radial pull-backs of the hyperbolic metric.
double orbit_distance(const WarpedMetric& g);

// Pull-back of g by the radial map r -> r + sigma(r), given sigma and sigma' at the nodes.
// Throws StepRejected when the map is not increasing.
WarpedMetric pull_back(const WarpedMetric& g, const Vec& sigma, const Vec& dsigma);

// Right-hand side of g_t in the frame of g.
RadialSymmetric2Tensor velocity(const FlowState& state, Gauge gauge, const WarpedMetric& ghat,
                                const SolveOptions& opts = {}, RadialScalarField* f_out = nullptr);

// Fills f, mu, grad_norm, the distances and mu_direct.
void diagnose(FlowState& state, Gauge gauge, const WarpedMetric& ghat, const SolveOptions& opts = {});

/**
 * Linearly implicit Euler for the DeTurck flow: x+ = x + dt (I - dt J)^{-1} V(x), with J the
 * Jacobian of V at ghat by central differences (dense), factorized once per dt level.
 * Unknowns are u and v at every node but the last, which keeps its initial value.
 *
 * In the entropy gauge the DeTurck solution is carried along together with the radial
 * diffeomorphism generated by -W - grad f (explicit Euler), and the state is its pull-back.
 * Stepping -2(Ric + hess f) directly is unstable: the equation for u is first order.
 */
class FlowStepper {
public:
    FlowStepper(const WarpedMetric& ghat, const FlowConfig& config);
    FlowState step(const FlowState& state, double dt);
    // One accepted step with halving; the dt actually used is written back.
    FlowState adaptive_step(const FlowState& state, double& dt, int* rejections = nullptr);
    const Eigen::MatrixXd& jacobian() const { return J_; }
    const WarpedMetric& reference() const { return ghat_; }
    const FlowConfig& config() const { return config_; }

    Vec pack(const WarpedMetric& g) const;
    WarpedMetric unpack(const Vec& x, const WarpedMetric& like) const;
    Vec pack_velocity(const RadialSymmetric2Tensor& V) const;

private:
    const Eigen::PartialPivLU<Eigen::MatrixXd>& factor(double dt);
    WarpedMetric advance(const WarpedMetric& g, double dt);

    WarpedMetric ghat_;
    FlowConfig config_;
    Eigen::MatrixXd J_;
    std::map<double, std::unique_ptr<Eigen::PartialPivLU<Eigen::MatrixXd>>> lu_;
};

FlowState step(const FlowState& state, double dt, const FlowConfig& config);

// Throws MonotonicityViolated when mu drops by more than 1e-8 between recorded states.
FlowTrajectory run_flow(const WarpedMetric& g0, const FlowConfig& config);
FlowTrajectory run_flow(FlowStepper& stepper, const WarpedMetric& g0);

// Fit of log|mu| = m log|grad|^2 + b over points with |mu| > floor: theta = 2 - 1/m, C = e^{b/m}.
LojasiewiczFit fit_lojasiewicz(const std::vector<double>& mu, const std::vector<double>& grad_norm,
                               double floor);
LojasiewiczFit estimate_lojasiewicz(const FlowTrajectory& traj, double solver_tol = 1e-10);

// Tail fit of a decaying distance sequence. The power law (t+1)^{-beta} and the exponential
// e^{-rate t} are both fitted and the smaller residual wins.
RateFit fit_convergence_rate(const std::vector<double>& t, const std::vector<double>& dist);
RateFit fit_convergence_rate(const FlowTrajectory& traj);

struct GrowthCheck {
    bool ok = true;
    double theta = 0.0;
    double c = 0.0;
    double c1 = 0.0;
    double worst_margin = 0.0;  // max over pairs of D(s)^{theta-1} - (D(t)^{theta-1} - C1 (s - t))
    int pairs = 0;
};

// D(s)^{theta-1} <= D(t)^{theta-1} - C1 (s - t), C1 = (1 - theta)/C, for every s > t, with
// D = value - value(critical point) > 0.
GrowthCheck check_growth_bound(const std::vector<double>& t, const std::vector<double>& D, double theta,
                               double c, double rel_tol = 1e-6);

struct ProbeResult {
    FlowTrajectory trajectory;
    GrowthCheck growth;
};

// Entropy growth away from the reference. Throws PreconditionFailed unless mu(g0) > 0.
ProbeResult instability_probe(const WarpedMetric& g0, const FlowConfig& config);
// Same check on the ascent flow x' = grad F from x0 (RK4). The states carry t, mu = F - F(0)
// and grad_norm = |grad F| only; the verdict is Escaped once |x| exceeds escape_radius.
ProbeResult instability_probe(const AnalyticFunctional& F, const Vec& x0, double dt, int max_steps,
                              double escape_radius);

// exp(-dt Delta_E) h over ghat with the last node held at zero (Taylor substeps).
RadialSymmetric2Tensor einstein_heat_action(const WarpedMetric& ghat, const RadialSymmetric2Tensor& h, double dt);

struct LinearizationPoint {
    double dt = 0.0;  // also the amplitude eps
    double error = 0.0;  // sup |(step(ghat + eps h, dt) - ghat)/eps - exp(-dt Delta_E) h|
    double order = 0.0;  // log2 of the error ratio to the previous point, 0 for the first
};

// One DeTurck step per dt with eps = dt; dts should halve successively.
std::vector<LinearizationPoint> linearization_errors(FlowStepper& stepper, const RadialSymmetric2Tensor& h,
                                                     const std::vector<double>& dts);

Json to_json(const FlowConfig& c);
Json to_json(const FlowTrajectory& traj);
// Columns t, mu, grad_norm, hnorm_inf, hnorm_l2, dist, mu_direct.
std::string trajectory_csv(const FlowTrajectory& traj);

}  // namespace pelab
