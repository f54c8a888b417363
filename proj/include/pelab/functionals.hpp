#pragma once

#include <utility>
#include <vector>

#include "pelab/elliptic.hpp"
#include "pelab/geometry.hpp"
#include "pelab/io.hpp"

namespace pelab {

/// Result of fitting Q(R) ~ A + B e^{-kappa R} through samples at increasing radii.
struct LimitEstimate {
    double value = 0.0;
    double residual = 0.0;  // max misfit of the fitted model over the samples
    double kappa = 0.0;
    double last_increment = 0.0;
    std::vector<double> radii;
    std::vector<double> samples;
};

/**
 * Discrete defect of the linearized divergence identity at the hyperbolic metric:
 *   int_{B_R} Dscal[h] dV - m_ADM'(R)[h] - (n-1) int_{B_R} tr h dV,
 * with every term discretized exactly as in the functionals. The continuum value is zero
 * for every R. Left in, it is a first-order term that the e^{(n-1)r} volume growth
 * amplifies, and the hyperbolic metric stops being a critical point of the discrete S, W, mu.
 */
double divergence_defect(const WarpedMetric& g, double R);
// int_{B_R} F dV_g minus divergence_defect, used for every integrand containing scal + n(n-1).
double scal_integral(const WarpedMetric& g, const Vec& F, double R);

// Radii R_max * {0.5, 0.6, 0.7, 0.8, 0.9}.
std::vector<double> extrapolation_radii(const RadialGrid& grid);
// Throws LimitNotConverged when the increments do not decay.
LimitEstimate extrapolate_limit(const std::vector<double>& radii, const std::vector<double>& samples,
                                const char* what = "limit");

double adm_mass_at_radius(const WarpedMetric& g, const WarpedMetric& ghat, double R);
double renormalized_volume_at_radius(const WarpedMetric& g, const WarpedMetric& ghat, double R);

LimitEstimate volume_renormalized_mass_limit(const WarpedMetric& g, const WarpedMetric& ghat);
double volume_renormalized_mass(const WarpedMetric& g, const WarpedMetric& ghat);
LimitEstimate renormalized_volume_limit(const WarpedMetric& g, const WarpedMetric& ghat);

LimitEstimate s_functional_limit(const WarpedMetric& g, const WarpedMetric& ghat);
double s_functional(const WarpedMetric& g, const WarpedMetric& ghat);

enum class WIntegrand {
    Consistent,   // (|df|^2 + scal + n(n-1)) e^{-f} - 2(n-1)((f+1)e^{-f} - 1)
    Transcribed,  // (|df|^2 + scal + f) e^{-f}, kept for the negative check
};

// Counterterms are taken against the hyperbolic metric on the same grid.
LimitEstimate w_functional_limit(const WarpedMetric& g, const RadialScalarField& f,
                                 WIntegrand form = WIntegrand::Consistent);
double w_functional(const WarpedMetric& g, const RadialScalarField& f,
                    WIntegrand form = WIntegrand::Consistent);
// The bracket under the W limit at a single radius.
double w_functional_at_radius(const WarpedMetric& g, const RadialScalarField& f, double R,
                              WIntegrand form = WIntegrand::Consistent);
// Pointwise W-integrand (without dV_g).
Vec w_integrand(const WarpedMetric& g, const RadialScalarField& f, WIntegrand form);

struct EntropyValue {
    double mu = 0.0;
    RadialScalarField f;
    SolveReport report;
};

EntropyValue entropy(const WarpedMetric& g, const WarpedMetric& ghat, const SolveOptions& opts = {},
                     const Vec* warm_start = nullptr);

// -(Ric + Hess f + (n-1) g) e^{-f}; f is solved for when not supplied.
RadialSymmetric2Tensor entropy_gradient(const WarpedMetric& g, const WarpedMetric& ghat,
                                        const RadialScalarField* f = nullptr);
// -Ric + scal g / 2 + (n-1)(n-2) g / 2.
RadialSymmetric2Tensor s_gradient(const WarpedMetric& g, const WarpedMetric& ghat);

struct FunctionalReport {
    std::vector<std::pair<double, double>> m_adm_at;
    std::vector<std::pair<double, double>> rv_at;
    LimitEstimate m_vr;
    LimitEstimate s_value;
    LimitEstimate w_value;
    double mu = 0.0;
    RadialScalarField f;
};

FunctionalReport functional_report(const WarpedMetric& g, const WarpedMetric& ghat,
                                   const SolveOptions& opts = {});
Json to_json(const LimitEstimate& e);
Json to_json(const FunctionalReport& rep);
// Columns R, m_adm, rv, partial_sum.
std::string radius_table_csv(const FunctionalReport& rep);

}  // namespace pelab
