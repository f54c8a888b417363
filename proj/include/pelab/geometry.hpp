#pragma once

#include "pelab/grid.hpp"

namespace pelab {

struct RadialScalarField {
    RadialGrid grid;
    Vec values;
};

/// g = e^{2u} dr^2 + e^{2v} sinh^2(r) g_{S^{n-1}}; the hyperbolic metric is u = v = 0.
struct WarpedMetric {
    RadialGrid grid;
    Vec u;
    Vec v;
};

/// Radial symmetric 2-tensor by its orthonormal-frame components h(e_r,e_r) = a and
/// h(e_t,e_t) = b.
struct RadialSymmetric2Tensor {
    RadialGrid grid;
    Vec a;
    Vec b;
};

/// The *_dev members hold the offset from the hyperbolic value (K + 1, Ric + (n-1)g,
/// scal + n(n-1)), evaluated without cancellation.
struct CurvatureData {
    Vec K_rad, K_tan, ric_rr, ric_tt, scal;
    Vec K_rad_dev, K_tan_dev, ric_rr_dev, ric_tt_dev, scal_dev;
};

RadialScalarField make_scalar(const RadialGrid& grid, const Vec& values);
RadialScalarField zero_scalar(const RadialGrid& grid);
RadialSymmetric2Tensor make_tensor(const RadialGrid& grid, const Vec& a, const Vec& b);
RadialSymmetric2Tensor zero_tensor(const RadialGrid& grid);

WarpedMetric hyperbolic_reference(const RadialGrid& grid);
CurvatureData curvature(const WarpedMetric& g);

// Delta f = -(1/(e^u psi^{n-1})) d/dr (e^{-u} psi^{n-1} df/dr), flux form.
RadialScalarField scalar_laplacian(const WarpedMetric& g, const RadialScalarField& f);
SpMat scalar_laplacian_matrix(const WarpedMetric& g);

RadialSymmetric2Tensor tensor_laplacian(const WarpedMetric& g, const RadialSymmetric2Tensor& h);
RadialSymmetric2Tensor curvature_action(const WarpedMetric& g, const RadialSymmetric2Tensor& h);
RadialSymmetric2Tensor einstein_operator(const WarpedMetric& g, const RadialSymmetric2Tensor& h);
// Block matrices acting on the stacked vector (a; b).
SpMat tensor_laplacian_matrix(const WarpedMetric& g);
SpMat einstein_operator_matrix(const WarpedMetric& g);

double integrate_ball(const WarpedMetric& g, const RadialScalarField& f, double R);

// Radial coordinate component w of W = g^{pq}(Gamma^k_pq - Gammahat^k_pq) = w d/dr.
RadialScalarField deturck_vector(const WarpedMetric& g, const WarpedMetric& ghat);
// dw/dr from the closed form of w, with second derivatives of u and v on the compact stencil.
RadialScalarField deturck_vector_derivative(const WarpedMetric& g, const WarpedMetric& ghat);
// Frame components of L_{w d/dr} g; w' is taken from d1_odd unless supplied.
RadialSymmetric2Tensor lie_derivative(const WarpedMetric& g, const RadialScalarField& w);
RadialSymmetric2Tensor lie_derivative(const WarpedMetric& g, const RadialScalarField& w,
                                      const RadialScalarField& dw);
// L_W g for the DeTurck vector, using deturck_vector_derivative. Differencing w itself
// would leave the sawtooth mode of u undamped in the flow.
RadialSymmetric2Tensor deturck_term(const WarpedMetric& g, const WarpedMetric& ghat);

// --- helpers shared by the other modules ---

// e^{-u} psi'/psi, the mean curvature of the geodesic spheres divided by n-1.
Vec sphere_mean_curvature(const WarpedMetric& g);
// e^u psi^{n-1} times the sphere area: the radial density of dV_g.
Vec volume_density(const WarpedMetric& g);
// Quadrature weights for the full-domain integral against dV_g.
Vec volume_weights(const WarpedMetric& g);
double inner_product(const WarpedMetric& g, const RadialScalarField& f1, const RadialScalarField& f2);
double inner_product(const WarpedMetric& g, const RadialSymmetric2Tensor& h1,
                     const RadialSymmetric2Tensor& h2);
// Frame components of the Hessian of f.
RadialSymmetric2Tensor hessian(const WarpedMetric& g, const RadialScalarField& f);

// g + h with h given in the frame of g.
WarpedMetric add_tensor(const WarpedMetric& g, const RadialSymmetric2Tensor& h);
// g - ghat in the frame of ghat.
RadialSymmetric2Tensor metric_difference(const WarpedMetric& g, const WarpedMetric& ghat);
// Pointwise e^{2w} g.
WarpedMetric conformal(const WarpedMetric& g, const Vec& w);

void require_same_grid(const RadialGrid& a, const RadialGrid& b);
void require_finite(const WarpedMetric& g);
// Throws NonAdmissibleMetric unless |u|, |v| <= decay_tol at R_max.
void require_admissible(const WarpedMetric& g, double decay_tol = 1e-8);

}  // namespace pelab
