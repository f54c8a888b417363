#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>

namespace pelab {

using Vec = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

enum class Parity { Even, Odd };

/**
 * Precomputed difference, interpolation and quadrature operators of a grid.
 * Node k sits at r = (k+1)h; half point m sits at r = (m+1/2)h.
 */
struct GridOperators {
    SpMat d1_even;  // nodes -> nodes
    SpMat d2_even;
    SpMat d1_odd;
    SpMat dh;       // nodes -> half points, first derivative
    SpMat ih;       // nodes -> half points, interpolation
    SpMat div;      // half points -> nodes, first derivative of a flux
    Vec r_half;
    Vec quad;       // weights for the integral over [0, R_max] with F(0) = 0
};

class RadialGrid {
public:
    RadialGrid() = default;
    // Uniform in r with r_1 = h, r_N = R_max.
    static RadialGrid uniform(int n, int N, double R_max, int scheme = 4);

    int n() const { return n_; }
    int size() const { return N_; }
    double R_max() const { return R_max_; }
    int scheme() const { return scheme_; }
    double h() const { return h_; }
    const Vec& r() const { return r_; }
    const GridOperators& ops() const { return *ops_; }

    bool same_as(const RadialGrid& other) const;

    // Integral of nodal samples F over [0, R] assuming F(0) = 0.
    double integrate(const Vec& F, double R) const;
    // Value (deriv = 0) or first derivative (deriv = 1) of the local interpolant at R.
    double interpolate(const Vec& f, double R, Parity parity, int deriv = 0) const;

private:
    int n_ = 0;
    int N_ = 0;
    double R_max_ = 0.0;
    int scheme_ = 4;
    double h_ = 0.0;
    Vec r_;
    std::shared_ptr<const GridOperators> ops_;
};

// Area of the unit (n-1)-sphere.
double sphere_area(int n);

}  // namespace pelab
