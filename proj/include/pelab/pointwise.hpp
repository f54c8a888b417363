#pragma once

#include <cmath>

namespace pelab {

// Forward-mode dual number, used for exact Jacobians of nodal formulas.
struct Dual {
    double v = 0.0;
    double d = 0.0;
    Dual() = default;
    Dual(double value, double der = 0.0) : v(value), d(der) {}
};

inline Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
inline Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
inline Dual operator-(Dual a) { return {-a.v, -a.d}; }
inline Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
inline Dual operator/(Dual a, Dual b) {
    return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)};
}
inline Dual exp(Dual a) {
    const double e = std::exp(a.v);
    return {e, e * a.d};
}
inline Dual expm1(Dual a) { return {std::expm1(a.v), std::exp(a.v) * a.d}; }

using std::exp;
using std::expm1;

template <class T>
struct PointCurvature {
    T krad_dev;  // K_rad + 1
    T ktan_dev;  // K_tan + 1
};

// Sectional curvatures of e^{2u}dr^2 + e^{2v}sinh^2 r g_S at radius r from the nodal
// values u, v, u', v', v''. Written as offsets from -1 so that nothing cancels.
template <class T>
PointCurvature<T> point_curvature(double r, T u, T v, T du, T dv, T d2v) {
    const double S = std::sinh(r);
    const double coth = 1.0 / std::tanh(r);
    const T e2u = exp(T(-2.0) * u);
    const T krad = -expm1(T(-2.0) * u) -
                   e2u * (d2v + dv * dv + (T(2.0) * dv - du) * T(coth) - du * dv);
    const T ktan = -expm1(T(2.0) * (v - u)) / (exp(T(2.0) * v) * T(S * S)) -
                   expm1(T(-2.0) * u) - e2u * dv * (T(2.0 * coth) + dv);
    return {krad, ktan};
}

template <class T>
T point_scal_dev(int n, double r, T u, T v, T du, T dv, T d2v) {
    const auto k = point_curvature(r, u, v, du, dv, d2v);
    return T(2.0 * (n - 1)) * k.krad_dev + T(double(n - 1) * (n - 2)) * k.ktan_dev;
}

}  // namespace pelab
