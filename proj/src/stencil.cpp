#include "pelab/stencil.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace pelab {

std::vector<std::vector<double>> fd_weights(double x0, const std::vector<double>& x,
                                            int max_deriv) {
    const int n = static_cast<int>(x.size());
    std::vector<std::vector<double>> c(max_deriv + 1, std::vector<double>(n, 0.0));
    double c1 = 1.0;
    double c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        const int mn = std::min(i, max_deriv);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k)
                    c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for (int k = mn; k >= 1; --k)
                c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    return c;
}

std::vector<double> integration_weights(double a, double b, const std::vector<double>& x) {
    // Moment equations in a shifted, scaled variable for conditioning.
    const int n = static_cast<int>(x.size());
    const double mid = 0.5 * (x.front() + x.back());
    const double scale = std::max(1e-300, 0.5 * std::abs(x.back() - x.front()));
    Eigen::MatrixXd V(n, n);
    Eigen::VectorXd m(n);
    for (int k = 0; k < n; ++k) {
        for (int j = 0; j < n; ++j) V(k, j) = std::pow((x[j] - mid) / scale, k);
        const double ta = (a - mid) / scale;
        const double tb = (b - mid) / scale;
        m(k) = scale * (std::pow(tb, k + 1) - std::pow(ta, k + 1)) / (k + 1);
    }
    Eigen::VectorXd q = V.colPivHouseholderQr().solve(m);
    return std::vector<double>(q.data(), q.data() + n);
}

}  // namespace pelab
