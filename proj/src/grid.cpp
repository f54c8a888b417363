#include "pelab/grid.hpp"

#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "pelab/errors.hpp"
#include "pelab/stencil.hpp"

namespace pelab {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;
using Terms = std::vector<std::pair<int, double>>;

// Column/coefficient expansion of the node value at integer position p (units of h).
Terms node_terms(int p, Parity parity, int scheme) {
    if (p >= 1) return {{p - 1, 1.0}};
    if (p == 0) {
        if (parity == Parity::Odd) return {};
        // Even extension: polynomial in r^2 through the first nodes.
        if (scheme == 4) return {{0, 1.5}, {1, -0.6}, {2, 0.1}};
        return {{0, 4.0 / 3.0}, {1, -1.0 / 3.0}};
    }
    const double s = parity == Parity::Even ? 1.0 : -1.0;
    return {{-p - 1, s}};
}

// Half-point value at position k + 1/2 for integer k (may be negative).
Terms half_terms(int k, double flux_sign) {
    if (k >= 0) return {{k, 1.0}};
    return {{-k - 1, flux_sign}};
}

// Integer positions for a stencil of `count` points centered at x0, never exceeding maxpos.
std::vector<int> node_positions(double x0, int count, int maxpos) {
    int lo = static_cast<int>(std::ceil(x0 - 0.5 * (count - 1) - 1e-12));
    if (lo + count - 1 > maxpos) lo = maxpos - count + 1;
    std::vector<int> p(count);
    for (int i = 0; i < count; ++i) p[i] = lo + i;
    return p;
}

void add_row(Triplets& t, int row, double x0, const std::vector<double>& xs,
             const std::vector<Terms>& terms, int deriv, double scale) {
    const auto w = fd_weights(x0, xs, deriv);
    for (size_t j = 0; j < xs.size(); ++j)
        for (const auto& [col, c] : terms[j])
            if (w[deriv][j] * c != 0.0) t.emplace_back(row, col, scale * w[deriv][j] * c);
}

SpMat nodal_operator(int N, double h, int scheme, Parity parity, int deriv) {
    Triplets t;
    const int centered = deriv == 0 ? scheme : scheme + 1;
    const int onesided = scheme + deriv;
    for (int k = 0; k < N; ++k) {
        const int x0 = k + 1;
        auto pos = node_positions(x0, centered, N);
        if (pos.back() != x0 + centered / 2) pos = node_positions(x0, onesided, N);
        std::vector<double> xs;
        std::vector<Terms> terms;
        for (int p : pos) {
            xs.push_back(p);
            terms.push_back(node_terms(p, parity, scheme));
        }
        add_row(t, k, x0, xs, terms, deriv, std::pow(h, -deriv));
    }
    SpMat m(N, N);
    m.setFromTriplets(t.begin(), t.end());
    m.prune(0.0);
    return m;
}

// Nodes -> half points.
SpMat staggered_from_nodes(int N, double h, int scheme, int deriv) {
    Triplets t;
    const int centered = scheme;
    const int onesided = scheme + deriv;
    for (int m = 0; m < N; ++m) {
        const double x0 = m + 0.5;
        std::vector<int> pos = node_positions(x0, centered, N);
        if (pos.back() - x0 < 0.5 * centered - 1.0) pos = node_positions(x0, onesided, N);
        std::vector<double> xs;
        std::vector<Terms> terms;
        for (int p : pos) {
            xs.push_back(p);
            terms.push_back(node_terms(p, Parity::Even, scheme));
        }
        add_row(t, m, x0, xs, terms, deriv, std::pow(h, -deriv));
    }
    SpMat mat(N, N);
    mat.setFromTriplets(t.begin(), t.end());
    mat.prune(0.0);
    return mat;
}

// Half points -> nodes, first derivative; the flux continues across the origin with
// the given sign.
SpMat divergence(int N, double h, int scheme, double flux_sign) {
    Triplets t;
    const int centered = scheme;
    const int onesided = scheme + 1;
    for (int k = 0; k < N; ++k) {
        const double x0 = k + 1;
        // half index j sits at j + 0.5; maximal index N - 1.
        int lo = static_cast<int>(std::ceil(x0 - 0.5 - 0.5 * (centered - 1) - 1e-12));
        int count = centered;
        if (lo + count - 1 > N - 1) {
            count = onesided;
            lo = N - count;
        }
        std::vector<double> xs;
        std::vector<Terms> terms;
        for (int j = lo; j < lo + count; ++j) {
            xs.push_back(j + 0.5);
            terms.push_back(half_terms(j, flux_sign));
        }
        add_row(t, k, x0, xs, terms, 1, 1.0 / h);
    }
    SpMat mat(N, N);
    mat.setFromTriplets(t.begin(), t.end());
    mat.prune(0.0);
    return mat;
}

Vec quadrature(int N, double h, int scheme) {
    Vec q = Vec::Constant(N, h);
    if (scheme == 4) {
        // positions 1, 2 and N-2, N-1, N (position 0 carries F(0) = 0)
        q(0) = h * 7.0 / 6.0;
        q(1) = h * 23.0 / 24.0;
        q(N - 3) = h * 23.0 / 24.0;
        q(N - 2) = h * 7.0 / 6.0;
        q(N - 1) = h * 3.0 / 8.0;
    } else {
        q(N - 1) = 0.5 * h;
    }
    return q;
}

}  // namespace

double sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

RadialGrid RadialGrid::uniform(int n, int N, double R_max, int scheme) {
    if (n < 3) throw Error(ErrorCode::InvalidArgument, "dimension must be at least 3");
    if (N < 16) throw Error(ErrorCode::InvalidArgument, "grid needs at least 16 nodes");
    if (!(R_max > 0.0) || !std::isfinite(R_max))
        throw Error(ErrorCode::InvalidArgument, "R_max must be positive");
    if (scheme != 2 && scheme != 4)
        throw Error(ErrorCode::InvalidArgument, "scheme must be 2 or 4, got " + std::to_string(scheme));

    RadialGrid g;
    g.n_ = n;
    g.N_ = N;
    g.R_max_ = R_max;
    g.scheme_ = scheme;
    g.h_ = R_max / N;
    g.r_.resize(N);
    for (int k = 0; k < N; ++k) g.r_(k) = (k + 1) * g.h_;
    g.r_(N - 1) = R_max;

    auto ops = std::make_shared<GridOperators>();
    ops->d1_even = nodal_operator(N, g.h_, scheme, Parity::Even, 1);
    ops->d2_even = nodal_operator(N, g.h_, scheme, Parity::Even, 2);
    ops->d1_odd = nodal_operator(N, g.h_, scheme, Parity::Odd, 1);
    ops->dh = staggered_from_nodes(N, g.h_, scheme, 1);
    ops->ih = staggered_from_nodes(N, g.h_, scheme, 0);
    // The flux e^{-u} psi^{n-1} f' has parity (-1)^n under r -> -r.
    ops->div = divergence(N, g.h_, scheme, (n % 2 == 0) ? 1.0 : -1.0);
    ops->r_half.resize(N);
    for (int m = 0; m < N; ++m) ops->r_half(m) = (m + 0.5) * g.h_;
    ops->quad = quadrature(N, g.h_, scheme);
    g.ops_ = std::move(ops);
    return g;
}

bool RadialGrid::same_as(const RadialGrid& o) const {
    return n_ == o.n_ && N_ == o.N_ && R_max_ == o.R_max_ && scheme_ == o.scheme_;
}

double RadialGrid::integrate(const Vec& F, double R) const {
    if (R < 0.0 || R > R_max_ * (1.0 + 1e-12))
        throw Error(ErrorCode::RadiusOutOfRange, "R = " + std::to_string(R));
    R = std::min(R, R_max_);
    const double pos = R / h_;
    int k = static_cast<int>(std::floor(pos + 1e-9));
    k = std::min(k, N_);
    auto value = [&](int p) { return p == 0 ? 0.0 : F(p - 1); };

    double total = 0.0;
    if (scheme_ == 4 && k >= 5) {
        for (int p = 1; p <= k; ++p) total += value(p);
        total += value(1) / 6.0 - value(2) / 24.0;
        total += -5.0 / 8.0 * value(k) + value(k - 1) / 6.0 - value(k - 2) / 24.0;
        total *= h_;
    } else if (scheme_ == 2) {
        for (int p = 1; p < k; ++p) total += value(p);
        if (k >= 1) total += 0.5 * value(k);
        total *= h_;
    } else if (k > 0) {
        std::vector<double> xs;
        for (int p = 0; p <= std::min(5, N_); ++p) xs.push_back(p);
        const auto q = integration_weights(0.0, k, xs);
        for (size_t j = 0; j < xs.size(); ++j) total += q[j] * value(static_cast<int>(xs[j]));
        total *= h_;
    }

    const double rest = pos - k;
    if (rest > 1e-9 && k < N_) {
        const int count = scheme_ + 2;
        std::vector<int> p = node_positions(k + 0.5, count, N_);
        if (p.front() < 0) {
            for (int i = 0; i < count; ++i) p[i] = i;
        }
        std::vector<double> xs(p.begin(), p.end());
        const auto q = integration_weights(k, pos, xs);
        double part = 0.0;
        for (size_t j = 0; j < xs.size(); ++j) part += q[j] * value(p[j]);
        total += part * h_;
    }
    return total;
}

double RadialGrid::interpolate(const Vec& f, double R, Parity parity, int deriv) const {
    if (R < 0.0 || R > R_max_ * (1.0 + 1e-12))
        throw Error(ErrorCode::RadiusOutOfRange, "R = " + std::to_string(R));
    const double x0 = std::min(R, R_max_) / h_;
    const int count = scheme_ + 2;
    const auto pos = node_positions(x0, count, N_);
    std::vector<double> xs(pos.begin(), pos.end());
    const auto w = fd_weights(x0, xs, deriv);
    double out = 0.0;
    for (size_t j = 0; j < xs.size(); ++j)
        for (const auto& [col, c] : node_terms(pos[j], parity, scheme_))
            out += w[deriv][j] * c * f(col);
    return out / std::pow(h_, deriv);
}

}  // namespace pelab
