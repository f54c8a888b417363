#include "pelab/perturbation.hpp"

#include <algorithm>
#include <cmath>

#include "pelab/errors.hpp"
#include "pelab/rng.hpp"

namespace pelab {

const char* to_string(PerturbationKind k) {
    switch (k) {
        case PerturbationKind::Conformal: return "conformal";
        case PerturbationKind::TraceFree: return "tt";
        case PerturbationKind::RandomCompact: return "random-compact";
        case PerturbationKind::DivergenceFree: return "divergence-free";
    }
    return "?";
}

PerturbationKind perturbation_kind_from_string(const std::string& s) {
    if (s == "conformal") return PerturbationKind::Conformal;
    if (s == "tt" || s == "trace-free") return PerturbationKind::TraceFree;
    if (s == "random-compact") return PerturbationKind::RandomCompact;
    if (s == "divergence-free") return PerturbationKind::DivergenceFree;
    throw Error(ErrorCode::SpecInvalid, "unknown perturbation kind '" + s + "'");
}

namespace {

// exp(-1/(1-x^2)) and its first two derivatives in x.
void bump(double x, double& f, double& d1, double& d2) {
    if (std::abs(x) >= 1.0) {
        f = d1 = d2 = 0.0;
        return;
    }
    const double q = 1.0 - x * x;
    f = std::exp(-1.0 / q);
    const double l1 = -2.0 * x / (q * q);
    const double l2 = -(2.0 + 6.0 * x * x) / (q * q * q);
    d1 = f * l1;
    d2 = f * (l1 * l1 + l2);
}

}  // namespace

BumpProfile random_bumps(const RadialGrid& grid, double r_lo, double r_hi, int bumps, std::uint64_t seed,
                         std::uint64_t stream) {
    CounterRng rng(seed, stream);
    const int N = grid.size();
    BumpProfile p{Vec::Zero(N), Vec::Zero(N), Vec::Zero(N)};
    const double len = r_hi - r_lo;
    for (int j = 0; j < bumps; ++j) {
        const double w = len * rng.uniform(0.25, 0.5);
        const double c = rng.uniform(r_lo + w, r_hi - w);
        const double weight = rng.normal();
        for (int k = 0; k < N; ++k) {
            for (double sgn : {1.0, -1.0}) {
                double f, d1, d2;
                bump((grid.r()(k) - sgn * c) / w, f, d1, d2);
                p.f(k) += weight * f;
                p.df(k) += weight * d1 / w;
                p.d2f(k) += weight * d2 / (w * w);
            }
        }
    }
    return p;
}

RadialSymmetric2Tensor generate_perturbation(const PerturbationSpec& spec, const RadialGrid& grid) {
    if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude))
        throw Error(ErrorCode::SpecInvalid, "amplitude must be finite and nonnegative");
    if (!(spec.r_lo >= 0.0) || !(spec.r_hi > spec.r_lo) || spec.r_hi > grid.R_max())
        throw Error(ErrorCode::SpecInvalid, "support must satisfy 0 <= r_lo < r_hi <= R_max");
    if (spec.bumps < 1) throw Error(ErrorCode::SpecInvalid, "need at least one bump");
    if (spec.kind != PerturbationKind::Conformal && spec.r_lo <= 0.0)
        throw Error(ErrorCode::SpecInvalid, "only conformal perturbations may reach the origin");
    const double n1 = grid.n() - 1.0;
    RadialSymmetric2Tensor h = zero_tensor(grid);
    if (spec.amplitude == 0.0) return h;

    const auto s = random_bumps(grid, spec.r_lo, spec.r_hi, spec.bumps, spec.seed, 0x5eed);
    BumpProfile pa = s, pb = s;
    switch (spec.kind) {
        case PerturbationKind::Conformal: break;
        case PerturbationKind::TraceFree:
            pa.f *= -n1, pa.df *= -n1, pa.d2f *= -n1;
            break;
        case PerturbationKind::RandomCompact:
            pb = random_bumps(grid, spec.r_lo, spec.r_hi, spec.bumps, spec.seed, 0x5eee);
            break;
        case PerturbationKind::DivergenceFree: {
            const Vec& r = grid.r();
            const Vec t = r.array().tanh();
            const Vec sech2 = (1.0 - t.array().square()).matrix();
            pb.f = s.f + t.cwiseProduct(s.df) / n1;
            pb.df = s.df + (sech2.cwiseProduct(s.df) + t.cwiseProduct(s.d2f)) / n1;
            // Only the sup of b'' enters the normalization; a grid derivative suffices.
            pb.d2f = grid.ops().d1_even * pb.df;
            break;
        }
    }
    double norm = 0.0;
    for (const auto* p : {&pa, &pb})
        norm = std::max({norm, p->f.cwiseAbs().maxCoeff(), p->df.cwiseAbs().maxCoeff(), p->d2f.cwiseAbs().maxCoeff()});
    if (!(norm > 0.0)) throw Error(ErrorCode::SpecInvalid, "degenerate bump draw");
    h.a = pa.f * (spec.amplitude / norm);
    h.b = pb.f * (spec.amplitude / norm);
    return h;
}

RadialSymmetric2Tensor gaussian_divergence_free(const RadialGrid& grid, double width) {
    if (!(width > 0.0)) throw Error(ErrorCode::SpecInvalid, "width must be positive");
    const Vec& r = grid.r();
    RadialSymmetric2Tensor h = zero_tensor(grid);
    h.a = (-(r.array() / width).square()).exp().matrix();
    const Vec da = (-2.0 / (width * width) * r.array() * h.a.array()).matrix();
    h.b = h.a + (r.array().tanh() * da.array()).matrix() / (grid.n() - 1.0);
    return h;
}

double sup_norm(const RadialSymmetric2Tensor& h) {
    return std::max(h.a.cwiseAbs().maxCoeff(), h.b.cwiseAbs().maxCoeff());
}

double c2_norm(const RadialSymmetric2Tensor& h) {
    const auto& ops = h.grid.ops();
    double out = sup_norm(h);
    for (const Vec* c : {&h.a, &h.b}) {
        out = std::max(out, (ops.d1_even * *c).cwiseAbs().maxCoeff());
        out = std::max(out, (ops.d2_even * *c).cwiseAbs().maxCoeff());
    }
    return out;
}

}  // namespace pelab
