#pragma once

#include <cstdint>
#include <string>

#include "pelab/geometry.hpp"

namespace pelab {

enum class PerturbationKind {
    Conformal,       // a = b
    TraceFree,       // a = -(n-1) b
    RandomCompact,   // independent bump sums in a and b
    DivergenceFree,  // b = a + tanh(r) a' / (n-1), divergence-free against the hyperbolic metric
};

const char* to_string(PerturbationKind k);
PerturbationKind perturbation_kind_from_string(const std::string& s);

struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::RandomCompact;
    // max over both components of sup |h|, |h'|, |h''|.
    double amplitude = 1e-2;
    double r_lo = 0.5;
    double r_hi = 4.0;
    std::uint64_t seed = 7;
    int bumps = 3;
};

// Values and first two derivatives of a bump sum at the nodes.
struct BumpProfile {
    Vec f, df, d2f;
};

// Sum of weighted exp(-1/(1-x^2)) bumps drawn from (seed, stream), supported in [r_lo, r_hi].
// The mirror image about r = 0 is added so the profile extends evenly.
BumpProfile random_bumps(const RadialGrid& grid, double r_lo, double r_hi, int bumps, std::uint64_t seed,
                         std::uint64_t stream);

// Deterministic in the spec; throws SpecInvalid on a bad spec. Components a, b are frame
// components against the hyperbolic metric. Kinds other than conformal need r_lo > 0 so
// that a(0) = b(0).
RadialSymmetric2Tensor generate_perturbation(const PerturbationSpec& spec, const RadialGrid& grid);

// Divergence-free tensor from the Gaussian profile a = exp(-(r/width)^2), b = a + tanh(r) a'/(n-1).
// Its spectral content decays fast, unlike bump sums, whose steep flanks stay under-resolved.
RadialSymmetric2Tensor gaussian_divergence_free(const RadialGrid& grid, double width);

// max over both components of sup |h|, |h'|, |h''| using grid derivatives.
double c2_norm(const RadialSymmetric2Tensor& h);
double sup_norm(const RadialSymmetric2Tensor& h);

}  // namespace pelab
