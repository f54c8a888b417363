#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pelab/config.hpp"

namespace pelab {

#ifndef PELAB_VERSION
#define PELAB_VERSION "unversioned"
#endif

struct OutputFile {
    std::string name;
    std::string sha256;
    std::size_t bytes = 0;
};

struct RunManifest {
    Json config;
    std::string version;
    double wall_time_s = 0.0;
    std::string verdict;  // "success", "numeric-failure" or "usage-error"
    int exit_code = 0;
    std::string message;
    Json diagnostics = Json::object();
    std::vector<OutputFile> files;
};

Json to_json(const RunManifest& m);

// Runs the experiment and writes its outputs and manifest.json into config.output_dir.
// Module errors are reported in the manifest: exit code 2 for numeric failures, 1 for
// ConfigInvalid and SpecInvalid. Everything but wall_time_s is deterministic in the config.
RunManifest run(const ExperimentConfig& config);

// ghat + h with h from the perturbation spec, rescaled when perturbation_norm is "sup".
WarpedMetric initial_metric(const ExperimentConfig& config, const RadialGrid& grid,
                            RadialSymmetric2Tensor* h_out = nullptr);

// Metric with scal + n(n-1) >= 0: ghat + generate_perturbation(spec) is conformally rescaled by
// solve_yamabe so that scal + n(n-1) equals a nonnegative bump of height spec.amplitude.
WarpedMetric scal_bounded_metric(const RadialGrid& grid, const PerturbationSpec& spec,
                                 const SolveOptions& opts = {});

struct MassSample {
    std::uint64_t seed = 0;
    double scal_dev_min = 0.0;  // min of scal + n(n-1)
    double m_vr = 0.0;
    double rv_bar = 0.0;  // after solve_yamabe to constant scal = -n(n-1)
    double m_vr_bar = 0.0;
};

std::vector<MassSample> mass_sweep(const ExperimentConfig& config, const RadialGrid& grid);
std::string mass_sweep_csv(const std::vector<MassSample>& rows);

AnalyticFunctional functional_by_name(const std::string& name);
// Closed-form exponent theta in |F - F(0)|^{2-theta} <= C |grad F|^2.
double expected_theta(const std::string& name);

}  // namespace pelab
