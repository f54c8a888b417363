#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pelab/elliptic.hpp"
#include "pelab/flow.hpp"
#include "pelab/io.hpp"
#include "pelab/perturbation.hpp"

namespace pelab {

enum class Experiment { Curvature, Entropy, Mass, Flow, Spectrum, Loj };

const char* to_string(Experiment e);
Experiment experiment_from_string(const std::string& s);

struct GridSpec {
    int N = 800;
    double R_max = 30.0;
    int scheme = 4;
};

struct SpectrumSpec {
    std::string op = "einstein-trace-free";  // shifted-scalar | einstein | einstein-trace-free | einstein-pure-trace
    double shift = 1.0;                      // c, shifted-scalar only
    std::vector<double> R_max_values{10.0, 15.0, 20.0};
};

struct MassSpec {
    int sweep = 20;
};

struct LojSpec {
    int samples = 100;
    double radius = 0.1;
    std::uint64_t seed = 7;
    std::vector<std::string> functionals{"neg_square", "neg_quartic", "quadratic_quartic", "quadratic_cubic"};
};

struct ExperimentConfig {
    Experiment experiment = Experiment::Curvature;
    int n = 4;
    GridSpec grid;
    PerturbationSpec perturbation;
    // "c2" scales the perturbation to C2 norm = amplitude, "sup" to sup norm = amplitude.
    std::string perturbation_norm = "c2";
    FlowConfig flow;
    SolveOptions solver;
    SpectrumSpec spectrum;
    MassSpec mass;
    LojSpec loj;
    std::string output_dir = "out";
};

// Throws ConfigInvalid.
void validate(const ExperimentConfig& c);

// Accepts JSON (first non-blank character '{') or the TOML subset: [section] headers, key = value
// with numbers, "strings", booleans and flat arrays, '#' comments. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
Json toml_to_json(const std::string& text);

ExperimentConfig config_from_json(const Json& j);
Json to_json(const ExperimentConfig& c);

}  // namespace pelab
