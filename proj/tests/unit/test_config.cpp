#include <string>

#include "doctest.h"
#include "pelab/config.hpp"
#include "pelab/errors.hpp"

using namespace pelab;

namespace {
std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConfigInvalid);
        return e.what();
    }
    FAIL("no error for: " << text);
    return {};
}
}  // namespace

TEST_CASE("TOML and JSON forms give the same config") {
    const std::string toml = R"(experiment = "flow"
n = 5  # dimension
output_dir = "runs/a"

[grid]
N = 600
R_max = 25.5

[perturbation]
kind = "tt"
amplitude = 2e-3
support = [0.5, 3.0]
seed = 42
norm = "sup"

[flow]
gauge = "entropy"
t_max = 10

[spectrum]
R_max_values = [8, 12.5]

[loj]
functionals = ["neg_square", "quadratic_cubic"]
)";
    const std::string json = R"({"experiment": "flow", "n": 5, "output_dir": "runs/a",
        "grid": {"N": 600, "R_max": 25.5},
        "perturbation": {"kind": "tt", "amplitude": 2e-3, "support": [0.5, 3.0], "seed": 42, "norm": "sup"},
        "flow": {"gauge": "entropy", "t_max": 10},
        "spectrum": {"R_max_values": [8, 12.5]},
        "loj": {"functionals": ["neg_square", "quadratic_cubic"]}})";
    const auto a = parse_config(toml);
    const auto b = parse_config(json);
    CHECK(to_json(a) == to_json(b));
    CHECK(a.experiment == Experiment::Flow);
    CHECK(a.n == 5);
    CHECK(a.grid.N == 600);
    CHECK(a.perturbation.kind == PerturbationKind::TraceFree);
    CHECK(a.perturbation.r_hi == 3.0);
    CHECK(a.perturbation.seed == 42);
    CHECK(a.perturbation_norm == "sup");
    CHECK(a.flow.gauge == Gauge::EntropyGradient);
    CHECK(a.spectrum.R_max_values == std::vector<double>{8.0, 12.5});
    CHECK(a.loj.functionals.size() == 2);
    CHECK(to_json(parse_config(to_json(a).dump())) == to_json(a));
}

TEST_CASE("defaults are valid") {
    CHECK_NOTHROW(validate(ExperimentConfig{}));
    CHECK(parse_config("experiment = \"curvature\"\n").grid.N == 800);
}

TEST_CASE("syntax errors carry the line number") {
    CHECK(message_of("experiment = \"flow\"\n\nn = \n").find("line 3") != std::string::npos);
    CHECK(message_of("experiment = \"flow\"\n[grid\n").find("line 2") != std::string::npos);
    CHECK(message_of("n = 4\nn = 5\n").find("line 2") != std::string::npos);
    CHECK(message_of("x = [1, 2\n").find("line 1") != std::string::npos);
}

TEST_CASE("unknown keys and sections are rejected") {
    CHECK(message_of("experiment = \"flow\"\nsteps = 3\n").find("steps") != std::string::npos);
    CHECK(message_of("experiment = \"flow\"\n[grid]\nM = 3\n").find("M") != std::string::npos);
    CHECK(message_of("experiment = \"flow\"\n[mesh]\nN = 3\n").find("mesh") != std::string::npos);
}

TEST_CASE("semantic validation") {
    message_of("experiment = \"flow\"\nn = 2\n");
    message_of("experiment = \"flow\"\n[grid]\nN = 8\n");
    message_of("experiment = \"flow\"\n[grid]\nscheme = 3\n");
    message_of("experiment = \"flow\"\n[perturbation]\nsupport = [4, 1]\n");
    message_of("experiment = \"flow\"\n[perturbation]\nnorm = \"l2\"\n");
    message_of("experiment = \"flow\"\n[flow]\ndt_init = 0\n");
    message_of("experiment = \"spectrum\"\n[spectrum]\nR_max_values = [20, 10]\n");
    message_of("experiment = \"spectrum\"\n[spectrum]\noperator = \"hodge\"\n");
    message_of("experiment = \"loj\"\n[loj]\nfunctionals = [\"cubic\"]\n");
    message_of("experiment = \"bake\"\n");
    message_of("experiment = \"flow\"\nn = \"four\"\n");
}
