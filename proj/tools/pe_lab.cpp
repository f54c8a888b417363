#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "pelab/errors.hpp"
#include "pelab/experiments.hpp"

int main(int argc, char** argv) {
    using namespace pelab;
    CLI::App app{"Numerical experiments on radial perturbations of hyperbolic space"};
    app.set_version_flag("--version", PELAB_VERSION);
    std::string experiment, config_path, out;
    std::optional<int> n, N;
    std::optional<double> r_max;
    std::optional<std::uint64_t> seed;
    app.add_option("experiment", experiment, "curvature | entropy | mass | flow | spectrum | loj")->required();
    app.add_option("--config", config_path, "TOML or JSON experiment file")->check(CLI::ExistingFile);
    app.add_option("--n", n, "dimension");
    app.add_option("--N", N, "grid nodes");
    app.add_option("--Rmax", r_max, "outer radius");
    app.add_option("--seed", seed, "perturbation and sampling seed");
    app.add_option("--out", out, "output directory");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    ExperimentConfig cfg;
    try {
        Json j = config_path.empty() ? Json::object() : Json();
        if (!config_path.empty()) {
            const std::string text = read_file(config_path);
            const auto first = text.find_first_not_of(" \t\r\n");
            j = first != std::string::npos && text[first] == '{' ? Json::parse(text) : toml_to_json(text);
        }
        if (j.contains("experiment") && j["experiment"] != experiment)
            throw Error(ErrorCode::ConfigInvalid, "config is for experiment " + j["experiment"].dump());
        j["experiment"] = experiment;
        if (n) j["n"] = *n;
        if (N) j["grid"]["N"] = *N;
        if (r_max) j["grid"]["R_max"] = *r_max;
        if (seed) {
            j["perturbation"]["seed"] = *seed;
            j["loj"]["seed"] = *seed;
        }
        if (!out.empty()) j["output_dir"] = out;
        cfg = config_from_json(j);
    } catch (const Error& e) {
        std::cerr << "pe-lab: " << e.what() << "\n";
        return 1;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "pe-lab: malformed config: " << e.what() << "\n";
        return 1;
    }

    const RunManifest m = run(cfg);
    std::cout << to_string(cfg.experiment) << ": " << m.verdict << " (" << format_double(m.wall_time_s) << " s)\n";
    for (const auto& f : m.files) std::cout << "  " << cfg.output_dir << "/" << f.name << "\n";
    if (!m.message.empty()) std::cerr << "pe-lab: " << m.message << "\n";
    return m.exit_code;
}
