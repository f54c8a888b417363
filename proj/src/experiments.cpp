#include "pelab/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>

#include "pelab/errors.hpp"
#include "pelab/functionals.hpp"
#include "pelab/lojasiewicz.hpp"

namespace pelab {

Json to_json(const RunManifest& m) {
    Json files = Json::array();
    for (const auto& f : m.files) files.push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
    return Json{{"config", m.config},           {"version", m.version},     {"wall_time_s", m.wall_time_s},
                {"verdict", m.verdict},         {"exit_code", m.exit_code}, {"message", m.message},
                {"diagnostics", m.diagnostics}, {"files", files}};
}

WarpedMetric initial_metric(const ExperimentConfig& config, const RadialGrid& grid, RadialSymmetric2Tensor* h_out) {
    RadialSymmetric2Tensor h = generate_perturbation(config.perturbation, grid);
    if (config.perturbation_norm == "sup" && config.perturbation.amplitude > 0.0) {
        const double s = config.perturbation.amplitude / sup_norm(h);
        h.a *= s;
        h.b *= s;
    }
    if (h_out) *h_out = h;
    return add_tensor(hyperbolic_reference(grid), h);
}

WarpedMetric scal_bounded_metric(const RadialGrid& grid, const PerturbationSpec& spec, const SolveOptions& opts) {
    const WarpedMetric g0 = add_tensor(hyperbolic_reference(grid), generate_perturbation(spec, grid));
    Vec target = Vec::Zero(grid.size());
    if (spec.amplitude > 0.0) {
        // A single bump keeps one sign, so its modulus stays smooth.
        const Vec b = random_bumps(grid, spec.r_lo, spec.r_hi, 1, spec.seed, 0x5ca1).f.cwiseAbs();
        target = b * (spec.amplitude / b.maxCoeff());
    }
    return solve_yamabe(g0, opts, &target).gbar;
}

std::vector<MassSample> mass_sweep(const ExperimentConfig& config, const RadialGrid& grid) {
    const WarpedMetric ghat = hyperbolic_reference(grid);
    std::vector<MassSample> rows;
    for (int i = 0; i < config.mass.sweep; ++i) {
        PerturbationSpec spec = config.perturbation;
        spec.seed = config.perturbation.seed + static_cast<std::uint64_t>(i);
        const WarpedMetric g = scal_bounded_metric(grid, spec, config.solver);
        MassSample s;
        s.seed = spec.seed;
        s.scal_dev_min = curvature(g).scal_dev.minCoeff();
        s.m_vr = volume_renormalized_mass(g, ghat);
        const auto bar = solve_yamabe(g, config.solver);
        s.rv_bar = renormalized_volume_limit(bar.gbar, ghat).value;
        s.m_vr_bar = volume_renormalized_mass(bar.gbar, ghat);
        rows.push_back(s);
    }
    return rows;
}

std::string mass_sweep_csv(const std::vector<MassSample>& rows) {
    std::string out = "seed,scal_dev_min,m_vr,rv_bar,m_vr_bar\n";
    for (const auto& r : rows)
        out += std::to_string(r.seed) + "," + format_double(r.scal_dev_min) + "," + format_double(r.m_vr) + "," +
               format_double(r.rv_bar) + "," + format_double(r.m_vr_bar) + "\n";
    return out;
}

AnalyticFunctional functional_by_name(const std::string& name) {
    if (name == "neg_square") return neg_square(2);
    if (name == "neg_quartic") return neg_quartic(2);
    if (name == "quadratic_quartic") return quadratic_quartic();
    if (name == "quadratic_cubic") return quadratic_cubic();
    throw Error(ErrorCode::ConfigInvalid, "unknown functional '" + name + "'");
}

double expected_theta(const std::string& name) {
    if (name == "neg_square") return 1.0;
    if (name == "neg_quartic" || name == "quadratic_quartic") return 0.5;
    // Along x1 = 0: |x2|^{3(2 - theta)} <= C 9 x2^4. This is 1/3 in the |F|^{1-theta'} <= C|grad F| convention.
    if (name == "quadratic_cubic") return 2.0 / 3.0;
    throw Error(ErrorCode::ConfigInvalid, "unknown functional '" + name + "'");
}

namespace {

OperatorKind operator_kind(const std::string& s) {
    if (s == "shifted-scalar") return OperatorKind::ShiftedScalar;
    if (s == "einstein") return OperatorKind::Einstein;
    if (s == "einstein-trace-free") return OperatorKind::EinsteinTraceFree;
    return OperatorKind::EinsteinPureTrace;
}

double sup(const Vec& x) { return x.cwiseAbs().maxCoeff(); }

class Outputs {
public:
    explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

    void write(const std::string& name, const std::string& content) {
        write_file_atomic((std::filesystem::path(dir_) / name).string(), content);
        files_.push_back({name, sha256_hex(content), content.size()});
    }
    std::vector<OutputFile>& files() { return files_; }

private:
    std::string dir_;
    std::vector<OutputFile> files_;
};

// Returns false on a numeric verdict failure.
bool run_curvature(const ExperimentConfig& c, const RadialGrid& grid, Outputs& out, Json& diag) {
    const auto cd = curvature(initial_metric(c, grid));
    std::vector<std::vector<double>> rows;
    for (int k = 0; k < grid.size(); ++k)
        rows.push_back({grid.r()(k), cd.scal_dev(k), cd.ric_rr_dev(k), cd.ric_tt_dev(k), cd.K_rad_dev(k),
                        cd.K_tan_dev(k)});
    out.write("curvature.csv",
              csv_table({"r", "scal_dev", "ric_rr_dev", "ric_tt_dev", "K_rad_dev", "K_tan_dev"}, rows));
    diag["sup_scal_dev"] = sup(cd.scal_dev);
    diag["sup_ric_dev"] = std::max(sup(cd.ric_rr_dev), sup(cd.ric_tt_dev));
    diag["sup_K_dev"] = std::max(sup(cd.K_rad_dev), sup(cd.K_tan_dev));
    return true;
}

bool run_entropy(const ExperimentConfig& c, const RadialGrid& grid, Outputs& out, Json& diag) {
    const WarpedMetric g = initial_metric(c, grid);
    const auto rep = functional_report(g, hyperbolic_reference(grid), c.solver);
    out.write("functionals.json", to_json(rep).dump(2) + "\n");
    out.write("radius_table.csv", radius_table_csv(rep));
    diag["mu"] = rep.mu;
    diag["m_vr"] = rep.m_vr.value;
    diag["s"] = rep.s_value.value;
    diag["w"] = rep.w_value.value;
    diag["limit_residual"] = std::max({rep.m_vr.residual, rep.s_value.residual, rep.w_value.residual});
    return true;
}

bool run_mass(const ExperimentConfig& c, const RadialGrid& grid, Outputs& out, Json& diag) {
    const auto rows = mass_sweep(c, grid);
    out.write("mass_sweep.csv", mass_sweep_csv(rows));
    double min_m = INFINITY, min_rv = INFINITY, max_drop = -INFINITY, min_scal = INFINITY;
    for (const auto& r : rows) {
        min_m = std::min(min_m, r.m_vr);
        min_rv = std::min(min_rv, r.rv_bar);
        max_drop = std::max(max_drop, r.m_vr_bar - r.m_vr);
        min_scal = std::min(min_scal, r.scal_dev_min);
    }
    const Json summary{{"samples", rows.size()},
                       {"min_scal_dev", min_scal},
                       {"min_m_vr", min_m},
                       {"min_rv_bar", min_rv},
                       {"max_m_vr_bar_minus_m_vr", max_drop}};
    out.write("functionals.json", summary.dump(2) + "\n");
    diag = summary;
    constexpr double tol = 1e-8;
    return min_m >= -tol && min_rv >= -tol && max_drop <= tol;
}

bool run_flow_experiment(const ExperimentConfig& c, const RadialGrid& grid, Outputs& out, Json& diag) {
    FlowConfig fc = c.flow;
    fc.solver = c.solver;
    const auto traj = run_flow(initial_metric(c, grid), fc);
    out.write("trajectory.csv", trajectory_csv(traj));
    const Json j = to_json(traj);
    out.write("functionals.json", j.dump(2) + "\n");
    diag = j;
    return traj.verdict == Verdict::Converged;
}

bool run_spectrum(const ExperimentConfig& c, const RadialGrid& grid, Outputs& out, Json& diag) {
    const OperatorKind kind = operator_kind(c.spectrum.op);
    std::vector<std::vector<double>> rows;
    const double h = grid.R_max() / grid.size();
    for (double R : c.spectrum.R_max_values) {
        // Same spacing at every radius, so that only the domain changes.
        const int N = std::max(16, static_cast<int>(std::lround(R / h)));
        const auto gR = RadialGrid::uniform(c.n, N, R, c.grid.scheme);
        const auto e = lowest_eigenvalue(kind, hyperbolic_reference(gR), c.solver, c.spectrum.shift);
        rows.push_back({R, static_cast<double>(N), e.lambda_min, static_cast<double>(e.iterations)});
    }
    out.write("spectrum.csv", csv_table({"R_max", "N", "lambda_min", "iterations"}, rows));

    const bool scalar = kind == OperatorKind::ShiftedScalar;
    const auto ind = scalar ? indicial_roots(c.n, c.spectrum.shift, 0, 0.0)
                            : indicial_roots(c.n, -2.0, tensor_weight, tensor_i0(c.n));
    Json lam = Json::array();
    for (const auto& r : rows) lam.push_back(r[2]);
    const Json j{{"operator", c.spectrum.op},
                 {"lambda_min", lam},
                 {"indicial",
                  {{"c", ind.c},
                   {"weight_r", ind.weight_r},
                   {"i0", ind.i0},
                   {"imaginary", ind.imaginary},
                   {"radius", ind.radius},
                   {"roots", {ind.roots[0].real(), ind.roots[1].real()}}}}};
    out.write("functionals.json", j.dump(2) + "\n");
    diag = j;
    return true;
}

bool run_loj(const ExperimentConfig& c, Outputs& out, Json& diag) {
    std::string csv = "functional,lemma,sample,lhs,rhs,ratio\n";
    Json fits = Json::object();
    bool ok = true;
    for (const auto& name : c.loj.functionals) {
        const auto F = functional_by_name(name);
        const auto samples = sample_ball(F.dim, c.loj.samples, std::min(c.loj.radius, F.reduction_radius), c.loj.seed);
        const auto red = reduce(F, samples);
        for (const auto& ck : red.lemma_checks)
            csv += name + "," + ck.lemma + "," + std::to_string(ck.sample) + "," + format_double(ck.lhs) + "," +
                   format_double(ck.rhs) + "," + format_double(ck.ratio) + "\n";
        Json lemmas = Json::object();
        for (const auto& s : red.summary) {
            lemmas[s.lemma] = Json{{"worst_ratio", s.worst_ratio}, {"finite", s.finite}};
            ok = ok && s.finite;
        }
        fits[name] = Json{{"theta", red.theta},
                          {"c", red.c},
                          {"kernel_dim", red.kernel.basis.cols()},
                          {"condition_d0n", red.kernel.condition_d0n},
                          {"lemmas", lemmas}};
    }
    out.write("loj_checks.csv", csv);
    out.write("functionals.json", fits.dump(2) + "\n");
    diag = fits;
    return ok;
}

}  // namespace

RunManifest run(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest m;
    m.config = to_json(config);
    m.version = PELAB_VERSION;
    Outputs out(config.output_dir);
    try {
        validate(config);
        std::filesystem::create_directories(config.output_dir);
        const auto grid = RadialGrid::uniform(config.n, config.grid.N, config.grid.R_max, config.grid.scheme);
        bool ok = true;
        switch (config.experiment) {
            case Experiment::Curvature: ok = run_curvature(config, grid, out, m.diagnostics); break;
            case Experiment::Entropy: ok = run_entropy(config, grid, out, m.diagnostics); break;
            case Experiment::Mass: ok = run_mass(config, grid, out, m.diagnostics); break;
            case Experiment::Flow: ok = run_flow_experiment(config, grid, out, m.diagnostics); break;
            case Experiment::Spectrum: ok = run_spectrum(config, grid, out, m.diagnostics); break;
            case Experiment::Loj: ok = run_loj(config, out, m.diagnostics); break;
        }
        m.verdict = ok ? "success" : "numeric-failure";
        m.exit_code = ok ? 0 : 2;
    } catch (const Error& e) {
        const bool usage = e.code() == ErrorCode::ConfigInvalid || e.code() == ErrorCode::SpecInvalid ||
                           e.code() == ErrorCode::IoError;
        m.verdict = usage ? "usage-error" : "numeric-failure";
        m.exit_code = usage ? 1 : 2;
        m.message = e.what();
    } catch (const std::filesystem::filesystem_error& e) {
        m.verdict = "usage-error";
        m.exit_code = 1;
        m.message = e.what();
    }
    m.files = out.files();
    m.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        write_file_atomic((std::filesystem::path(config.output_dir) / "manifest.json").string(),
                          to_json(m).dump(2) + "\n");
    } catch (const Error& e) {
        if (m.exit_code == 0) {
            m.verdict = "usage-error";
            m.exit_code = 1;
            m.message = e.what();
        }
    }
    return m;
}

}  // namespace pelab
