#include "pelab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>

#include "pelab/errors.hpp"
#include "pelab/lojasiewicz.hpp"

namespace pelab {

const char* to_string(Experiment e) {
    switch (e) {
        case Experiment::Curvature: return "curvature";
        case Experiment::Entropy: return "entropy";
        case Experiment::Mass: return "mass";
        case Experiment::Flow: return "flow";
        case Experiment::Spectrum: return "spectrum";
        case Experiment::Loj: return "loj";
    }
    return "?";
}

Experiment experiment_from_string(const std::string& s) {
    for (auto e : {Experiment::Curvature, Experiment::Entropy, Experiment::Mass, Experiment::Flow,
                   Experiment::Spectrum, Experiment::Loj})
        if (s == to_string(e)) return e;
    throw Error(ErrorCode::ConfigInvalid, "unknown experiment '" + s + "'");
}

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorCode::ConfigInvalid, msg); }

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Text before a '#' that is not inside a string.
std::string strip_comment(const std::string& s) {
    bool in_str = false;
    for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && in_str) {
            ++i;
            continue;
        }
        if (s[i] == '"') in_str = !in_str;
        if (s[i] == '#' && !in_str) return s.substr(0, i);
    }
    return s;
}

Json parse_scalar(const std::string& raw, int line) {
    const std::string v = trim(raw);
    const std::string where = "line " + std::to_string(line) + ": ";
    if (v.empty()) bad(where + "missing value");
    if (v.front() == '"') {
        if (v.size() < 2 || v.back() != '"') bad(where + "unterminated string");
        std::string out;
        for (size_t i = 1; i + 1 < v.size(); ++i) {
            if (v[i] == '\\' && i + 2 < v.size()) ++i;
            else if (v[i] == '"') bad(where + "stray quote");
            out += v[i];
        }
        return out;
    }
    if (v == "true") return true;
    if (v == "false") return false;
    const bool is_float = v.find_first_of(".eE") != std::string::npos || v == "inf" || v == "nan";
    if (!is_float) {
        long long i = 0;
        const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), i);
        if (ec == std::errc() && p == v.data() + v.size()) return i;
    }
    double d = 0.0;
    const char* first = v.data() + (v.front() == '+' ? 1 : 0);
    const auto [p, ec] = std::from_chars(first, v.data() + v.size(), d);
    if (ec != std::errc() || p != v.data() + v.size()) bad(where + "cannot parse value '" + v + "'");
    return d;
}

Json parse_value(const std::string& raw, int line) {
    const std::string v = trim(raw);
    if (v.empty() || v.front() != '[') return parse_scalar(v, line);
    if (v.back() != ']') bad("line " + std::to_string(line) + ": unterminated array");
    Json arr = Json::array();
    const std::string body = v.substr(1, v.size() - 2);
    std::string cur;
    bool in_str = false;
    for (size_t i = 0; i < body.size(); ++i) {
        const char c = body[i];
        if (c == '"' && (i == 0 || body[i - 1] != '\\')) in_str = !in_str;
        if (c == ',' && !in_str) {
            arr.push_back(parse_scalar(cur, line));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) arr.push_back(parse_scalar(cur, line));
    return arr;
}

void check_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> known) {
    if (!obj.is_object()) bad(where + " must be a table");
    for (const auto& [k, v] : obj.items()) {
        if (std::none_of(known.begin(), known.end(), [&](const char* s) { return k == s; }))
            bad("unknown key '" + (where.empty() ? k : where + "." + k) + "'");
    }
}

double num(const Json& v, const std::string& key) {
    if (!v.is_number()) bad(key + " must be a number");
    return v.get<double>();
}

long long integer(const Json& v, const std::string& key) {
    if (v.is_number_integer()) return v.get<long long>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    bad(key + " must be an integer");
}

std::string str(const Json& v, const std::string& key) {
    if (!v.is_string()) bad(key + " must be a string");
    return v.get<std::string>();
}

}  // namespace

Json toml_to_json(const std::string& text) {
    Json root = Json::object();
    Json* cur = &root;
    std::string section;
    int line_no = 0;
    size_t pos = 0;
    while (pos <= text.size()) {
        const size_t nl = text.find('\n', pos);
        const std::string line = trim(strip_comment(text.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos)));
        pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(line_no) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') bad(where + "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty() || section.find_first_of(" .\"") != std::string::npos)
                bad(where + "unsupported section name '" + section + "'");
            if (root.contains(section)) bad(where + "duplicate section '" + section + "'");
            root[section] = Json::object();
            cur = &root[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) bad(where + "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        if (key.empty() || key.find_first_of(" .\"") != std::string::npos) bad(where + "unsupported key '" + key + "'");
        if (cur->contains(key)) bad(where + "duplicate key '" + key + "'");
        (*cur)[key] = parse_value(line.substr(eq + 1), line_no);
    }
    return root;
}

ExperimentConfig config_from_json(const Json& j) {
    check_keys(j, "", {"experiment", "n", "grid", "perturbation", "flow", "solver", "spectrum", "mass", "loj",
                       "output_dir"});
    ExperimentConfig c;
    if (!j.contains("experiment")) bad("missing key 'experiment'");
    c.experiment = experiment_from_string(str(j["experiment"], "experiment"));
    if (j.contains("n")) c.n = static_cast<int>(integer(j["n"], "n"));
    if (j.contains("output_dir")) c.output_dir = str(j["output_dir"], "output_dir");
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        check_keys(g, "grid", {"N", "R_max", "scheme"});
        if (g.contains("N")) c.grid.N = static_cast<int>(integer(g["N"], "grid.N"));
        if (g.contains("R_max")) c.grid.R_max = num(g["R_max"], "grid.R_max");
        if (g.contains("scheme")) c.grid.scheme = static_cast<int>(integer(g["scheme"], "grid.scheme"));
    }
    if (j.contains("perturbation")) {
        const auto& p = j["perturbation"];
        check_keys(p, "perturbation", {"kind", "amplitude", "support", "seed", "bumps", "norm"});
        try {
            if (p.contains("kind")) c.perturbation.kind = perturbation_kind_from_string(str(p["kind"], "perturbation.kind"));
        } catch (const Error& e) {
            bad(e.what());
        }
        if (p.contains("amplitude")) c.perturbation.amplitude = num(p["amplitude"], "perturbation.amplitude");
        if (p.contains("support")) {
            const auto& s = p["support"];
            if (!s.is_array() || s.size() != 2) bad("perturbation.support must be [r_lo, r_hi]");
            c.perturbation.r_lo = num(s[0], "perturbation.support");
            c.perturbation.r_hi = num(s[1], "perturbation.support");
        }
        if (p.contains("seed")) {
            const long long s = integer(p["seed"], "perturbation.seed");
            if (s < 0) bad("perturbation.seed must be nonnegative");
            c.perturbation.seed = static_cast<std::uint64_t>(s);
        }
        if (p.contains("bumps")) c.perturbation.bumps = static_cast<int>(integer(p["bumps"], "perturbation.bumps"));
        if (p.contains("norm")) c.perturbation_norm = str(p["norm"], "perturbation.norm");
    }
    if (j.contains("flow")) {
        const auto& f = j["flow"];
        check_keys(f, "flow", {"gauge", "dt_init", "dt_max", "t_max", "cfl", "conv_tol", "escape_radius", "diag_every",
                               "max_halvings", "grow_after"});
        if (f.contains("gauge")) c.flow.gauge = gauge_from_string(str(f["gauge"], "flow.gauge"));
        if (f.contains("dt_init")) c.flow.dt_init = num(f["dt_init"], "flow.dt_init");
        if (f.contains("dt_max")) c.flow.dt_max = num(f["dt_max"], "flow.dt_max");
        if (f.contains("t_max")) c.flow.t_max = num(f["t_max"], "flow.t_max");
        if (f.contains("cfl")) c.flow.cfl = num(f["cfl"], "flow.cfl");
        if (f.contains("conv_tol")) c.flow.conv_tol = num(f["conv_tol"], "flow.conv_tol");
        if (f.contains("escape_radius")) c.flow.escape_radius = num(f["escape_radius"], "flow.escape_radius");
        if (f.contains("diag_every")) c.flow.diag_every = static_cast<int>(integer(f["diag_every"], "flow.diag_every"));
        if (f.contains("max_halvings"))
            c.flow.max_halvings = static_cast<int>(integer(f["max_halvings"], "flow.max_halvings"));
        if (f.contains("grow_after")) c.flow.grow_after = static_cast<int>(integer(f["grow_after"], "flow.grow_after"));
    }
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        check_keys(s, "solver", {"tol", "max_iter", "damping"});
        if (s.contains("tol")) c.solver.tol = num(s["tol"], "solver.tol");
        if (s.contains("max_iter")) c.solver.max_iter = static_cast<int>(integer(s["max_iter"], "solver.max_iter"));
        if (s.contains("damping")) c.solver.damping = num(s["damping"], "solver.damping");
    }
    c.flow.solver = c.solver;
    if (j.contains("spectrum")) {
        const auto& s = j["spectrum"];
        check_keys(s, "spectrum", {"operator", "shift", "R_max_values"});
        if (s.contains("operator")) c.spectrum.op = str(s["operator"], "spectrum.operator");
        if (s.contains("shift")) c.spectrum.shift = num(s["shift"], "spectrum.shift");
        if (s.contains("R_max_values")) {
            if (!s["R_max_values"].is_array()) bad("spectrum.R_max_values must be an array");
            c.spectrum.R_max_values.clear();
            for (const auto& v : s["R_max_values"]) c.spectrum.R_max_values.push_back(num(v, "spectrum.R_max_values"));
        }
    }
    if (j.contains("mass")) {
        const auto& m = j["mass"];
        check_keys(m, "mass", {"sweep"});
        if (m.contains("sweep")) c.mass.sweep = static_cast<int>(integer(m["sweep"], "mass.sweep"));
    }
    if (j.contains("loj")) {
        const auto& l = j["loj"];
        check_keys(l, "loj", {"samples", "radius", "seed", "functionals"});
        if (l.contains("samples")) c.loj.samples = static_cast<int>(integer(l["samples"], "loj.samples"));
        if (l.contains("radius")) c.loj.radius = num(l["radius"], "loj.radius");
        if (l.contains("seed")) {
            const long long s = integer(l["seed"], "loj.seed");
            if (s < 0) bad("loj.seed must be nonnegative");
            c.loj.seed = static_cast<std::uint64_t>(s);
        }
        if (l.contains("functionals")) {
            if (!l["functionals"].is_array()) bad("loj.functionals must be an array");
            c.loj.functionals.clear();
            for (const auto& v : l["functionals"]) c.loj.functionals.push_back(str(v, "loj.functionals"));
        }
    }
    validate(c);
    return c;
}

void validate(const ExperimentConfig& c) {
    if (c.n < 3) bad("n must be at least 3");
    if (c.grid.N < 16) bad("grid.N must be at least 16");
    if (!(c.grid.R_max > 0.0) || !std::isfinite(c.grid.R_max)) bad("grid.R_max must be positive");
    if (c.grid.scheme != 2 && c.grid.scheme != 4) bad("grid.scheme must be 2 or 4");
    const auto& p = c.perturbation;
    if (!(p.amplitude >= 0.0) || !std::isfinite(p.amplitude)) bad("perturbation.amplitude must be nonnegative");
    if (!(p.r_lo >= 0.0) || !(p.r_hi > p.r_lo) || p.r_hi > c.grid.R_max)
        bad("perturbation.support must satisfy 0 <= r_lo < r_hi <= R_max");
    if (p.bumps < 1) bad("perturbation.bumps must be positive");
    if (c.perturbation_norm != "c2" && c.perturbation_norm != "sup") bad("perturbation.norm must be c2 or sup");
    validate(c.flow);
    if (!(c.solver.tol > 0.0) || c.solver.max_iter < 1 || !(c.solver.damping > 0.0 && c.solver.damping < 1.0))
        bad("solver needs tol > 0, max_iter >= 1 and damping in (0, 1)");
    static const std::set<std::string> ops{"shifted-scalar", "einstein", "einstein-trace-free", "einstein-pure-trace"};
    if (!ops.count(c.spectrum.op)) bad("unknown spectrum.operator '" + c.spectrum.op + "'");
    if (c.spectrum.R_max_values.empty()) bad("spectrum.R_max_values must not be empty");
    for (size_t i = 0; i < c.spectrum.R_max_values.size(); ++i) {
        const double R = c.spectrum.R_max_values[i];
        if (!(R > 0.0) || (i > 0 && !(R > c.spectrum.R_max_values[i - 1])))
            bad("spectrum.R_max_values must be positive and increasing");
    }
    if (c.mass.sweep < 1) bad("mass.sweep must be positive");
    if (c.loj.samples < 10) bad("loj.samples must be at least 10");
    if (!(c.loj.radius > 0.0)) bad("loj.radius must be positive");
    static const std::set<std::string> fns{"neg_square", "neg_quartic", "quadratic_quartic", "quadratic_cubic"};
    if (c.loj.functionals.empty()) bad("loj.functionals must not be empty");
    for (const auto& f : c.loj.functionals)
        if (!fns.count(f)) bad("unknown functional '" + f + "'");
    if (c.output_dir.empty()) bad("output_dir must not be empty");
}

ExperimentConfig parse_config(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        Json j;
        try {
            j = Json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            bad(std::string("malformed JSON: ") + e.what());
        }
        return config_from_json(j);
    }
    return config_from_json(toml_to_json(text));
}

ExperimentConfig load_config(const std::string& path) {
    std::string text;
    try {
        text = read_file(path);
    } catch (const Error& e) {
        bad(std::string("cannot read config: ") + e.what());
    }
    return parse_config(text);
}

Json to_json(const ExperimentConfig& c) {
    Json funcs = Json::array();
    for (const auto& f : c.loj.functionals) funcs.push_back(f);
    return Json{
        {"experiment", to_string(c.experiment)},
        {"n", c.n},
        {"grid", {{"N", c.grid.N}, {"R_max", c.grid.R_max}, {"scheme", c.grid.scheme}}},
        {"perturbation",
         {{"kind", to_string(c.perturbation.kind)},
          {"amplitude", c.perturbation.amplitude},
          {"support", {c.perturbation.r_lo, c.perturbation.r_hi}},
          {"seed", c.perturbation.seed},
          {"bumps", c.perturbation.bumps},
          {"norm", c.perturbation_norm}}},
        {"flow", to_json(c.flow)},
        {"solver", {{"tol", c.solver.tol}, {"max_iter", c.solver.max_iter}, {"damping", c.solver.damping}}},
        {"spectrum", {{"operator", c.spectrum.op}, {"shift", c.spectrum.shift}, {"R_max_values", c.spectrum.R_max_values}}},
        {"mass", {{"sweep", c.mass.sweep}}},
        {"loj", {{"samples", c.loj.samples}, {"radius", c.loj.radius}, {"seed", c.loj.seed}, {"functionals", funcs}}},
        {"output_dir", c.output_dir},
    };
}

}  // namespace pelab
