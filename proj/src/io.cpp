#include "pelab/io.hpp"

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pelab/errors.hpp"

namespace pelab {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& s) {
    double x = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), x);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw Error(ErrorCode::IoError, "cannot parse number '" + s + "'");
    return x;
}

std::string columns_to_csv(const std::string& header, const Vec& r,
                           const std::vector<const Vec*>& cols) {
    std::string out = header + "\n";
    for (int k = 0; k < r.size(); ++k) {
        out += format_double(r(k));
        for (const Vec* c : cols) out += "," + format_double((*c)(k));
        out += "\n";
    }
    return out;
}

Vec json_vec(const Json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array())
        throw Error(ErrorCode::IoError, std::string("missing array '") + key + "'");
    const auto& arr = j[key];
    Vec v(arr.size());
    for (size_t i = 0; i < arr.size(); ++i) v(i) = arr[i].get<double>();
    return v;
}

}  // namespace

std::string metric_to_csv(const WarpedMetric& g) {
    return columns_to_csv("r,u,v", g.grid.r(), {&g.u, &g.v});
}

std::string tensor_to_csv(const RadialSymmetric2Tensor& h) {
    return columns_to_csv("r,a,b", h.grid.r(), {&h.a, &h.b});
}

std::string scalar_to_csv(const RadialScalarField& f) {
    return columns_to_csv("r,value", f.grid.r(), {&f.values});
}

WarpedMetric metric_from_csv(const std::string& text, const RadialGrid& grid) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "r,u,v")
        throw Error(ErrorCode::IoError, "expected header r,u,v");
    WarpedMetric g = hyperbolic_reference(grid);
    int k = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (k >= grid.size()) throw Error(ErrorCode::GridMismatch, "too many rows");
        std::istringstream row(line);
        std::string r, u, v;
        std::getline(row, r, ',');
        std::getline(row, u, ',');
        std::getline(row, v, ',');
        if (parse_double(r) != grid.r()(k))
            throw Error(ErrorCode::GridMismatch, "row " + std::to_string(k) + " has a different radius");
        g.u(k) = parse_double(u);
        g.v(k) = parse_double(v);
        ++k;
    }
    if (k != grid.size()) throw Error(ErrorCode::GridMismatch, "too few rows");
    return g;
}

Json metric_to_json(const WarpedMetric& g) {
    Json j;
    j["n"] = g.grid.n();
    j["R_max"] = g.grid.R_max();
    j["N"] = g.grid.size();
    j["scheme"] = g.grid.scheme();
    j["u"] = std::vector<double>(g.u.data(), g.u.data() + g.u.size());
    j["v"] = std::vector<double>(g.v.data(), g.v.data() + g.v.size());
    return j;
}

WarpedMetric metric_from_json(const Json& j) {
    try {
        const auto grid = RadialGrid::uniform(j.at("n").get<int>(), j.at("N").get<int>(),
                                              j.at("R_max").get<double>(), j.at("scheme").get<int>());
        WarpedMetric g{grid, json_vec(j, "u"), json_vec(j, "v")};
        require_finite(g);
        return g;
    } catch (const Json::exception& e) {
        throw Error(ErrorCode::IoError, e.what());
    }
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_double(row[i]);
        out += "\n";
    }
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp);
        out << content;
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp);
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "rename to " + path + ": " + ec.message());
}

std::string sha256_hex(const std::string& content) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(content.data(), content.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::IoError, "sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

}  // namespace pelab
