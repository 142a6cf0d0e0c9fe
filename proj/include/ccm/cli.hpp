#pragma once

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <openssl/evp.h>

#include "ccm/flows.hpp"
#include "ccm/state_io.hpp"

namespace ccm::cli {

inline constexpr const char* version = "0.1.0";
inline constexpr const char* output_dir_env = "CCMLAB_OUTPUT_DIR";

enum Exit { Ok = 0, Usage = 1, VerificationFailure = 2, NumericalFailure = 3 };

// Relative paths land in $CCMLAB_OUTPUT_DIR when it is set.
inline std::string resolve_output(const std::string& path) {
    if (path.empty() || path == "-") return path;
    std::filesystem::path p(path);
    const char* dir = std::getenv(output_dir_env);
    if (p.is_relative() && dir && *dir) p = std::filesystem::path(dir) / p;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    return p.string();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

inline std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 failed");
    std::ostringstream s;
    for (unsigned int i = 0; i < len; ++i) s << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return s.str();
}

// Shortest round-trip formatting; NaN and infinities are written as nan, inf, -inf.
inline std::string csv_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream s;
    s << std::setprecision(std::numeric_limits<double>::max_digits10) << x;
    return s.str();
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;

    std::string str() const {
        std::ostringstream s;
        for (size_t c = 0; c < header.size(); ++c) s << (c ? "," : "") << header[c];
        s << '\n';
        const size_t rows = columns.empty() ? 0 : columns.front().size();
        for (size_t r = 0; r < rows; ++r) {
            for (size_t c = 0; c < columns.size(); ++c) s << (c ? "," : "") << csv_number(columns[c][r]);
            s << '\n';
        }
        return s.str();
    }
};

inline double parse_csv_number(const std::string& t) {
    if (t == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (t == "inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument("bad number: " + t);
    return v;
}

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    auto split = [](const std::string& l) {
        std::vector<std::string> out;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    if (!std::getline(in, line)) throw std::invalid_argument("empty csv");
    t.header = split(line);
    t.columns.assign(t.header.size(), {});
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw std::invalid_argument("csv row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                                        " cells, header has " + std::to_string(t.header.size()));
        for (size_t c = 0; c < cells.size(); ++c) t.columns[c].push_back(parse_csv_number(cells[c]));
    }
    return t;
}

inline const std::vector<std::string>& monitor_columns() {
    static const std::vector<std::string> cols{"t",  "mass", "momentum", "hamiltonian", "beta",
                                               "e2", "e3",   "equi",     "tail",        "lax_residual"};
    return cols;
}

inline CsvTable monitor_table(const TrajectoryRecord& r) {
    const Monitors& m = r.monitors;
    return {monitor_columns(),
            {r.times, m.mass, m.momentum, m.hamiltonian, m.beta, m.e2, m.e3, m.equi, m.tail, m.lax_residual}};
}

// JSON has no NaN; non-finite monitor values are written as null.
inline json number_array(const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(std::isfinite(x) ? json(x) : json(nullptr));
    return a;
}

inline json flow_spec_to_json(const FlowSpec& s) {
    return {{"flow", s.field_name()},         {"geometry", geometry_to_json(s.geo)},
            {"sign", to_string(s.sign)},      {"dt", s.dt},
            {"t_final", s.t_final},           {"monitor_stride", s.monitor_stride},
            {"probe_kappa", s.probe_kappa},   {"probe_varkappa", s.probe_varkappa},
            {"monitor_lax", s.monitor_lax}};
}

inline json trajectory_to_json(const TrajectoryRecord& r) {
    json mon = json::object();
    CsvTable t = monitor_table(r);
    for (size_t c = 0; c < t.header.size(); ++c) mon[t.header[c]] = number_array(t.columns[c]);
    mon["peter_residual"] = number_array(r.monitors.peter_residual);
    json j{{"spec", flow_spec_to_json(r.spec)},
           {"monitors", mon},
           {"final_state", state_to_json(r.final_state)},
           {"blowup", r.blowup},
           {"threshold_flag", r.threshold_flag},
           {"message", r.message}};
    j["blowup_time"] = std::isfinite(r.blowup_time) ? json(r.blowup_time) : json(nullptr);
    return j;
}

struct RunManifest {
    std::vector<std::string> command_line;
    json config = json::object();
    std::uint64_t seed = 0;
    double wall_seconds = 0.0;
    std::vector<std::pair<std::string, std::string>> outputs; // path, sha256

    void add_output(const std::string& path) { outputs.emplace_back(path, sha256_hex(read_file(path))); }

    json to_json() const {
        json hashes = json::object();
        for (const auto& [p, h] : outputs) hashes[p] = h;
        return {{"command_line", command_line}, {"config", config},          {"seed", seed},
                {"version", version},           {"wall_seconds", wall_seconds}, {"output_hashes", hashes}};
    }
};

// Schema checks. Each returns an empty string for a valid document, else the reason.
namespace schema {

inline std::string require(const json& j, const std::vector<std::pair<std::string, json::value_t>>& fields) {
    if (!j.is_object()) return "not an object";
    for (const auto& [name, type] : fields) {
        if (!j.contains(name)) return "missing field " + name;
        const json& v = j.at(name);
        bool ok = v.type() == type || (type == json::value_t::number_float && v.is_number()) ||
                  (type == json::value_t::number_unsigned && v.is_number_integer() && v.get<long long>() >= 0);
        if (!ok) return "field " + name + " has the wrong type";
    }
    return {};
}

inline std::string state(const json& j) { return check_state_json(j); }

inline std::string manifest(const json& j) {
    using t = json::value_t;
    auto e = require(j, {{"command_line", t::array},
                         {"config", t::object},
                         {"seed", t::number_unsigned},
                         {"version", t::string},
                         {"wall_seconds", t::number_float},
                         {"output_hashes", t::object}});
    if (!e.empty()) return e;
    for (const auto& [path, h] : j.at("output_hashes").items())
        if (!h.is_string() || h.get<std::string>().size() != 64) return "bad hash for " + path;
    return {};
}

inline std::string number_or_null_array(const json& a, size_t len, const std::string& name) {
    if (!a.is_array()) return "monitor " + name + " is not an array";
    if (a.size() != len) return "monitor " + name + " has the wrong length";
    for (const auto& v : a)
        if (!v.is_number() && !v.is_null()) return "monitor " + name + " has a non-numeric entry";
    return {};
}

inline std::string run(const json& j) {
    using t = json::value_t;
    auto e = require(j, {{"spec", t::object},
                         {"monitors", t::object},
                         {"final_state", t::object},
                         {"blowup", t::boolean},
                         {"threshold_flag", t::boolean}});
    if (!e.empty()) return e;
    const json& s = j.at("spec");
    e = require(s, {{"flow", t::string}, {"geometry", t::object}, {"sign", t::string}, {"dt", t::number_float},
                    {"t_final", t::number_float}});
    if (!e.empty()) return "spec: " + e;
    const json& m = j.at("monitors");
    if (!m.contains("t") || !m.at("t").is_array()) return "monitors: missing t";
    const size_t len = m.at("t").size();
    for (const auto& c : monitor_columns()) {
        if (!m.contains(c)) return "monitors: missing " + c;
        e = number_or_null_array(m.at(c), len, c);
        if (!e.empty()) return e;
    }
    e = state(j.at("final_state"));
    if (!e.empty()) return "final_state: " + e;
    return {};
}

inline std::string monitors_csv(const std::string& text) {
    try {
        CsvTable t = parse_csv(text);
        if (t.header != monitor_columns()) return "unexpected monitor header";
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

inline std::string beta_csv(const std::string& text) {
    try {
        CsvTable t = parse_csv(text);
        if (t.header != std::vector<std::string>{"kappa", "beta", "dbeta_dk"}) return "unexpected beta header";
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

inline std::string eigen_csv(const std::string& text) {
    try {
        CsvTable t = parse_csv(text);
        if (t.header != std::vector<std::string>{"index", "eigenvalue"}) return "unexpected eigenvalue header";
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

inline std::string verify_report(const json& j) {
    using t = json::value_t;
    auto e = require(j, {{"seed", t::number_unsigned},
                         {"n_modes", t::number_unsigned},
                         {"trials", t::number_unsigned},
                         {"passed", t::boolean},
                         {"suites", t::array}});
    if (!e.empty()) return e;
    for (const auto& s : j.at("suites")) {
        e = require(s, {{"suite", t::string}, {"passed", t::boolean}, {"checks", t::array}});
        if (!e.empty()) return "suite: " + e;
        for (const auto& c : s.at("checks")) {
            e = require(c, {{"name", t::string}, {"relation", t::string}, {"passed", t::boolean}});
            if (!e.empty()) return "check: " + e;
        }
    }
    return {};
}

inline std::string spectrum_report(const json& j) {
    using t = json::value_t;
    auto e = require(j, {{"state", t::object}, {"eigenvalues", t::array}, {"beta_table", t::array}});
    if (!e.empty()) return e;
    for (const auto& row : j.at("beta_table")) {
        e = require(row, {{"kappa", t::number_float}, {"beta", t::number_float}, {"dbeta_dk", t::number_float}});
        if (!e.empty()) return "beta_table: " + e;
    }
    return {};
}

inline std::string bracket_report(const json& j) {
    using t = json::value_t;
    auto e = require(j, {{"f", t::string}, {"g", t::string}, {"bracket", t::number_float}, {"gradients", t::array}});
    if (!e.empty()) return e;
    if (j.at("gradients").size() != 2) return "gradients must hold two reports";
    for (const auto& r : j.at("gradients")) {
        e = require(r, {{"name", t::string}, {"discrepancy", t::number_float}, {"analytic", t::array},
                        {"oracle", t::array}});
        if (!e.empty()) return "gradient: " + e;
    }
    return {};
}

inline std::string error_report(const json& j) {
    using t = json::value_t;
    return require(j, {{"error", t::string}, {"kind", t::string}, {"exit_code", t::number_unsigned}});
}

} // namespace schema

} // namespace ccm::cli
