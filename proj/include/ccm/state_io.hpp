#pragma once

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ccm/spectral.hpp"

namespace ccm {

using json = nlohmann::json;

inline json geometry_to_json(const Geometry& g) {
    json j{{"kind", to_string(g.kind)}, {"n_modes", g.n_modes}, {"grid_points", g.grid_points}};
    if (g.kind == Kind::Line) j["half_length"] = g.half_length;
    return j;
}

inline Geometry geometry_from_json(const json& j) {
    Geometry g;
    g.kind = kind_from_string(j.at("kind").get<std::string>());
    g.n_modes = j.at("n_modes").get<int>();
    g.grid_points = j.value("grid_points", next_pow2(4 * g.n_modes));
    if (g.kind == Kind::Line) g.half_length = j.at("half_length").get<double>();
    g.validate();
    return g;
}

inline json coeffs_to_json(const Vec& c) {
    json a = json::array();
    for (int i = 0; i < c.size(); ++i) a.push_back({c[i].real(), c[i].imag()});
    return a;
}

inline Vec coeffs_from_json(const json& a) {
    Vec c(a.size());
    for (size_t i = 0; i < a.size(); ++i) c[i] = cplx(a[i].at(0).get<double>(), a[i].at(1).get<double>());
    return c;
}

inline json state_to_json(const HardyState& q) {
    return {{"geometry", geometry_to_json(q.geo)}, {"sign", to_string(q.sign)}, {"coeffs", coeffs_to_json(q.coeffs)}};
}

inline HardyState state_from_json(const json& j) {
    HardyState q;
    q.geo = geometry_from_json(j.at("geometry"));
    q.sign = sign_from_string(j.at("sign").get<std::string>());
    q.coeffs = coeffs_from_json(j.at("coeffs"));
    if (q.coeffs.size() != q.geo.n_modes)
        throw DimensionError("coeffs length " + std::to_string(q.coeffs.size()) + " does not match n_modes " +
                             std::to_string(q.geo.n_modes));
    return q;
}

// Returns an empty string when the document is a valid state, else the reason.
inline std::string check_state_json(const json& j) {
    try {
        state_from_json(j);
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

inline void save_state(const HardyState& q, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << state_to_json(q).dump(2) << '\n';
}

inline HardyState load_state(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path);
    return state_from_json(json::parse(in));
}

} // namespace ccm
