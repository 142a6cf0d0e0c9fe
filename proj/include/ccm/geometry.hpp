#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ccm {

inline constexpr double pi = std::numbers::pi;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class Kind { Torus, Line };

// Focusing takes the upper sign in every formula.
enum class Sign { Focusing, Defocusing };

inline double sigma(Sign s) { return s == Sign::Focusing ? 1.0 : -1.0; }

inline std::string to_string(Kind k) { return k == Kind::Torus ? "torus" : "line"; }
inline std::string to_string(Sign s) { return s == Sign::Focusing ? "focusing" : "defocusing"; }

inline Kind kind_from_string(const std::string& s) {
    if (s == "torus") return Kind::Torus;
    if (s == "line") return Kind::Line;
    throw std::invalid_argument("unknown geometry kind: " + s);
}

inline Sign sign_from_string(const std::string& s) {
    if (s == "focusing") return Sign::Focusing;
    if (s == "defocusing") return Sign::Defocusing;
    throw std::invalid_argument("unknown sign: " + s);
}

inline int next_pow2(int n) {
    int p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Torus: period 2pi, frequencies 0..N-1.
// Line: periodized window [-L, L), frequencies k*pi/L.
struct Geometry {
    Kind kind = Kind::Torus;
    int n_modes = 0;
    double half_length = 0.0;
    int grid_points = 0;

    static Geometry torus(int n, int grid = 0) {
        Geometry g{Kind::Torus, n, 0.0, grid > 0 ? grid : next_pow2(4 * n)};
        g.validate();
        return g;
    }

    static Geometry line(int n, double half_length, int grid = 0) {
        Geometry g{Kind::Line, n, half_length, grid > 0 ? grid : next_pow2(4 * n)};
        g.validate();
        return g;
    }

    void validate() const {
        if (n_modes <= 0) throw DimensionError("n_modes must be positive");
        if (grid_points < 4 * n_modes || (grid_points & (grid_points - 1)) != 0)
            throw DimensionError("grid_points must be a power of two >= 4*n_modes");
        if (kind == Kind::Line && !(half_length > 0.0))
            throw DimensionError("line geometry needs a positive half_length");
    }

    double dxi() const { return kind == Kind::Torus ? 1.0 : pi / half_length; }
    double period() const { return kind == Kind::Torus ? 2.0 * pi : 2.0 * half_length; }
    double x0() const { return kind == Kind::Torus ? 0.0 : -half_length; }
    double dx() const { return period() / grid_points; }
    double xi(int k) const { return k * dxi(); }

    // Plancherel weight: ||f||^2 = weight() * sum |fhat|^2.
    double weight() const { return 2.0 * pi * dxi(); }

    // Same geometry with a different number of retained modes.
    Geometry with_modes(int n) const {
        Geometry g = *this;
        g.n_modes = n;
        g.grid_points = std::max(grid_points, next_pow2(4 * n));
        return g;
    }

    bool operator==(const Geometry&) const = default;
};

} // namespace ccm
