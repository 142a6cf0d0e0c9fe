#pragma once

#include <cmath>
#include <random>

#include "ccm/spectral.hpp"

namespace ccm {

// Coefficients of sqrt(2nu+1) / (1 - nu (e^{iy} - 1)): sqrt(2nu+1) nu^k / (nu+1)^{k+1}.
// Real nu >= 0 is allowed; nu = 0 gives the constant 1.
inline Vec torus_soliton_series(double nu, int n_modes) {
    Vec c = Vec::Zero(n_modes);
    const double amp = std::sqrt(2.0 * nu + 1.0) / (nu + 1.0);
    c[0] = amp;
    if (nu == 0.0) return c;
    const double log_ratio = std::log(nu / (nu + 1.0));
    for (int k = 1; k < n_modes; ++k) c[k] = amp * std::exp(k * log_ratio);
    return c;
}

// Focusing torus soliton q_n; L_q q_n = -q_n and mass 2pi.
inline HardyState soliton_torus(double n, int n_modes, int grid = 0) {
    Geometry g = Geometry::torus(n_modes, grid);
    return {g, Sign::Focusing, torus_soliton_series(n, n_modes)};
}

// Line soliton sqrt(2n)/(1 - inx) realized on the window [-L, L) as the exact
// 2L-periodic soliton: mass 2pi and L_q q = -(pi/L) q. Its coefficients tend to
// sqrt(2/n) e^{-xi/n} as L grows.
inline HardyState soliton_line(double n, int n_modes, double half_length, int grid = 0) {
    Geometry g = Geometry::line(n_modes, half_length, grid);
    const double lambda = g.dxi();
    Vec c = torus_soliton_series(n / lambda, n_modes) / std::sqrt(lambda);
    return {g, Sign::Focusing, c};
}

// Direct samples qhat(xi) = sqrt(2/n) e^{-xi/n} on the window frequencies.
inline HardyState soliton_line_sampled(double n, int n_modes, double half_length, int grid = 0) {
    Geometry g = Geometry::line(n_modes, half_length, grid);
    Vec c(n_modes);
    for (int k = 0; k < n_modes; ++k) c[k] = std::sqrt(2.0 / n) * std::exp(-g.xi(k) / n);
    return {g, Sign::Focusing, c};
}

// q = c e^{i xi_m x}.
inline HardyState plane_wave(const Geometry& g, Sign s, cplx c, int m) {
    if (m < 0 || m >= g.n_modes) throw DimensionError("plane-wave mode outside the retained band");
    HardyState q = HardyState::zero(g, s);
    q.coeffs[m] = c / g.dxi();
    return q;
}

inline HardyState rescale_to_mass(HardyState q, double target) {
    double m = mass(q);
    if (m > 0.0) q.coeffs *= std::sqrt(target / m);
    return q;
}

// Random states used by every suite.
// Torus: qhat(k) = r_k e^{i phi_k} (1+k)^{-a}, r ~ U(0,1), phi ~ U(0, 2pi),
//   a ~ U(1.5, 3), supported on k < band (default max(2, N/8)) so that the
//   polynomial functionals are resolved exactly by the truncation.
// Line: one to three packets c_j/(x - z_j)^2, i.e. qhat(xi) = sum c_j xi e^{-i xi z_j},
//   z_j = x_j - i y_j, x_j ~ U(-L/6, L/6), y_j ~ U(ymin, 2 ymin), localized inside
//   the window.
// Both are rescaled to the requested mass.
struct RandomOptions {
    int band = 0;
    double decay_min = 1.5;
    double decay_max = 3.0;
    double line_width = 1.0;
};

inline HardyState random_state(const Geometry& g, Sign s, double target_mass, std::mt19937_64& rng,
                               const RandomOptions& opt = {}) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    HardyState q = HardyState::zero(g, s);
    if (g.kind == Kind::Torus) {
        int band = opt.band > 0 ? opt.band : std::max(2, g.n_modes / 8);
        band = std::min(band, g.n_modes);
        double a = opt.decay_min + (opt.decay_max - opt.decay_min) * unit(rng);
        for (int k = 0; k < band; ++k) {
            double r = unit(rng);
            double phi = 2.0 * pi * unit(rng);
            q.coeffs[k] = std::polar(r * std::pow(1.0 + k, -a), phi);
        }
    } else {
        int packets = 1 + static_cast<int>(3.0 * unit(rng)) % 3;
        for (int j = 0; j < packets; ++j) {
            double x0 = (unit(rng) - 0.5) * g.half_length / 3.0;
            double y = opt.line_width * (1.0 + unit(rng));
            cplx amp = std::polar(0.5 + 0.5 * unit(rng), 2.0 * pi * unit(rng));
            for (int k = 0; k < g.n_modes; ++k) {
                double xi = g.xi(k);
                q.coeffs[k] += amp * xi * std::exp(cplx(-y * xi, -xi * x0));
            }
        }
    }
    return rescale_to_mass(q, target_mass);
}

// Uniform draw of the mass in (0, max_mass].
inline HardyState random_state_upto(const Geometry& g, Sign s, double max_mass, std::mt19937_64& rng,
                                    const RandomOptions& opt = {}) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double m = max_mass * (1.0 - unit(rng));
    return random_state(g, s, m, rng, opt);
}

} // namespace ccm
