#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "ccm/fft.hpp"
#include "ccm/geometry.hpp"

namespace ccm {

// Values of qhat on the retained frequencies 0, dxi, ..., (N-1)dxi.
struct HardyState {
    Geometry geo;
    Sign sign = Sign::Focusing;
    Vec coeffs;

    static HardyState zero(const Geometry& g, Sign s) { return {g, s, Vec::Zero(g.n_modes)}; }
    int size() const { return static_cast<int>(coeffs.size()); }
    HardyState with_coeffs(Vec c) const { return {geo, sign, std::move(c)}; }
};

// Coefficients on the contiguous frequency band lo..hi (in units of dxi).
struct FullState {
    Geometry geo;
    int lo = 0;
    Vec coeffs;

    int hi() const { return lo + static_cast<int>(coeffs.size()) - 1; }
    cplx at(int k) const {
        int i = k - lo;
        return (i >= 0 && i < coeffs.size()) ? coeffs[i] : cplx{};
    }
};

enum class Side { Plus, Minus };

namespace detail {

inline void require_same(const Geometry& a, const Geometry& b) {
    if (a.kind != b.kind || a.dxi() != b.dxi())
        throw DimensionError("geometry mismatch");
}

// e^{i xi_k x0}: 1 on the torus, (-1)^k on the line window.
inline double origin_phase(const Geometry& g, int k) {
    if (g.kind == Kind::Torus) return 1.0;
    return (k % 2 == 0) ? 1.0 : -1.0;
}

inline int wrap(int k, int n) { return ((k % n) + n) % n; }

} // namespace detail

inline FullState to_full(const HardyState& q) { return {q.geo, 0, q.coeffs}; }

inline HardyState to_hardy(const FullState& f, Sign s, int n = -1) {
    if (n < 0) n = f.geo.n_modes;
    Vec c(n);
    for (int k = 0; k < n; ++k) c[k] = f.at(k);
    return {f.geo, s, c};
}

inline FullState truncate(const FullState& f, int lo, int hi) {
    Vec c(hi - lo + 1);
    for (int k = lo; k <= hi; ++k) c[k - lo] = f.at(k);
    return {f.geo, lo, c};
}

// Physical samples f(x_j) = sum_k dxi fhat_k e^{i xi_k x_j} on the geometry grid.
inline Vec synthesize(const FullState& f, int grid = 0) {
    const Geometry& g = f.geo;
    const int n = grid > 0 ? grid : g.grid_points;
    if (f.lo < -n / 2 || f.hi() >= n / 2)
        throw DimensionError("band does not fit the physical grid");
    Vec spec = Vec::Zero(n);
    for (int k = f.lo; k <= f.hi(); ++k)
        spec[detail::wrap(k, n)] += g.dxi() * detail::origin_phase(g, k) * f.at(k);
    return fft_backward(spec, n);
}

inline Vec synthesize(const HardyState& q, int grid = 0) { return synthesize(to_full(q), grid); }

// Inverse of synthesize; returns the band [-n/2, n/2).
inline FullState analyze(const Vec& samples, const Geometry& g) {
    const int n = static_cast<int>(samples.size());
    if (n < 2 || (n & (n - 1)) != 0) throw DimensionError("sample count must be a power of two");
    Vec spec = fft_forward(samples, n);
    FullState f{g, -n / 2, Vec(n)};
    const double scale = 1.0 / (n * g.dxi());
    for (int k = -n / 2; k < n / 2; ++k)
        f.coeffs[k + n / 2] = scale * detail::origin_phase(g, k) * spec[detail::wrap(k, n)];
    return f;
}

// (fbar)^(xi) = conj(fhat(-xi)).
inline FullState conj(const FullState& f) {
    const int len = static_cast<int>(f.coeffs.size());
    FullState r{f.geo, -f.hi(), Vec(len)};
    for (int i = 0; i < len; ++i) r.coeffs[i] = std::conj(f.coeffs[len - 1 - i]);
    return r;
}

inline FullState conj(const HardyState& q) { return conj(to_full(q)); }

// Exact product: (fg)^ = dxi * (fhat conv ghat), computed by zero-padded FFT.
inline FullState multiply(const FullState& f, const FullState& g) {
    detail::require_same(f.geo, g.geo);
    const int nf = static_cast<int>(f.coeffs.size());
    const int ng = static_cast<int>(g.coeffs.size());
    const int len = nf + ng - 1;
    const double dxi = f.geo.dxi();
    FullState r{f.geo, f.lo + g.lo, Vec::Zero(len)};
    if (std::min(nf, ng) <= 8) {
        for (int i = 0; i < nf; ++i)
            for (int j = 0; j < ng; ++j) r.coeffs[i + j] += f.coeffs[i] * g.coeffs[j];
        r.coeffs *= dxi;
        return r;
    }
    const int n = next_pow2(len);
    Vec a = fft_forward(f.coeffs, n);
    Vec b = fft_forward(g.coeffs, n);
    Vec c = fft_backward(a.cwiseProduct(b), n);
    r.coeffs = c.head(len) * (dxi / n);
    return r;
}

inline FullState multiply(const HardyState& f, const HardyState& g) { return multiply(to_full(f), to_full(g)); }
inline FullState multiply(const FullState& f, const HardyState& g) { return multiply(f, to_full(g)); }
inline FullState multiply(const HardyState& f, const FullState& g) { return multiply(to_full(f), g); }

inline FullState abs2(const HardyState& q) { return multiply(to_full(q), conj(q)); }

// Plus keeps xi >= 0. Minus keeps xi <= 0 on the torus and xi < 0 on the line,
// so that C+ + C- = 1 + fhat(0) on the torus and C+ + C- = 1 on the line.
inline FullState cauchy_szego(const FullState& f, Side side) {
    FullState r = f;
    for (int k = f.lo; k <= f.hi(); ++k) {
        bool keep = side == Side::Plus ? k >= 0 : (f.geo.kind == Kind::Torus ? k <= 0 : k < 0);
        if (!keep) r.coeffs[k - f.lo] = 0.0;
    }
    return r;
}

// conj(C+(conj f)): keeps xi <= 0 in both geometries.
inline FullState reflected_projection(const FullState& f) {
    FullState r = f;
    for (int k = std::max(f.lo, 1); k <= f.hi(); ++k) r.coeffs[k - f.lo] = 0.0;
    return r;
}

inline FullState derivative(const FullState& f) {
    FullState r = f;
    for (int k = f.lo; k <= f.hi(); ++k) r.coeffs[k - f.lo] *= cplx(0.0, f.geo.xi(k));
    return r;
}

inline HardyState derivative(const HardyState& q) { return to_hardy(derivative(to_full(q)), q.sign, q.size()); }

// Zero-mode weight 1/period: the mean of f is weight * integral of f. On the line
// window it is 1/2L and the corrections it multiplies vanish as L grows.
inline double mean_weight(const Geometry& g) { return 1.0 / g.period(); }

// Mean-free antiderivative of periodic grid samples: multiplier 1/(i xi) with
// the zero mode and the Nyquist bin dropped.
inline Vec antiderivative_samples(const Geometry& g, const Vec& f) {
    const int n = static_cast<int>(f.size());
    Vec spec = fft_forward(f, n);
    for (int j = 0; j < n; ++j) {
        int k = j < n / 2 ? j : j - n;
        spec[j] = (k == 0 || j == n / 2) ? cplx{} : spec[j] / cplx(0.0, g.xi(k));
    }
    return fft_backward(spec, n) / double(n);
}

// Sign-kernel quadrature 1/2 sum_j sgn(x_i - x_j) f_j dx by prefix sums.
inline Vec sgn_antiderivative_samples(const Geometry& g, const Vec& f) {
    const int n = static_cast<int>(f.size());
    const double half_dx = 0.5 * g.period() / n;
    Vec out(n);
    cplx total = f.sum();
    cplx before = 0.0;
    for (int i = 0; i < n; ++i) {
        cplx after = total - before - f[i];
        out[i] = half_dx * (before - after);
        before += f[i];
    }
    return out;
}

// Multiplier (1 - delta_{xi,0}) / (i xi), exact on the coefficients.
inline FullState antiderivative(const FullState& f) {
    FullState r = f;
    for (int k = f.lo; k <= f.hi(); ++k)
        r.coeffs[k - f.lo] = k == 0 ? cplx{} : f.at(k) / cplx(0.0, f.geo.xi(k));
    return r;
}

inline cplx inner(const Geometry& g, const Vec& f, const Vec& h) { return g.weight() * f.dot(h); }
inline cplx inner(const HardyState& f, const HardyState& h) { return inner(f.geo, f.coeffs, h.coeffs); }

inline cplx inner(const FullState& f, const FullState& h) {
    cplx s = 0.0;
    for (int k = std::max(f.lo, h.lo); k <= std::min(f.hi(), h.hi()); ++k) s += std::conj(f.at(k)) * h.at(k);
    return f.geo.weight() * s;
}

inline double l2_sq(const Geometry& g, const Vec& f) { return g.weight() * f.squaredNorm(); }
inline double l2_sq(const FullState& f) { return l2_sq(f.geo, f.coeffs); }
inline double mass(const HardyState& q) { return l2_sq(q.geo, q.coeffs); }

// sum of |xi|^{2s} |fhat|^2 with the Plancherel weight
inline double hdot_sq(const FullState& f, double s) {
    double acc = 0.0;
    for (int k = f.lo; k <= f.hi(); ++k) {
        if (k == 0) continue;
        acc += std::pow(std::abs(f.geo.xi(k)), 2.0 * s) * std::norm(f.at(k));
    }
    return f.geo.weight() * acc;
}

inline double hs_sq(const FullState& f, double s) {
    double acc = 0.0;
    for (int k = f.lo; k <= f.hi(); ++k) {
        double x = f.geo.xi(k);
        acc += std::pow(1.0 + x * x, s) * std::norm(f.at(k));
    }
    return f.geo.weight() * acc;
}

enum class Norm { L2, Hs, Hdot, L4, L6 };

inline double norm(const HardyState& q, Norm kind, double s = 0.0) {
    switch (kind) {
    case Norm::L2: return std::sqrt(mass(q));
    case Norm::Hs: return std::sqrt(hs_sq(to_full(q), s));
    case Norm::Hdot: return std::sqrt(hdot_sq(to_full(q), s));
    case Norm::L4: return std::pow(l2_sq(abs2(q)), 0.25);
    case Norm::L6: return std::pow(l2_sq(multiply(abs2(q), q)), 1.0 / 6.0);
    }
    return 0.0;
}

// Mass carried by retained frequencies at index >= from.
inline double tail_mass(const HardyState& q, int from) {
    if (from >= q.size()) return 0.0;
    return q.geo.weight() * q.coeffs.tail(q.size() - from).squaredNorm();
}

inline FullState as_full(const Geometry& g, const Vec& c) { return {g, 0, c}; }

// Retained Hardy coefficients 0..n-1 of f (P_N C+ f).
inline Vec project(const FullState& f, int n) {
    Vec c(n);
    for (int k = 0; k < n; ++k) c[k] = f.at(k);
    return c;
}

// a * conj(b) for Hardy coefficient vectors a, b.
inline FullState times_conj(const Geometry& g, const Vec& a, const Vec& b) {
    return multiply(as_full(g, a), conj(as_full(g, b)));
}

} // namespace ccm
