#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccm/spectral.hpp"

namespace ccm {

// L_q + kappa failed to be positive definite (focusing, mass at or above 2pi).
struct ThresholdError : std::runtime_error {
    double mass;
    ThresholdError(const std::string& what, double m)
        : std::runtime_error(what + " (mass " + std::to_string(m) + ", threshold 2pi = " + std::to_string(2.0 * pi) +
                             ")"),
          mass(m) {}
};

namespace detail {
inline cplx coeff(const Vec& u, int i) { return (i >= 0 && i < u.size()) ? u[i] : cplx{}; }
} // namespace detail

// Matrix of g -> P u C+(vbar g) on modes 0..size-1, i.e. A_u^* A_v with A_v = C+ vbar.
// Entry (j,k) = dxi^2 sum_{b <= min(j,k)} u(j-b) conj(v(k-b)); filled by the recursion
// M(j+1,k+1) = M(j,k) + dxi^2 u(j+1) conj(v(k+1)).
inline Mat product_gram(const Geometry& g, const Vec& u, const Vec& v, int size) {
    const double d2 = g.dxi() * g.dxi();
    Mat m(size, size);
    for (int k = 0; k < size; ++k) m(0, k) = d2 * detail::coeff(u, 0) * std::conj(detail::coeff(v, k));
    for (int j = 1; j < size; ++j) {
        m(j, 0) = d2 * detail::coeff(u, j) * std::conj(detail::coeff(v, 0));
        for (int k = 1; k < size; ++k) m(j, k) = m(j - 1, k - 1) + d2 * detail::coeff(u, j) * std::conj(detail::coeff(v, k));
    }
    return m;
}

// Matrix of g -> C+(ubar g) on modes 0..size-1.
inline Mat hardy_toeplitz(const Geometry& g, const Vec& u, int size) {
    Mat a = Mat::Zero(size, size);
    for (int j = 0; j < size; ++j)
        for (int k = j; k < size; ++k) a(j, k) = g.dxi() * std::conj(detail::coeff(u, k - j));
    return a;
}

inline RVec frequencies(const Geometry& g, int size) {
    RVec xi(size);
    for (int k = 0; k < size; ++k) xi[k] = g.xi(k);
    return xi;
}

inline Vec padded(const Vec& v, int size) {
    Vec r = Vec::Zero(size);
    const int n = std::min<int>(size, v.size());
    r.head(n) = v.head(n);
    return r;
}

struct LaxMatrix {
    Geometry geo;
    Sign sign = Sign::Focusing;
    Mat matrix;
    Vec q;

    int size() const { return static_cast<int>(matrix.rows()); }
};

// L_q = -i d/dx -+ q C+ qbar on modes 0..size-1 (size defaults to N; a larger size
// gives the leading block of the untruncated operator's compression).
inline LaxMatrix build_lax(const HardyState& q, int size = -1) {
    if (size < 0) size = q.size();
    Mat m = -sigma(q.sign) * product_gram(q.geo, q.coeffs, q.coeffs, size);
    m.diagonal() += frequencies(q.geo, size).cast<cplx>();
    return {q.geo, q.sign, m, padded(q.coeffs, size)};
}

// Spectral path: L_q g by alias-free products, projected to modes 0..N-1.
inline Vec apply_lax(const HardyState& q, const Vec& g) {
    HardyState gs = q.with_coeffs(g);
    FullState inner_prod = cauchy_szego(multiply(conj(q), to_full(gs)), Side::Plus);
    FullState nl = multiply(to_full(q), inner_prod);
    Vec out(g.size());
    for (int k = 0; k < g.size(); ++k) out[k] = q.geo.xi(k) * g[k] - sigma(q.sign) * nl.at(k);
    return out;
}

struct ResolventVector {
    double kappa = 0.0;
    Vec m;
    double beta = 0.0;
};

inline void require_kappa(double kappa) {
    if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
}

// m = (L_q + kappa)^{-1} q by dense Cholesky; failure means L_q + kappa is not
// positive definite.
inline ResolventVector resolve(const LaxMatrix& lax, double kappa) {
    require_kappa(kappa);
    Mat a = lax.matrix;
    a.diagonal().array() += kappa;
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success)
        throw ThresholdError("L_q + kappa is not positive definite", l2_sq(lax.geo, lax.q));
    Vec m = llt.solve(lax.q);
    return {kappa, m, inner(lax.geo, lax.q, m).real()};
}

inline ResolventVector resolve(const HardyState& q, double kappa) { return resolve(build_lax(q), kappa); }

inline double beta(const HardyState& q, double kappa) { return resolve(q, kappa).beta; }

// d beta / d kappa = -||m||^2
inline double beta_dk(const HardyState& q, double kappa) { return -l2_sq(q.geo, resolve(q, kappa).m); }

// L^j q for j = 0..n
inline std::vector<Vec> lax_powers(const LaxMatrix& lax, int n) {
    std::vector<Vec> p{lax.q};
    for (int j = 1; j <= n; ++j) p.push_back(lax.matrix * p.back());
    return p;
}

// E_n = <q, L^n q> for n = 0..n_max.
inline std::vector<double> energies(const HardyState& q, int n_max) {
    if (n_max < 0 || n_max > 6) throw std::invalid_argument("energies: n_max must be in 0..6");
    LaxMatrix lax = build_lax(q);
    auto p = lax_powers(lax, n_max);
    std::vector<double> e;
    for (int n = 0; n <= n_max; ++n) {
        // <L^a q, L^b q> with a + b = n keeps the powers balanced
        int a = n / 2, b = n - n / 2;
        e.push_back(inner(q.geo, p[a], p[b]).real());
    }
    return e;
}

struct LaxSpectrum {
    RVec values;
    Mat vectors;
};

inline LaxSpectrum spectrum(const LaxMatrix& lax) {
    Eigen::SelfAdjointEigenSolver<Mat> es(lax.matrix);
    return {es.eigenvalues(), es.eigenvectors()};
}

// F(L_q) v through the eigendecomposition.
template <class F>
Vec apply_function(const LaxSpectrum& s, F&& f, const Vec& v) {
    Vec c = s.vectors.adjoint() * v;
    for (int i = 0; i < c.size(); ++i) c[i] *= f(s.values[i]);
    return s.vectors * c;
}

// <q, F(L_q) q>
template <class F>
double spectral_functional(const HardyState& q, F&& f) {
    LaxSpectrum s = spectrum(build_lax(q));
    Vec c = s.vectors.adjoint() * q.coeffs;
    double acc = 0.0;
    for (int i = 0; i < c.size(); ++i) acc += f(s.values[i]) * std::norm(c[i]);
    return q.geo.weight() * acc;
}

// S(q) = C+ qbar (L_0 + kappa)^{-1/2}
inline Mat s_matrix(const HardyState& q, double kappa) {
    require_kappa(kappa);
    const int n = q.size();
    Mat a = hardy_toeplitz(q.geo, q.coeffs, n);
    RVec d = (frequencies(q.geo, n).array() + kappa).rsqrt();
    return a * d.asDiagonal();
}

inline double s_opnorm(const HardyState& q, double kappa) {
    Mat s = s_matrix(q, kappa);
    Eigen::SelfAdjointEigenSolver<Mat> es(s.adjoint() * s, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

// T(q,g) = q C+ gbar (L_0 + kappa)^{-1}
inline Mat t_matrix(const HardyState& q, const HardyState& g, double kappa) {
    require_kappa(kappa);
    const int n = q.size();
    RVec d = (frequencies(q.geo, n).array() + kappa).inverse();
    return product_gram(q.geo, q.coeffs, g.coeffs, n) * d.asDiagonal();
}

inline double t_hsnorm(const HardyState& q, const HardyState& g, double kappa) { return t_matrix(q, g, kappa).norm(); }

struct SstSpectra {
    Eigen::VectorXcd t;
    Eigen::VectorXcd t_adjoint;
    RVec s_star_s;
    RVec s_s_star;
};

inline SstSpectra sst_spectrum(const HardyState& q, double kappa) {
    Mat t = t_matrix(q, q, kappa);
    Mat s = s_matrix(q, kappa);
    SstSpectra r;
    r.t = Eigen::ComplexEigenSolver<Mat>(t, false).eigenvalues();
    r.t_adjoint = Eigen::ComplexEigenSolver<Mat>(t.adjoint(), false).eigenvalues();
    r.s_star_s = Eigen::SelfAdjointEigenSolver<Mat>(s.adjoint() * s, Eigen::EigenvaluesOnly).eigenvalues();
    r.s_s_star = Eigen::SelfAdjointEigenSolver<Mat>(s * s.adjoint(), Eigen::EigenvaluesOnly).eigenvalues();
    return r;
}

// ||(L_q + kappa)^s f|| / ||(L_0 + kappa)^s f||
inline double sobolev_ratio(const HardyState& q, const Vec& f, double s, double kappa) {
    require_kappa(kappa);
    LaxSpectrum sp = spectrum(build_lax(q));
    if (sp.values.minCoeff() + kappa <= 0.0)
        throw ThresholdError("L_q + kappa is indefinite", mass(q));
    Vec num = apply_function(sp, [&](double l) { return std::pow(l + kappa, s); }, f);
    RVec xi = frequencies(q.geo, q.size());
    Vec den(f.size());
    for (int k = 0; k < f.size(); ++k) den[k] = std::pow(xi[k] + kappa, s) * f[k];
    return num.norm() / den.norm();
}

// <q, (L+1)^2 / ((L+1)^2 + varkappa^2) q>
inline double equicontinuity_functional(const HardyState& q, double varkappa) {
    return spectral_functional(q, [&](double l) {
        double a = (l + 1.0) * (l + 1.0);
        return a / (a + varkappa * varkappa);
    });
}

struct DecayDiagnostics {
    double lax_m = 0.0;
    double kappa_lax_resolvent_m = 0.0;
};

// ||L_q m|| and ||kappa L_q (L_q + kappa)^{-1} m||
inline DecayDiagnostics decay_diagnostics(const HardyState& q, double kappa) {
    LaxMatrix lax = build_lax(q);
    ResolventVector r = resolve(lax, kappa);
    Vec lm = lax.matrix * r.m;
    Mat a = lax.matrix;
    a.diagonal().array() += kappa;
    Vec rm = a.llt().solve(r.m);
    Vec second = kappa * (lax.matrix * rm);
    return {std::sqrt(l2_sq(q.geo, lm)), std::sqrt(l2_sq(q.geo, second))};
}

// Peter operators on modes 0..size-1. The zero-mode terms carry 1/period, so on
// the line window they are the periodization corrections.

// Peter operator of the beta_kappa flow.
inline Mat peter_beta(const HardyState& q, double kappa, int size) {
    LaxMatrix lax = build_lax(q, size);
    Mat a = lax.matrix;
    a.diagonal().array() += kappa;
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) throw ThresholdError("L_q + kappa is not positive definite", mass(q));
    Mat r = llt.solve(Mat::Identity(size, size));
    Vec m = r * lax.q;
    const cplx I(0.0, 1.0);
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    double b = inner(q.geo, lax.q, m).real();
    double mm = l2_sq(q.geo, m);
    Mat p = -2.0 * I * r + s * 2.0 * I * product_gram(q.geo, m, m, size) - s * 2.0 * I * c * b * r;
    p.diagonal().array() -= s * 2.0 * I * c * mm;
    return p;
}

// d/dkappa of the beta_kappa Peter operator.
inline Mat peter_beta_dk(const HardyState& q, double kappa, int size) {
    LaxMatrix lax = build_lax(q, size);
    Mat a = lax.matrix;
    a.diagonal().array() += kappa;
    Eigen::LLT<Mat> llt(a);
    if (llt.info() != Eigen::Success) throw ThresholdError("L_q + kappa is not positive definite", mass(q));
    Mat r = llt.solve(Mat::Identity(size, size));
    Mat r2 = r * r;
    Vec m = r * lax.q;
    Vec rm = r * m;
    const cplx I(0.0, 1.0);
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    double b = inner(q.geo, lax.q, m).real();
    double mm = l2_sq(q.geo, m);
    double mr = inner(q.geo, m, rm).real();
    Mat p = 2.0 * I * r2 - s * 2.0 * I * (product_gram(q.geo, rm, m, size) + product_gram(q.geo, m, rm, size)) -
            s * 2.0 * I * c * (-mm * r - b * r2);
    p.diagonal().array() += s * 4.0 * I * c * mr;
    return p;
}

// Peter operator of the E_n flow.
inline Mat peter_energy(const HardyState& q, int n, int size) {
    const cplx I(0.0, 1.0);
    if (n == 0) return -2.0 * I * Mat::Identity(size, size);
    LaxMatrix lax = build_lax(q, size);
    auto p = lax_powers(lax, n);
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    std::vector<Mat> lpow{Mat::Identity(size, size)};
    for (int j = 1; j <= n; ++j) lpow.push_back(lpow.back() * lax.matrix);
    Mat out = -2.0 * I * lpow[n];
    for (int j = 0; j <= n - 1; ++j) {
        int l = n - 1 - j;
        double el = inner(q.geo, p[l / 2], p[l - l / 2]).real();
        Mat term = product_gram(q.geo, p[j], p[l], size) - c * el * lpow[j];
        out -= s * 2.0 * I * term;
    }
    double e = inner(q.geo, p[(n - 1) / 2], p[(n - 1) - (n - 1) / 2]).real();
    out.diagonal().array() += s * 2.0 * I * c * double(n) * e;
    return out;
}

} // namespace ccm
