#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccm/lax.hpp"
#include "ccm/realop.hpp"
#include "ccm/spectral.hpp"

namespace ccm {

struct DegeneracyError : std::runtime_error {
    double sigma_min;
    DegeneracyError(const std::string& what, double s)
        : std::runtime_error(what + " (smallest singular value " + std::to_string(s) + ")"), sigma_min(s) {}
};

inline constexpr double degeneracy_tolerance = 1e-6;

inline FullState real_part(const FullState& f) {
    const int lo = std::min(f.lo, -f.hi());
    const int hi = std::max(f.hi(), -f.lo);
    FullState r{f.geo, lo, Vec(hi - lo + 1)};
    for (int k = lo; k <= hi; ++k) r.coeffs[k - lo] = 0.5 * (f.at(k) + std::conj(f.at(-k)));
    return r;
}

inline FullState scaled(FullState f, cplx c) {
    f.coeffs *= c;
    return f;
}

// i u dinv Re(vbar h) for Hardy coefficient vectors u, v, h.
inline FullState theta_full(const Geometry& g, const Vec& u, const Vec& v, const Vec& h) {
    FullState inner_term = antiderivative(real_part(times_conj(g, h, v)));
    return scaled(multiply(as_full(g, u), inner_term), cplx(0.0, 1.0));
}

inline FullState theta_apply(const HardyState& q, const Vec& h) { return theta_full(q.geo, q.coeffs, q.coeffs, h); }

// Real antiderivative matrix on the physical grid.
inline RMat antiderivative_matrix(const Geometry& g) {
    const int n = g.grid_points;
    RMat k(n, n);
    for (int j = 0; j < n; ++j) {
        Vec e = Vec::Zero(n);
        e[j] = 1.0;
        k.col(j) = antiderivative_samples(g, e).real();
    }
    return k;
}

// Theta(q) on physical grid samples: A = (i/2) q K qbar, B = (i/2) q K q.
inline RealLinearOperator theta(const HardyState& q) {
    Vec qs = synthesize(q);
    Mat k = antiderivative_matrix(q.geo).cast<cplx>();
    const cplx half_i(0.0, 0.5);
    Mat a = half_i * (qs.asDiagonal() * k * qs.conjugate().asDiagonal());
    Mat b = half_i * (qs.asDiagonal() * k * qs.asDiagonal());
    return {a, b};
}

// Omega(q) g = i(g -+ 2 C+ Theta(q) g), restricted to the retained modes.
inline Vec omega_apply(const HardyState& q, const Vec& g) {
    const cplx I(0.0, 1.0);
    Vec t = project(theta_apply(q, g), q.size());
    return I * (g - 2.0 * sigma(q.sign) * t);
}

inline RealLinearOperator omega_op(const HardyState& q) {
    return RealLinearOperator::assemble(q.size(), [&](const Vec& g) { return omega_apply(q, g); });
}

inline double omega_form(const HardyState& q, const Vec& f, const Vec& g) {
    return inner(q.geo, f, omega_apply(q, g)).real();
}

// D_f omega_q(g, h) from the analytic derivative of Theta.
inline double omega_derivative(const HardyState& q, const Vec& f, const Vec& g, const Vec& h) {
    const Geometry& geo = q.geo;
    FullState dtheta = theta_full(geo, f, q.coeffs, h);
    FullState second = theta_full(geo, q.coeffs, f, h);
    cplx s = inner(as_full(geo, g), dtheta) + inner(as_full(geo, g), second);
    return (-2.0 * sigma(q.sign) * cplx(0.0, 1.0) * s).real();
}

inline double closedness_residual(const HardyState& q, const Vec& f, const Vec& g, const Vec& h) {
    return omega_derivative(q, f, g, h) + omega_derivative(q, g, h, f) + omega_derivative(q, h, f, g);
}

struct SingularSpectrum {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    Vec kernel;
};

inline SingularSpectrum omega_singular(const HardyState& q) {
    RMat r = omega_op(q).to_real();
    Eigen::BDCSVD<RMat> svd(r, Eigen::ComputeFullV);
    const RVec& s = svd.singularValues();
    const int n = q.size();
    RVec v = svd.matrixV().col(2 * n - 1);
    Vec g(n);
    for (int k = 0; k < n; ++k) g[k] = cplx(v[k], v[n + k]);
    g /= std::sqrt(l2_sq(q.geo, g));
    return {s[2 * n - 1], s[0], g};
}

// J(q) = Omega(q)^{-1}
inline RealLinearOperator j_map(const HardyState& q) {
    RealLinearOperator om = omega_op(q);
    Eigen::BDCSVD<RMat> svd(om.to_real());
    const RVec& s = svd.singularValues();
    if (s[s.size() - 1] < degeneracy_tolerance * s[0]) throw DegeneracyError("Omega(q) is singular", s[s.size() - 1]);
    return om.inverse();
}

// Defect of G -+ i qbar dinv(qG) outside L^2_- (frequencies >= 1; the zero bin
// belongs to L^2_- on both geometries), relative to ||G||.
inline double witness_condition(const HardyState& q, const FullState& big_g) {
    FullState inner_term = antiderivative(multiply(to_full(q), big_g));
    FullState t = multiply(conj(q), inner_term);
    const cplx c = sigma(q.sign) * cplx(0.0, 1.0);
    double defect = 0.0;
    int hi = std::max(big_g.hi(), t.hi());
    for (int k = 1; k <= hi; ++k) defect += std::norm(big_g.at(k) - c * t.at(k));
    return std::sqrt(q.geo.weight() * defect / l2_sq(big_g));
}

struct DegeneracyReport {
    double sigma_min = 0.0;
    double sigma_max = 0.0;
    bool degenerate = false;
    Vec kernel;
    double witness_residual = 0.0;
};

inline DegeneracyReport degeneracy_witness(const HardyState& q) {
    SingularSpectrum s = omega_singular(q);
    DegeneracyReport r{s.sigma_min, s.sigma_max, s.sigma_min < degeneracy_tolerance * s.sigma_max, s.kernel, 0.0};
    // G = conj((1 -+ 2 Theta) g)
    FullState t = theta_apply(q, s.kernel);
    FullState big = t;
    big.coeffs *= -2.0 * sigma(q.sign);
    for (int k = 0; k < q.size(); ++k) big.coeffs[k - big.lo] += s.kernel[k];
    r.witness_residual = witness_condition(q, conj(big));
    return r;
}

// Observables with closed-form gradients.
enum class FunctionalKind { Mass, Momentum, Hamiltonian, Energy, Beta, Hk };

struct Functional {
    FunctionalKind kind = FunctionalKind::Mass;
    int n = 0;
    double kappa = 0.0;

    static Functional mass() { return {FunctionalKind::Mass}; }
    static Functional momentum() { return {FunctionalKind::Momentum}; }
    static Functional hamiltonian() { return {FunctionalKind::Hamiltonian}; }
    static Functional energy(int n) { return {FunctionalKind::Energy, n}; }
    static Functional beta(double k) { return {FunctionalKind::Beta, 0, k}; }
    static Functional hk(double k) { return {FunctionalKind::Hk, 0, k}; }

    std::string name() const {
        switch (kind) {
        case FunctionalKind::Mass: return "mass";
        case FunctionalKind::Momentum: return "momentum";
        case FunctionalKind::Hamiltonian: return "hamiltonian";
        case FunctionalKind::Energy: return "en:" + std::to_string(n);
        case FunctionalKind::Beta: return "beta:" + format_number(kappa);
        case FunctionalKind::Hk: return "hk:" + format_number(kappa);
        }
        return {};
    }

    // mass | momentum | hamiltonian | en:N | beta:K | hk:K
    static Functional parse(const std::string& s) {
        if (s == "mass") return mass();
        if (s == "momentum") return momentum();
        if (s == "hamiltonian") return hamiltonian();
        auto colon = s.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("unknown functional: " + s);
        std::string head = s.substr(0, colon), arg = s.substr(colon + 1);
        std::size_t used = 0;
        if (head == "en") {
            int n = std::stoi(arg, &used);
            if (used != arg.size() || n < 0 || n > 6) throw std::invalid_argument("en:N needs 0 <= N <= 6");
            return energy(n);
        }
        double k = std::stod(arg, &used);
        if (used != arg.size() || !(k > 0.0)) throw std::invalid_argument("kappa must be positive: " + s);
        if (head == "beta") return beta(k);
        if (head == "hk") return hk(k);
        throw std::invalid_argument("unknown functional: " + s);
    }

private:
    static std::string format_number(double x) {
        std::string s = std::to_string(x);
        s.erase(s.find_last_not_of('0') + 1);
        if (!s.empty() && s.back() == '.') s.pop_back();
        return s;
    }
};

namespace detail {

// Lax data shared by the functional evaluations.
struct LaxData {
    LaxMatrix lax;
    std::vector<Vec> powers;
    std::vector<double> e;

    LaxData(const HardyState& q, int n_max) : lax(build_lax(q)), powers(lax_powers(lax, std::max(n_max, 0))) {
        for (int n = 0; n <= std::max(n_max, 0); ++n)
            e.push_back(inner(q.geo, powers[n / 2], powers[n - n / 2]).real());
    }
};

struct ResolventData {
    double kappa;
    Vec m;
    Vec r; // (L+kappa)^{-1} m
    double beta;
    double mm; // ||m||^2
    double mr; // <m, r>
};

inline ResolventData resolvent_data(const HardyState& q, double kappa) {
    LaxMatrix lax = build_lax(q);
    ResolventVector rv = resolve(lax, kappa);
    Mat a = lax.matrix;
    a.diagonal().array() += kappa;
    Vec r = a.llt().solve(rv.m);
    return {kappa, rv.m, r, rv.beta, l2_sq(q.geo, rv.m), inner(q.geo, rv.m, r).real()};
}

inline int required_power(const Functional& f) {
    switch (f.kind) {
    case FunctionalKind::Mass: return 0;
    case FunctionalKind::Momentum: return 1;
    case FunctionalKind::Hamiltonian: return 2;
    case FunctionalKind::Energy: return f.n;
    default: return 1;
    }
}

// P_N [u C+(q vbar)]
inline Vec u_cplus_qvbar(const HardyState& q, const Vec& u, const Vec& v) {
    return project(multiply(as_full(q.geo, u), cauchy_szego(times_conj(q.geo, q.coeffs, v), Side::Plus)), q.size());
}

// P_N [u R-(q vbar)] with R- keeping xi <= 0
inline Vec u_reflected_qvbar(const HardyState& q, const Vec& u, const Vec& v) {
    return project(multiply(as_full(q.geo, u), reflected_projection(times_conj(q.geo, q.coeffs, v))), q.size());
}

} // namespace detail

struct FunctionalValues {
    std::vector<double> e;
    double beta = 0.0;
    double beta_dk = 0.0;
};

inline double hk_value(const HardyState& q, double kappa, double e0, double e1, double beta, double beta_dk) {
    const double s = sigma(q.sign);
    double e1k = -kappa * kappa * beta + kappa * e0;
    double e2k = kappa * kappa * kappa * beta - kappa * kappa * e0 + kappa * e1;
    if (q.geo.kind == Kind::Line) return 0.5 * e2k;
    double lm = e0 - 2.0 * kappa * beta - kappa * kappa * beta_dk;
    return 0.5 * e2k + s * 3.0 / (4.0 * pi) * e0 * e1k + e0 * e0 * e0 / (4.0 * pi * pi) -
           s / (4.0 * pi) * kappa * e0 * lm;
}

inline double momentum_value(const HardyState& q, const std::vector<double>& e) {
    double p = -0.5 * e[1];
    if (q.geo.kind == Kind::Torus) p -= sigma(q.sign) / (4.0 * pi) * e[0] * e[0];
    return p;
}

inline double hamiltonian_value(const HardyState& q, const std::vector<double>& e) {
    double h = 0.5 * e[2];
    if (q.geo.kind == Kind::Torus)
        h += sigma(q.sign) * 3.0 / (4.0 * pi) * e[0] * e[1] + e[0] * e[0] * e[0] / (4.0 * pi * pi);
    return h;
}

inline double evaluate(const Functional& f, const HardyState& q) {
    switch (f.kind) {
    case FunctionalKind::Mass: return mass(q);
    case FunctionalKind::Momentum: return momentum_value(q, energies(q, 1));
    case FunctionalKind::Hamiltonian: return hamiltonian_value(q, energies(q, 2));
    case FunctionalKind::Energy: return energies(q, f.n)[f.n];
    case FunctionalKind::Beta: return beta(q, f.kappa);
    case FunctionalKind::Hk: {
        auto e = energies(q, 1);
        ResolventVector r = resolve(q, f.kappa);
        return hk_value(q, f.kappa, e[0], e[1], r.beta, -l2_sq(q.geo, r.m));
    }
    }
    return 0.0;
}

// Analytic Wirtinger derivatives dF/dqbar.
namespace detail {

inline Vec wirtinger_energy(const HardyState& q, const LaxData& d, int n) {
    Vec out = d.powers[n];
    const double s = sigma(q.sign);
    for (int j = 0; j <= n - 1; ++j) out -= s * u_reflected_qvbar(q, d.powers[j], d.powers[n - 1 - j]);
    return out;
}

inline Vec wirtinger_beta(const HardyState& q, const ResolventData& r) {
    return r.m + sigma(q.sign) * u_reflected_qvbar(q, r.m, r.m);
}

inline Vec wirtinger_beta_dk(const HardyState& q, const ResolventData& r) {
    return -r.r - sigma(q.sign) * (u_reflected_qvbar(q, r.r, r.m) + u_reflected_qvbar(q, r.m, r.r));
}

} // namespace detail

inline Vec wirtinger(const Functional& f, const HardyState& q) {
    const double s = sigma(q.sign);
    const bool torus = q.geo.kind == Kind::Torus;
    if (f.kind == FunctionalKind::Mass) return q.coeffs;
    if (f.kind == FunctionalKind::Beta) return detail::wirtinger_beta(q, detail::resolvent_data(q, f.kappa));
    detail::LaxData d(q, detail::required_power(f));
    const auto& e = d.e;
    auto de = [&](int n) { return detail::wirtinger_energy(q, d, n); };
    switch (f.kind) {
    case FunctionalKind::Energy: return de(f.n);
    case FunctionalKind::Momentum: {
        Vec out = -0.5 * de(1);
        if (torus) out -= s / (2.0 * pi) * e[0] * de(0);
        return out;
    }
    case FunctionalKind::Hamiltonian: {
        Vec out = 0.5 * de(2);
        if (torus)
            out += s * 3.0 / (4.0 * pi) * (e[1] * de(0) + e[0] * de(1)) + 3.0 / (4.0 * pi * pi) * e[0] * e[0] * de(0);
        return out;
    }
    case FunctionalKind::Hk: {
        const double k = f.kappa;
        auto r = detail::resolvent_data(q, k);
        Vec db = detail::wirtinger_beta(q, r);
        Vec d0 = de(0), d1 = de(1);
        Vec d1k = -k * k * db + k * d0;
        Vec d2k = k * k * k * db - k * k * d0 + k * d1;
        if (!torus) return 0.5 * d2k;
        double e1k = -k * k * r.beta + k * e[0];
        double lm = e[0] - 2.0 * k * r.beta + k * k * r.mm;
        Vec dlm = d0 - 2.0 * k * db - k * k * detail::wirtinger_beta_dk(q, r);
        return 0.5 * d2k + s * 3.0 / (4.0 * pi) * (e1k * d0 + e[0] * d1k) + 3.0 / (4.0 * pi * pi) * e[0] * e[0] * d0 -
               s / (4.0 * pi) * k * (lm * d0 + e[0] * dlm);
    }
    default: break;
    }
    return q.coeffs;
}

inline double default_step(const HardyState& q) { return 1e-5 * std::max(1.0, std::sqrt(mass(q))); }

// Central-difference Wirtinger derivative: D_k = (dF(e_k) + i dF(i e_k)) / (2w).
inline Vec wirtinger_oracle(const Functional& f, const HardyState& q, double h = 0.0) {
    if (h <= 0.0) h = default_step(q);
    const int n = q.size();
    const cplx I(0.0, 1.0);
    Vec out(n);
    auto dF = [&](const Vec& dir) {
        HardyState p = q.with_coeffs(q.coeffs + h * dir);
        HardyState m = q.with_coeffs(q.coeffs - h * dir);
        return (evaluate(f, p) - evaluate(f, m)) / (2.0 * h);
    };
    for (int k = 0; k < n; ++k) {
        Vec e = Vec::Zero(n);
        e[k] = 1.0;
        out[k] = (dF(e) + I * dF(I * e)) / (2.0 * q.geo.weight());
    }
    return out;
}

// Closed-form symplectic gradients.
namespace detail {

inline Vec grad_energy(const HardyState& q, const LaxData& d, int n) {
    const cplx I(0.0, 1.0);
    if (n == 0) return -2.0 * I * q.coeffs;
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    Vec out = -2.0 * I * d.powers[n];
    for (int j = 0; j <= n - 1; ++j) {
        int l = n - 1 - j;
        Vec term = u_cplus_qvbar(q, d.powers[j], d.powers[l]) - c * d.e[l] * d.powers[j];
        out -= s * 2.0 * I * term;
    }
    out += s * 2.0 * I * c * double(n) * d.e[n - 1] * q.coeffs;
    return out;
}

inline Vec grad_beta(const HardyState& q, const ResolventData& r) {
    const cplx I(0.0, 1.0);
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    return -2.0 * I * r.m + s * 2.0 * I * u_cplus_qvbar(q, r.m, r.m) -
           s * 2.0 * I * c * (r.beta * r.m + r.mm * q.coeffs);
}

// d/dkappa of grad_beta
inline Vec grad_beta_dk(const HardyState& q, const ResolventData& r) {
    const cplx I(0.0, 1.0);
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    return 2.0 * I * r.r - s * 2.0 * I * (u_cplus_qvbar(q, r.r, r.m) + u_cplus_qvbar(q, r.m, r.r)) -
           s * 2.0 * I * c * (-r.beta * r.r - r.mm * r.m - 2.0 * r.mr * q.coeffs);
}

} // namespace detail

// Momentum, Hamiltonian and H_kappa gradients are assembled from the E_n and
// beta gradients through the defining combinations.
inline Vec grad(const Functional& f, const HardyState& q) {
    const double s = sigma(q.sign);
    const bool torus = q.geo.kind == Kind::Torus;
    const cplx I(0.0, 1.0);
    if (f.kind == FunctionalKind::Mass) return -2.0 * I * q.coeffs;
    if (f.kind == FunctionalKind::Beta) return detail::grad_beta(q, detail::resolvent_data(q, f.kappa));
    detail::LaxData d(q, detail::required_power(f));
    const auto& e = d.e;
    auto ge = [&](int n) { return detail::grad_energy(q, d, n); };
    switch (f.kind) {
    case FunctionalKind::Energy: return ge(f.n);
    case FunctionalKind::Momentum: {
        Vec out = -0.5 * ge(1);
        if (torus) out -= s / (2.0 * pi) * e[0] * ge(0);
        return out;
    }
    case FunctionalKind::Hamiltonian: {
        Vec out = 0.5 * ge(2);
        if (torus)
            out += s * 3.0 / (4.0 * pi) * (e[1] * ge(0) + e[0] * ge(1)) + 3.0 / (4.0 * pi * pi) * e[0] * e[0] * ge(0);
        return out;
    }
    case FunctionalKind::Hk: {
        const double k = f.kappa;
        auto r = detail::resolvent_data(q, k);
        Vec gb = detail::grad_beta(q, r);
        Vec g0 = ge(0), g1 = ge(1);
        Vec g1k = -k * k * gb + k * g0;
        Vec g2k = k * k * k * gb - k * k * g0 + k * g1;
        if (!torus) return 0.5 * g2k;
        double e1k = -k * k * r.beta + k * e[0];
        double lm = e[0] - 2.0 * k * r.beta + k * k * r.mm;
        Vec glm = g0 - 2.0 * k * gb - k * k * detail::grad_beta_dk(q, r);
        return 0.5 * g2k + s * 3.0 / (4.0 * pi) * (e1k * g0 + e[0] * g1k) + 3.0 / (4.0 * pi * pi) * e[0] * e[0] * g0 -
               s / (4.0 * pi) * k * (lm * g0 + e[0] * glm);
    }
    default: break;
    }
    return q.coeffs;
}

// 2 J(q) dF/dqbar with the finite-difference Wirtinger derivative.
inline Vec grad_oracle(const Functional& f, const HardyState& q, double h = 0.0) {
    return 2.0 * j_map(q).apply(wirtinger_oracle(f, q, h));
}

struct GradientReport {
    std::string name;
    Vec analytic;
    Vec oracle;
    double discrepancy = 0.0;
};

inline GradientReport gradient_report(const Functional& f, const HardyState& q, double h = 0.0) {
    GradientReport r{f.name(), grad(f, q), grad_oracle(f, q, h), 0.0};
    r.discrepancy = std::sqrt(l2_sq(q.geo, r.analytic - r.oracle));
    return r;
}

// {F, G} = 4 Re <dF/dqbar, J(q) dG/dqbar>
inline double poisson_bracket_with(const RealLinearOperator& j, const Functional& f, const Functional& g,
                                   const HardyState& q) {
    return 4.0 * inner(q.geo, wirtinger(f, q), j.apply(wirtinger(g, q))).real();
}

inline double poisson_bracket(const Functional& f, const Functional& g, const HardyState& q) {
    return poisson_bracket_with(j_map(q), f, g, q);
}

// Omega(q) grad beta - 2 dbeta/dqbar, relative to ||dbeta/dqbar||.
inline double beta_identity_residual(const HardyState& q, double kappa) {
    auto r = detail::resolvent_data(q, kappa);
    Vec lhs = omega_apply(q, detail::grad_beta(q, r));
    Vec rhs = 2.0 * detail::wirtinger_beta(q, r);
    double scale = std::sqrt(l2_sq(q.geo, rhs));
    double diff = std::sqrt(l2_sq(q.geo, lhs - rhs));
    return scale > 0.0 ? diff / scale : diff;
}

// Norm expressions used by the Hamiltonian cross-checks.
struct NormPieces {
    double m = 0.0;      // ||q||^2
    double h12 = 0.0;    // ||q||_{Hdot^1/2}^2
    double h1 = 0.0;     // ||q||_{Hdot^1}^2
    double l4 = 0.0;     // ||q||_{L4}^4
    double l6 = 0.0;     // ||q||_{L6}^6
    double lq = 0.0;     // ||q' -+ i q C+(|q|^2)||^2
    double cp12 = 0.0;   // ||C+(|q|^2)||_{Hdot^1/2}^2
    double q2_12 = 0.0;  // ||q^2||_{Hdot^1/2}^2
};

inline NormPieces norm_pieces(const HardyState& q) {
    const double s = sigma(q.sign);
    FullState fq = to_full(q);
    FullState a2 = abs2(q);
    FullState cp = cauchy_szego(a2, Side::Plus);
    FullState qc = multiply(fq, cp);
    FullState dq = derivative(fq);
    // q' -+ i q C+(|q|^2)
    FullState lq = qc;
    lq.coeffs *= -s * cplx(0.0, 1.0);
    for (int k = 0; k < q.size(); ++k) lq.coeffs[k - lq.lo] += dq.at(k);
    NormPieces p;
    p.m = mass(q);
    p.h12 = hdot_sq(fq, 0.5);
    p.h1 = hdot_sq(fq, 1.0);
    p.l4 = l2_sq(a2);
    p.l6 = l2_sq(multiply(a2, fq));
    p.lq = l2_sq(lq);
    p.cp12 = hdot_sq(cp, 0.5);
    p.q2_12 = hdot_sq(multiply(fq, fq), 0.5);
    return p;
}

// Momentum from norms: -1/2 ||q||_{Hdot^1/2}^2 +- 1/4 ||q||_{L4}^4 (-+ ||q||^4/8pi on the torus).
inline double momentum_display(const HardyState& q) {
    const double s = sigma(q.sign);
    NormPieces p = norm_pieces(q);
    double v = -0.5 * p.h12 + s * 0.25 * p.l4;
    if (q.geo.kind == Kind::Torus) v -= s / (8.0 * pi) * p.m * p.m;
    return v;
}

// The norm expressions for H. Torus: three displays; line: one.
inline std::vector<double> hamiltonian_displays(const HardyState& q) {
    const double s = sigma(q.sign);
    NormPieces p = norm_pieces(q);
    if (q.geo.kind == Kind::Line) return {0.5 * p.lq};
    const double m = p.m, m3 = m * m * m;
    double mom = -0.5 * p.h12 + s * 0.25 * p.l4 - s / (8.0 * pi) * m * m;
    double d1 = 0.5 * p.lq - s * 3.0 / (2.0 * pi) * mom * m - m3 / (8.0 * pi * pi);
    double d2 = 0.5 * p.lq + s * 3.0 / (4.0 * pi) * m * p.h12 - 3.0 / (8.0 * pi) * m * p.l4 + m3 / (16.0 * pi * pi);
    double d3 = 0.5 * p.h1 - s * 0.5 * p.cp12 - s * 0.25 * p.q2_12 + s / (2.0 * pi) * m * p.h12 + p.l6 / 6.0 -
                p.l4 * m / (4.0 * pi) + m3 / (12.0 * pi * pi);
    return {d1, d2, d3};
}

// H(q) + E_0^3 / 32pi^2 (torus), nonnegative by the coercivity bound.
inline double coercivity_slack(const HardyState& q) {
    auto e = energies(q, 2);
    return hamiltonian_value(q, e) + e[0] * e[0] * e[0] / (32.0 * pi * pi);
}

} // namespace ccm
