#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccm/lax.hpp"
#include "ccm/symplectic.hpp"

namespace ccm {

enum class FlowKind { CCM, Eq195, Beta, Energy, Hk, Momentum };

struct FlowSpec {
    FlowKind field = FlowKind::CCM;
    int n = 0;
    double kappa = 0.0;
    Geometry geo;
    Sign sign = Sign::Focusing;
    double dt = 1e-4;
    double t_final = 1.0;
    int monitor_stride = 100;
    double probe_kappa = 3.0;    // beta(kappa*) monitor
    double probe_varkappa = 4.0; // equicontinuity monitor
    bool monitor_lax = true;

    static FlowSpec for_state(const HardyState& q, const std::string& field, double dt, double t_final,
                              int stride = 100) {
        FlowSpec s;
        s.set_field(field);
        s.geo = q.geo;
        s.sign = q.sign;
        s.dt = dt;
        s.t_final = t_final;
        s.monitor_stride = stride;
        s.validate();
        return s;
    }

    // ccm | eq195 | momentum | beta:K | en:N | hk:K
    void set_field(const std::string& f) {
        if (f == "ccm") {
            field = FlowKind::CCM;
            return;
        }
        if (f == "eq195") {
            field = FlowKind::Eq195;
            return;
        }
        if (f == "momentum") {
            field = FlowKind::Momentum;
            return;
        }
        auto colon = f.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("unknown flow: " + f);
        std::string head = f.substr(0, colon), arg = f.substr(colon + 1);
        std::size_t used = 0;
        if (head == "en") {
            n = std::stoi(arg, &used);
            if (used != arg.size() || n < 0 || n > 4) throw std::invalid_argument("en:N needs 0 <= N <= 4");
            field = FlowKind::Energy;
            return;
        }
        kappa = std::stod(arg, &used);
        if (used != arg.size() || !(kappa > 0.0)) throw std::invalid_argument("kappa must be positive: " + f);
        if (head == "beta") field = FlowKind::Beta;
        else if (head == "hk") field = FlowKind::Hk;
        else throw std::invalid_argument("unknown flow: " + f);
    }

    std::string field_name() const {
        switch (field) {
        case FlowKind::CCM: return "ccm";
        case FlowKind::Eq195: return "eq195";
        case FlowKind::Momentum: return "momentum";
        case FlowKind::Energy: return "en:" + std::to_string(n);
        case FlowKind::Beta: return "beta:" + Functional::beta(kappa).name().substr(5);
        case FlowKind::Hk: return "hk:" + Functional::hk(kappa).name().substr(3);
        }
        return {};
    }

    // Functional whose symplectic gradient is the field.
    Functional functional() const {
        switch (field) {
        case FlowKind::CCM: return Functional::hamiltonian();
        case FlowKind::Eq195: return Functional::energy(2);
        case FlowKind::Momentum: return Functional::momentum();
        case FlowKind::Energy: return Functional::energy(n);
        case FlowKind::Beta: return Functional::beta(kappa);
        case FlowKind::Hk: return Functional::hk(kappa);
        }
        return {};
    }

    // Eq195 is the flow of E_2 / 2.
    double functional_scale() const { return field == FlowKind::Eq195 ? 0.5 : 1.0; }

    long steps() const {
        double r = t_final / dt;
        long n_steps = std::lround(r);
        if (std::abs(r - double(n_steps)) > 1e-9 * std::max(1.0, r))
            throw std::invalid_argument("t_final/dt must be an integer");
        return n_steps;
    }

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
        if (!(t_final >= 0.0)) throw std::invalid_argument("t_final must be nonnegative");
        if (monitor_stride <= 0) throw std::invalid_argument("monitor_stride must be positive");
        geo.validate();
        steps();
    }
};

namespace detail {

inline Vec dx_coeffs(const HardyState& q) {
    Vec out(q.size());
    for (int k = 0; k < q.size(); ++k) out[k] = cplx(0.0, q.geo.xi(k)) * q.coeffs[k];
    return out;
}

// i q'' +- 2 q C+(|q|^2)'
inline Vec ccm_core(const HardyState& q) {
    const double s = sigma(q.sign);
    Vec nl = project(multiply(to_full(q), derivative(cauchy_szego(abs2(q), Side::Plus))), q.size());
    Vec out(q.size());
    for (int k = 0; k < q.size(); ++k) {
        double xi = q.geo.xi(k);
        out[k] = cplx(0.0, -xi * xi) * q.coeffs[k] + 2.0 * s * nl[k];
    }
    return out;
}

// E_1 by the spectral path.
inline double spectral_e1(const HardyState& q) { return inner(q.geo, q.coeffs, apply_lax(q, q.coeffs)).real(); }

inline Vec hk_torus_field(const HardyState& q, double k) {
    const cplx I(0.0, 1.0);
    const double s = sigma(q.sign);
    ResolventData rd = resolvent_data(q, k);
    const Vec& m = rd.m;
    const Vec& r = rd.r;
    const Vec& qq = q.coeffs;
    const double b = rd.beta, mm = rd.mm, mr = rd.mr;
    const double e0 = mass(q);
    const double k2 = k * k, k3 = k2 * k;
    const double lm = e0 - 2.0 * k * b + k2 * mm;
    Vec mcm = u_cplus_qvbar(q, m, m);
    Vec rcm = u_cplus_qvbar(q, r, m);
    Vec mcr = u_cplus_qvbar(q, m, r);
    Vec qp = dx_coeffs(q);

    Vec bracket = -I * m + s * I * mcm - s * I / (2.0 * pi) * (b * m + mm * qq);
    Vec out = (k3 - s * 3.0 / (2.0 * pi) * k2 * e0) * bracket;
    out += I * k2 * qq - k * qp - s * 2.0 * I / pi * k * e0 * qq + s * 3.0 * I / (2.0 * pi) * k2 * b * qq -
           3.0 * I / (2.0 * pi * pi) * e0 * e0 * qq + s * I / (2.0 * pi) * k * lm * qq;
    Vec brace = -I * qq + 2.0 * I * k * m - s * 2.0 * I * k * mcm + s * I / pi * k * (b * m + mm * qq) - I * k2 * r +
                s * I * k2 * (rcm + mcr) - s * I / (2.0 * pi) * k2 * (b * r + mm * m) - s * I / pi * k2 * mr * qq;
    out -= s / (2.0 * pi) * k * e0 * brace;
    return out;
}

// H_kappa = E_2^kappa / 2 on the line window.
inline Vec hk_line_field(const HardyState& q, double k) {
    const cplx I(0.0, 1.0);
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    ResolventVector rv = resolve(q, k);
    const Vec& m = rv.m;
    const Vec& qq = q.coeffs;
    double mm = l2_sq(q.geo, m);
    Vec beta_field = -2.0 * I * m + s * 2.0 * I * u_cplus_qvbar(q, m, m) - s * 2.0 * I * c * (rv.beta * m + mm * qq);
    return 0.5 * k * k * k * beta_field + I * k * k * qq - k * dx_coeffs(q) + s * 2.0 * I * c * k * mass(q) * qq;
}

} // namespace detail

inline void require_spec_state(const FlowSpec& spec, const HardyState& q) {
    if (!(spec.geo == q.geo) || spec.sign != q.sign) throw DimensionError("state does not match the flow geometry");
}

// Symplectic gradient of the flow's functional by the direct formulas; the E_n and
// beta fields go through their Peter operators.
inline HardyState vector_field(const FlowSpec& spec, const HardyState& q) {
    const cplx I(0.0, 1.0);
    const double s = sigma(q.sign);
    const double c = mean_weight(q.geo);
    const int n_modes = q.size();
    Vec out;
    switch (spec.field) {
    case FlowKind::CCM: {
        double e0 = mass(q);
        out = detail::ccm_core(q);
        if (q.geo.kind == Kind::Torus) {
            out -= s / pi * e0 * detail::dx_coeffs(q);
        } else {
            double e1 = detail::spectral_e1(q);
            out += s * c * e0 * detail::dx_coeffs(q) + s * 3.0 * I * c * e1 * q.coeffs;
        }
        break;
    }
    case FlowKind::Eq195: {
        // torus momentum with 1/2pi replaced by 1/period
        double m0 = mass(q);
        double p = -0.5 * detail::spectral_e1(q) - s * 0.5 * c * m0 * m0;
        out = detail::ccm_core(q) + s * c * m0 * detail::dx_coeffs(q) - s * 6.0 * I * c * p * q.coeffs -
              3.0 * I * c * c * m0 * m0 * q.coeffs;
        break;
    }
    case FlowKind::Momentum:
        out = detail::dx_coeffs(q);
        if (q.geo.kind == Kind::Line) out -= s * 2.0 * I * c * mass(q) * q.coeffs;
        break;
    case FlowKind::Energy: out = peter_energy(q, spec.n, n_modes) * q.coeffs; break;
    case FlowKind::Beta: out = peter_beta(q, spec.kappa, n_modes) * q.coeffs; break;
    case FlowKind::Hk:
        out = q.geo.kind == Kind::Torus ? detail::hk_torus_field(q, spec.kappa) : detail::hk_line_field(q, spec.kappa);
        break;
    }
    return q.with_coeffs(out);
}

// Diagonal linear part split off by the integrator.
inline cplx linear_symbol(const FlowSpec& spec, double xi) {
    const cplx I(0.0, 1.0);
    switch (spec.field) {
    case FlowKind::CCM:
    case FlowKind::Eq195: return -I * xi * xi;
    case FlowKind::Momentum: return I * xi;
    case FlowKind::Energy: return -2.0 * I * std::pow(xi, spec.n);
    case FlowKind::Beta: return -2.0 * I / (xi + spec.kappa);
    case FlowKind::Hk: return -I * spec.kappa * xi * xi / (xi + spec.kappa);
    }
    return {};
}

// Lawson RK4 with the exact mode-wise propagator for the linear part.
class LawsonRK4 {
public:
    LawsonRK4(const FlowSpec& spec, int n_modes, double h) : spec_(spec), h_(h), lin_(n_modes), full_(n_modes), half_(n_modes) {
        for (int k = 0; k < n_modes; ++k) {
            lin_[k] = linear_symbol(spec, spec.geo.xi(k));
            full_[k] = std::exp(h * lin_[k]);
            half_[k] = std::exp(0.5 * h * lin_[k]);
        }
    }

    HardyState step(const HardyState& q) const {
        Vec k1 = remainder(q.coeffs, q);
        Vec k2 = remainder(half_.cwiseProduct(q.coeffs + 0.5 * h_ * k1), q);
        Vec k3 = remainder(half_.cwiseProduct(q.coeffs) + 0.5 * h_ * k2, q);
        Vec k4 = remainder(full_.cwiseProduct(q.coeffs) + h_ * half_.cwiseProduct(k3), q);
        Vec next = full_.cwiseProduct(q.coeffs) +
                   (h_ / 6.0) * (full_.cwiseProduct(k1) + 2.0 * half_.cwiseProduct(k2 + k3) + k4);
        return q.with_coeffs(next);
    }

private:
    Vec remainder(const Vec& v, const HardyState& like) const {
        HardyState s = like.with_coeffs(v);
        return vector_field(spec_, s).coeffs - lin_.cwiseProduct(v);
    }

    FlowSpec spec_;
    double h_;
    Vec lin_, full_, half_;
};

// Peter operator P(q) on modes 0..size-1 with dL/dt = [P, L] and qdot = P q. Composite
// Hamiltonians combine the beta and E_n operators with the chain rule.
inline Mat peter_operator(const FlowSpec& spec, const HardyState& q, int size) {
    const double s = sigma(q.sign);
    const bool torus = q.geo.kind == Kind::Torus;
    auto e = energies(q, 1);
    switch (spec.field) {
    case FlowKind::Energy: return peter_energy(q, spec.n, size);
    case FlowKind::Beta: return peter_beta(q, spec.kappa, size);
    case FlowKind::Eq195: return 0.5 * peter_energy(q, 2, size);
    case FlowKind::CCM: {
        Mat p = 0.5 * peter_energy(q, 2, size);
        if (torus) {
            Mat p0 = peter_energy(q, 0, size), p1 = peter_energy(q, 1, size);
            p += s * 3.0 / (4.0 * pi) * (e[1] * p0 + e[0] * p1) + 3.0 / (4.0 * pi * pi) * e[0] * e[0] * p0;
        }
        return p;
    }
    case FlowKind::Momentum: {
        Mat p = -0.5 * peter_energy(q, 1, size);
        if (torus) p -= s / (2.0 * pi) * e[0] * peter_energy(q, 0, size);
        return p;
    }
    case FlowKind::Hk: {
        const double k = spec.kappa, k2 = k * k;
        Mat p0 = peter_energy(q, 0, size), p1 = peter_energy(q, 1, size);
        Mat pb = peter_beta(q, k, size);
        Mat pe2 = k2 * k * pb - k2 * p0 + k * p1;
        if (!torus) return 0.5 * pe2;
        ResolventVector rv = resolve(q, k);
        double b = rv.beta, mm = l2_sq(q.geo, rv.m);
        double e1k = -k2 * b + k * e[0];
        double lm = e[0] - 2.0 * k * b + k2 * mm;
        Mat pe1 = -k2 * pb + k * p0;
        Mat plm = p0 - 2.0 * k * pb - k2 * peter_beta_dk(q, k, size);
        return 0.5 * pe2 + s * 3.0 / (4.0 * pi) * (e1k * p0 + e[0] * pe1) + 3.0 / (4.0 * pi * pi) * e[0] * e[0] * p0 -
               s / (4.0 * pi) * k * (lm * p0 + e[0] * plm);
    }
    }
    return {};
}

struct LaxResidual {
    double commutator = 0.0; // ||(L(t+dt) - L(t-dt))/2dt - [P, L]||_HS on the leading block
    double peter = 0.0;      // ||qdot - P q||
};

// Centered residual at q with q(t +- dt) from single integrator steps; L and P are
// built at ext modes and compared on the leading N x N block.
inline LaxResidual lax_residual_at(const FlowSpec& spec, const HardyState& q, int ext = 0) {
    const int n_modes = q.size();
    if (ext <= 0) ext = 2 * n_modes;
    double h = spec.dt;
    HardyState fwd = LawsonRK4(spec, n_modes, h).step(q);
    HardyState bwd = LawsonRK4(spec, n_modes, -h).step(q);
    Mat lp = build_lax(fwd, ext).matrix, lm = build_lax(bwd, ext).matrix;
    Mat l = build_lax(q, ext).matrix;
    Mat p = peter_operator(spec, q, ext);
    Mat d = (lp - lm) / (2.0 * h) - (p * l - l * p);
    LaxResidual r;
    r.commutator = d.topLeftCorner(n_modes, n_modes).norm();
    Vec pq = p * padded(q.coeffs, ext);
    Vec diff = vector_field(spec, q).coeffs - pq.head(n_modes);
    r.peter = std::sqrt(l2_sq(q.geo, diff));
    return r;
}

struct Monitors {
    std::vector<double> mass, momentum, hamiltonian, beta, e2, e3, equi, tail, lax_residual, peter_residual;
};

struct TrajectoryRecord {
    FlowSpec spec;
    std::vector<double> times;
    std::vector<HardyState> states;
    Monitors monitors;
    HardyState final_state;
    bool blowup = false;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();
    bool threshold_flag = false; // focusing mass >= 2pi
    std::string message;
};

inline bool finite_state(const HardyState& q) { return q.coeffs.allFinite(); }

// Conserved quantities, the equicontinuity functional and the tail mass at q.
inline void record_monitors(const FlowSpec& spec, const HardyState& q, Monitors& m) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    auto e = energies(q, 3);
    m.mass.push_back(e[0]);
    m.momentum.push_back(momentum_value(q, e));
    m.hamiltonian.push_back(hamiltonian_value(q, e));
    m.e2.push_back(e[2]);
    m.e3.push_back(e[3]);
    try {
        m.beta.push_back(beta(q, spec.probe_kappa));
    } catch (const ThresholdError&) {
        m.beta.push_back(nan);
    }
    m.equi.push_back(equicontinuity_functional(q, spec.probe_varkappa));
    m.tail.push_back(tail_mass(q, q.size() / 2 + 1));
    if (spec.monitor_lax) {
        try {
            LaxResidual r = lax_residual_at(spec, q);
            m.lax_residual.push_back(r.commutator);
            m.peter_residual.push_back(r.peter);
        } catch (const ThresholdError&) {
            m.lax_residual.push_back(nan);
            m.peter_residual.push_back(nan);
        }
    } else {
        m.lax_residual.push_back(nan);
        m.peter_residual.push_back(nan);
    }
}

// Fixed-step integration. Non-finite states or a norm beyond 1e8 times the initial
// one stop the run and report blowup with the last finite state.
inline TrajectoryRecord evolve(const FlowSpec& spec, const HardyState& q0) {
    spec.validate();
    require_spec_state(spec, q0);
    TrajectoryRecord rec;
    rec.spec = spec;
    rec.threshold_flag = q0.sign == Sign::Focusing && mass(q0) >= 2.0 * pi;
    if (rec.threshold_flag) {
        if (spec.field != FlowKind::CCM && spec.field != FlowKind::Eq195)
            throw ThresholdError("focusing mass at or above 2pi", mass(q0));
        rec.message = "focusing mass at or above 2pi";
    }
    const long n_steps = spec.steps();
    LawsonRK4 rk(spec, q0.size(), spec.dt);
    const double limit = 1e8 * std::max(1.0, std::sqrt(mass(q0)));
    HardyState q = q0;
    auto record = [&](long i) {
        rec.times.push_back(double(i) * spec.dt);
        rec.states.push_back(q);
        record_monitors(spec, q, rec.monitors);
    };
    record(0);
    for (long i = 1; i <= n_steps; ++i) {
        HardyState next = rk.step(q);
        if (!finite_state(next) || std::sqrt(mass(next)) > limit) {
            rec.blowup = true;
            rec.blowup_time = double(i) * spec.dt;
            rec.message = "non-finite or overflowing state; last finite state kept";
            break;
        }
        q = std::move(next);
        if (i % spec.monitor_stride == 0 || i == n_steps) record(i);
    }
    rec.final_state = q;
    return rec;
}

// Final state only, no monitors.
inline HardyState evolve_state(const FlowSpec& spec, const HardyState& q0) {
    spec.validate();
    require_spec_state(spec, q0);
    LawsonRK4 rk(spec, q0.size(), spec.dt);
    HardyState q = q0;
    for (long i = 0, n = spec.steps(); i < n; ++i) q = rk.step(q);
    return q;
}

// Per-record Lax residuals of a stored trajectory.
inline std::vector<LaxResidual> lax_residual(const FlowSpec& spec, const TrajectoryRecord& traj) {
    std::vector<LaxResidual> out;
    for (const auto& q : traj.states) out.push_back(lax_residual_at(spec, q));
    return out;
}

// |F(t) - F(0)| / max(|F(0)|, 1), maximized over t.
inline double relative_drift(const std::vector<double>& series) {
    if (series.empty()) return 0.0;
    double f0 = series.front(), d = 0.0;
    for (double f : series) d = std::max(d, std::abs(f - f0));
    return d / std::max(std::abs(f0), 1.0);
}

struct EquicontinuityTrace {
    std::vector<double> functional;
    std::vector<double> tail;
    bool cascade_warning = false;
};

// The equicontinuity functional at varkappa and the tail mass above N/2; growth of the
// tail beyond 10x its initial value is flagged.
inline EquicontinuityTrace equicontinuity_monitor(const TrajectoryRecord& traj, double varkappa) {
    EquicontinuityTrace out;
    for (const auto& q : traj.states) {
        out.functional.push_back(equicontinuity_functional(q, varkappa));
        out.tail.push_back(tail_mass(q, q.size() / 2 + 1));
    }
    if (!out.tail.empty()) {
        double floor = std::max(out.tail.front(), 1e-14 * std::max(mass(traj.states.front()), 1e-300));
        for (double t : out.tail)
            if (t > 10.0 * floor) out.cascade_warning = true;
    }
    return out;
}

// ||(1+xi)^{-5} f||
inline double negative_norm(const HardyState& f, double order = 5.0) {
    double acc = 0.0;
    for (int k = 0; k < f.size(); ++k) acc += std::norm(f.coeffs[k]) * std::pow(1.0 + f.geo.xi(k), -2.0 * order);
    return std::sqrt(f.geo.weight() * acc);
}

struct HkConvergenceRow {
    double kappa = 0.0;
    double sup_distance = 0.0;     // sup_t ||q_Hk(t) - q_CCM(t)||
    double field_difference = 0.0; // ||grad(H_kappa - H)(q0)|| in the (1+xi)^{-5} norm
};

// H_kappa trajectories against the CCM trajectory from q0 over [0, t_final].
inline std::vector<HkConvergenceRow> hk_convergence(const HardyState& q0, const std::vector<double>& kappas,
                                                    double t_final, double dt) {
    FlowSpec base = FlowSpec::for_state(q0, "ccm", dt, t_final);
    const long n_steps = base.steps();
    std::vector<HardyState> ref{q0};
    LawsonRK4 rk(base, q0.size(), dt);
    for (long i = 0; i < n_steps; ++i) ref.push_back(rk.step(ref.back()));
    HardyState h0 = vector_field(base, q0);

    std::vector<HkConvergenceRow> rows;
    for (double k : kappas) {
        FlowSpec spec = base;
        spec.field = FlowKind::Hk;
        spec.kappa = k;
        LawsonRK4 rkk(spec, q0.size(), dt);
        HardyState q = q0;
        double sup = 0.0;
        for (long i = 1; i <= n_steps; ++i) {
            q = rkk.step(q);
            sup = std::max(sup, std::sqrt(l2_sq(q.geo, q.coeffs - ref[i].coeffs)));
        }
        HardyState d = q0.with_coeffs(vector_field(spec, q0).coeffs - h0.coeffs);
        rows.push_back({k, sup, negative_norm(d)});
    }
    return rows;
}

} // namespace ccm
