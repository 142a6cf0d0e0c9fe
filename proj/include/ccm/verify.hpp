#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ccm/flows.hpp"
#include "ccm/lax.hpp"
#include "ccm/state_io.hpp"
#include "ccm/states.hpp"
#include "ccm/symplectic.hpp"

namespace ccm {

// Deliberate sign flips used to confirm that the suites notice a broken formula.
enum class Mutation { None, Theta, Lax, Hamiltonian };

inline Mutation mutation_from_string(const std::string& s) {
    if (s == "none") return Mutation::None;
    if (s == "theta") return Mutation::Theta;
    if (s == "lax") return Mutation::Lax;
    if (s == "hamiltonian") return Mutation::Hamiltonian;
    throw std::invalid_argument("unknown mutation: " + s);
}

struct VerifyConfig {
    std::uint64_t seed = 1;
    int n_modes = 64;
    int trials = 20;
    double half_length = 10.0;
    double line_width = 1.2;
    Mutation mutation = Mutation::None;
};

struct Check {
    std::string name;
    double value = 0.0;
    double bound = 0.0;
    std::string relation; // "<=" or ">="
    bool passed = false;
};

struct SuiteReport {
    std::string name;
    std::vector<Check> checks;
    json data = json::object();
    double seconds = 0.0;

    bool passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }

    void le(const std::string& n, double v, double b) { checks.push_back({n, v, b, "<=", v <= b}); }
    void ge(const std::string& n, double v, double b) { checks.push_back({n, v, b, ">=", v >= b}); }

    json to_json() const {
        json cs = json::array();
        for (const auto& c : checks)
            cs.push_back({{"name", c.name}, {"value", c.value}, {"bound", c.bound}, {"relation", c.relation},
                          {"passed", c.passed}});
        return {{"suite", name}, {"passed", passed()}, {"seconds", seconds}, {"checks", cs}, {"data", data}};
    }
};

namespace detail {

inline std::mt19937_64 suite_rng(std::uint64_t seed, std::uint64_t salt) {
    std::seed_seq seq{seed, salt};
    return std::mt19937_64(seq);
}

inline Geometry suite_geometry(const VerifyConfig& c, Kind k, int n = 0) {
    if (n <= 0) n = c.n_modes;
    return k == Kind::Torus ? Geometry::torus(n) : Geometry::line(n, c.half_length);
}

inline RandomOptions suite_options(const VerifyConfig& c) {
    RandomOptions o;
    o.line_width = c.line_width;
    return o;
}

inline HardyState flipped(HardyState q) {
    q.sign = q.sign == Sign::Focusing ? Sign::Defocusing : Sign::Focusing;
    return q;
}

inline double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline double rel_diff(const Geometry& g, const Vec& a, const Vec& b) {
    return std::sqrt(l2_sq(g, a - b)) / std::max(std::sqrt(l2_sq(g, b)), 1.0);
}

// Finite-difference dF/dqbar of an arbitrary functional.
inline Vec fd_wirtinger(const std::function<double(const HardyState&)>& f, const HardyState& q, double h) {
    const int n = q.size();
    const cplx I(0.0, 1.0);
    Vec out(n);
    auto d = [&](const Vec& dir) {
        return (f(q.with_coeffs(q.coeffs + h * dir)) - f(q.with_coeffs(q.coeffs - h * dir))) / (2.0 * h);
    };
    for (int k = 0; k < n; ++k) {
        Vec e = Vec::Zero(n);
        e[k] = 1.0;
        out[k] = (d(e) + I * d(I * e)) / (2.0 * q.geo.weight());
    }
    return out;
}

// Torus Hamiltonian with the sign of the E_0 E_1 coupling reversed.
inline double mutated_hamiltonian(const HardyState& q) {
    auto e = energies(q, 2);
    double h = 0.5 * e[2];
    if (q.geo.kind == Kind::Torus)
        h += -sigma(q.sign) * 3.0 / (4.0 * pi) * e[0] * e[1] + e[0] * e[0] * e[0] / (4.0 * pi * pi);
    return h;
}

} // namespace detail

// <f, (2L_0+2)^{-1} f> <= ||f||_{L1}^2 / 4pi on the torus; on the line
// <f, (2L_0)^{-1} f> <= ||f||_{L1}^2 / 4pi with f a sum of packets a_j / (x - z_j)^2.
inline SuiteReport carleman_check(Kind kind, int trials, std::uint64_t seed, int n_modes = 64,
                                  double line_width = 1.2) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r;
    r.name = "carleman_" + to_string(kind);
    auto rng = detail::suite_rng(seed, kind == Kind::Torus ? 11 : 12);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = -1e300, max_ratio = 0.0;

    if (kind == Kind::Torus) {
        Geometry g = Geometry::torus(n_modes, 16 * next_pow2(n_modes));
        auto check = [&](const Vec& c) {
            double lhs = 0.0;
            for (int k = 0; k < c.size(); ++k) lhs += std::norm(c[k]) / (2.0 * k + 2.0);
            lhs *= g.weight();
            Vec s = synthesize(as_full(g, c), g.grid_points);
            double l1 = s.cwiseAbs().sum() * g.dx();
            double rhs = l1 * l1 / (4.0 * pi);
            return std::pair{lhs, rhs};
        };
        auto [l1, r1] = check(Vec::Unit(n_modes, 1));
        r.data["single_mode"] = {{"lhs", l1}, {"rhs", r1}, {"ratio", l1 / r1}};
        r.le("single_mode_ratio_error", std::abs(l1 / r1 - 0.5), 1e-9);
        auto [lc, rc] = check(Vec::Unit(n_modes, 0));
        r.data["constant"] = {{"lhs", lc}, {"rhs", rc}, {"ratio", lc / rc}};
        auto [lz, rz] = check(Vec::Zero(n_modes));
        r.le("zero", lz - rz, 0.0);
        for (int t = 0; t < trials; ++t) {
            HardyState f = random_state(g, Sign::Focusing, 1.0, rng, RandomOptions{n_modes / 2});
            auto [lhs, rhs] = check(f.coeffs);
            worst = std::max(worst, lhs - rhs);
            max_ratio = std::max(max_ratio, lhs / rhs);
        }
    } else {
        // f = -sum a_j / (x - z_j)^2 with Im z_j < 0, fhat(xi) = sum a_j xi e^{-i xi z_j};
        // lhs = pi int_0^inf |fhat|^2 / xi in closed form
        auto check = [&](const std::vector<cplx>& a, const std::vector<cplx>& z) {
            const size_t packets = a.size();
            cplx lhs = 0.0;
            for (size_t j = 0; j < packets; ++j)
                for (size_t k = 0; k < packets; ++k) {
                    cplx s = cplx(0.0, 1.0) * (z[j] - std::conj(z[k]));
                    lhs += a[j] * std::conj(a[k]) / (s * s);
                }
            auto fx = [&](double x) {
                cplx v = 0.0;
                for (size_t j = 0; j < packets; ++j) v -= a[j] / ((x - z[j]) * (x - z[j]));
                return v;
            };
            // x = tan(theta), midpoint rule with Richardson extrapolation
            auto midpoint = [&](int m) {
                double acc = 0.0;
                for (int i = 0; i < m; ++i) {
                    double th = -0.5 * pi + (i + 0.5) * pi / m;
                    double c = std::cos(th);
                    acc += std::abs(fx(std::tan(th))) / (c * c);
                }
                return acc * pi / m;
            };
            double coarse = midpoint(20000), fine = midpoint(40000);
            double l1 = (4.0 * fine - coarse) / 3.0;
            return std::pair{pi * lhs.real(), l1 * l1 / (4.0 * pi)};
        };
        // -1/(x+i)^2 attains equality
        auto [le, re] = check({cplx(1.0)}, {cplx(0.0, -1.0)});
        r.data["extremal"] = {{"lhs", le}, {"rhs", re}, {"ratio", le / re}};
        for (int t = 0; t < trials; ++t) {
            int packets = 1 + static_cast<int>(3.0 * unit(rng)) % 3;
            std::vector<cplx> a, z;
            for (int j = 0; j < packets; ++j) {
                a.push_back(std::polar(0.5 + 0.5 * unit(rng), 2.0 * pi * unit(rng)));
                z.push_back(cplx((unit(rng) - 0.5) * 10.0 / 3.0, -line_width * (1.0 + unit(rng))));
            }
            auto [lhs, rhs] = check(a, z);
            worst = std::max(worst, lhs / rhs - 1.0);
            max_ratio = std::max(max_ratio, lhs / rhs);
        }
    }
    r.data["trials"] = trials;
    r.data["max_ratio"] = max_ratio;
    if (trials > 0) r.le(kind == Kind::Torus ? "max_violation" : "max_relative_violation", worst, 1e-9);
    r.seconds = detail::elapsed(t0);
    return r;
}

// Operator bounds from the Carleman inequality, the SST spectral identity and HS scaling.
inline SuiteReport bound_suite(const VerifyConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r;
    r.name = "bounds";
    auto rng = detail::suite_rng(cfg.seed, 21);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double s_excess = -1e300, form_excess = -1e300, op_excess = -1e300, lower_gap = 1e300, sst = 0.0;
    double qhs_t = 0.0, qhs_s = 0.0, qhs_drift = 0.0;
    for (Kind kind : {Kind::Torus, Kind::Line}) {
        Geometry g = detail::suite_geometry(cfg, kind);
        for (int t = 0; t < cfg.trials; ++t) {
            Sign s = t % 2 == 0 ? Sign::Focusing : Sign::Defocusing;
            double m = 2.0 * pi * unit(rng);
            HardyState q = random_state(g, s, m, rng, detail::suite_options(cfg));
            HardyState f = random_state(g, s, 1.0, rng, detail::suite_options(cfg));
            for (double kappa : {1.0, 2.0}) {
                double sn = s_opnorm(q, kappa);
                s_excess = std::max(s_excess, sn * sn - m / (2.0 * pi));
                // <qg, (L_0+kappa)^{-1} qg> on the full product
                FullState qg = multiply(q, f);
                double form = 0.0;
                for (int k = qg.lo; k <= qg.hi(); ++k)
                    if (k >= 0) form += std::norm(qg.at(k)) / (g.xi(k) + kappa);
                form *= g.weight();
                form_excess = std::max(form_excess, form - m * mass(f) / (2.0 * pi));
                if (s == Sign::Focusing) {
                    LaxSpectrum sp = spectrum(build_lax(q));
                    lower_gap = std::min(lower_gap, sp.values.minCoeff() + kappa - (1.0 - m / (2.0 * pi)) * kappa);
                }
            }
            // g orthogonal to L^2_-: drop the zero mode
            HardyState h = f;
            h.coeffs[0] = 0.0;
            FullState qh = multiply(q, h);
            double op = 0.0;
            for (int k = std::max(qh.lo, 1); k <= qh.hi(); ++k) op += std::norm(qh.at(k)) / g.xi(k);
            op *= g.weight();
            op_excess = std::max(op_excess, op - m * mass(h) / (2.0 * pi));

            if (t < std::max(2, cfg.trials / 4)) {
                HardyState q1 = rescale_to_mass(q, 1.0);
                SstSpectra sp = sst_spectrum(q1, 1.0);
                std::vector<double> a, b;
                for (int i = 0; i < sp.t.size(); ++i) a.push_back(sp.t[i].real());
                for (int i = 0; i < sp.s_s_star.size(); ++i) b.push_back(sp.s_s_star[i]);
                std::sort(a.begin(), a.end());
                std::sort(b.begin(), b.end());
                double d = 0.0;
                for (size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
                for (int i = 0; i < sp.t.size(); ++i) d = std::max(d, std::abs(sp.t[i].imag()));
                sst = std::max(sst, d);
                // HS norms at N and 2N for the same functions
                double nq = std::sqrt(mass(q1)), nf = std::sqrt(mass(f));
                double t_n = t_hsnorm(q1, f, 1.0) / (nq * nf);
                Mat s_n = s_matrix(q1, 1.0);
                double s_hs = (s_n.adjoint() * s_n).norm() / (nq * nq);
                HardyState q2 = q1.with_coeffs(padded(q1.coeffs, 2 * g.n_modes));
                q2.geo = g.with_modes(2 * g.n_modes);
                HardyState f2 = f.with_coeffs(padded(f.coeffs, 2 * g.n_modes));
                f2.geo = q2.geo;
                double t_2n = t_hsnorm(q2, f2, 1.0) / (nq * nf);
                qhs_t = std::max({qhs_t, t_n, t_2n});
                qhs_s = std::max(qhs_s, s_hs);
                qhs_drift = std::max(qhs_drift, std::abs(t_2n - t_n) / t_n);
            }
        }
    }
    r.le("s_bound_excess", s_excess, 1e-8);
    r.le("s_form_excess", form_excess, 1e-8);
    r.le("op_bound_excess", op_excess, 1e-8);
    r.ge("coercive_lower_gap", lower_gap, -1e-8);
    r.le("sst_spectra_mismatch", sst, 1e-6);
    r.le("t_hs_relative_change_n_to_2n", qhs_drift, 0.25);
    r.data["t_hs_max_ratio"] = qhs_t;
    r.data["sts_hs_max_ratio"] = qhs_s;

    // q = 1 saturates the S bound
    json sat = json::array();
    for (int n : {64, 128, 256}) {
        if (n > 4 * cfg.n_modes && n > 64) break;
        HardyState one = HardyState::zero(Geometry::torus(n), Sign::Focusing);
        one.coeffs[0] = 1.0;
        double v = s_opnorm(one, 1.0);
        sat.push_back({{"n_modes", n}, {"s_norm_sq", v * v}});
        r.ge("s_norm_sq_q1_n" + std::to_string(n), v * v, 0.98);
        r.le("s_norm_sq_q1_n" + std::to_string(n) + "_upper", v * v, 1.0 + 1e-8);
    }
    r.data["q1_saturation"] = sat;
    HardyState zero = HardyState::zero(detail::suite_geometry(cfg, Kind::Torus), Sign::Focusing);
    r.le("zero_state_s_norm", s_opnorm(zero, 1.0), 0.0);
    r.seconds = detail::elapsed(t0);
    return r;
}

inline std::vector<Functional> gradient_functionals() {
    return {Functional::mass(),    Functional::momentum(), Functional::hamiltonian(), Functional::energy(1),
            Functional::energy(2), Functional::energy(3),  Functional::beta(2),       Functional::beta(3),
            Functional::beta(5),   Functional::hk(4),      Functional::hk(8)};
}

// Closed-form gradients against 2 J(q) dF/dqbar by finite differences, and the
// identity Omega(q) grad beta = 2 dbeta/dqbar.
inline SuiteReport gradient_suite(const VerifyConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r;
    r.name = "gradients";
    auto rng = detail::suite_rng(cfg.seed, 31);
    json per = json::object();
    for (Kind kind : {Kind::Torus, Kind::Line}) {
        Geometry g = detail::suite_geometry(cfg, kind);
        double id_max = 0.0;
        std::vector<double> worst(gradient_functionals().size(), 0.0);
        for (int t = 0; t < cfg.trials; ++t) {
            Sign s = t % 2 == 0 ? Sign::Focusing : Sign::Defocusing;
            HardyState q = random_state(g, s, 1.0, rng, detail::suite_options(cfg));
            HardyState q_omega = cfg.mutation == Mutation::Theta ? detail::flipped(q) : q;
            HardyState q_value = cfg.mutation == Mutation::Lax ? detail::flipped(q) : q;
            RealLinearOperator j = j_map(q_omega);
            double h = default_step(q);
            auto fs = gradient_functionals();
            for (size_t i = 0; i < fs.size(); ++i) {
                const Functional f = fs[i];
                std::function<double(const HardyState&)> value = [&](const HardyState& p) {
                    HardyState pv = p;
                    pv.sign = q_value.sign;
                    return evaluate(f, pv);
                };
                if (cfg.mutation == Mutation::Hamiltonian && f.kind == FunctionalKind::Hamiltonian)
                    value = [](const HardyState& p) { return detail::mutated_hamiltonian(p); };
                Vec oracle = 2.0 * j.apply(detail::fd_wirtinger(value, q, h));
                worst[i] = std::max(worst[i], detail::rel_diff(g, grad(f, q), oracle));
            }
            // identity, with Omega built from q_omega
            auto rd = detail::resolvent_data(q, 3.0);
            Vec lhs = omega_apply(q_omega, detail::grad_beta(q, rd));
            Vec rhs = 2.0 * detail::wirtinger_beta(q, rd);
            id_max = std::max(id_max, std::sqrt(l2_sq(g, lhs - rhs)) / std::sqrt(l2_sq(g, rhs)));
        }
        const std::string tag = to_string(kind);
        const double tol = kind == Kind::Torus ? 1e-5 : 1e-5;
        auto fs = gradient_functionals();
        json per_f = json::object();
        for (size_t i = 0; i < fs.size(); ++i) {
            r.le(tag + "_grad_" + fs[i].name(), worst[i], tol);
            per_f[fs[i].name()] = worst[i];
        }
        per[tag] = per_f;
        r.le(tag + "_beta_identity", id_max, kind == Kind::Torus ? 1e-8 : 1e-5);
    }
    // q = 0: both sides vanish
    HardyState zero = HardyState::zero(detail::suite_geometry(cfg, Kind::Torus), Sign::Focusing);
    r.le("zero_state_gradient", std::sqrt(l2_sq(zero.geo, grad(Functional::beta(3), zero))), 0.0);
    r.data["max_discrepancy"] = per;
    r.seconds = detail::elapsed(t0);
    return r;
}

// Poisson brackets over grids of kappa and n, both geometries and signs.
inline SuiteReport commutation_suite(const VerifyConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r;
    r.name = "commute";
    auto rng = detail::suite_rng(cfg.seed, 41);
    const std::vector<double> kappas{2.0, 3.0, 5.0, 8.0};
    const int n_max = 3;
    double bb = 0.0, be = 0.0, ee = 0.0, hh = 0.0;
    const int per_case = std::max(1, cfg.trials / 4);
    for (Kind kind : {Kind::Torus, Kind::Line}) {
        Geometry g = detail::suite_geometry(cfg, kind);
        for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
            for (int t = 0; t < per_case; ++t) {
                std::uniform_real_distribution<double> unit(0.0, 1.0);
                HardyState q = random_state(g, s, 1.0 - unit(rng), rng, detail::suite_options(cfg));
                HardyState q_omega = cfg.mutation == Mutation::Theta ? detail::flipped(q) : q;
                RealLinearOperator j = j_map(q_omega);
                std::vector<Vec> db, de;
                for (double k : kappas) db.push_back(wirtinger(Functional::beta(k), q));
                for (int n = 0; n <= n_max; ++n) de.push_back(wirtinger(Functional::energy(n), q));
                auto br = [&](const Vec& a, const Vec& b) { return std::abs(4.0 * inner(g, a, j.apply(b)).real()); };
                for (size_t a = 0; a < db.size(); ++a)
                    for (size_t b = a + 1; b < db.size(); ++b) bb = std::max(bb, br(db[a], db[b]));
                for (auto& x : db)
                    for (auto& y : de) be = std::max(be, br(x, y));
                for (size_t a = 0; a < de.size(); ++a)
                    for (size_t b = a + 1; b < de.size(); ++b) ee = std::max(ee, br(de[a], de[b]));
                std::vector<Vec> phys{wirtinger(Functional::mass(), q), wirtinger(Functional::momentum(), q),
                                      wirtinger(Functional::hamiltonian(), q)};
                for (size_t a = 0; a < phys.size(); ++a)
                    for (size_t b = a + 1; b < phys.size(); ++b) hh = std::max(hh, br(phys[a], phys[b]));
                for (auto& x : db) hh = std::max(hh, br(phys[2], x));
            }
        }
    }
    r.le("max_beta_beta", bb, 1e-8);
    r.le("max_beta_energy", be, 1e-7);
    r.le("max_energy_energy", ee, 1e-7);
    r.le("max_mass_momentum_hamiltonian", hh, 1e-7);
    // {beta_2, beta_2} and {M, P} at a plane wave
    {
        Geometry g = detail::suite_geometry(cfg, Kind::Torus);
        HardyState q = random_state(g, Sign::Focusing, 1.0, rng);
        r.le("self_bracket", std::abs(poisson_bracket(Functional::beta(2), Functional::beta(2), q)), 1e-14);
        HardyState pw = plane_wave(g, Sign::Focusing, 0.5, 2);
        r.le("plane_wave_mass_momentum", std::abs(poisson_bracket(Functional::mass(), Functional::momentum(), pw)),
             1e-12);
    }
    r.data["grid"] = {{"kappa", kappas}, {"n_max", n_max}, {"states_per_case", per_case}};
    r.seconds = detail::elapsed(t0);
    return r;
}

inline double omega_sigma_min(const HardyState& q) {
    RVec s = singular_values(omega_op(q));
    return s[s.size() - 1];
}

// Line witness sqrt(2)/(x+i) on the window, as the exact periodized soliton times -i.
// The default window puts the top retained frequency at 20.
inline HardyState line_witness(int n_modes, double half_length = 0.0) {
    if (half_length <= 0.0) half_length = n_modes * pi / 20.0;
    HardyState q = soliton_line(1.0, n_modes, half_length);
    q.coeffs *= cplx(0.0, -1.0);
    return q;
}

// Degenerate witnesses, nondegeneracy below threshold, closedness and antisymmetry.
inline SuiteReport degeneracy_suite(const VerifyConfig& cfg, int samples = 100, double line_half_length = 0.0) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r;
    r.name = "degeneracy";
    auto rng = detail::suite_rng(cfg.seed, 51);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto mutate = [&](const HardyState& q) { return cfg.mutation == Mutation::Theta ? detail::flipped(q) : q; };

    HardyState one = HardyState::zero(Geometry::torus(cfg.n_modes), Sign::Focusing);
    one.coeffs[0] = 1.0;
    DegeneracyReport dt = degeneracy_witness(mutate(one));
    r.le("torus_witness_sigma_min", dt.sigma_min, 1e-6);
    r.data["torus_witness"] = {{"sigma_min", dt.sigma_min}, {"sigma_max", dt.sigma_max},
                               {"witness_residual", dt.witness_residual}};
    if (line_half_length <= 0.0) line_half_length = cfg.n_modes * pi / 20.0;
    HardyState lw = line_witness(cfg.n_modes, line_half_length);
    DegeneracyReport dl = degeneracy_witness(mutate(lw));
    r.le("line_witness_sigma_min", dl.sigma_min, 1e-3);
    r.data["line_witness"] = {{"sigma_min", dl.sigma_min}, {"sigma_max", dl.sigma_max},
                              {"witness_residual", dl.witness_residual}, {"half_length", line_half_length}};

    double foc = 1e300, def = 1e300;
    for (int i = 0; i < samples; ++i) {
        Kind kind = i % 2 == 0 ? Kind::Torus : Kind::Line;
        Geometry g = detail::suite_geometry(cfg, kind);
        HardyState qf = random_state_upto(g, Sign::Focusing, 1.9 * pi, rng, detail::suite_options(cfg));
        foc = std::min(foc, omega_sigma_min(mutate(qf)));
        HardyState qd = random_state_upto(g, Sign::Defocusing, 8.0 * pi, rng, detail::suite_options(cfg));
        def = std::min(def, omega_sigma_min(mutate(qd)));
    }
    r.ge("focusing_min_sigma", foc, 0.05);
    r.ge("defocusing_min_sigma", def, 0.05);

    double closed = 0.0, anti = 0.0;
    for (Kind kind : {Kind::Torus, Kind::Line}) {
        Geometry g = detail::suite_geometry(cfg, kind, std::min(cfg.n_modes, 64));
        for (int t = 0; t < 4; ++t) {
            Sign s = t % 2 == 0 ? Sign::Focusing : Sign::Defocusing;
            HardyState q = mutate(random_state(g, s, 1.0, rng, detail::suite_options(cfg)));
            Vec f = random_state(g, s, 1.0, rng).coeffs, gg = random_state(g, s, 1.0, rng).coeffs,
                h = random_state(g, s, 1.0, rng).coeffs;
            closed = std::max(closed, std::abs(closedness_residual(q, f, gg, h)));
            anti = std::max(anti, std::abs(omega_form(q, f, gg) + omega_form(q, gg, f)));
        }
    }
    r.le("closedness", closed, 1e-10);
    r.le("antisymmetry", anti, 1e-10);
    r.data["samples"] = samples;
    r.data["min_sigma"] = {{"focusing", foc}, {"defocusing", def}};
    r.seconds = detail::elapsed(t0);
    return r;
}

// Empirical Lipschitz constants of q -> m(kappa, q) in H^1 and q -> L_q m in L^2,
// at N and 2N.
inline SuiteReport lipschitz_probe(const VerifyConfig& cfg, int pairs = 50) {
    auto t0 = std::chrono::steady_clock::now();
    SuiteReport r;
    r.name = "lipschitz";
    auto rng = detail::suite_rng(cfg.seed, 61);
    const std::vector<double> kappas{1.0, 4.0, 16.0};
    Geometry g = detail::suite_geometry(cfg, Kind::Torus);
    Geometry g2 = g.with_modes(2 * g.n_modes);
    std::vector<double> m_ratio(kappas.size(), 0.0), l_ratio(kappas.size(), 0.0), m_ratio2(kappas.size(), 0.0);
    bool finite = true;
    int used = 0;
    for (int t = 0; t < pairs; ++t) {
        Sign s = t % 2 == 0 ? Sign::Focusing : Sign::Defocusing;
        HardyState q = random_state(g, s, 0.5, rng);
        HardyState p = random_state(g, s, 0.5, rng);
        double dist = std::sqrt(l2_sq(g, q.coeffs - p.coeffs));
        if (dist == 0.0) continue;
        ++used;
        for (size_t i = 0; i < kappas.size(); ++i) {
            double k = kappas[i];
            ResolventVector mq = resolve(q, k), mp = resolve(p, k);
            double h1 = std::sqrt(hs_sq(as_full(g, mq.m - mp.m), 1.0));
            m_ratio[i] = std::max(m_ratio[i], h1 / dist);
            Vec lq = build_lax(q).matrix * mq.m, lp = build_lax(p).matrix * mp.m;
            l_ratio[i] = std::max(l_ratio[i], std::sqrt(l2_sq(g, lq - lp)) / dist);
            HardyState q2{g2, s, padded(q.coeffs, g2.n_modes)}, p2{g2, s, padded(p.coeffs, g2.n_modes)};
            ResolventVector mq2 = resolve(q2, k), mp2 = resolve(p2, k);
            m_ratio2[i] = std::max(m_ratio2[i], std::sqrt(hs_sq(as_full(g2, mq2.m - mp2.m), 1.0)) / dist);
        }
    }
    double change = 0.0;
    json rows = json::array();
    for (size_t i = 0; i < kappas.size(); ++i) {
        finite = finite && std::isfinite(m_ratio[i]) && std::isfinite(l_ratio[i]) && std::isfinite(m_ratio2[i]);
        change = std::max(change, std::abs(m_ratio2[i] - m_ratio[i]) / m_ratio[i]);
        rows.push_back({{"kappa", kappas[i]}, {"m_h1_ratio", m_ratio[i]}, {"m_h1_ratio_2n", m_ratio2[i]},
                        {"lm_l2_ratio", l_ratio[i]}});
    }
    r.ge("finite", finite ? 1.0 : 0.0, 1.0);
    r.le("relative_change_n_to_2n", change, 0.05);
    r.data["pairs"] = used;
    r.data["constants"] = rows;
    r.seconds = detail::elapsed(t0);
    return r;
}

struct VerifyResult {
    std::vector<SuiteReport> suites;
    bool passed() const {
        for (const auto& s : suites)
            if (!s.passed()) return false;
        return true;
    }
    json to_json(const VerifyConfig& c) const {
        json j{{"seed", c.seed}, {"n_modes", c.n_modes}, {"trials", c.trials}, {"passed", passed()}};
        json a = json::array();
        for (const auto& s : suites) a.push_back(s.to_json());
        j["suites"] = a;
        return j;
    }
};

inline const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names{"carleman", "bounds", "gradients", "commute", "degeneracy", "lipschitz"};
    return names;
}

// Runs one suite by name, or all of them. Failures are collected, not fatal.
inline VerifyResult run_suites(const std::string& which, const VerifyConfig& cfg) {
    VerifyResult out;
    auto want = [&](const std::string& n) { return which == "all" || which == n; };
    bool known = which == "all";
    for (const auto& n : suite_names()) known = known || which == n;
    if (!known) throw std::invalid_argument("unknown suite: " + which);
    if (want("carleman")) {
        out.suites.push_back(carleman_check(Kind::Torus, 10 * cfg.trials, cfg.seed, cfg.n_modes));
        out.suites.push_back(carleman_check(Kind::Line, 10 * cfg.trials, cfg.seed, cfg.n_modes, cfg.line_width));
    }
    if (want("bounds")) out.suites.push_back(bound_suite(cfg));
    if (want("gradients")) out.suites.push_back(gradient_suite(cfg));
    if (want("commute")) out.suites.push_back(commutation_suite(cfg));
    if (want("degeneracy")) out.suites.push_back(degeneracy_suite(cfg, std::max(2, cfg.trials)));
    if (want("lipschitz")) out.suites.push_back(lipschitz_probe(cfg, std::max(2, cfg.trials)));
    return out;
}

inline VerifyResult run_all(const VerifyConfig& cfg) { return run_suites("all", cfg); }

} // namespace ccm
