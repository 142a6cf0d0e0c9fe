#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ccm/flows.hpp"
#include "ccm/states.hpp"

using namespace ccm;

namespace {

const cplx I(0.0, 1.0);

HardyState random_torus(int n, double m, std::uint64_t seed, Sign s = Sign::Focusing) {
    std::mt19937_64 rng(seed);
    return random_state(Geometry::torus(n), s, m, rng);
}

HardyState random_line(int n, double L, double m, std::uint64_t seed, Sign s = Sign::Focusing) {
    std::mt19937_64 rng(seed);
    return random_state(Geometry::line(n, L), s, m, rng);
}

double dist(const HardyState& a, const HardyState& b) { return std::sqrt(l2_sq(a.geo, a.coeffs - b.coeffs)); }

} // namespace

TEST(VectorField, MatchesSymplecticGradient) {
    const std::vector<std::string> flows{"ccm", "eq195", "momentum", "en:0", "en:1", "en:2", "en:3",
                                         "beta:2", "beta:5", "hk:4", "hk:8"};
    for (Sign s : {Sign::Focusing, Sign::Defocusing})
        for (auto q : {random_torus(32, 1.0, 1, s), random_line(64, 8.0, 1.0, 2, s)})
            for (const auto& f : flows) {
                if (f == "eq195" && q.geo.kind == Kind::Line) continue;
                FlowSpec spec = FlowSpec::for_state(q, f, 1e-3, 0.0);
                Vec expect = spec.functional_scale() * grad(spec.functional(), q);
                double scale = std::max(1.0, std::sqrt(l2_sq(q.geo, expect)));
                EXPECT_LT(std::sqrt(l2_sq(q.geo, vector_field(spec, q).coeffs - expect)), 1e-10 * scale)
                    << f << " " << to_string(s) << " " << (q.geo.kind == Kind::Torus ? "torus" : "line");
            }
}

TEST(VectorField, PlaneWaveClosedForm) {
    const cplx c(0.3, 0.2);
    for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
        HardyState q = plane_wave(Geometry::torus(16), s, c, 1);
        HardyState v = vector_field(FlowSpec::for_state(q, "ccm", 1e-3, 0.0), q);
        HardyState expect = q.with_coeffs(Vec::Zero(16));
        expect.coeffs[1] = -I * c * (1.0 + sigma(s) * 2.0 * std::norm(c));
        EXPECT_LT(dist(v, expect), 1e-13);
    }
}

TEST(VectorField, Eq195DiffersByModulation) {
    // eq195 - ccm = sigma (3/2pi) (E0 d/dx + i E1) on the torus
    for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
        HardyState q = random_torus(32, 1.0, 3, s);
        auto e = energies(q, 1);
        Vec d = vector_field(FlowSpec::for_state(q, "eq195", 1e-3, 0.0), q).coeffs -
                vector_field(FlowSpec::for_state(q, "ccm", 1e-3, 0.0), q).coeffs;
        Vec expect(q.size());
        for (int k = 0; k < q.size(); ++k)
            expect[k] = sigma(s) * 3.0 / (2.0 * pi) * (e[0] * I * double(k) + I * e[1]) * q.coeffs[k];
        EXPECT_LT(std::sqrt(l2_sq(q.geo, d - expect)), 1e-10);
    }
}

TEST(Evolve, PlaneWavePhaseRotation) {
    const cplx c(0.3, 0.0);
    for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
        HardyState q = plane_wave(Geometry::torus(16), s, c, 1);
        HardyState out = evolve_state(FlowSpec::for_state(q, "ccm", 1e-3, 1.0), q);
        HardyState expect = q.with_coeffs(Vec::Zero(16));
        expect.coeffs[1] = c * std::exp(-I * (1.0 + sigma(s) * 2.0 * std::norm(c)));
        EXPECT_LT(dist(out, expect), 1e-8);
    }
}

TEST(Evolve, SolitonConservation) {
    HardyState q = soliton_torus(3, 64);
    FlowSpec spec = FlowSpec::for_state(q, "ccm", 1e-4, 0.5, 500);
    spec.monitor_lax = false;
    TrajectoryRecord rec = evolve(spec, q);
    EXPECT_FALSE(rec.blowup);
    EXPECT_LT(relative_drift(rec.monitors.mass), 1e-8);
    EXPECT_LT(relative_drift(rec.monitors.momentum), 1e-8);
    EXPECT_LT(relative_drift(rec.monitors.hamiltonian), 1e-6);
    EXPECT_LT(relative_drift(rec.monitors.e2), 1e-6);
    EXPECT_EQ(rec.times.size(), 11u);
}

TEST(Evolve, MassFlowIsPhase) {
    HardyState q = random_line(32, 8.0, 1.0, 4);
    const double t = 0.7;
    HardyState out = evolve_state(FlowSpec::for_state(q, "en:0", 1e-2, t), q);
    EXPECT_LT(dist(out, q.with_coeffs(std::exp(-2.0 * I * t) * q.coeffs)), 1e-12);
}

TEST(Evolve, MomentumFlowIsTranslation) {
    HardyState q = random_torus(32, 1.0, 5);
    const double t = 0.3;
    HardyState out = evolve_state(FlowSpec::for_state(q, "momentum", 1e-2, t), q);
    Vec expect(q.size());
    for (int k = 0; k < q.size(); ++k) expect[k] = std::exp(I * double(k) * t) * q.coeffs[k];
    EXPECT_LT(dist(out, q.with_coeffs(expect)), 1e-10);
}

TEST(Evolve, BetaFlowsCommute) {
    HardyState q = random_torus(32, 0.8, 6);
    FlowSpec a = FlowSpec::for_state(q, "beta:2", 1e-3, 0.2), b = FlowSpec::for_state(q, "beta:5", 1e-3, 0.2);
    HardyState ab = evolve_state(b, evolve_state(a, q));
    HardyState ba = evolve_state(a, evolve_state(b, q));
    EXPECT_LT(dist(ab, ba), 1e-6);
}

TEST(Evolve, Eq195IsModulatedCcm) {
    for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
        HardyState q = random_torus(32, 0.8, 7, s);
        const double t = 0.2;
        auto e = energies(q, 1);
        HardyState a = evolve_state(FlowSpec::for_state(q, "eq195", 1e-4, t), q);
        HardyState b = evolve_state(FlowSpec::for_state(q, "ccm", 1e-4, t), q);
        const double c = sigma(s) * 3.0 / (2.0 * pi);
        Vec expect(q.size());
        for (int k = 0; k < q.size(); ++k) expect[k] = std::exp(I * c * (e[0] * k + e[1]) * t) * b.coeffs[k];
        EXPECT_LT(dist(a, a.with_coeffs(expect)), 1e-8) << to_string(s);
    }
}

TEST(Evolve, ThresholdAndBlowupFlags) {
    HardyState sol = soliton_torus(2, 32);
    sol.coeffs *= 1.01;
    EXPECT_THROW(evolve(FlowSpec::for_state(sol, "beta:3", 1e-3, 0.01), sol), ThresholdError);
    FlowSpec at = FlowSpec::for_state(sol, "ccm", 1e-4, 1e-3);
    at.monitor_lax = false;
    EXPECT_TRUE(evolve(at, sol).threshold_flag);
    HardyState q = random_torus(128, 0.8, 8);
    FlowSpec spec = FlowSpec::for_state(q, "en:3", 1e-2, 1.0);
    spec.monitor_lax = false;
    TrajectoryRecord rec = evolve(spec, q);
    EXPECT_TRUE(rec.blowup);
    EXPECT_TRUE(finite_state(rec.final_state));
    EXPECT_GT(rec.blowup_time, 0.0);
}

TEST(LaxResidual, ZeroStateVanishes) {
    HardyState z = HardyState::zero(Geometry::torus(16), Sign::Focusing);
    for (const char* f : {"ccm", "beta:3", "en:2", "hk:4"}) {
        LaxResidual r = lax_residual_at(FlowSpec::for_state(z, f, 1e-3, 0.0), z);
        EXPECT_EQ(r.commutator, 0.0) << f;
        EXPECT_EQ(r.peter, 0.0) << f;
    }
}

TEST(LaxResidual, SecondOrderInStep) {
    HardyState q = random_torus(32, 0.8, 9);
    double r1 = lax_residual_at(FlowSpec::for_state(q, "beta:3", 1e-2, 0.0), q).commutator;
    double r2 = lax_residual_at(FlowSpec::for_state(q, "beta:3", 5e-3, 0.0), q).commutator;
    EXPECT_LT(r2, 1e-4);
    EXPECT_NEAR(r1 / r2, 4.0, 0.5);
}

TEST(LaxResidual, PeterOperatorGeneratesField) {
    for (const char* f : {"ccm", "eq195", "momentum", "en:1", "en:2", "beta:3", "hk:4"}) {
        HardyState q = random_torus(32, 0.8, 10);
        EXPECT_LT(lax_residual_at(FlowSpec::for_state(q, f, 1e-3, 0.0), q).peter, 1e-8) << f;
    }
}

TEST(Equicontinuity, PlaneWaveConstant) {
    HardyState q = plane_wave(Geometry::torus(16), Sign::Focusing, 0.5, 2);
    FlowSpec spec = FlowSpec::for_state(q, "ccm", 1e-3, 0.5, 50);
    spec.monitor_lax = false;
    EquicontinuityTrace tr = equicontinuity_monitor(evolve(spec, q), 4.0);
    for (double v : tr.functional) EXPECT_NEAR(v, tr.functional.front(), 1e-12);
    EXPECT_FALSE(tr.cascade_warning);
}

TEST(Equicontinuity, SolitonTailStable) {
    HardyState q = soliton_torus(2, 64);
    FlowSpec spec = FlowSpec::for_state(q, "ccm", 1e-4, 0.3, 300);
    spec.monitor_lax = false;
    EquicontinuityTrace tr = equicontinuity_monitor(evolve(spec, q), 4.0);
    for (double t : tr.tail) EXPECT_LT(t, 2.0 * tr.tail.front() + 1e-14);
    EXPECT_FALSE(tr.cascade_warning);
}

TEST(HkConvergence, ZeroStateIsFixed) {
    HardyState z = HardyState::zero(Geometry::torus(16), Sign::Focusing);
    for (const auto& row : hk_convergence(z, {2.0, 4.0}, 0.1, 1e-2)) {
        EXPECT_EQ(row.sup_distance, 0.0);
        EXPECT_EQ(row.field_difference, 0.0);
    }
}

TEST(HkConvergence, DistancesDecreaseInKappa) {
    HardyState q = random_torus(32, 0.8, 11);
    auto rows = hk_convergence(q, {8.0, 16.0, 32.0}, 0.05, 2e-4);
    ASSERT_EQ(rows.size(), 3u);
    for (int i = 1; i < 3; ++i) {
        EXPECT_LT(rows[i].sup_distance, rows[i - 1].sup_distance);
        EXPECT_LT(rows[i].field_difference, rows[i - 1].field_difference);
    }
}

TEST(FlowSpec, ParseAndValidate) {
    HardyState q = random_torus(8, 0.5, 12);
    EXPECT_EQ(FlowSpec::for_state(q, "beta:2.5", 1e-3, 1.0).field_name(), "beta:2.5");
    EXPECT_EQ(FlowSpec::for_state(q, "en:3", 1e-3, 1.0).field_name(), "en:3");
    EXPECT_EQ(FlowSpec::for_state(q, "ccm", 1e-3, 1.0).steps(), 1000);
    EXPECT_THROW(FlowSpec::for_state(q, "en:5", 1e-3, 1.0), std::invalid_argument);
    EXPECT_THROW(FlowSpec::for_state(q, "hk:0", 1e-3, 1.0), std::invalid_argument);
    EXPECT_THROW(FlowSpec::for_state(q, "spin", 1e-3, 1.0), std::invalid_argument);
    EXPECT_THROW(FlowSpec::for_state(q, "ccm", 3e-3, 1.0), std::invalid_argument);
    EXPECT_THROW(FlowSpec::for_state(q, "ccm", -1e-3, 1.0), std::invalid_argument);
    FlowSpec spec = FlowSpec::for_state(q, "ccm", 1e-3, 1.0);
    EXPECT_THROW(evolve(spec, random_torus(16, 0.5, 12)), DimensionError);
}

TEST(Negative, NormWeights) {
    HardyState q = plane_wave(Geometry::torus(8), Sign::Focusing, 1.0, 3);
    EXPECT_NEAR(negative_norm(q), std::sqrt(2.0 * pi) / std::pow(4.0, 5.0), 1e-15);
}
