#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "ccm/states.hpp"
#include "ccm/symplectic.hpp"

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

Vec random_vec(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Vec v(n);
    for (int k = 0; k < n; ++k) v[k] = cplx(g(rng), g(rng));
    return v;
}

double dist(const HardyState& q, const Vec& a, const Vec& b) { return std::sqrt(l2_sq(q.geo, a - b)); }

} // namespace

TEST(RealOperator, RepresentationRoundTrip) {
    const int n = 6;
    RealLinearOperator op{Mat::Random(n, n), Mat::Random(n, n)};
    RealLinearOperator back = RealLinearOperator::from_real(op.to_real());
    EXPECT_LT((back.a - op.a).norm() + (back.b - op.b).norm(), 1e-14);
    Vec g = random_vec(n, 1);
    Vec direct = op.apply(g);
    Eigen::VectorXd stacked(2 * n);
    stacked << g.real(), g.imag();
    Eigen::VectorXd r = op.to_real() * stacked;
    EXPECT_LT((direct.real() - r.head(n)).norm() + (direct.imag() - r.tail(n)).norm(), 1e-13);
    RealLinearOperator inv = op.inverse();
    EXPECT_LT((inv.compose(op).to_real() - Eigen::MatrixXd::Identity(2 * n, 2 * n)).norm(), 1e-10);
}

TEST(Theta, NilpotentOnGrid) {
    for (auto q : {random_torus(8, 1.0, 1), random_line(8, 5.0, 1.0, 2)}) {
        RealLinearOperator t = theta(q);
        EXPECT_LT(t.compose(t).norm(), 1e-12 * std::max(1.0, t.norm() * t.norm()));
    }
}

TEST(Omega, ZeroStateIsMultiplicationByI) {
    HardyState z = HardyState::zero(Geometry::torus(8), Sign::Focusing);
    RealLinearOperator om = omega_op(z);
    EXPECT_LT((om.a - I * Mat::Identity(8, 8)).norm() + om.b.norm(), 1e-15);
    RealLinearOperator j = j_map(z);
    EXPECT_LT((j.a + I * Mat::Identity(8, 8)).norm() + j.b.norm(), 1e-14);
    Vec f = random_vec(8, 3);
    EXPECT_NEAR(omega_form(z, f, I * f), -l2_sq(z.geo, f), 1e-12);
}

TEST(Omega, Antisymmetric) {
    for (auto q : {random_torus(16, 1.0, 4), random_line(16, 6.0, 1.0, 5, Sign::Defocusing)}) {
        Vec f = random_vec(16, 6), g = random_vec(16, 7);
        EXPECT_NEAR(omega_form(q, f, g), -omega_form(q, g, f), 1e-12 * l2_sq(q.geo, f));
    }
}

TEST(Omega, Closed) {
    for (auto q : {random_torus(16, 1.0, 8), random_line(16, 6.0, 1.0, 9)}) {
        Vec f = random_vec(16, 10), g = random_vec(16, 11), h = random_vec(16, 12);
        EXPECT_LT(std::abs(closedness_residual(q, f, g, h)), 1e-10);
    }
}

TEST(Omega, DirectionalDerivativeMatchesDifference) {
    HardyState q = random_torus(16, 1.0, 13);
    Vec f = random_vec(16, 14), g = random_vec(16, 15), h = random_vec(16, 16);
    const double e = 1e-5;
    double fd = (omega_form(q.with_coeffs(q.coeffs + e * f), g, h) - omega_form(q.with_coeffs(q.coeffs - e * f), g, h)) /
                (2.0 * e);
    EXPECT_NEAR(omega_derivative(q, f, g, h), fd, 1e-6 * std::max(1.0, std::abs(fd)));
}

TEST(JMap, InvertsOmega) {
    for (auto q : {random_torus(16, 1.0, 17), random_line(16, 6.0, 1.0, 18)}) {
        RealLinearOperator p = omega_op(q).compose(j_map(q));
        EXPECT_LT((p.to_real() - Eigen::MatrixXd::Identity(32, 32)).norm(), 1e-10);
    }
}

TEST(Degeneracy, ConstantStateOnTorus) {
    HardyState q = plane_wave(Geometry::torus(16), Sign::Focusing, 1.0, 0);
    try {
        j_map(q);
        FAIL();
    } catch (const DegeneracyError& e) {
        EXPECT_LE(e.sigma_min, 1e-6);
    }
    DegeneracyReport r = degeneracy_witness(q);
    EXPECT_TRUE(r.degenerate);
    EXPECT_LE(r.sigma_min, 1e-6);
    EXPECT_LE(r.witness_residual, 1e-8);
    for (int k = 0; k < q.size(); ++k) EXPECT_LE(std::abs(omega_form(q, Vec::Unit(16, k), r.kernel)), 1e-6);
    // G = e^{ix}
    FullState big{q.geo, 0, Vec::Unit(2, 1)};
    EXPECT_LE(witness_condition(q, big), 1e-8);
}

TEST(Degeneracy, LineSolitonWitness) {
    const int n = 64;
    HardyState q = soliton_line(1.0, n, n * pi / 20.0);
    DegeneracyReport r = degeneracy_witness(q);
    EXPECT_LE(r.sigma_min, 1e-3);
    EXPECT_LE(r.witness_residual, 1e-3);
}

TEST(Degeneracy, DefocusingBoundedBelow) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        double m = 0.5 + seed;
        HardyState q = random_torus(16, m, seed, Sign::Defocusing);
        EXPECT_GE(omega_singular(q).sigma_min, 1.0 / (1.0 + m / pi)) << seed;
    }
}

TEST(Gradients, MassGeneratesDoubleSpeedPhase) {
    HardyState q = random_line(16, 6.0, 1.0, 19);
    EXPECT_LT(dist(q, grad(Functional::mass(), q), -2.0 * I * q.coeffs), 1e-12);
}

TEST(Gradients, MomentumGeneratesTranslation) {
    for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
        HardyState q = random_torus(16, 1.0, 20, s);
        Vec dq(q.size());
        for (int k = 0; k < q.size(); ++k) dq[k] = I * double(k) * q.coeffs[k];
        EXPECT_LT(dist(q, grad(Functional::momentum(), q), dq), 1e-10);
    }
}

TEST(Gradients, HamiltonianPlaneWave) {
    const cplx c(0.4, 0.3);
    for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
        HardyState q = plane_wave(Geometry::torus(8), s, c, 1);
        Vec expect = Vec::Zero(8);
        expect[1] = -I * c - sigma(s) * 2.0 * I * std::norm(c) * c;
        EXPECT_LT(dist(q, grad(Functional::hamiltonian(), q), expect), 1e-12);
    }
}

TEST(Gradients, AgreeWithFiniteDifferenceOracle) {
    const std::vector<std::pair<std::string, double>> cases{
        {"mass", 1e-8},    {"momentum", 1e-6}, {"hamiltonian", 1e-5}, {"en:1", 1e-6},  {"en:2", 1e-5},
        {"en:3", 1e-5},    {"beta:2", 1e-5},   {"beta:3", 1e-5},      {"beta:5", 1e-5}, {"hk:4", 1e-4},
        {"hk:8", 1e-4}};
    for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
        HardyState q = random_torus(32, 1.0, 21, s);
        for (const auto& [name, tol] : cases) {
            GradientReport r = gradient_report(Functional::parse(name), q);
            EXPECT_EQ(r.name, name);
            EXPECT_LT(r.discrepancy, tol) << name << " " << to_string(s);
        }
    }
}

TEST(Gradients, BetaSymplecticIdentity) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        EXPECT_LT(beta_identity_residual(random_torus(32, 1.0, seed), 3.0), 1e-8);
        EXPECT_LT(beta_identity_residual(random_line(32, 10.0, 1.0, seed, Sign::Defocusing), 3.0), 1e-5);
    }
    EXPECT_EQ(beta_identity_residual(HardyState::zero(Geometry::torus(8), Sign::Focusing), 3.0), 0.0);
}

TEST(Brackets, AntisymmetryAndCommutation) {
    HardyState q = random_torus(32, 1.0, 22);
    RealLinearOperator j = j_map(q);
    auto b = [&](const char* f, const char* g) {
        return poisson_bracket_with(j, Functional::parse(f), Functional::parse(g), q);
    };
    EXPECT_LT(std::abs(b("mass", "mass")), 1e-14);
    EXPECT_LT(std::abs(b("beta:2", "beta:2")), 1e-12);
    EXPECT_NEAR(b("beta:2", "hk:4"), -b("hk:4", "beta:2"), 1e-12);
    EXPECT_LT(std::abs(b("beta:2", "beta:5")), 1e-8);
    EXPECT_LT(std::abs(b("beta:3", "en:2")), 1e-7);
    EXPECT_LT(std::abs(b("en:1", "en:3")), 1e-7);
    EXPECT_LT(std::abs(b("hamiltonian", "momentum")), 1e-7);
}

TEST(Brackets, DetectsNonCommutingPair) {
    // the mode-1 occupation does not Poisson commute with H
    HardyState q = random_torus(32, 1.0, 23);
    RealLinearOperator j = j_map(q);
    Vec w = Vec::Zero(q.size());
    w[1] = q.coeffs[1];
    Vec gh = wirtinger(Functional::hamiltonian(), q);
    double b = 4.0 * inner(q.geo, w, j.apply(gh)).real();
    EXPECT_GT(std::abs(b), 1e-4);
}

TEST(Displays, HamiltonianExpressionsAgree) {
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        for (Sign s : {Sign::Focusing, Sign::Defocusing}) {
            HardyState q = random_torus(32, 0.3 + seed * 0.5, seed, s);
            auto d = hamiltonian_displays(q);
            double h = hamiltonian_value(q, energies(q, 2));
            ASSERT_EQ(d.size(), 3u);
            for (double v : d) EXPECT_NEAR(v, h, 1e-9 * std::max(1.0, std::abs(h)));
            EXPECT_NEAR(momentum_display(q), momentum_value(q, energies(q, 1)), 1e-10);
        }
}

TEST(Coercivity, LowerBoundAndSharpness) {
    for (std::uint64_t seed = 0; seed < 20; ++seed)
        for (Sign s : {Sign::Focusing, Sign::Defocusing})
            EXPECT_GE(coercivity_slack(random_torus(32, 0.2 + 0.3 * seed, seed, s)), -1e-9);
    for (int m : {1, 2, 3}) {
        HardyState q = plane_wave(Geometry::torus(8), Sign::Defocusing, std::sqrt(2.0 * m), m);
        double h = hamiltonian_value(q, energies(q, 2));
        double e0 = mass(q);
        EXPECT_NEAR(h, -e0 * e0 * e0 / (32.0 * pi * pi), 1e-8 * std::abs(h));
    }
}

TEST(Functionals, ParseAndName) {
    EXPECT_EQ(Functional::parse("beta:2.5").name(), "beta:2.5");
    EXPECT_EQ(Functional::parse("en:3").name(), "en:3");
    EXPECT_THROW(Functional::parse("beta:-1"), std::invalid_argument);
    EXPECT_THROW(Functional::parse("en:9"), std::invalid_argument);
    EXPECT_THROW(Functional::parse("spin"), std::invalid_argument);
}
