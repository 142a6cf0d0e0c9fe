#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "ccm/spectral.hpp"
#include "ccm/state_io.hpp"
#include "ccm/states.hpp"

using namespace ccm;

namespace {

const cplx I(0.0, 1.0);

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

Vec grid_x(const Geometry& g, int n) {
    Vec x(n);
    for (int j = 0; j < n; ++j) x[j] = g.x0() + j * g.period() / n;
    return x;
}

HardyState random_torus(int n, double m, std::uint64_t seed, Sign s = Sign::Focusing) {
    std::mt19937_64 rng(seed);
    return random_state(Geometry::torus(n), s, m, rng);
}

HardyState random_line(int n, double L, double m, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return random_state(Geometry::line(n, L), Sign::Focusing, m, rng);
}

} // namespace

TEST(Geometry, FrequenciesAndGrid) {
    Geometry t = Geometry::torus(16);
    EXPECT_EQ(t.xi(5), 5.0);
    EXPECT_GE(t.grid_points, 4 * t.n_modes);
    Geometry l = Geometry::line(16, 10.0);
    EXPECT_DOUBLE_EQ(l.xi(3), 3.0 * pi / 10.0);
    EXPECT_DOUBLE_EQ(l.weight(), 2.0 * pi * pi / 10.0);
    EXPECT_THROW(Geometry::torus(0), DimensionError);
    EXPECT_THROW(Geometry::torus(16, 32), DimensionError);
    EXPECT_THROW(Geometry::line(16, 0.0), DimensionError);
}

TEST(Transforms, SingleModeIsExponential) {
    Geometry g = Geometry::torus(8);
    Vec c = Vec::Unit(8, 1);
    Vec s = synthesize(HardyState{g, Sign::Focusing, c});
    Vec x = grid_x(g, g.grid_points);
    for (int j = 0; j < s.size(); ++j) EXPECT_LT(std::abs(s[j] - std::exp(I * x[j])), 1e-14);
}

TEST(Transforms, ZeroStateGivesZeroSamples) {
    Vec s = synthesize(HardyState::zero(Geometry::torus(8), Sign::Focusing));
    EXPECT_EQ(s.norm(), 0.0);
}

TEST(Transforms, TorusSolitonSamplesMatchClosedForm) {
    const double n = 3.0;
    HardyState q = soliton_torus(n, 128);
    Vec s = synthesize(q);
    Vec x = grid_x(q.geo, q.geo.grid_points);
    double worst = 0.0;
    for (int j = 0; j < s.size(); ++j) {
        cplx exact = std::sqrt(2.0 * n + 1.0) / (1.0 - n * (std::exp(I * x[j]) - 1.0));
        worst = std::max(worst, std::abs(s[j] - exact));
    }
    EXPECT_LT(worst, 1e-8);
}

TEST(Transforms, RoundTripBothGeometries) {
    for (auto q : {random_torus(32, 1.0, 3), random_line(32, 10.0, 1.0, 4)}) {
        FullState f = analyze(synthesize(q), q.geo);
        Vec back = project(f, q.size());
        EXPECT_LT(rel(back, q.coeffs), 1e-12);
        for (int k = f.lo; k < 0; ++k) EXPECT_LT(std::abs(f.at(k)), 1e-12 * q.coeffs.norm());
    }
}

TEST(Transforms, LineSamplesCarryWindowOrigin) {
    // xi_1 mode on [-L, L): samples e^{i pi x / L} at x_j = -L + j dx
    Geometry g = Geometry::line(4, 5.0);
    HardyState q = plane_wave(g, Sign::Focusing, 1.0, 1);
    Vec s = synthesize(q);
    Vec x = grid_x(g, g.grid_points);
    for (int j = 0; j < s.size(); ++j) EXPECT_LT(std::abs(s[j] - std::exp(I * pi * x[j] / 5.0)), 1e-14);
}

TEST(Multiply, ModeTimesModeIsNextMode) {
    Geometry g = Geometry::torus(4);
    HardyState e1{g, Sign::Focusing, Vec::Unit(4, 1)};
    FullState p = multiply(e1, e1);
    for (int k = p.lo; k <= p.hi(); ++k) EXPECT_LT(std::abs(p.at(k) - (k == 2 ? 1.0 : 0.0)), 1e-15);
}

TEST(Multiply, TimesZero) {
    HardyState q = random_torus(32, 1.0, 5);
    FullState p = multiply(q, HardyState::zero(q.geo, q.sign));
    EXPECT_EQ(p.coeffs.norm(), 0.0);
}

TEST(Multiply, SolitonSquareMatchesOversampledOracle) {
    const double n = 2.0;
    const int N = 128;
    HardyState q = soliton_torus(n, N);
    FullState p = multiply(q, q);
    // closed form squared, sampled on a grid 8x the product band and analyzed
    const int M = 8 * next_pow2(2 * N);
    Geometry g = Geometry::torus(N, M);
    Vec samples(M);
    for (int j = 0; j < M; ++j) {
        cplx v = std::sqrt(2.0 * n + 1.0) / (1.0 - n * (std::exp(I * (2.0 * pi * j / M)) - 1.0));
        samples[j] = v * v;
    }
    FullState oracle = analyze(samples, g);
    double worst = 0.0;
    for (int k = 0; k <= p.hi(); ++k) worst = std::max(worst, std::abs(p.at(k) - oracle.at(k)));
    EXPECT_LT(worst, 1e-10);
}

TEST(Multiply, MatchesPhysicalProductBothGeometries) {
    for (auto [f, h] : {std::pair{random_torus(24, 1.0, 6), random_torus(24, 2.0, 7)},
                        std::pair{random_line(24, 8.0, 1.0, 8), random_line(24, 8.0, 0.5, 9)}}) {
        FullState p = multiply(f, conj(h));
        const int M = 4 * next_pow2(2 * f.size());
        Vec prod = synthesize(f, M).cwiseProduct(synthesize(conj(h), M));
        FullState oracle = analyze(prod, f.geo);
        double worst = 0.0;
        for (int k = p.lo; k <= p.hi(); ++k) worst = std::max(worst, std::abs(p.at(k) - oracle.at(k)));
        EXPECT_LT(worst, 1e-12 * std::max(1.0, p.coeffs.cwiseAbs().maxCoeff()));
    }
}

TEST(Multiply, CommutativeAndBilinear) {
    HardyState f = random_torus(20, 1.0, 10), g = random_torus(20, 1.0, 11), h = random_torus(20, 1.0, 12);
    FullState fg = multiply(f, g), gf = multiply(g, f);
    EXPECT_LT((fg.coeffs - gf.coeffs).norm(), 1e-14);
    HardyState comb = f.with_coeffs(2.0 * g.coeffs + I * h.coeffs);
    FullState lhs = multiply(f, comb);
    Vec rhs = 2.0 * fg.coeffs + I * multiply(f, h).coeffs;
    EXPECT_LT((lhs.coeffs - rhs).norm(), 1e-13);
}

TEST(Multiply, GeometryMismatchThrows) {
    EXPECT_THROW(multiply(random_torus(8, 1.0, 1), random_line(8, 5.0, 1.0, 1)), DimensionError);
}

TEST(CauchySzego, CosineKeepsPositiveHalf) {
    Geometry g = Geometry::torus(4);
    FullState f{g, -1, Vec::Constant(3, 0.0)};
    f.coeffs[0] = 0.5;
    f.coeffs[2] = 0.5;
    FullState p = cauchy_szego(f, Side::Plus);
    EXPECT_EQ(p.at(-1), cplx(0.0));
    EXPECT_EQ(p.at(1), cplx(0.5));
}

TEST(CauchySzego, ProjectionIdentityTorusAndLine) {
    Geometry t = Geometry::torus(4);
    FullState one{t, 0, Vec::Ones(1)};
    FullState s{t, 0, cauchy_szego(one, Side::Plus).coeffs + cauchy_szego(one, Side::Minus).coeffs};
    EXPECT_EQ(s.at(0), cplx(2.0)); // f + fhat(0)

    HardyState q = random_line(16, 8.0, 1.0, 13);
    FullState f = abs2(q);
    Vec sum = cauchy_szego(f, Side::Plus).coeffs + cauchy_szego(f, Side::Minus).coeffs;
    EXPECT_LT((sum - f.coeffs).norm(), 1e-15);
}

TEST(CauchySzego, RealFunctionSymmetry) {
    HardyState q = random_torus(16, 1.0, 14);
    FullState f = abs2(q); // real valued
    FullState plus = cauchy_szego(f, Side::Plus);
    FullState minus_flip = conj(cauchy_szego(f, Side::Minus));
    for (int k = 0; k <= f.hi(); ++k) EXPECT_LT(std::abs(plus.at(k) - minus_flip.at(k)), 1e-15);
}

TEST(CauchySzego, OrthogonalProjection) {
    HardyState q = random_torus(16, 1.0, 15), p = random_torus(16, 1.0, 16);
    FullState f = multiply(q, conj(p));
    FullState c1 = cauchy_szego(f, Side::Plus);
    FullState c2 = cauchy_szego(c1, Side::Plus);
    EXPECT_EQ((c1.coeffs - c2.coeffs).norm(), 0.0);
    EXPECT_LE(l2_sq(c1), l2_sq(f));
    FullState h = abs2(random_torus(16, 1.0, 17));
    EXPECT_NEAR(inner(cauchy_szego(f, Side::Plus), h).real(), inner(f, cauchy_szego(h, Side::Plus)).real(), 1e-13);
}

TEST(Antiderivative, Multiplier) {
    Geometry g = Geometry::torus(4);
    FullState e{g, 0, Vec::Unit(2, 1)};
    FullState a = antiderivative(e);
    EXPECT_LT(std::abs(a.at(1) - 1.0 / I), 1e-15);
    FullState one{g, 0, Vec::Ones(1)};
    EXPECT_EQ(antiderivative(one).at(0), cplx(0.0));
}

TEST(Antiderivative, LineSignKernelMatchesDenseQuadrature) {
    Geometry g = Geometry::line(64, 10.0);
    const int n = g.grid_points;
    const double dx = g.dx();
    Vec f(n);
    for (int j = 0; j < n; ++j) {
        double x = g.x0() + j * dx;
        f[j] = std::exp(-x * x) * cplx(1.0, 0.3 * x);
    }
    Vec fast = sgn_antiderivative_samples(g, f);
    Vec dense = Vec::Zero(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = i > j ? 1.0 : (i < j ? -1.0 : 0.0);
            dense[i] += 0.5 * s * f[j] * dx;
        }
    EXPECT_LT((fast - dense).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Antiderivative, DerivativeRecoversMeanFreePart) {
    Geometry g = Geometry::line(64, 10.0);
    const int n = g.grid_points;
    Vec f(n);
    for (int j = 0; j < n; ++j) {
        double x = g.x0() + j * g.dx();
        f[j] = std::exp(-2.0 * (x - 1.0) * (x - 1.0));
    }
    Vec a = antiderivative_samples(g, f);
    FullState fa = analyze(a, g);
    Vec back = synthesize(derivative(fa), n);
    Vec target = f.array() - f.mean();
    EXPECT_LT((back - target).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Mass, TorusSolitonsHaveThresholdMass) {
    for (int n = 1; n <= 8; ++n) EXPECT_NEAR(mass(soliton_torus(n, 128)), 2.0 * pi, 1e-8) << n;
    for (int n = 1; n <= 4; ++n) EXPECT_NEAR(mass(soliton_torus(n, 64)), 2.0 * pi, 1e-8) << n;
}

TEST(Mass, LineSolitonHasThresholdMass) {
    EXPECT_NEAR(mass(soliton_line(1.0, 512, 40.0)), 2.0 * pi, 1e-6);
    // the periodized coefficients approach sqrt(2/n) e^{-xi/n}
    double prev = 1e300;
    for (double L : {10.0, 20.0, 40.0, 80.0}) {
        HardyState a = soliton_line(1.0, 256, L), b = soliton_line_sampled(1.0, 256, L);
        double d = rel(a.coeffs, b.coeffs);
        EXPECT_LT(d, prev);
        prev = d;
    }
}

TEST(Norms, PlaneWaveClosedForms) {
    const cplx c(0.6, -0.3);
    HardyState q = plane_wave(Geometry::torus(8), Sign::Focusing, c, 1);
    EXPECT_NEAR(std::pow(norm(q, Norm::Hdot, 0.5), 2), 2.0 * pi * std::norm(c), 1e-14);
    EXPECT_NEAR(std::pow(norm(q, Norm::L4), 4), 2.0 * pi * std::pow(std::abs(c), 4), 1e-14);
    EXPECT_NEAR(std::pow(norm(q, Norm::L6), 6), 2.0 * pi * std::pow(std::abs(c), 6), 1e-14);
}

TEST(Norms, ParsevalBothGeometries) {
    for (auto q : {random_torus(32, 1.7, 20), random_line(32, 12.0, 0.9, 21)}) {
        Vec s = synthesize(q);
        double physical = s.squaredNorm() * q.geo.dx();
        EXPECT_NEAR(physical, mass(q), 1e-12 * mass(q));
    }
}

TEST(Norms, L4MatchesQuadrature) {
    HardyState q = random_torus(16, 1.0, 22);
    Vec s = synthesize(q);
    double quad = 0.0;
    for (int j = 0; j < s.size(); ++j) quad += std::pow(std::abs(s[j]), 4);
    quad *= q.geo.dx();
    EXPECT_NEAR(std::pow(norm(q, Norm::L4), 4), quad, 1e-12 * quad);
}

TEST(StateIo, RoundTripAndValidation) {
    HardyState q = random_line(8, 6.0, 1.0, 23);
    json j = state_to_json(q);
    EXPECT_EQ(check_state_json(j), "");
    HardyState back = state_from_json(j);
    EXPECT_EQ(back.coeffs, q.coeffs);
    EXPECT_EQ(back.geo, q.geo);
    j["coeffs"].erase(0);
    EXPECT_NE(check_state_json(j), "");
    json k = state_to_json(q);
    k["sign"] = "sideways";
    EXPECT_NE(check_state_json(k), "");
}

TEST(States, RandomStateHitsTargetMassAndIsDeterministic) {
    HardyState a = random_torus(32, 2.5, 99), b = random_torus(32, 2.5, 99);
    EXPECT_NEAR(mass(a), 2.5, 1e-12);
    EXPECT_EQ(a.coeffs, b.coeffs);
    EXPECT_NEAR(mass(random_line(32, 10.0, 0.7, 5)), 0.7, 1e-12);
}
