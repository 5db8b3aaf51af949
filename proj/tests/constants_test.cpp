#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "wpadapt/constants.hpp"

using namespace wpadapt;

TEST(GaussianAbsMoment, KnownValues) {
    EXPECT_NEAR(gaussian_abs_moment(2.0), 1.0, 1e-14);
    EXPECT_NEAR(gaussian_abs_moment(1.0), std::sqrt(2.0 / std::numbers::pi), 1e-14);
    EXPECT_NEAR(gaussian_abs_moment(4.0), std::pow(3.0, 0.25), 1e-14);
    EXPECT_NEAR(gaussian_abs_moment(6.0), std::pow(15.0, 1.0 / 6.0), 1e-13);
    EXPECT_THROW(gaussian_abs_moment(0.5), DomainError);
}

TEST(GaussianAbsMoment, AgreesWithSampling) {
    Rng rng(1);
    const std::size_t reps = 200000;
    std::vector<double> v(reps);
    for (auto& x : v) {
        x = std::pow(std::abs(rng.normal()), 3.0);
    }
    // E|N|^3 = 2 sqrt(2/pi), Var = 15 - 8/pi.
    const double mean = pairwise_mean(v);
    EXPECT_NEAR(mean, std::pow(gaussian_abs_moment(3.0), 3.0), 4.0 * std::sqrt((15.0 - 8.0 / std::numbers::pi) / reps));
}

TEST(LinearConstants, RampAtUnitSlope) {
    const auto c = linear_constants(LinearProblem::ramp(1.0), 2.0);
    const double e16 = std::exp(1.0 / 6.0);
    EXPECT_NEAR(c.c_equi, e16, 1e-9);
    EXPECT_NEAR(c.c_star, e16, 1e-9);
    EXPECT_NEAR(c.c_2, e16, 1e-9);
    // e^{-B/2} e^{B/3} with B = 1/3.
    EXPECT_NEAR(c.c_star_star, std::exp(-1.0 / 18.0), 1e-9);
    EXPECT_DOUBLE_EQ(c.m_p, 1.0);
}

TEST(LinearConstants, RampRatioAtSlopeFive) {
    const auto c = linear_constants(LinearProblem::ramp(5.0), 2.0);
    EXPECT_NEAR(c.c_equi / c.c_star_star, std::exp(50.0 / 9.0), 1e-6 * std::exp(50.0 / 9.0));
    EXPECT_GE(c.c_equi / c.c_star_star, 258.0);
}

TEST(LinearConstants, OrderingHoldsOnAssortedCoefficients) {
    const std::vector<std::pair<Polynomial, Polynomial>> cases{
        {Polynomial(), Polynomial({0.0, 2.0})},
        {Polynomial({0.5}), Polynomial({1.0, -1.0, 3.0})},
        {Polynomial({-1.0, 2.0}), Polynomial({0.0, 0.0, 1.0})},
        {Polynomial(), Polynomial({0.3, -2.0, 2.0})},
    };
    for (const auto& [alpha, beta] : cases) {
        for (double p : {1.0, 2.0, 3.5}) {
            const auto c = linear_constants(LinearProblem::polynomial(alpha, beta, 1.3), p);
            EXPECT_LE(c.c_star_star, c.c_star * (1.0 + 1e-12));
            EXPECT_LE(c.c_star, c.c_equi * (1.0 + 1e-12));
        }
        const auto c2 = linear_constants(LinearProblem::polynomial(alpha, beta, 1.3), 2.0);
        EXPECT_NEAR(c2.c_2, c2.c_star, 1e-12 * c2.c_star);
    }
}

TEST(LinearConstants, KinkedBetaPrimeIntegratesAcrossZero) {
    // beta(t) = t^2 - t: beta' = 2t - 1, ||beta'||_{2/3}^{2/3} = 2 * int_0^{1/2} (2u)^{2/3} du... = 3/5.
    const auto prob = LinearProblem::polynomial(Polynomial(), Polynomial({0.0, -1.0, 1.0}), 1.0);
    const auto c = linear_constants(prob, 2.0);
    const double b = 1.0 / 30.0;  // int (t^2 - t)^2
    EXPECT_NEAR(c.c_star, std::pow(0.6, 1.5) * std::exp(-0.5 * b) * std::exp(b), 1e-9);
    EXPECT_NEAR(c.c_equi, std::sqrt(1.0 / 3.0) * std::exp(0.5 * b), 1e-9);
}

TEST(AdditiveConstants, QuadraticDiffusion) {
    const auto prob = AdditiveProblem::polynomial(Polynomial(), Polynomial({0.0, 0.0, 0.5}));
    const auto c = additive_constants(prob, 2.0);
    EXPECT_NEAR(c.c_2, std::pow(0.6, 1.5), 1e-10);
    EXPECT_NEAR(c.c_star, std::pow(0.6, 1.5), 1e-10);
    EXPECT_NEAR(c.c_star_star, std::pow(0.6, 1.5), 1e-10);
    EXPECT_NEAR(c.c_equi, 1.0 / std::sqrt(3.0), 1e-10);
}

TEST(AnalyticConstants, NoneForAutonomous) {
    const Problem p = AutonomousProblem{[](double x) { return std::sin(x); }, [](double x) { return std::cos(x); },
                                        [](double x) { return -std::sin(x); }, 0.0};
    EXPECT_FALSE(analytic_constants(p, 2.0).has_value());
    EXPECT_FALSE(analytic_moment_provider(p).has_value());
}

TEST(WeightedIntegrationConstant, Examples) {
    EXPECT_NEAR(weighted_integration_constant([](double) { return 1.0; }), 1.0, 1e-12);
    EXPECT_NEAR(weighted_integration_constant([](double t) { return t; }), std::pow(0.6, 1.5), 1e-10);
}

TEST(AnalyticMomentProvider, LinearRampMatchesSampledWeightRms) {
    // Y(t) = -b X(1) for beta = b t, so (E Y^2)^{1/2} = |b| e^{B/2}.
    const auto prob = LinearProblem::ramp(1.0);
    const auto provider = analytic_moment_provider(Problem{prob});
    ASSERT_TRUE(provider.has_value());
    EXPECT_NEAR((*provider)(0.3), std::exp(1.0 / 6.0), 1e-9);
    const auto sampled = mc_weight_moments(prob.coefficients(), 16, 20000, 5, 1);
    for (std::size_t l = 0; l < 16; l += 5) {
        EXPECT_NEAR(std::sqrt(sampled[l]), std::exp(1.0 / 6.0), 0.05);
    }
}

TEST(McConstants, AgreeWithAnalyticOnRamp) {
    const auto prob = LinearProblem::ramp(1.0);
    const auto exact = linear_constants(prob, 2.0);
    const auto mc = mc_constants(prob.coefficients(), 2.0, 64, 4000, 17, 1);
    EXPECT_EQ(mc.method, ConstantMethod::MonteCarlo);
    EXPECT_NEAR(mc.c_star_star, exact.c_star_star, 4.0 * mc.se_star_star + 0.01);
    EXPECT_NEAR(mc.c_star, exact.c_star, 4.0 * mc.se_star + 0.01);
    EXPECT_NEAR(mc.c_2, exact.c_2, 4.0 * mc.se_2 + 0.01);
    EXPECT_NEAR(mc.c_equi, exact.c_equi, 4.0 * mc.se_equi + 0.01);
}

TEST(McConstants, AdditiveIsDeterministicUpToGridSum) {
    const auto prob = AdditiveProblem::polynomial(Polynomial(), Polynomial({0.0, 0.0, 0.5}));
    const auto mc = mc_constants(prob.coefficients(), 2.0, 256, 10, 3, 1);
    EXPECT_NEAR(mc.c_2, std::pow(0.6, 1.5), 5e-3);
    EXPECT_NEAR(mc.c_equi, 1.0 / std::sqrt(3.0), 5e-3);
    EXPECT_NEAR(mc.se_equi, 0.0, 1e-12);
}
