#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "wpadapt/parallel.hpp"
#include "wpadapt/problem.hpp"
#include "wpadapt/schemes.hpp"

using namespace wpadapt;

namespace {

std::size_t total(const std::vector<std::size_t>& mu) { return std::accumulate(mu.begin(), mu.end(), std::size_t{0}); }

WeightEstimate synthetic_weights(const std::vector<double>& y) {
    WeightEstimate w;
    w.k = y.size();
    w.grid = equidistant_grid(w.k);
    w.y_hat = y;
    w.m_suffix.assign(w.k + 1, 1.0);
    w.wpt_values.assign(w.k + 1, 0.0);
    return w;
}

AdditiveProblem ramp_diffusion() { return AdditiveProblem::polynomial(Polynomial(), Polynomial({0.0, 1.0})); }

}  // namespace

TEST(Grid, EquidistantIsExactAtDyadicPoints) {
    const auto g = equidistant_grid(8);
    ASSERT_EQ(g.size(), 9u);
    EXPECT_EQ(g.front(), 0.0);
    EXPECT_EQ(g.back(), 1.0);
    EXPECT_EQ(g[4], 0.5);
    // Coarse grid points reappear bitwise in finer grids.
    const auto g3 = equidistant_grid(3);
    const auto g9 = equidistant_grid(9);
    EXPECT_EQ(g3[1], g9[3]);
    EXPECT_EQ(g3[2], g9[6]);
    EXPECT_THROW(equidistant_grid(0), DomainError);
}

TEST(Euler, ExactForConstantCoefficients) {
    const auto c = AdditiveProblem::polynomial(Polynomial({0.5}), Polynomial({2.0}), 1.0).coefficients();
    BrownianPath path(1);
    const auto res = euler(c, 1.0, path, equidistant_grid(10));
    EXPECT_NEAR(res.x1_hat, 1.5 + 2.0 * path.sample_at(1.0), 1e-12);
    EXPECT_EQ(res.nu, 10u);
}

TEST(Milstein, SingleStepOnGeometricBrownianMotion) {
    const auto c = LinearProblem::polynomial(Polynomial({0.3}), Polynomial({0.8}), 1.0).coefficients();
    BrownianPath path(2);
    const auto res = milstein(c, 2.0, path, equidistant_grid(1));
    const double w = path.sample_at(1.0);
    EXPECT_NEAR(res.x1_hat, 2.0 * (1.0 + 0.3 + 0.8 * w + 0.5 * 0.64 * (w * w - 1.0)), 1e-12);
}

TEST(Milstein, RejectsMalformedGrid) {
    const auto c = ramp_diffusion().coefficients();
    BrownianPath path(2);
    const std::vector<double> bad{0.0, 0.6, 0.4, 1.0};
    EXPECT_THROW(milstein(c, 0.0, path, bad), DomainError);
    const std::vector<double> short_grid{0.0, 0.5};
    EXPECT_THROW(milstein(c, 0.0, path, short_grid), DomainError);
}

TEST(TruncatedWagnerPlaten, SingleStepMatchesHermiteChaos) {
    // dX = X dW, X(0) = x0: X(1) = x0 e^{W - 1/2}; its chaos expansion up to
    // order three is x0 (1 + H1 + H2/2 + H3/6) with H1 = W, H2 = W^2 - 1,
    // H3 = W^3 - 3W.
    const auto c = LinearProblem::polynomial(Polynomial(), Polynomial({1.0}), 1.0).coefficients();
    for (std::uint64_t seed : {3u, 4u, 5u}) {
        BrownianPath path(seed);
        const auto res = wagner_platen_truncated(c, 1.5, path, equidistant_grid(1));
        const double w = path.sample_at(1.0);
        const double chaos = 1.0 + w + 0.5 * (w * w - 1.0) + (w * w * w - 3.0 * w) / 6.0;
        EXPECT_NEAR(res.x1_hat, 1.5 * chaos, 1e-12);
        ASSERT_EQ(res.trajectory.size(), 2u);
        EXPECT_EQ(res.trajectory[0], 1.5);
        EXPECT_EQ(res.trajectory[1], res.x1_hat);
    }
}

TEST(FullWagnerPlaten, ExactForLinearDiffusionInTime) {
    // sigma(t) = t: X(1) = int t dW, and per step the full scheme reproduces
    // t_{l+1} dW_l - area_l, which is exact.
    const auto c = ramp_diffusion().coefficients();
    Rng rng(6);
    const std::size_t k = 16;
    const auto grid = equidistant_grid(k);
    std::vector<IncrementWithArea> inc;
    double exact = 0.0;
    for (std::size_t l = 0; l < k; ++l) {
        inc.push_back(sample_increment_with_area(rng, grid[l + 1] - grid[l]));
        exact += grid[l + 1] * inc.back().dw - inc.back().area;
    }
    const auto res = wagner_platen_full(c, 0.0, grid, inc);
    EXPECT_NEAR(res.x1_hat, exact, 1e-12);
    EXPECT_EQ(res.nu, k);
}

TEST(FullWagnerPlaten, IncrementCountMustMatchGrid) {
    const auto c = ramp_diffusion().coefficients();
    std::vector<IncrementWithArea> inc(3, IncrementWithArea{0.0, 0.0, 0.25});
    EXPECT_THROW(wagner_platen_full(c, 0.0, equidistant_grid(4), inc), DomainError);
}

TEST(EstimateWeights, AdditiveWeightsAreMinusSigmaPrime) {
    const auto prob = AdditiveProblem::polynomial(Polynomial({1.0}), Polynomial({0.0, 0.0, 0.5}));
    const auto c = prob.coefficients();
    BrownianPath path(7);
    const auto w = estimate_weights(c, 0.0, path, 32);
    for (std::size_t l = 0; l < 32; ++l) {
        EXPECT_EQ(w.y_hat[l], -w.grid[l]);
        EXPECT_EQ(w.m_suffix[l], 1.0);
    }
    EXPECT_EQ(w.m_suffix[32], 1.0);
}

TEST(EstimateWeights, LinearWeightsAreProductOfFieldSteps) {
    const auto prob = LinearProblem::polynomial(Polynomial({0.2}), Polynomial({0.1, 1.0}), 1.0);
    const auto c = prob.coefficients();
    BrownianPath path(8);
    const std::size_t k = 8;
    const auto w = estimate_weights(c, 1.0, path, k);
    for (std::size_t l = 0; l < k; ++l) {
        double prod = 1.0;
        for (std::size_t r = l + 1; r < k; ++r) {
            const double dw = path.sample_at(w.grid[r + 1]) - path.sample_at(w.grid[r]);
            prod *= 1.0 + 0.2 * (w.grid[r + 1] - w.grid[r]) + prob.beta(w.grid[r]) * dw;
        }
        EXPECT_NEAR(w.y_hat[l], -1.0 * w.wpt_values[l] * prod, 1e-12 * (1.0 + std::abs(w.y_hat[l])));
    }
}

TEST(PowerKRule, CeilingOfPower) {
    const auto rule = power_k_rule();
    EXPECT_EQ(rule(16), 8u);
    EXPECT_EQ(rule(81), 27u);
    EXPECT_EQ(rule(256), 64u);
    EXPECT_EQ(rule(10), 6u);
    EXPECT_EQ(rule(1), 1u);
    for (std::size_t n = 1; n < 2000; ++n) {
        const auto k = rule(n);
        EXPECT_GE(k, 1u);
        EXPECT_LE(k, n);
    }
    EXPECT_THROW(power_k_rule(0.5), DomainError);
    EXPECT_THROW(power_k_rule(1.0), DomainError);
}

TEST(InterpolatedIncrementIntegral, MatchesTrapezoidOfKnots) {
    BrownianPath path(9);
    const double t0 = 0.25;
    const double t1 = 0.5;
    const double no_extra = interpolated_increment_integral(path, t0, t1, 0);
    EXPECT_NEAR(no_extra, 0.5 * (path.sample_at(t1) - path.sample_at(t0)) * 0.25, 1e-15);
    const double with_three = interpolated_increment_integral(path, t0, t1, 3);
    const double h = 0.0625;
    double oracle = 0.0;
    for (int r = 1; r <= 3; ++r) {
        oracle += (path.sample_at(t0 + r * h) - path.sample_at(t0)) * h;
    }
    oracle += 0.5 * (path.sample_at(t1) - path.sample_at(t0)) * h;
    EXPECT_NEAR(with_three, oracle, 1e-14);
}

TEST(AdaptiveScheme, CostCountsCoarseAndExtraPoints) {
    auto w = synthetic_weights({1.0, 2.0, 3.0, 4.0});
    BrownianPath path(10);
    for (double t : w.grid) {
        path.sample_at(t);
    }
    const std::vector<std::size_t> mu{0, 1, 2, 3};
    const auto res = adaptive_scheme(path, w, mu);
    EXPECT_EQ(res.nu, 4u + 6u);
    EXPECT_EQ(path.eval_count(), 4u + 6u);
    ASSERT_TRUE(res.mu.has_value());
    EXPECT_EQ(*res.mu, mu);
}

TEST(SchemeEqui, AdditiveIsMidpointIdentity) {
    // sigma(t) = t, x0 = 0: the equidistant scheme returns sum (t_l + 1/(2n)) dW_l.
    const auto c = ramp_diffusion().coefficients();
    const std::size_t n = 16;
    BrownianPath path(11);
    const auto res = scheme_equi(c, 0.0, path, n);
    const auto g = equidistant_grid(n);
    double expected = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        expected += (g[l] + 0.5 / n) * (path.sample_at(g[l + 1]) - path.sample_at(g[l]));
    }
    EXPECT_NEAR(res.x1_hat, expected, 1e-13);
    EXPECT_EQ(res.nu, n);
}

TEST(AdaptiveSchemes, ObservationCountsStayWithinBudget) {
    const auto c = LinearProblem::ramp(2.0).coefficients();
    for (std::uint64_t r = 0; r < 50; ++r) {
        BrownianPath a(12, r);
        const auto star = scheme_star(c, 1.0, a, 100);
        EXPECT_GE(star.nu, 100u - power_k_rule()(100));
        EXPECT_LE(star.nu, 100u);
        EXPECT_EQ(a.eval_count(), star.nu);
        BrownianPath b(12, r);
        const auto ss = scheme_star_star(c, 1.0, b, 100, 2.0);
        EXPECT_EQ(b.eval_count(), ss.nu);
    }
}

TEST(AdaptiveSchemes, StarOnAdditiveSpendsMoreWhereSigmaPrimeIsLarge) {
    const auto prob = AdditiveProblem::polynomial(Polynomial(), Polynomial({0.0, 0.0, 0.5}));
    BrownianPath path(13);
    const auto res = scheme_star(prob.coefficients(), 0.0, path, 256);
    const auto& mu = *res.mu;
    EXPECT_EQ(mu.front(), 0u);
    EXPECT_GT(mu.back(), mu[mu.size() / 4]);
}

TEST(Budgets, StarStarCollapsesToScaledWeightsAtPTwo) {
    // With p = 2, Ybar^{2/3} = S/k, so mu_l = floor(n w_l / k).
    std::mt19937_64 gen(100);
    std::uniform_int_distribution<std::size_t> kdist(1, 64);
    std::lognormal_distribution<double> ydist(0.0, 1.5);
    std::uniform_int_distribution<int> sign(0, 1);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = kdist(gen);
        std::vector<double> y(k);
        for (auto& v : y) {
            v = (sign(gen) ? 1.0 : -1.0) * ydist(gen);
        }
        const std::size_t n = k + kdist(gen) * 10;
        const auto w = synthetic_weights(y);
        const auto mu = budgets(w, BudgetRule{BudgetKind::StarStar, n, 2.0, {}});
        for (std::size_t l = 0; l < k; ++l) {
            const long double x = static_cast<long double>(n) * std::cbrt(y[l] * y[l]) / static_cast<long double>(k);
            const auto oracle = static_cast<std::size_t>(std::floor(x));
            EXPECT_LE(mu[l] > oracle ? mu[l] - oracle : oracle - mu[l], 1u) << "trial " << trial;
            if (std::abs(x - std::round(x)) > 1e-9L) {
                EXPECT_EQ(mu[l], oracle) << "trial " << trial;
            }
        }
    }
}

TEST(Budgets, StarNuBoundOnRandomConfigurations) {
    std::mt19937_64 gen(101);
    std::uniform_int_distribution<std::size_t> kdist(1, 128);
    std::uniform_int_distribution<std::size_t> extra(0, 2000);
    std::normal_distribution<double> ydist(0.0, 3.0);
    std::bernoulli_distribution zero(0.2);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = kdist(gen);
        std::vector<double> y(k);
        for (auto& v : y) {
            v = zero(gen) ? 0.0 : ydist(gen);
        }
        const std::size_t n = k + extra(gen);
        const auto mu = budgets(synthetic_weights(y), BudgetRule{BudgetKind::Star, n, 2.0, {}});
        const std::size_t nu = k + total(mu);
        EXPECT_GE(nu, n - k) << "trial " << trial;
        EXPECT_LE(nu, n) << "trial " << trial;
    }
}

TEST(Budgets, StarInvariantUnderPositiveScaling) {
    std::mt19937_64 gen(102);
    std::uniform_int_distribution<std::size_t> kdist(1, 64);
    std::normal_distribution<double> ydist(0.0, 1.0);
    std::uniform_real_distribution<double> cdist(1e-3, 1e3);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t k = kdist(gen);
        std::vector<double> y(k);
        for (auto& v : y) {
            v = ydist(gen);
        }
        const std::size_t n = k + 500;
        const auto base = budgets(synthetic_weights(y), BudgetRule{BudgetKind::Star, n, 2.0, {}});

        // Scaling by 8 multiplies every w_l by exactly 4.
        std::vector<double> y8 = y;
        for (auto& v : y8) {
            v *= 8.0;
        }
        EXPECT_EQ(budgets(synthetic_weights(y8), BudgetRule{BudgetKind::Star, n, 2.0, {}}), base) << trial;

        // General factors: equal up to one unit per interval from rounding.
        const double c = cdist(gen);
        std::vector<double> yc = y;
        for (auto& v : yc) {
            v *= c;
        }
        const auto scaled = budgets(synthetic_weights(yc), BudgetRule{BudgetKind::Star, n, 2.0, {}});
        for (std::size_t l = 0; l < k; ++l) {
            EXPECT_LE(scaled[l] > base[l] ? scaled[l] - base[l] : base[l] - scaled[l], 1u) << trial;
        }
    }
}

TEST(Budgets, DegenerateWeights) {
    const auto w = synthetic_weights(std::vector<double>(5, 0.0));
    EXPECT_EQ(total(budgets(w, BudgetRule{BudgetKind::StarStar, 100, 2.0, {}})), 0u);
    const auto star = budgets(w, BudgetRule{BudgetKind::Star, 103, 2.0, {}});
    for (auto m : star) {
        EXPECT_EQ(m, 19u);
    }
    EXPECT_EQ(total(budgets(w, BudgetRule{BudgetKind::Equi, 100, 2.0, {}})), 0u);
}

TEST(Budgets, FixedUsesMomentsNotRealisedWeights) {
    const auto w = synthetic_weights({100.0, 0.0, 0.0, 0.0});
    const auto mu = budgets(w, BudgetRule{BudgetKind::Fixed, 44, 2.0, [](double) { return 1.0; }});
    EXPECT_EQ(mu, (std::vector<std::size_t>{10, 10, 10, 10}));
    EXPECT_THROW(budgets(w, BudgetRule{BudgetKind::Fixed, 44, 2.0, {}}), DomainError);
}

TEST(Budgets, BudgetBelowGridSizeRejected) {
    const auto w = synthetic_weights({1.0, 1.0, 1.0});
    EXPECT_THROW(budgets(w, BudgetRule{BudgetKind::Star, 2, 2.0, {}}), DomainError);
}
