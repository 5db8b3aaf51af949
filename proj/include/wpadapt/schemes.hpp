#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "wpadapt/brownian.hpp"
#include "wpadapt/errors.hpp"
#include "wpadapt/problem.hpp"
#include "wpadapt/rng.hpp"

namespace wpadapt {

/// t_l = l / k for l = 0..k. Every scheme builds its grids through this
/// function so that equal rationals map to bitwise-equal knot times.
inline std::vector<double> equidistant_grid(std::size_t k) {
    detail::require(k >= 1, "equidistant_grid: k must be positive");
    std::vector<double> grid(k + 1);
    const double k_real = static_cast<double>(k);
    for (std::size_t l = 0; l <= k; ++l) {
        grid[l] = static_cast<double>(l) / k_real;
    }
    return grid;
}

struct SchemeResult {
    double x1_hat = 0.0;
    /// Distinct positive times at which the scheme observes W.
    std::size_t nu = 0;
    /// Per-interval extra observations of the adaptive schemes.
    std::optional<std::vector<std::size_t>> mu;
    /// Coarse grid size.
    std::size_t k = 0;
    /// Values at the coarse grid points; filled by the truncated Wagner-Platen scheme only.
    std::vector<double> trajectory;
};

namespace detail {

inline void validate_grid(std::span<const double> grid) {
    require(grid.size() >= 2, "grid needs at least two points");
    require(grid.front() == 0.0 && grid.back() == 1.0, "grid must start at 0 and end at 1");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        require(grid[i] > grid[i - 1], "grid must be strictly increasing");
    }
}

inline double euler_step(const CoefficientSet& c, double t, double x, double dt, double dw) {
    return x + c.a(t, x) * dt + c.sigma(t, x) * dw;
}

inline double milstein_step(const CoefficientSet& c, double t, double x, double dt, double dw) {
    const double s = c.sigma(t, x);
    return x + c.a(t, x) * dt + s * dw + 0.5 * s * c.sigma01(t, x) * (dw * dw - dt);
}

// One step of the Wagner-Platen scheme without the G * (time integral of W) term.
inline double truncated_wp_step(const CoefficientSet& c, double t, double x, double dt, double dw) {
    const double a = c.a(t, x);
    const double s = c.sigma(t, x);
    const double s01 = c.sigma01(t, x);
    const double s02 = c.sigma02(t, x);
    return x + a * dt + s * dw + 0.5 * s * s01 * (dw * dw - dt) +
           (c.sigma10(t, x) + a * s01 - 0.5 * s * s01 * s01) * dw * dt +
           (s * s01 * s01 + s * s * s02) * dw * dw * dw / 6.0 +
           0.5 * (c.a10(t, x) + a * c.a01(t, x) + 0.5 * s * s * c.a02(t, x)) * dt * dt;
}

template <class Step>
SchemeResult run_on_path(const CoefficientSet& c, double x0, BrownianPath& path, std::span<const double> grid,
                         Step step, bool keep_trajectory) {
    validate_grid(grid);
    SchemeResult result;
    result.k = grid.size() - 1;
    result.nu = result.k;
    if (keep_trajectory) {
        result.trajectory.reserve(grid.size());
        result.trajectory.push_back(x0);
    }
    double x = x0;
    double w_prev = path.sample_at(grid[0]);
    for (std::size_t l = 0; l + 1 < grid.size(); ++l) {
        const double w_next = path.sample_at(grid[l + 1]);
        x = step(c, grid[l], x, grid[l + 1] - grid[l], w_next - w_prev);
        w_prev = w_next;
        if (keep_trajectory) {
            result.trajectory.push_back(x);
        }
    }
    result.x1_hat = x;
    return result;
}

}  // namespace detail

/// Euler-Maruyama on the given grid, increments read from `path`.
inline SchemeResult euler(const CoefficientSet& c, double x0, BrownianPath& path, std::span<const double> grid) {
    return detail::run_on_path(c, x0, path, grid, detail::euler_step, false);
}

/// Milstein scheme, Euler plus sigma sigma01 (dW^2 - dt) / 2. For
/// diffusions depending on t only this is the plain sum of sigma(t_l) dW_l.
inline SchemeResult milstein(const CoefficientSet& c, double x0, BrownianPath& path, std::span<const double> grid) {
    return detail::run_on_path(c, x0, path, grid, detail::milstein_step, false);
}

/// Truncated Wagner-Platen scheme: uses point values of W only. The full
/// trajectory at the grid points is kept in the result.
inline SchemeResult wagner_platen_truncated(const CoefficientSet& c, double x0, BrownianPath& path,
                                            std::span<const double> grid) {
    return detail::run_on_path(c, x0, path, grid, detail::truncated_wp_step, true);
}

/// Full Wagner-Platen scheme driven by (increment, area) pairs, one per grid
/// interval. It needs time integrals of W and therefore runs detached from
/// any BrownianPath; nu counts the k point increments.
inline SchemeResult wagner_platen_full(const CoefficientSet& c, double x0, std::span<const double> grid,
                                       std::span<const IncrementWithArea> steps) {
    detail::validate_grid(grid);
    detail::require(steps.size() + 1 == grid.size(), "wagner_platen_full: one increment per grid interval");
    double x = x0;
    for (std::size_t l = 0; l < steps.size(); ++l) {
        const double t = grid[l];
        const double dt = grid[l + 1] - t;
        const double g = g_weight(c, t, x);
        x = detail::truncated_wp_step(c, t, x, dt, steps[l].dw) + g * steps[l].area;
    }
    SchemeResult result;
    result.x1_hat = x;
    result.k = steps.size();
    result.nu = steps.size();
    return result;
}

inline SchemeResult wagner_platen_full(const CoefficientSet& c, double x0, Rng& rng, std::size_t k) {
    detail::require(k >= 1, "wagner_platen_full: k must be positive");
    const auto grid = equidistant_grid(k);
    std::vector<IncrementWithArea> steps;
    steps.reserve(k);
    for (std::size_t l = 0; l < k; ++l) {
        steps.push_back(sample_increment_with_area(rng, grid[l + 1] - grid[l]));
    }
    return wagner_platen_full(c, x0, grid, steps);
}

/// Discrete approximation of the weight process on the coarse grid l/k.
struct WeightEstimate {
    std::size_t k = 0;
    std::vector<double> grid;        // k + 1 points
    std::vector<double> y_hat;       // k values, Y-hat(t_l)
    std::vector<double> m_suffix;    // k + 1 values, M-hat(t_l, 1); m_suffix[k] == 1
    std::vector<double> wpt_values;  // k + 1 values of the truncated Wagner-Platen scheme
};

/// Runs the truncated Wagner-Platen scheme on the grid l/k and forms
///   m_l = 1 + a01 dt + sigma01 dW_l          (Euler step of the field)
///   M(t_l, 1) = m_l * ... * m_{k-1}          (one backward pass)
///   Y(t_l) = M(t_{l+1}, 1) * G(t_l, X(t_l)).
/// Note the weight at t_l uses the field from t_{l+1}, not t_l.
inline WeightEstimate estimate_weights(const CoefficientSet& c, double x0, BrownianPath& path, std::size_t k) {
    detail::require(k >= 1, "estimate_weights: k must be positive");
    WeightEstimate est;
    est.k = k;
    est.grid = equidistant_grid(k);
    est.wpt_values = wagner_platen_truncated(c, x0, path, est.grid).trajectory;

    std::vector<double> factors(k);
    for (std::size_t l = 0; l < k; ++l) {
        const double t = est.grid[l];
        const double x = est.wpt_values[l];
        const double dw = path.sample_at(est.grid[l + 1]) - path.sample_at(t);
        factors[l] = 1.0 + c.a01(t, x) * (est.grid[l + 1] - t) + c.sigma01(t, x) * dw;
    }
    est.m_suffix.assign(k + 1, 1.0);
    for (std::size_t l = k; l-- > 0;) {
        est.m_suffix[l] = factors[l] * est.m_suffix[l + 1];
    }
    est.y_hat.resize(k);
    for (std::size_t l = 0; l < k; ++l) {
        est.y_hat[l] = est.m_suffix[l + 1] * g_weight(c, est.grid[l], est.wpt_values[l]);
    }
    return est;
}

using KRule = std::function<std::size_t(std::size_t)>;

/// k_n = ceil(n^exponent), clamped to [1, n]. Exponents in (2/3, 1) give
/// k_n / n -> 0 and n / k_n^{3/2} -> 0.
inline KRule power_k_rule(double exponent = 0.75) {
    detail::require(exponent > 2.0 / 3.0 && exponent < 1.0, "power_k_rule: exponent must lie in (2/3, 1)");
    return [exponent](std::size_t n) -> std::size_t {
        const double v = std::pow(static_cast<double>(n), exponent);
        const double nearest = std::round(v);
        const double k = (std::abs(v - nearest) <= 1e-9 * v) ? nearest : std::ceil(v);
        return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, std::max<std::size_t>(n, 1));
    };
}

/// (E|Y(t)|^2)^{1/2} as a function of t.
using MomentProvider = std::function<double(double)>;

enum class BudgetKind { StarStar, Star, Fixed, Equi };

struct BudgetRule {
    BudgetKind kind = BudgetKind::Star;
    std::size_t n = 0;
    /// Error exponent; used by StarStar only.
    double p = 2.0;
    /// Required by Fixed.
    MomentProvider moments;
};

namespace detail {

// floor(x), with values within a few ulps of an integer snapped onto it so
// that algebraically integral budgets do not lose one observation to rounding.
inline std::size_t snapped_floor(double x) {
    if (!(x > 0.0)) {
        return 0;
    }
    const double nearest = std::round(x);
    if (std::abs(x - nearest) <= 8.0 * std::numeric_limits<double>::epsilon() * x) {
        return static_cast<std::size_t>(nearest);
    }
    return static_cast<std::size_t>(std::floor(x));
}

}  // namespace detail

/// Per-interval counts of extra observations for the adaptive schemes.
///
/// With weights w_l = |y_l|^{2/3}, S = sum w_l and Ybar = (S/k)^{3/2}:
///   StarStar: floor(n (w_l / S) Ybar^{p/(p+1)}), or 0 when Ybar = 0
///   Star:     floor((n - k) w_l / S),            or floor((n - k)/k)
///   Fixed:    Star with |y_l| replaced by (E|Y(t_l)|^2)^{1/2}
///   Equi:     0
/// Ybar counts as zero when it is below machine epsilon times max |y_l|.
inline std::vector<std::size_t> budgets(const WeightEstimate& weights, const BudgetRule& rule) {
    const std::size_t k = weights.k;
    detail::require(k >= 1 && weights.y_hat.size() == k, "budgets: malformed weight estimate");
    detail::require(rule.n >= k, "budgets: budget n is smaller than the coarse grid size k");
    std::vector<std::size_t> mu(k, 0);
    if (rule.kind == BudgetKind::Equi) {
        return mu;
    }

    std::vector<double> magnitude(k);
    if (rule.kind == BudgetKind::Fixed) {
        detail::require(static_cast<bool>(rule.moments), "budgets: Fixed rule needs a moment provider");
        for (std::size_t l = 0; l < k; ++l) {
            magnitude[l] = std::abs(rule.moments(weights.grid[l]));
        }
    } else {
        for (std::size_t l = 0; l < k; ++l) {
            magnitude[l] = std::abs(weights.y_hat[l]);
        }
    }
    std::vector<double> w(k);
    for (std::size_t l = 0; l < k; ++l) {
        w[l] = std::cbrt(magnitude[l] * magnitude[l]);
    }
    const double sum = std::accumulate(w.begin(), w.end(), 0.0);
    const double k_real = static_cast<double>(k);
    const double y_bar = std::pow(sum / k_real, 1.5);
    const double largest = *std::max_element(magnitude.begin(), magnitude.end());
    const bool degenerate = !(y_bar > std::numeric_limits<double>::epsilon() * largest) || !(sum > 0.0);

    if (rule.kind == BudgetKind::StarStar) {
        detail::require(rule.p >= 1.0, "budgets: p must be at least 1");
        if (degenerate) {
            return mu;
        }
        // Ybar^{p/(p+1)} = (S/k)^{3p/(2(p+1))}; the exponent is exactly 1 for p = 2.
        const double scale = std::pow(sum / k_real, 3.0 * rule.p / (2.0 * (rule.p + 1.0)));
        const double n_real = static_cast<double>(rule.n);
        for (std::size_t l = 0; l < k; ++l) {
            mu[l] = detail::snapped_floor(n_real * (w[l] / sum) * scale);
        }
        return mu;
    }

    const std::size_t spare = rule.n - k;
    if (degenerate) {
        std::fill(mu.begin(), mu.end(), spare / k);
        return mu;
    }
    const double spare_real = static_cast<double>(spare);
    for (std::size_t l = 0; l < k; ++l) {
        mu[l] = detail::snapped_floor(spare_real * w[l] / sum);
    }
    // Rounding of w_l / S can push the floor sum past n - k.
    std::size_t total = std::accumulate(mu.begin(), mu.end(), std::size_t{0});
    while (total > spare) {
        auto it = std::max_element(mu.begin(), mu.end());
        --*it;
        --total;
    }
    return mu;
}

/// Time integral of (interpolant - W(t0)) over [t0, t1], where the
/// interpolant is piecewise linear through W at t0 + r (t1 - t0)/(mu + 1),
/// r = 0..mu+1. The r-th sub-knot is sampled from `path` if missing.
inline double interpolated_increment_integral(BrownianPath& path, double t0, double t1, std::size_t mu) {
    const double w0 = path.sample_at(t0);
    const double step = (t1 - t0) / static_cast<double>(mu + 1);
    double integral = 0.0;
    double t_prev = t0;
    double d_prev = 0.0;
    for (std::size_t r = 1; r <= mu + 1; ++r) {
        const double t = (r == mu + 1) ? t1 : t0 + static_cast<double>(r) * step;
        const double d = path.sample_at(t) - w0;
        integral += 0.5 * (d_prev + d) * (t - t_prev);
        t_prev = t;
        d_prev = d;
    }
    return integral;
}

/// Basic adaptive scheme: observes W at mu_l equidistant interior points of
/// each coarse interval and adds
///   Q(1) = sum_l y_l * integral over [t_l, t_{l+1}] of (interpolant - W(t_l))
/// to the truncated Wagner-Platen endpoint.
inline SchemeResult adaptive_scheme(BrownianPath& path, const WeightEstimate& weights,
                                    std::span<const std::size_t> mu) {
    detail::require(mu.size() == weights.k, "adaptive_scheme: one budget per coarse interval");
    double correction = 0.0;
    for (std::size_t l = 0; l < weights.k; ++l) {
        correction +=
            weights.y_hat[l] * interpolated_increment_integral(path, weights.grid[l], weights.grid[l + 1], mu[l]);
    }
    SchemeResult result;
    result.x1_hat = weights.wpt_values[weights.k] + correction;
    result.k = weights.k;
    result.nu = weights.k + std::accumulate(mu.begin(), mu.end(), std::size_t{0});
    result.mu = std::vector<std::size_t>(mu.begin(), mu.end());
    return result;
}

/// Equidistant scheme on l/n: truncated Wagner-Platen plus the correction
/// (1/2n) sum_r y_r (W(t_{r+1}) - W(t_r)).
inline SchemeResult scheme_equi(const CoefficientSet& c, double x0, BrownianPath& path, std::size_t n) {
    detail::require(n >= 1, "scheme_equi: n must be positive");
    const auto weights = estimate_weights(c, x0, path, n);
    const std::vector<std::size_t> mu(n, 0);
    return adaptive_scheme(path, weights, mu);
}

namespace detail {

inline SchemeResult run_budgeted(const CoefficientSet& c, double x0, BrownianPath& path, BudgetRule rule,
                                 const KRule& k_rule) {
    require(rule.n >= 1, "adaptive scheme: n must be positive");
    const std::size_t k = k_rule(rule.n);
    require(k >= 1 && k <= rule.n, "adaptive scheme: k_rule(n) must lie in [1, n]");
    const auto weights = estimate_weights(c, x0, path, k);
    const auto mu = budgets(weights, rule);
    return adaptive_scheme(path, weights, mu);
}

}  // namespace detail

/// Trajectory-adaptive scheme with a varying number of observations tuned to
/// the error exponent p.
inline SchemeResult scheme_star_star(const CoefficientSet& c, double x0, BrownianPath& path, std::size_t n, double p,
                                     const KRule& k_rule = power_k_rule()) {
    return detail::run_budgeted(c, x0, path, BudgetRule{BudgetKind::StarStar, n, p, {}}, k_rule);
}

/// Trajectory-adaptive scheme using between n - k_n and n observations.
inline SchemeResult scheme_star(const CoefficientSet& c, double x0, BrownianPath& path, std::size_t n,
                                const KRule& k_rule = power_k_rule()) {
    return detail::run_budgeted(c, x0, path, BudgetRule{BudgetKind::Star, n, 2.0, {}}, k_rule);
}

/// Same discretisation for every trajectory, placed by the second moments
/// of the weight process.
inline SchemeResult scheme_fixed(const CoefficientSet& c, double x0, BrownianPath& path, std::size_t n,
                                 const KRule& k_rule, MomentProvider moments) {
    return detail::run_budgeted(c, x0, path, BudgetRule{BudgetKind::Fixed, n, 2.0, std::move(moments)}, k_rule);
}

}  // namespace wpadapt
