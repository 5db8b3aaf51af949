#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "wpadapt/brownian.hpp"
#include "wpadapt/errors.hpp"
#include "wpadapt/parallel.hpp"
#include "wpadapt/problem.hpp"
#include "wpadapt/quadrature.hpp"
#include "wpadapt/schemes.hpp"

namespace wpadapt {

/// m_p = (E|N|^p)^{1/p} for a standard normal N, via log-gamma.
inline double gaussian_abs_moment(double p) {
    detail::require(p >= 1.0, "gaussian_abs_moment: p must be at least 1");
    const double log_moment = 0.5 * p * std::log(2.0) + std::lgamma(0.5 * (p + 1.0)) - 0.5 * std::log(std::numbers::pi);
    return std::exp(log_moment / p);
}

enum class ConstantMethod { Analytic, MonteCarlo };

/// Asymptotic error constants; the limits of (cost x error) are these
/// divided by sqrt(12).
///   c_star_star  trajectory-adaptive, varying number of observations
///   c_star       trajectory-adaptive, fixed number of observations
///   c_2          best prefixed discretisation (p = 2 only)
///   c_equi       equidistant
/// Monte Carlo estimates carry standard errors in the se_* fields.
struct ConstantSet {
    double c_star_star = 0.0;
    double c_star = 0.0;
    double c_2 = 0.0;
    double c_equi = 0.0;
    double p = 2.0;
    double m_p = 1.0;
    ConstantMethod method = ConstantMethod::Analytic;
    std::size_t mc_reps = 0;
    std::size_t mc_k = 0;
    double se_star_star = 0.0;
    double se_star = 0.0;
    double se_2 = 0.0;
    double se_equi = 0.0;
};

namespace detail {

struct WeightNorms {
    double norm_two_thirds;  // (int |w|^{2/3})^{3/2}
    double norm_two;         // (int w^2)^{1/2}
};

inline WeightNorms weight_norms(const TimeFunction& w, const std::vector<double>& kinks) {
    const double q23 =
        integrate([&](double t) { const double v = w(t); return std::cbrt(v * v); }, 0.0, 1.0, kinks);
    const double q2 = integrate([&](double t) { const double v = w(t); return v * v; }, 0.0, 1.0, kinks);
    return {std::pow(q23, 1.5), std::sqrt(q2)};
}

}  // namespace detail

/// Closed-form constants of dX = alpha X dt + beta X dW with constant X(0):
/// with A = int alpha, B = int beta^2,
///   C** = m_p |x0| e^{A - B/2} ||beta'||_{2/3} e^{p B / (2(p+1))}
///   C*  = m_p |x0| e^{A - B/2} ||beta'||_{2/3} e^{p B / 2}
///   C_2 = C* at p = 2
///   C^equi = m_p |x0| e^{A - B/2} ||beta'||_2 e^{p B / 2}.
inline ConstantSet linear_constants(const LinearProblem& problem, double p) {
    const double m_p = gaussian_abs_moment(p);
    const double drift = integrate(problem.alpha, 0.0, 1.0);
    const auto& beta = problem.beta;
    const double beta_sq = integrate([&](double t) { return beta(t) * beta(t); }, 0.0, 1.0);
    const auto norms = detail::weight_norms(problem.beta_prime, problem.kinks);
    const double base = std::abs(problem.x0) * std::exp(drift - 0.5 * beta_sq);

    ConstantSet out;
    out.p = p;
    out.m_p = m_p;
    out.c_star_star = m_p * base * norms.norm_two_thirds * std::exp(p / (2.0 * (p + 1.0)) * beta_sq);
    out.c_star = m_p * base * norms.norm_two_thirds * std::exp(0.5 * p * beta_sq);
    out.c_2 = base * norms.norm_two_thirds * std::exp(beta_sq);
    out.c_equi = m_p * base * norms.norm_two * std::exp(0.5 * p * beta_sq);
    return out;
}

/// dX = a(t) dt + sigma(t) dW: the weight is -sigma', deterministic, so
/// C** = C* = m_p ||sigma'||_{2/3}, C_2 = ||sigma'||_{2/3}, C^equi = m_p ||sigma'||_2.
inline ConstantSet additive_constants(const AdditiveProblem& problem, double p) {
    const double m_p = gaussian_abs_moment(p);
    const auto norms = detail::weight_norms(problem.diff_prime, problem.kinks);
    ConstantSet out;
    out.p = p;
    out.m_p = m_p;
    out.c_star_star = m_p * norms.norm_two_thirds;
    out.c_star = out.c_star_star;
    out.c_2 = norms.norm_two_thirds;
    out.c_equi = m_p * norms.norm_two;
    return out;
}

/// Analytic constants when the problem type has them.
inline std::optional<ConstantSet> analytic_constants(const Problem& problem, double p) {
    if (const auto* lin = std::get_if<LinearProblem>(&problem)) {
        return linear_constants(*lin, p);
    }
    if (const auto* add = std::get_if<AdditiveProblem>(&problem)) {
        return additive_constants(*add, p);
    }
    return std::nullopt;
}

/// t -> (E|Y(t)|^2)^{1/2} in closed form, when available.
inline std::optional<MomentProvider> analytic_moment_provider(const Problem& problem) {
    if (const auto* lin = std::get_if<LinearProblem>(&problem)) {
        const double drift = integrate(lin->alpha, 0.0, 1.0);
        const auto& beta = lin->beta;
        const double beta_sq = integrate([&](double t) { return beta(t) * beta(t); }, 0.0, 1.0);
        const double rms_x1 = std::abs(lin->x0) * std::exp(drift + 0.5 * beta_sq);
        auto beta_prime = lin->beta_prime;
        return MomentProvider([beta_prime, rms_x1](double t) { return std::abs(beta_prime(t)) * rms_x1; });
    }
    if (const auto* add = std::get_if<AdditiveProblem>(&problem)) {
        auto diff_prime = add->diff_prime;
        return MomentProvider([diff_prime](double t) { return std::abs(diff_prime(t)); });
    }
    return std::nullopt;
}

/// c_rho = (int rho^{2/3})^{3/2}, the weighted-integration constant.
inline double weighted_integration_constant(const TimeFunction& rho, const std::vector<double>& kinks = {}) {
    return detail::weight_norms(rho, kinks).norm_two_thirds;
}

namespace detail {

// Y-hat on the k-grid for replication r of a Monte Carlo pass.
inline std::vector<double> sample_weights(const CoefficientSet& c, std::size_t k, std::uint64_t seed,
                                          std::uint64_t r) {
    BrownianPath path(seed, r);
    const double x0 = c.x0_sampler(path.rng());
    return estimate_weights(c, x0, path, k).y_hat;
}

}  // namespace detail

/// Pointwise second moments E|Y-hat(t_l)|^2, l = 0..k-1, over `reps` paths.
inline std::vector<double> mc_weight_moments(const CoefficientSet& c, std::size_t k, std::size_t reps,
                                             std::uint64_t seed, std::size_t threads = default_threads()) {
    detail::require(k >= 1 && reps >= 1, "mc_weight_moments: k and reps must be positive");
    std::vector<std::vector<double>> squares(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        auto y = detail::sample_weights(c, k, seed, r);
        for (double& v : y) {
            v *= v;
        }
        squares[r] = std::move(y);
    });
    std::vector<double> out(k);
    std::vector<double> column(reps);
    for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t r = 0; r < reps; ++r) {
            column[r] = squares[r][l];
        }
        out[l] = pairwise_mean(column);
    }
    return out;
}

/// Moment provider from a Monte Carlo pre-pass on the l/k grid; piecewise
/// constant on [t_l, t_{l+1}).
inline MomentProvider mc_moment_provider(const CoefficientSet& c, std::size_t k, std::size_t reps,
                                         std::uint64_t seed, std::size_t threads = default_threads()) {
    auto second = mc_weight_moments(c, k, reps, seed, threads);
    std::vector<double> rms(second.size());
    for (std::size_t l = 0; l < second.size(); ++l) {
        rms[l] = std::sqrt(second[l]);
    }
    return [rms, k](double t) {
        const auto l = std::min<std::size_t>(static_cast<std::size_t>(t * static_cast<double>(k)), k - 1);
        return rms[l];
    };
}

/// Monte Carlo estimates of the four constants from `reps` replications of
/// the weight estimator on the k-grid. Integrals over [0, 1] are replaced by
/// the left-endpoint sums (1/k) sum_l. Standard errors by the delta method.
inline ConstantSet mc_constants(const CoefficientSet& c, double p, std::size_t k, std::size_t reps,
                                std::uint64_t seed, std::size_t threads = default_threads()) {
    detail::require(k >= 2, "mc_constants: k must be at least 2");
    detail::require(reps >= 1, "mc_constants: reps must be positive");
    const double m_p = gaussian_abs_moment(p);
    const double k_real = static_cast<double>(k);

    std::vector<std::vector<double>> squares(reps);
    std::vector<double> star_star_terms(reps);
    std::vector<double> star_terms(reps);
    std::vector<double> equi_terms(reps);
    const double e_ss = 3.0 * p / (2.0 * (p + 1.0));
    parallel_for(reps, threads, [&](std::size_t r) {
        auto y = detail::sample_weights(c, k, seed, r);
        double sum23 = 0.0;
        double sum2 = 0.0;
        for (double& v : y) {
            v *= v;
            sum23 += std::cbrt(v);
            sum2 += v;
        }
        const double r23 = sum23 / k_real;
        const double r2 = sum2 / k_real;
        star_star_terms[r] = std::pow(r23, e_ss);
        star_terms[r] = std::pow(r23, 1.5 * p);
        equi_terms[r] = std::pow(r2, 0.5 * p);
        squares[r] = std::move(y);
    });

    const double reps_real = static_cast<double>(reps);
    const auto estimate = [&](const std::vector<double>& terms, double power, double& se) {
        const double mean = pairwise_mean(terms);
        const double sd = std::sqrt(sample_variance(terms));
        const double value = m_p * std::pow(mean, power);
        se = (mean > 0.0) ? m_p * power * std::pow(mean, power - 1.0) * sd / std::sqrt(reps_real) : 0.0;
        return value;
    };

    ConstantSet out;
    out.p = p;
    out.m_p = m_p;
    out.method = ConstantMethod::MonteCarlo;
    out.mc_reps = reps;
    out.mc_k = k;
    out.c_star_star = estimate(star_star_terms, (p + 1.0) / p, out.se_star_star);
    out.c_star = estimate(star_terms, 1.0 / p, out.se_star);
    out.c_equi = estimate(equi_terms, 1.0 / p, out.se_equi);

    // C_2 = ((1/k) sum_l (E Y_l^2)^{1/3})^{3/2}, gradient-weighted for the SE.
    std::vector<double> moments(k);
    std::vector<double> column(reps);
    for (std::size_t l = 0; l < k; ++l) {
        for (std::size_t r = 0; r < reps; ++r) {
            column[r] = squares[r][l];
        }
        moments[l] = pairwise_mean(column);
    }
    double inner = 0.0;
    for (double m : moments) {
        inner += std::cbrt(m);
    }
    inner /= k_real;
    out.c_2 = std::pow(inner, 1.5);
    std::vector<double> gradient(k, 0.0);
    for (std::size_t l = 0; l < k; ++l) {
        if (moments[l] > 0.0) {
            gradient[l] = std::sqrt(inner) / (2.0 * k_real) / std::cbrt(moments[l] * moments[l]);
        }
    }
    std::vector<double> linearised(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        double z = 0.0;
        for (std::size_t l = 0; l < k; ++l) {
            z += gradient[l] * squares[r][l];
        }
        linearised[r] = z;
    }
    out.se_2 = std::sqrt(sample_variance(linearised) / reps_real);
    return out;
}

}  // namespace wpadapt
