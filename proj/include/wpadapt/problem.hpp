#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <type_traits>
#include <variant>
#include <vector>

#include "wpadapt/brownian.hpp"
#include "wpadapt/errors.hpp"
#include "wpadapt/polynomial.hpp"
#include "wpadapt/quadrature.hpp"
#include "wpadapt/rng.hpp"

namespace wpadapt {

using TimeFunction = std::function<double(double)>;
using StateFunction = std::function<double(double, double)>;
using InitialSampler = std::function<double(Rng&)>;

/// Drift a, diffusion sigma and the six partials the Wagner-Platen
/// expansion needs; a10 is d a / d t, a01 is d a / d x, and so on.
///
/// Callables must be total and finite on [0, 1] x R and safe to call
/// concurrently. Lipschitz and growth regularity of a, sigma and the
/// partials is a caller contract and is not checked, and neither is
/// finiteness of the high moments of X(0).
struct CoefficientSet {
    StateFunction a;
    StateFunction sigma;
    StateFunction a10;
    StateFunction a01;
    StateFunction a02;
    StateFunction sigma10;
    StateFunction sigma01;
    StateFunction sigma02;
    InitialSampler x0_sampler;
};

/// G = sigma a01 - sigma10 - a sigma01 - sigma^2 sigma02 / 2, the factor in
/// front of the time integral of W in the Wagner-Platen step.
inline double g_weight(const CoefficientSet& c, double t, double x) {
    const double s = c.sigma(t, x);
    return s * c.a01(t, x) - c.sigma10(t, x) - c.a(t, x) * c.sigma01(t, x) - 0.5 * s * s * c.sigma02(t, x);
}

inline InitialSampler constant_initial(double x0) {
    return [x0](Rng&) { return x0; };
}

/// dX = alpha(t) X dt + beta(t) X dW.
struct LinearProblem {
    TimeFunction alpha;
    TimeFunction beta;
    TimeFunction alpha_prime;
    TimeFunction beta_prime;
    double x0 = 1.0;
    /// Zeros of beta' in (0, 1), if known; used to split quadratures of |beta'|^q.
    std::vector<double> kinks;

    static LinearProblem polynomial(const Polynomial& alpha, const Polynomial& beta, double x0 = 1.0) {
        const Polynomial da = alpha.derivative();
        const Polynomial db = beta.derivative();
        return LinearProblem{[alpha](double t) { return alpha(t); }, [beta](double t) { return beta(t); },
                             [da](double t) { return da(t); },       [db](double t) { return db(t); },
                             x0,                                     db.roots_in(0.0, 1.0)};
    }

    /// alpha = 0, beta(t) = b t: the worked example with closed-form constants.
    static LinearProblem ramp(double b) { return polynomial(Polynomial(), Polynomial({0.0, b}), 1.0); }

    CoefficientSet coefficients() const {
        auto al = alpha;
        auto be = beta;
        auto dal = alpha_prime;
        auto dbe = beta_prime;
        return CoefficientSet{
            [al](double t, double x) { return al(t) * x; },
            [be](double t, double x) { return be(t) * x; },
            [dal](double t, double x) { return dal(t) * x; },
            [al](double t, double) { return al(t); },
            [](double, double) { return 0.0; },
            [dbe](double t, double x) { return dbe(t) * x; },
            [be](double t, double) { return be(t); },
            [](double, double) { return 0.0; },
            constant_initial(x0),
        };
    }
};

/// dX = drift(t) dt + diff(t) dW.
struct AdditiveProblem {
    TimeFunction drift;
    TimeFunction diff;
    TimeFunction diff_prime;
    double x0 = 0.0;
    /// Zeros of diff' in (0, 1), if known.
    std::vector<double> kinks;

    static AdditiveProblem polynomial(const Polynomial& drift, const Polynomial& diff, double x0 = 0.0) {
        const Polynomial dd = diff.derivative();
        return AdditiveProblem{[drift](double t) { return drift(t); }, [diff](double t) { return diff(t); },
                               [dd](double t) { return dd(t); }, x0, dd.roots_in(0.0, 1.0)};
    }

    CoefficientSet coefficients() const {
        auto dr = drift;
        auto df = diff;
        auto ddf = diff_prime;
        const auto zero = [](double, double) { return 0.0; };
        return CoefficientSet{
            [dr](double t, double) { return dr(t); },
            [df](double t, double) { return df(t); },
            zero,
            zero,
            zero,
            [ddf](double t, double) { return ddf(t); },
            zero,
            zero,
            constant_initial(x0),
        };
    }
};

/// dX = a(X) dt + dW with user-supplied a, a' and a''.
struct AutonomousProblem {
    TimeFunction drift;
    TimeFunction drift_prime;
    TimeFunction drift_second;
    double x0 = 0.0;

    CoefficientSet coefficients() const {
        auto dr = drift;
        auto d1 = drift_prime;
        auto d2 = drift_second;
        const auto zero = [](double, double) { return 0.0; };
        return CoefficientSet{
            [dr](double, double x) { return dr(x); },
            [](double, double) { return 1.0; },
            zero,
            [d1](double, double x) { return d1(x); },
            [d2](double, double x) { return d2(x); },
            zero,
            zero,
            zero,
            constant_initial(x0),
        };
    }
};

/// Any equation registered programmatically; its reference solution is a
/// fine-grid Milstein run.
struct CustomProblem {
    CoefficientSet coefficients;
    std::string name = "custom";
};

using Problem = std::variant<LinearProblem, AdditiveProblem, AutonomousProblem, CustomProblem>;

inline CoefficientSet coefficients_of(const Problem& problem) {
    return std::visit(
        [](const auto& p) -> CoefficientSet {
            if constexpr (std::is_same_v<std::decay_t<decltype(p)>, CustomProblem>) {
                return p.coefficients;
            } else {
                return p.coefficients();
            }
        },
        problem);
}

/// Reference resolution for a study whose finest scheme grid has n points.
inline std::size_t default_reference_resolution(std::size_t n) { return std::max<std::size_t>(4096, n * n); }

namespace detail {

// Trapezoid rule for the integral of weight(t) W(t) over all knots of the path.
inline double weighted_path_integral(const BrownianPath& path, const TimeFunction& weight) {
    const auto knots = path.knots();
    double sum = 0.0;
    double left = weight(knots[0].t) * knots[0].w;
    for (std::size_t i = 1; i < knots.size(); ++i) {
        const double right = weight(knots[i].t) * knots[i].w;
        sum += 0.5 * (left + right) * (knots[i].t - knots[i - 1].t);
        left = right;
    }
    return sum;
}

}  // namespace detail

/// X(1) = x0 exp(int (alpha - beta^2/2) + beta(1) W(1) - int beta' W), coupled
/// to `path`.
///
/// The path is refined to the uniform m-grid (existing knots kept) and the
/// stochastic integral of beta' W is taken by the trapezoid rule over all
/// knots; its error has standard deviation O(1/m). The deterministic
/// integral is computed by adaptive quadrature to 1e-10, well below the
/// O(m^-2) of a grid rule.
inline double exact_terminal_linear(const LinearProblem& problem, BrownianPath& path, std::size_t m) {
    detail::require(m >= 2, "exact_terminal_linear: m must be at least 2");
    const auto& alpha = problem.alpha;
    const auto& beta = problem.beta;
    const double drift = integrate([&](double u) { return alpha(u) - 0.5 * beta(u) * beta(u); }, 0.0, 1.0);
    path.refine_uniform(m);
    const double w1 = path.sample_at(1.0);
    const double stochastic = beta(1.0) * w1 - detail::weighted_path_integral(path, problem.beta_prime);
    return problem.x0 * std::exp(drift + stochastic);
}

/// X(1) = x0 + int drift + diff(1) W(1) - int diff' W, same discretisation as
/// exact_terminal_linear.
inline double exact_terminal_additive(const AdditiveProblem& problem, BrownianPath& path, std::size_t m) {
    detail::require(m >= 2, "exact_terminal_additive: m must be at least 2");
    const double drift = integrate(problem.drift, 0.0, 1.0);
    path.refine_uniform(m);
    const double w1 = path.sample_at(1.0);
    return problem.x0 + drift + problem.diff(1.0) * w1 - detail::weighted_path_integral(path, problem.diff_prime);
}

}  // namespace wpadapt
