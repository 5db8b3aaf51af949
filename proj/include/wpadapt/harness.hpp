#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "wpadapt/brownian.hpp"
#include "wpadapt/constants.hpp"
#include "wpadapt/errors.hpp"
#include "wpadapt/parallel.hpp"
#include "wpadapt/problem.hpp"
#include "wpadapt/schemes.hpp"
#include "wpadapt/version.hpp"

namespace wpadapt {

enum class SchemeId { Euler, Milstein, Wpt, WpFull, Equi, Star, StarStar, Fixed };

inline std::string_view to_string(SchemeId id) {
    switch (id) {
        case SchemeId::Euler: return "euler";
        case SchemeId::Milstein: return "milstein";
        case SchemeId::Wpt: return "wpt";
        case SchemeId::WpFull: return "wp_full";
        case SchemeId::Equi: return "equi";
        case SchemeId::Star: return "star";
        case SchemeId::StarStar: return "star_star";
        case SchemeId::Fixed: return "fixed";
    }
    return "unknown";
}

inline SchemeId parse_scheme_id(std::string_view name) {
    for (auto id : {SchemeId::Euler, SchemeId::Milstein, SchemeId::Wpt, SchemeId::WpFull, SchemeId::Equi,
                    SchemeId::Star, SchemeId::StarStar, SchemeId::Fixed}) {
        if (to_string(id) == name) {
            return id;
        }
    }
    throw ConfigError("unknown scheme id '" + std::string(name) + "'");
}

struct HarnessOptions {
    double k_exponent = 0.75;
    /// Reference grid size; default_reference_resolution(n) when unset.
    std::optional<std::size_t> reference_resolution;
    std::size_t threads = default_threads();
    /// Replications of the moment pre-pass for `fixed` on problems without closed-form moments.
    std::size_t moment_prepass_reps = 2000;
    /// Run the m vs 2m self-convergence check for fine-grid Milstein references.
    bool check_reference = true;
    std::ostream* warnings = &std::cerr;
};

struct ErrorEstimate {
    double p = 2.0;
    double e_p_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_cost = 0.0;
    std::size_t reps = 0;
    std::uint64_t seed = 0;
    /// e_2 distance between references at m and 2m divided by e_p_hat, when checked.
    std::optional<double> reference_ratio;
};

/// |X(1) - X-hat(1)| and nu for every replication of one scheme.
struct ReplicationRecord {
    SchemeId scheme = SchemeId::Euler;
    std::vector<double> abs_error;
    std::vector<double> cost;
};

namespace detail {

inline double milstein_over_knots(const CoefficientSet& c, double x0, std::span<const Knot> knots) {
    double x = x0;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
        x = milstein_step(c, knots[i].t, x, knots[i + 1].t - knots[i].t, knots[i + 1].w - knots[i].w);
    }
    return x;
}

}  // namespace detail

/// Reference X(1) on `path`: the closed forms for linear and additive
/// problems, otherwise Milstein over the path refined to the m-grid (error
/// of order 1/m in e_2). All knots already on the path are kept, so any
/// scheme run before is coupled to the reference.
inline double fine_reference(const Problem& problem, double x0, BrownianPath& path, std::size_t m) {
    detail::require(m >= 2, "fine_reference: m must be at least 2");
    if (const auto* lin = std::get_if<LinearProblem>(&problem)) {
        return exact_terminal_linear(*lin, path, m);
    }
    if (const auto* add = std::get_if<AdditiveProblem>(&problem)) {
        return exact_terminal_additive(*add, path, m);
    }
    const auto c = coefficients_of(problem);
    path.refine_uniform(m);
    return detail::milstein_over_knots(c, x0, path.knots());
}

/// e_2 distance between fine_reference at m and at 2m on the same paths
/// (the 2m grid nests the m grid).
inline double reference_self_distance(const Problem& problem, std::size_t m, std::size_t reps, std::uint64_t seed) {
    const auto c = coefficients_of(problem);
    std::vector<double> sq(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        BrownianPath path(seed, r);
        const double x0 = c.x0_sampler(path.rng());
        const double coarse = fine_reference(problem, x0, path, m);
        const double fine = fine_reference(problem, x0, path, 2 * m);
        sq[r] = (coarse - fine) * (coarse - fine);
    }
    return std::sqrt(pairwise_mean(sq));
}

namespace detail {

constexpr std::uint64_t kStandaloneStreamSalt = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kPrepassSalt = 0xc2b2ae3d27d4eb4full;

// Coarse (dW, area) pairs on the l/n grid assembled from `factor` exact
// sub-steps each, plus the reference X(1) built from the same sub-steps.
struct StandaloneDraw {
    std::vector<IncrementWithArea> coarse;
    double reference = 0.0;
};

inline StandaloneDraw standalone_draw(const Problem& problem, const CoefficientSet& c, double x0,
                                      std::span<const double> grid, std::size_t factor, Rng& rng) {
    const std::size_t k = grid.size() - 1;
    StandaloneDraw out;
    out.coarse.reserve(k);
    const auto* lin = std::get_if<LinearProblem>(&problem);
    const auto* add = std::get_if<AdditiveProblem>(&problem);
    const TimeFunction* weight = lin ? &lin->beta_prime : (add ? &add->diff_prime : nullptr);

    double w = 0.0;
    double weighted_integral = 0.0;  // integral of weight(t) W(t) dt
    double x_fine = x0;
    for (std::size_t l = 0; l < k; ++l) {
        const double t0 = grid[l];
        const double sub = (grid[l + 1] - t0) / static_cast<double>(factor);
        const double w_start = w;
        double area = 0.0;
        for (std::size_t j = 0; j < factor; ++j) {
            const double s = t0 + static_cast<double>(j) * sub;
            const auto piece = sample_increment_with_area(rng, sub);
            area += piece.area + sub * (w - w_start);
            if (weight) {
                weighted_integral += (*weight)(s + 0.5 * sub) * (sub * w + piece.area);
            } else {
                const double g = g_weight(c, s, x_fine);
                x_fine = truncated_wp_step(c, s, x_fine, sub, piece.dw) + g * piece.area;
            }
            w += piece.dw;
        }
        out.coarse.push_back({w - w_start, area, grid[l + 1] - t0});
    }
    if (lin) {
        const auto& alpha = lin->alpha;
        const auto& beta = lin->beta;
        const double drift = integrate([&](double u) { return alpha(u) - 0.5 * beta(u) * beta(u); }, 0.0, 1.0);
        out.reference = lin->x0 * std::exp(drift + beta(1.0) * w - weighted_integral);
    } else if (add) {
        out.reference = add->x0 + integrate(add->drift, 0.0, 1.0) + add->diff(1.0) * w - weighted_integral;
    } else {
        out.reference = x_fine;
    }
    return out;
}

inline bool runs_on_path(SchemeId id) { return id != SchemeId::WpFull; }

}  // namespace detail

/// Runs every scheme in `schemes` on the same replications: per replication
/// one BrownianPath (stream r of `seed`) is shared by all path-based schemes
/// in list order, then refined for the reference. Each scheme's cost is its
/// own observation count, which equals the path's evaluation count for the
/// first scheme on a fresh path. wp_full draws its own (dW, area) stream.
inline std::vector<ReplicationRecord> run_replications(const Problem& problem, std::span<const SchemeId> schemes,
                                                       double p, std::size_t n, std::size_t reps,
                                                       std::uint64_t seed, const HarnessOptions& options = {}) {
    detail::require(n >= 1, "run_replications: n must be positive");
    detail::require(reps >= 1, "run_replications: reps must be positive");
    const auto c = coefficients_of(problem);
    const auto k_rule = power_k_rule(options.k_exponent);
    const std::size_t m = options.reference_resolution.value_or(default_reference_resolution(n));

    std::optional<MomentProvider> moments;
    if (std::find(schemes.begin(), schemes.end(), SchemeId::Fixed) != schemes.end()) {
        moments = analytic_moment_provider(problem);
        if (!moments) {
            moments = mc_moment_provider(c, k_rule(n), options.moment_prepass_reps, seed ^ detail::kPrepassSalt,
                                         options.threads);
        }
    }

    std::vector<ReplicationRecord> records(schemes.size());
    for (std::size_t s = 0; s < schemes.size(); ++s) {
        records[s].scheme = schemes[s];
        records[s].abs_error.resize(reps);
        records[s].cost.resize(reps);
    }
    const auto grid = equidistant_grid(n);
    const std::size_t factor = std::max<std::size_t>(1, (m + n - 1) / n);

    parallel_for(reps, options.threads, [&](std::size_t r) {
        BrownianPath path(seed, r);
        const double x0 = c.x0_sampler(path.rng());
        std::vector<SchemeResult> results(schemes.size());
        bool first_on_path = true;
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            if (!detail::runs_on_path(schemes[s])) {
                continue;
            }
            const std::size_t before = path.eval_count();
            switch (schemes[s]) {
                case SchemeId::Euler: results[s] = euler(c, x0, path, grid); break;
                case SchemeId::Milstein: results[s] = milstein(c, x0, path, grid); break;
                case SchemeId::Wpt: results[s] = wagner_platen_truncated(c, x0, path, grid); break;
                case SchemeId::Equi: results[s] = scheme_equi(c, x0, path, n); break;
                case SchemeId::Star: results[s] = scheme_star(c, x0, path, n, k_rule); break;
                case SchemeId::StarStar: results[s] = scheme_star_star(c, x0, path, n, p, k_rule); break;
                case SchemeId::Fixed: results[s] = scheme_fixed(c, x0, path, n, k_rule, *moments); break;
                case SchemeId::WpFull: break;
            }
            if (first_on_path && path.eval_count() - before != results[s].nu) {
                throw std::logic_error("observation count disagrees with path evaluations");
            }
            first_on_path = false;
        }
        double reference = 0.0;
        if (!first_on_path) {
            reference = fine_reference(problem, x0, path, m);
        }
        for (std::size_t s = 0; s < schemes.size(); ++s) {
            if (schemes[s] == SchemeId::WpFull) {
                Rng noise(seed ^ detail::kStandaloneStreamSalt, r);
                auto draw = detail::standalone_draw(problem, c, x0, grid, factor, noise);
                const auto full = wagner_platen_full(c, x0, grid, draw.coarse);
                records[s].abs_error[r] = std::abs(draw.reference - full.x1_hat);
                records[s].cost[r] = static_cast<double>(full.nu);
            } else {
                records[s].abs_error[r] = std::abs(reference - results[s].x1_hat);
                records[s].cost[r] = static_cast<double>(results[s].nu);
            }
        }
    });
    return records;
}

/// e_p from the per-replication errors; 95% interval by the delta method on
/// the mean of |error|^p, lower end clamped at 0.
inline ErrorEstimate summarize(const ReplicationRecord& record, double p, std::uint64_t seed) {
    const std::size_t reps = record.abs_error.size();
    detail::require(reps >= 2, "summarize: need at least two replications");
    std::vector<double> powered(reps);
    for (std::size_t r = 0; r < reps; ++r) {
        powered[r] = std::pow(record.abs_error[r], p);
        if (!std::isfinite(powered[r])) {
            throw NumericError("non-finite error in replication " + std::to_string(r) + " of scheme " +
                               std::string(to_string(record.scheme)));
        }
    }
    const double mean = pairwise_mean(powered);
    const double se = std::sqrt(sample_variance(powered) / static_cast<double>(reps));
    ErrorEstimate e;
    e.p = p;
    e.reps = reps;
    e.seed = seed;
    e.e_p_hat = std::pow(mean, 1.0 / p);
    const double half_width = (mean > 0.0) ? 1.959963984540054 * std::pow(mean, 1.0 / p - 1.0) / p * se : 0.0;
    e.ci_low = std::max(0.0, e.e_p_hat - half_width);
    e.ci_high = e.e_p_hat + half_width;
    e.mean_cost = pairwise_mean(record.cost);
    return e;
}

/// Monte Carlo estimate of e_p for one scheme at budget / grid size n.
inline ErrorEstimate estimate_error(SchemeId scheme, const Problem& problem, double p, std::size_t n, std::size_t reps,
                                    std::uint64_t seed, const HarnessOptions& options = {}) {
    detail::require(reps >= 2, "estimate_error: reps must be at least 2");
    detail::require(p >= 1.0, "estimate_error: p must be at least 1");
    const SchemeId ids[] = {scheme};
    const auto records = run_replications(problem, ids, p, n, reps, seed, options);
    auto estimate = summarize(records.front(), p, seed);

    const bool milstein_reference =
        std::holds_alternative<AutonomousProblem>(problem) || std::holds_alternative<CustomProblem>(problem);
    if (options.check_reference && milstein_reference && scheme != SchemeId::WpFull) {
        const std::size_t m = options.reference_resolution.value_or(default_reference_resolution(n));
        const double distance = reference_self_distance(problem, m, std::min<std::size_t>(reps, 200), seed);
        const double ratio = estimate.e_p_hat > 0.0 ? distance / estimate.e_p_hat : 0.0;
        estimate.reference_ratio = ratio;
        if (ratio > 0.1 && options.warnings) {
            *options.warnings << "warning: reference at m=" << m << " differs from m=" << 2 * m << " by " << ratio
                              << " of the measured error (limit 0.1)\n";
        }
    }
    return estimate;
}

/// C/sqrt(12) for the scheme's limit n * e_p, where the problem has analytic
/// constants; for equidistant Milstein on additive problems C^equi_2/sqrt(3).
inline std::optional<double> target_constant(SchemeId scheme, const Problem& problem, double p) {
    const auto constants = analytic_constants(problem, p);
    if (!constants) {
        return std::nullopt;
    }
    const double root12 = std::sqrt(12.0);
    switch (scheme) {
        case SchemeId::Equi: return constants->c_equi / root12;
        case SchemeId::Star: return constants->c_star / root12;
        case SchemeId::StarStar: return constants->c_star_star / root12;
        case SchemeId::Fixed:
            if (p == 2.0) {
                return constants->c_2 / root12;
            }
            return std::nullopt;
        case SchemeId::Milstein:
            if (p == 2.0 && std::holds_alternative<AdditiveProblem>(problem)) {
                return constants->c_equi / std::sqrt(3.0);
            }
            return std::nullopt;
        default: return std::nullopt;
    }
}

struct StudyRow {
    SchemeId scheme = SchemeId::Euler;
    std::size_t n = 0;
    ErrorEstimate e_p;
    double n_times_e = 0.0;  // mean_cost * e_p_hat
    std::optional<double> constant_target;
};

struct RateFit {
    double slope_raw = 0.0;
    double slope_guarded = 0.0;
    bool dropped_smallest = false;
};

inline double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    detail::require(x.size() == y.size() && x.size() >= 2, "least_squares_slope: need two or more points");
    const double nx = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= nx;
    my /= nx;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Slope of log e_p against log n. The guarded fit drops the smallest n when
/// its interval overlaps the next one by more than half of its own width.
inline RateFit fit_rate(std::span<const StudyRow> rows) {
    detail::require(rows.size() >= 2, "fit_rate: need two or more rows");
    std::vector<double> x;
    std::vector<double> y;
    for (const auto& row : rows) {
        x.push_back(std::log(static_cast<double>(row.n)));
        y.push_back(std::log(row.e_p.e_p_hat));
    }
    RateFit fit;
    fit.slope_raw = least_squares_slope(x, y);
    fit.slope_guarded = fit.slope_raw;
    const auto& a = rows[0].e_p;
    const auto& b = rows[1].e_p;
    const double overlap = std::max(0.0, std::min(a.ci_high, b.ci_high) - std::max(a.ci_low, b.ci_low));
    if (rows.size() >= 3 && overlap > 0.5 * (a.ci_high - a.ci_low)) {
        fit.dropped_smallest = true;
        fit.slope_guarded = least_squares_slope(std::span(x).subspan(1), std::span(y).subspan(1));
    }
    return fit;
}

struct StudyResult {
    std::vector<StudyRow> rows;
    RateFit fit;
};

inline StudyResult convergence_study(SchemeId scheme, const Problem& problem, double p,
                                     std::span<const std::size_t> n_list, std::size_t reps, std::uint64_t seed,
                                     const HarnessOptions& options = {}) {
    detail::require(n_list.size() >= 3, "convergence_study: need at least three budgets");
    for (std::size_t i = 1; i < n_list.size(); ++i) {
        detail::require(n_list[i] > n_list[i - 1], "convergence_study: budgets must increase");
    }
    StudyResult out;
    const auto target = target_constant(scheme, problem, p);
    for (std::size_t n : n_list) {
        StudyRow row;
        row.scheme = scheme;
        row.n = n;
        row.e_p = estimate_error(scheme, problem, p, n, reps, seed, options);
        row.n_times_e = row.e_p.mean_cost * row.e_p.e_p_hat;
        row.constant_target = target;
        out.rows.push_back(row);
    }
    out.fit = fit_rate(out.rows);
    return out;
}

/// Matched-budget comparison; all path-based schemes share each replication's path.
inline std::vector<StudyRow> compare_schemes(const Problem& problem, double p, std::size_t n, std::size_t reps,
                                             std::uint64_t seed, std::span<const SchemeId> schemes,
                                             const HarnessOptions& options = {}) {
    detail::require(reps >= 2, "compare_schemes: reps must be at least 2");
    const auto records = run_replications(problem, schemes, p, n, reps, seed, options);
    std::vector<StudyRow> rows;
    for (const auto& record : records) {
        StudyRow row;
        row.scheme = record.scheme;
        row.n = n;
        row.e_p = summarize(record, p, seed);
        row.n_times_e = row.e_p.mean_cost * row.e_p.e_p_hat;
        row.constant_target = target_constant(record.scheme, problem, p);
        rows.push_back(row);
    }
    return rows;
}

inline constexpr std::string_view kCsvHeader =
    "scheme,n,p,reps,seed,e_p,ci_low,ci_high,mean_cost,cost_times_e,target_constant";

inline void write_csv_row(std::ostream& out, const StudyRow& row) {
    std::ostringstream line;
    line << std::setprecision(10);
    line << to_string(row.scheme) << ',' << row.n << ',' << row.e_p.p << ',' << row.e_p.reps << ',' << row.e_p.seed
         << ',' << row.e_p.e_p_hat << ',' << row.e_p.ci_low << ',' << row.e_p.ci_high << ',' << row.e_p.mean_cost
         << ',' << row.n_times_e << ',';
    if (row.constant_target) {
        line << *row.constant_target;
    }
    out << line.str() << '\n';
}

inline void write_csv(std::ostream& out, std::span<const StudyRow> rows) {
    out << kCsvHeader << '\n';
    for (const auto& row : rows) {
        write_csv_row(out, row);
    }
}

}  // namespace wpadapt
