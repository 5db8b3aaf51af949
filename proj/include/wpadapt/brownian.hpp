#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "wpadapt/errors.hpp"
#include "wpadapt/rng.hpp"

namespace wpadapt {

struct Knot {
    double t;
    double w;
};

/// A lazily sampled Wiener trajectory on [0, 1].
///
/// Values are drawn on demand: forward of the last knot from the Gaussian
/// increment law, between two knots from the Brownian bridge law given the
/// two bracketing knots. Every drawn value is stored, so later queries are
/// consistent with earlier ones. Knot times are compared exactly; callers
/// sharing a path across schemes must compute grid times identically
/// (see equidistant_grid).
///
/// eval_count() is the number of distinct positive times at which W was
/// drawn, i.e. the observation cost of everything run on this path.
class BrownianPath {
public:
    explicit BrownianPath(Rng rng) : rng_(std::move(rng)) { knots_.push_back({0.0, 0.0}); }

    explicit BrownianPath(std::uint64_t seed, std::uint64_t stream = 0) : BrownianPath(Rng(seed, stream)) {}

    /// W(t). Draws and stores a new knot unless t is already a knot.
    double sample_at(double t) {
        check_time(t);
        auto it = lower_bound(t);
        if (it != knots_.end() && it->t == t) {
            return it->w;
        }
        const double w = (it == knots_.end()) ? draw_forward(knots_.back(), t) : draw_bridge(*(it - 1), *it, t);
        knots_.insert(it, Knot{t, w});
        ++eval_count_;
        return w;
    }

    /// Pins W(t) = w without drawing. Used to build bridges with prescribed
    /// endpoints; does not count as an evaluation.
    void condition_on(double t, double w) {
        check_time(t);
        auto it = lower_bound(t);
        if (it != knots_.end() && it->t == t) {
            detail::require(it->w == w, "condition_on: time already carries a different value");
            return;
        }
        knots_.insert(it, Knot{t, w});
    }

    /// Ensures every j/m, j = 1..m, is a knot. Existing knots are kept; the
    /// missing grid points are drawn left to right, each from the bridge
    /// between the previously emitted point and the next stored knot.
    void refine_uniform(std::size_t m) {
        detail::require(m >= 1, "refine_uniform: m must be positive");
        std::vector<Knot> merged;
        merged.reserve(knots_.size() + m);
        std::size_t next = 0;
        const double m_real = static_cast<double>(m);
        for (std::size_t j = 0; j <= m; ++j) {
            const double t = static_cast<double>(j) / m_real;
            while (next < knots_.size() && knots_[next].t < t) {
                merged.push_back(knots_[next++]);
            }
            if (next < knots_.size() && knots_[next].t == t) {
                merged.push_back(knots_[next++]);
                continue;
            }
            const double w = (next == knots_.size()) ? draw_forward(merged.back(), t)
                                                     : draw_bridge(merged.back(), knots_[next], t);
            merged.push_back({t, w});
            ++eval_count_;
        }
        while (next < knots_.size()) {
            merged.push_back(knots_[next++]);
        }
        knots_ = std::move(merged);
    }

    bool has_knot(double t) const {
        auto it = std::lower_bound(knots_.begin(), knots_.end(), t, [](const Knot& k, double v) { return k.t < v; });
        return it != knots_.end() && it->t == t;
    }

    std::span<const Knot> knots() const { return knots_; }
    std::size_t eval_count() const { return eval_count_; }
    Rng& rng() { return rng_; }

private:
    static void check_time(double t) {
        if (!(t >= 0.0 && t <= 1.0)) {
            throw DomainError("BrownianPath: time outside [0, 1]");
        }
    }

    std::vector<Knot>::iterator lower_bound(double t) {
        return std::lower_bound(knots_.begin(), knots_.end(), t, [](const Knot& k, double v) { return k.t < v; });
    }

    double draw_forward(const Knot& last, double t) { return last.w + std::sqrt(t - last.t) * rng_.normal(); }

    double draw_bridge(const Knot& a, const Knot& b, double t) {
        const double span = b.t - a.t;
        const double mean = a.w + (t - a.t) / span * (b.w - a.w);
        const double var = (t - a.t) * (b.t - t) / span;
        return mean + std::sqrt(var) * rng_.normal();
    }

    Rng rng_;
    std::vector<Knot> knots_;
    std::size_t eval_count_ = 0;
};

/// W(t+h) - W(t) together with the time integral of W(s) - W(t) over [t, t+h].
struct IncrementWithArea {
    double dw;
    double area;
    double h;
};

/// Exact joint draw: Var(dw) = h, Var(area) = h^3/3, Cov = h^2/2, realised
/// through the Cholesky factor of that 2x2 covariance.
inline IncrementWithArea sample_increment_with_area(Rng& rng, double h) {
    detail::require(h > 0.0, "sample_increment_with_area: h must be positive");
    const double z1 = rng.normal();
    const double z2 = rng.normal();
    const double sqrt_h = std::sqrt(h);
    return {sqrt_h * z1, h * sqrt_h * (0.5 * z1 + z2 / (2.0 * std::sqrt(3.0))), h};
}

/// Variance of the time integral of a Brownian bridge over an interval of length h.
inline double bridge_integral_variance(double h) {
    detail::require(h >= 0.0, "bridge_integral_variance: h must be nonnegative");
    return h * h * h / 12.0;
}

}  // namespace wpadapt
