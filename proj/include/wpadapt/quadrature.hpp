#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "wpadapt/errors.hpp"

namespace wpadapt {

constexpr double kQuadratureTolerance = 1e-10;

/// Integral of f over [a, b], split at the given interior breakpoints.
///
/// Each piece is integrated by double-exponential quadrature, which keeps
/// full accuracy for integrands with algebraic endpoint behaviour such as
/// |t - t0|^{2/3}; place the kinks of f in `breakpoints`. Throws
/// NumericError when the error estimate of a piece exceeds the tolerance.
inline double integrate(const std::function<double(double)>& f, double a, double b,
                        const std::vector<double>& breakpoints = {}, double tolerance = kQuadratureTolerance) {
    detail::require(a <= b, "integrate: empty or reversed interval");
    thread_local boost::math::quadrature::tanh_sinh<double> rule;

    std::vector<double> cuts{a};
    for (double c : breakpoints) {
        if (c > a && c < b) {
            cuts.push_back(c);
        }
    }
    cuts.push_back(b);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto g = [&f](double t) { return f(t); };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double error = 0.0;
        double l1 = 0.0;
        double piece = 0.0;
        try {
            piece = rule.integrate(g, cuts[i], cuts[i + 1], 1e-13, &error, &l1);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "integrate: quadrature failed on [" << cuts[i] << ", " << cuts[i + 1] << "]: " << e.what();
            throw NumericError(msg.str());
        }
        if (!std::isfinite(piece) || error > tolerance * std::max(1.0, l1)) {
            std::ostringstream msg;
            msg << "integrate: no convergence on [" << cuts[i] << ", " << cuts[i + 1] << "], estimate " << piece
                << ", error " << error << ", tolerance " << tolerance;
            throw NumericError(msg.str());
        }
        total += piece;
    }
    return total;
}

}  // namespace wpadapt
