#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace wpadapt {

/// p(t) = sum_i c_i t^i with dense coefficients, lowest degree first.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<double> coefficients) : coefficients_(std::move(coefficients)) { trim(); }

    static Polynomial constant(double c) { return Polynomial({c}); }

    double operator()(double t) const {
        double acc = 0.0;
        for (auto it = coefficients_.rbegin(); it != coefficients_.rend(); ++it) {
            acc = acc * t + *it;
        }
        return acc;
    }

    Polynomial derivative() const {
        if (coefficients_.size() <= 1) {
            return Polynomial();
        }
        std::vector<double> d(coefficients_.size() - 1);
        for (std::size_t i = 1; i < coefficients_.size(); ++i) {
            d[i - 1] = static_cast<double>(i) * coefficients_[i];
        }
        return Polynomial(std::move(d));
    }

    bool is_zero() const { return coefficients_.empty(); }
    int degree() const { return static_cast<int>(coefficients_.size()) - 1; }
    const std::vector<double>& coefficients() const { return coefficients_; }

    /// Real roots in the open interval (a, b), ascending. Roots of p' split
    /// [a, b] into monotone pieces; each piece holds at most one root, which
    /// is located by bisection.
    std::vector<double> roots_in(double a, double b) const {
        std::vector<double> roots;
        if (degree() < 1) {
            return roots;
        }
        std::vector<double> cuts{a};
        for (double c : derivative().roots_in(a, b)) {
            cuts.push_back(c);
        }
        cuts.push_back(b);
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double lo = cuts[i];
            double hi = cuts[i + 1];
            double f_lo = (*this)(lo);
            const double f_hi = (*this)(hi);
            if (f_lo == 0.0) {
                if (lo > a && (roots.empty() || roots.back() != lo)) {
                    roots.push_back(lo);
                }
                continue;
            }
            if (f_hi == 0.0 || (f_lo < 0.0) == (f_hi < 0.0)) {
                if (f_hi == 0.0 && hi < b) {
                    roots.push_back(hi);
                }
                continue;
            }
            for (int iter = 0; iter < 200 && hi - lo > 0.0; ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (mid <= lo || mid >= hi) {
                    break;
                }
                const double f_mid = (*this)(mid);
                if ((f_mid < 0.0) == (f_lo < 0.0)) {
                    lo = mid;
                    f_lo = f_mid;
                } else {
                    hi = mid;
                }
            }
            roots.push_back(0.5 * (lo + hi));
        }
        std::sort(roots.begin(), roots.end());
        roots.erase(std::unique(roots.begin(), roots.end()), roots.end());
        return roots;
    }

private:
    void trim() {
        while (!coefficients_.empty() && coefficients_.back() == 0.0) {
            coefficients_.pop_back();
        }
    }

    std::vector<double> coefficients_;
};

}  // namespace wpadapt
