#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wpadapt/errors.hpp"
#include "wpadapt/polynomial.hpp"
#include "wpadapt/problem.hpp"

namespace wpadapt {

namespace detail {

using nlohmann::json;

inline const json& field(const json& config, const char* key) {
    if (!config.contains(key)) {
        throw ConfigError(std::string("problem config: missing field '") + key + "'");
    }
    return config.at(key);
}

inline double number_field(const json& config, const char* key, double fallback) {
    if (!config.contains(key)) {
        return fallback;
    }
    const auto& v = config.at(key);
    if (!v.is_number()) {
        throw ConfigError(std::string("problem config: '") + key + "' must be a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        throw ConfigError(std::string("problem config: '") + key + "' must be finite");
    }
    return x;
}

// A number c is the constant polynomial c; a list [c0, c1, ...] is sum c_i t^i.
inline Polynomial polynomial_field(const json& config, const char* key, bool required) {
    if (!config.contains(key)) {
        if (required) {
            throw ConfigError(std::string("problem config: missing field '") + key + "'");
        }
        return Polynomial();
    }
    const auto& v = config.at(key);
    if (v.is_number()) {
        return Polynomial({v.get<double>()});
    }
    if (!v.is_array() || v.empty()) {
        throw ConfigError(std::string("problem config: '") + key + "' must be a number or a non-empty list");
    }
    std::vector<double> coeffs;
    for (const auto& c : v) {
        if (!c.is_number() || !std::isfinite(c.get<double>())) {
            throw ConfigError(std::string("problem config: '") + key + "' must contain finite numbers only");
        }
        coeffs.push_back(c.get<double>());
    }
    return Polynomial(coeffs);
}

inline AutonomousProblem autonomous_from_json(const json& config) {
    const auto& drift = field(config, "drift");
    const double x0 = number_field(config, "x0", 0.0);
    if (drift.is_object()) {
        const auto fn = drift.value("fn", std::string());
        const double amp = number_field(drift, "amplitude", 1.0);
        const double freq = number_field(drift, "frequency", 1.0);
        if (fn == "sin") {
            return AutonomousProblem{[amp, freq](double x) { return amp * std::sin(freq * x); },
                                     [amp, freq](double x) { return amp * freq * std::cos(freq * x); },
                                     [amp, freq](double x) { return -amp * freq * freq * std::sin(freq * x); }, x0};
        }
        if (fn == "tanh") {
            return AutonomousProblem{[amp, freq](double x) { return amp * std::tanh(freq * x); },
                                     [amp, freq](double x) {
                                         const double s = 1.0 / std::cosh(freq * x);
                                         return amp * freq * s * s;
                                     },
                                     [amp, freq](double x) {
                                         const double s = 1.0 / std::cosh(freq * x);
                                         return -2.0 * amp * freq * freq * s * s * std::tanh(freq * x);
                                     },
                                     x0};
        }
        throw ConfigError("problem config: drift.fn must be \"sin\" or \"tanh\"");
    }
    const Polynomial a = polynomial_field(config, "drift", true);
    const Polynomial da = a.derivative();
    const Polynomial dda = da.derivative();
    return AutonomousProblem{[a](double x) { return a(x); }, [da](double x) { return da(x); },
                             [dda](double x) { return dda(x); }, x0};
}

}  // namespace detail

/// Builds a problem from a JSON object:
///   {"type": "linear",     "alpha": poly, "beta": poly, "x0": real}
///   {"type": "additive",   "drift": poly, "diffusion": poly, "x0": real}
///   {"type": "autonomous", "drift": poly in x | {"fn": "sin"|"tanh", "amplitude": a, "frequency": w}, "x0": real}
/// where poly is a number or a coefficient list [c0, c1, ...] in increasing
/// degree. Throws ConfigError on malformed input.
inline Problem problem_from_json(const nlohmann::json& config) {
    if (!config.is_object()) {
        throw ConfigError("problem config: top level must be an object");
    }
    const auto& type_field = detail::field(config, "type");
    if (!type_field.is_string()) {
        throw ConfigError("problem config: 'type' must be a string");
    }
    const auto type = type_field.get<std::string>();
    if (type == "linear") {
        return LinearProblem::polynomial(detail::polynomial_field(config, "alpha", false),
                                         detail::polynomial_field(config, "beta", true),
                                         detail::number_field(config, "x0", 1.0));
    }
    if (type == "additive") {
        return AdditiveProblem::polynomial(detail::polynomial_field(config, "drift", false),
                                           detail::polynomial_field(config, "diffusion", true),
                                           detail::number_field(config, "x0", 0.0));
    }
    if (type == "autonomous") {
        return detail::autonomous_from_json(config);
    }
    throw ConfigError("problem config: unknown type '" + type + "'");
}

inline Problem problem_from_string(const std::string& text) {
    nlohmann::json config;
    try {
        config = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("problem config: ") + e.what());
    }
    try {
        return problem_from_json(config);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("problem config: ") + e.what());
    }
}

inline Problem load_problem(const std::string& file) {
    std::ifstream in(file);
    if (!in) {
        throw ConfigError("cannot open problem file '" + file + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return problem_from_string(buffer.str());
}

}  // namespace wpadapt
