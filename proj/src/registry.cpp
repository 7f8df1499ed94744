#include "esnode/registry.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <vector>

namespace esnode {

namespace {

double number_or(const YAML::Node& node, const char* key, double fallback) {
    const YAML::Node v = node[key];
    return v ? v.as<double>() : fallback;
}

std::vector<TimeFunction> parse_list(const YAML::Node& node, const char* key) {
    const YAML::Node list = node[key];
    if (!list || !list.IsSequence() || list.size() == 0)
        raise(ErrorKind::Config, std::string("function composition needs a non-empty '") + key + "' list");
    std::vector<TimeFunction> out;
    for (const auto& item : list) out.push_back(parse_time_function(item));
    return out;
}

}  // namespace

TimeFunction parse_time_function(const YAML::Node& node) {
    try {
        if (!node || node.IsNull()) raise(ErrorKind::Config, "missing coefficient function");
        if (node.IsScalar()) {
            const std::string s = node.Scalar();
            if (s == "sin") return [](double t) { return std::sin(t); };
            if (s == "cos") return [](double t) { return std::cos(t); };
            const double c = node.as<double>();
            return [c](double) { return c; };
        }
        if (!node.IsMap() || !node["name"])
            raise(ErrorKind::Config, "coefficient function must be a number, 'sin', 'cos' or a map with 'name'");
        const std::string name = node["name"].as<std::string>();
        if (name == "constant") {
            const double c = node["value"].as<double>();
            return [c](double) { return c; };
        }
        if (name == "polynomial") {
            const auto c = node["coefficients"].as<std::vector<double>>();
            if (c.empty()) raise(ErrorKind::Config, "polynomial needs coefficients");
            return [c](double t) {
                double acc = 0.0;
                for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * t + *it;
                return acc;
            };
        }
        if (name == "sin" || name == "cos") {
            const double a = number_or(node, "amplitude", 1.0);
            const double w = number_or(node, "frequency", 1.0);
            const double p = number_or(node, "phase", 0.0);
            if (name == "sin") return [a, w, p](double t) { return a * std::sin(w * t + p); };
            return [a, w, p](double t) { return a * std::cos(w * t + p); };
        }
        if (name == "sum") {
            auto terms = parse_list(node, "terms");
            return [terms](double t) {
                double acc = 0.0;
                for (const auto& f : terms) acc += f(t);
                return acc;
            };
        }
        if (name == "product") {
            auto factors = parse_list(node, "factors");
            return [factors](double t) {
                double acc = 1.0;
                for (const auto& f : factors) acc *= f(t);
                return acc;
            };
        }
        raise(ErrorKind::Config, "unknown coefficient function '" + name + "'");
    } catch (const YAML::Exception& e) {
        raise(ErrorKind::Config, std::string("bad coefficient function: ") + e.what());
    }
}

double driven_population_exact(double t, double psi0) {
    return std::exp(-t) * (psi0 + 0.5) + 0.5 * (std::sin(t) - std::cos(t));
}

std::optional<ExactSolution> parse_exact_solution(const YAML::Node& node) {
    if (!node || node.IsNull()) return std::nullopt;
    try {
        const std::string name = node.IsScalar() ? node.Scalar() : node["name"].as<std::string>();
        if (name == "none") return std::nullopt;
        if (name == "driven_population") return ExactSolution(driven_population_exact);
        if (name == "exponential_decay") {
            const double a = node.IsMap() ? number_or(node, "rate", 1.0) : 1.0;
            return ExactSolution([a](double t, double psi0) { return psi0 * std::exp(-a * t); });
        }
        if (name == "logistic") {
            const double q = node.IsMap() ? number_or(node, "q", 0.5) : 0.5;
            return ExactSolution([q](double t, double psi0) {
                const double e = std::exp(-t);
                return psi0 * e / (1.0 + q * psi0 * (1.0 - e));
            });
        }
        raise(ErrorKind::Config, "unknown exact solution '" + name + "'");
    } catch (const YAML::Exception& e) {
        raise(ErrorKind::Config, std::string("bad exact solution: ") + e.what());
    }
}

}  // namespace esnode
