#pragma once

#include "esnode/common.hpp"

#include <optional>
#include <string>

namespace YAML {
class Node;
}

namespace esnode {

// Closed registry of coefficient functions of t.
//
//   3.5                                      constant
//   sin | cos                                unit sine / cosine
//   {name: constant, value: c}
//   {name: polynomial, coefficients: [c0, c1, ...]}   c0 + c1 t + ...
//   {name: sin, amplitude: A, frequency: w, phase: p}  A sin(w t + p); cos alike
//   {name: sum, terms: [f, g, ...]}
//   {name: product, factors: [f, g, ...]}
TimeFunction parse_time_function(const YAML::Node& node);

// Closed-form solutions for the comparison harness, as y(t, psi0).
//   {name: driven_population}       y' + y = sin t
//   {name: exponential_decay, rate: a}   y' + a y = 0
//   {name: logistic, q: q}          y' + y + q y^2 = 0
using ExactSolution = std::function<double(double, double)>;
std::optional<ExactSolution> parse_exact_solution(const YAML::Node& node);

double driven_population_exact(double t, double psi0);

}  // namespace esnode
