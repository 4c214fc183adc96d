#pragma once

#include <functional>
#include <map>
#include <string>

#include "srlood/graph.hpp"

namespace srlood {

// Builds a scalar loss on a fresh graph from the given parameter values. The
// builder registers whatever parameters it needs via Graph::param using the
// tensors it is handed.
using LossBuilder = std::function<Value(Graph&, const std::map<std::string, Tensor>&)>;

// Central-difference gradient check. Evaluates the analytic gradient once,
// then perturbs every coordinate of every parameter by ±step and compares.
// Returns the max over coordinates of
//     |analytic - central_difference| / max(1, |analytic|).
// Errors with "non-finite-loss" if the loss is not finite at the base point.
double finite_diff_check(const LossBuilder& build,
                         const std::map<std::string, Tensor>& params,
                         double step);

}  // namespace srlood
