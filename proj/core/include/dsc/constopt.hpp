#pragma once

#include <functional>
#include <span>
#include <vector>

#include "dsc/expr.hpp"

namespace dsc {

struct ConstFitReport {
    double initial_reward = 0.0;
    double final_reward = 0.0;
    int iterations_used = 0; // reward evaluations spent, including the initial one
    bool converged = false;
};

struct ConstFitConfig {
    int budget = 200;            // reward evaluations
    double initial_spread = 0.5; // simplex edge around the starting point
    double tolerance = 1e-6;     // stop once the simplex is this small
};

/// Objective over a whole tree; larger is better.
using TreeObjective = std::function<double(const ExprTree&)>;

/// Nelder-Mead direct search on the constant vector. Never returns a tree
/// scoring below the input. Trees without constants come back unchanged with
/// converged = true.
std::pair<ExprTree, ConstFitReport> optimize_constants(const ExprTree& tree, const TreeObjective& objective,
                                                       const ConstFitConfig& config = {});

} // namespace dsc
