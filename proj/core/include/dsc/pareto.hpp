#pragma once

#include <string>
#include <vector>

namespace dsc {

struct ParetoPoint {
    int complexity = 0;
    double f1 = 0.0;
    std::string expression;

    friend bool operator==(const ParetoPoint&, const ParetoPoint&) = default;
};

/// Non-dominated subset of `archive` over (lower complexity, higher f1),
/// sorted by complexity with strictly increasing f1. Among identical
/// (complexity, f1) pairs the lexicographically smallest expression is kept,
/// so the result does not depend on archive order. Throws EmptyArchive.
std::vector<ParetoPoint> pareto_front(const std::vector<ParetoPoint>& archive);

/// Last front point whose gain df1/dcomplexity over its predecessor is at
/// least `min_gain`; the first point when none qualifies. Throws EmptyFront.
ParetoPoint elbow(const std::vector<ParetoPoint>& front, double min_gain = 0.005);

/// Tab-separated archive: header "complexity\tf1\texpression", one point per
/// line.
void write_archive(const std::vector<ParetoPoint>& points, const std::string& path);
std::vector<ParetoPoint> read_archive(const std::string& path);

} // namespace dsc
