#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dsc/expr.hpp"
#include "dsc/feature_spec.hpp"
#include "dsc/matrix.hpp"

namespace dsc {

/// ln(t / (1 - t)). Throws OutOfRange unless 0 < t < 1.
double invert_threshold(double t);

/// sum(coef * feature) + constant
struct LinearForm {
    std::vector<std::pair<std::string, double>> terms; // sorted by feature name, no zero coefficients
    double constant = 0.0;

    [[nodiscard]] bool is_constant() const noexcept { return terms.empty(); }
};

/// sum(coef * feature) >= bound (or > bound when strict).
struct Inequality {
    std::vector<std::pair<std::string, double>> terms;
    double bound = 0.0;
    bool strict = false;
    std::string closed_form; // exact expression for bound
};

struct Literal {
    std::string feature;
    int value = 0;
    friend bool operator==(const Literal&, const Literal&) = default;
};

struct RuleCase {
    std::vector<Literal> when;       // conjunction
    std::optional<Inequality> residual; // fraud iff residual holds
    bool label = false;              // used when there is no residual
};

struct RuleSet {
    std::vector<RuleCase> cases; // mutually exclusive
    bool default_label = false;  // for rows no case covers
    double threshold = 0.5;
    double raw_threshold = 0.0;
    bool strict = false;

    /// Label of one row given by feature name lookup.
    [[nodiscard]] bool classify(const FeatureMatrix& x, std::size_t row) const;
    [[nodiscard]] std::vector<std::uint8_t> classify(const FeatureMatrix& x) const;
};

struct RuleOptions {
    bool strict = false; // sigma(f) > t instead of >= t
};

/// Partial evaluation of a tree to a linear form, substituting the fixed
/// Boolean values. Throws NotReducible outside the supported fragment.
LinearForm reduce(const ExprTree& tree, const std::vector<std::pair<std::string, double>>& fixed);

/// Case split over the Boolean features and one-hot groups the tree
/// references; each case is reduced and compared against the sign facts.
/// Throws OutOfRange, NotReducible.
RuleSet extract_rules(const ExprTree& tree, double t, const FeatureSpec& spec, const RuleOptions& options = {});

/// Human-readable listing; constants at 4 decimals with closed forms.
std::string render_rules(const RuleSet& rules, const FeatureSpec& spec);
/// One JSON object per case plus the default.
std::string rules_to_json(const RuleSet& rules);

} // namespace dsc
