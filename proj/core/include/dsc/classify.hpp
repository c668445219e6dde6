#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dsc/expr.hpp"

namespace dsc {

using Labels = std::vector<std::uint8_t>;

struct Confusion {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;

    [[nodiscard]] std::size_t total() const noexcept { return tp + fp + tn + fn; }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

struct Metrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Overflow-free logistic function.
double sigmoid(double v) noexcept;

/// 1 iff sigmoid(f(x)) >= t. Rows where f is not finite get label 0.
Labels predict(const ExprTree& tree, const FeatureMatrix& x, double threshold);
Labels predict_values(std::span<const double> values, double threshold);

Confusion confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth);

/// Precision, recall and F1 are 0 when their denominators vanish.
Metrics metrics(const Confusion& c);

/// 1 / (1 + mean binary cross-entropy), probabilities clamped to
/// [1e-12, 1 - 1e-12].
double reward_ce(std::span<const double> probs, std::span<const std::uint8_t> truth);

/// F1 of predict(tree, x, t) against y; 0 for trees with non-finite outputs.
double reward_f1(const ExprTree& tree, const FeatureMatrix& x, std::span<const std::uint8_t> y, double threshold);

enum class RewardKind { CrossEntropy, F1 };

/// Reward of `tree` on (x, y). Invalid (non-finite) trees score 0.
double reward(RewardKind kind, const ExprTree& tree, const FeatureMatrix& x, std::span<const std::uint8_t> y,
              double threshold);

/// Same as reward() but from precomputed evaluation values.
double reward_from_values(RewardKind kind, const Evaluation& eval, std::span<const std::uint8_t> y, double threshold);

} // namespace dsc
