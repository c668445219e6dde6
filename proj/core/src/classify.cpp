#include "dsc/classify.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dsc/error.hpp"

namespace dsc {

double sigmoid(double v) noexcept
{
    if (v >= 0.0) {
        return 1.0 / (1.0 + std::exp(-v));
    }
    const double e = std::exp(v);
    return e / (1.0 + e);
}

Labels predict_values(std::span<const double> values, double threshold)
{
    Labels out(values.size(), 0);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        out[i] = std::isfinite(v) && sigmoid(v) >= threshold ? 1 : 0;
    }
    return out;
}

Labels predict(const ExprTree& tree, const FeatureMatrix& x, double threshold)
{
    return predict_values(evaluate_batch(tree, x).values, threshold);
}

Confusion confusion(std::span<const std::uint8_t> predicted, std::span<const std::uint8_t> truth)
{
    if (predicted.size() != truth.size()) {
        throw Error(ErrorKind::LengthMismatch,
                    fmt::format("{} predictions vs {} labels", predicted.size(), truth.size()));
    }
    Confusion c;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const bool p = predicted[i] != 0;
        const bool t = truth[i] != 0;
        if (p && t) {
            ++c.tp;
        } else if (p) {
            ++c.fp;
        } else if (t) {
            ++c.fn;
        } else {
            ++c.tn;
        }
    }
    return c;
}

Metrics metrics(const Confusion& c)
{
    const auto total = c.total();
    if (total == 0) {
        throw Error(ErrorKind::EmptyDataset, "metrics of an empty confusion matrix");
    }
    Metrics m;
    m.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
    m.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp) : 0.0;
    m.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn) : 0.0;
    const double pr = m.precision + m.recall;
    m.f1 = pr > 0.0 ? 2.0 * m.precision * m.recall / pr : 0.0;
    return m;
}

double reward_ce(std::span<const double> probs, std::span<const std::uint8_t> truth)
{
    if (probs.size() != truth.size()) {
        throw Error(ErrorKind::LengthMismatch, fmt::format("{} probabilities vs {} labels", probs.size(), truth.size()));
    }
    if (probs.empty()) {
        throw Error(ErrorKind::EmptyDataset, "cross-entropy of an empty batch");
    }
    constexpr double lo = 1e-12;
    constexpr double hi = 1.0 - 1e-12;
    double sum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = std::clamp(probs[i], lo, hi);
        sum -= truth[i] != 0 ? std::log(p) : std::log1p(-p);
    }
    return 1.0 / (1.0 + sum / static_cast<double>(probs.size()));
}

double reward_from_values(RewardKind kind, const Evaluation& eval, std::span<const std::uint8_t> y, double threshold)
{
    if (!eval.valid()) {
        return 0.0;
    }
    if (kind == RewardKind::F1) {
        const auto labels = predict_values(eval.values, threshold);
        const auto c = confusion(labels, y);
        return c.total() == 0 ? 0.0 : metrics(c).f1;
    }
    std::vector<double> probs(eval.values.size());
    std::transform(eval.values.begin(), eval.values.end(), probs.begin(), [](double v) { return sigmoid(v); });
    return reward_ce(probs, y);
}

double reward(RewardKind kind, const ExprTree& tree, const FeatureMatrix& x, std::span<const std::uint8_t> y,
              double threshold)
{
    return reward_from_values(kind, evaluate_batch(tree, x), y, threshold);
}

double reward_f1(const ExprTree& tree, const FeatureMatrix& x, std::span<const std::uint8_t> y, double threshold)
{
    return reward(RewardKind::F1, tree, x, y, threshold);
}

} // namespace dsc
