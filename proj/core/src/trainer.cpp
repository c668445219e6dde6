#include "dsc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>
#include <json.hpp>

#include "dsc/error.hpp"

namespace dsc {

void TrainConfig::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); };
    if (!(epsilon > 0.0 && epsilon <= 1.0)) fail(fmt::format("epsilon must lie in (0, 1], got {}", epsilon));
    if (!(threshold > 0.0 && threshold < 1.0)) fail(fmt::format("threshold must lie in (0, 1), got {}", threshold));
    const auto min_batch = static_cast<std::size_t>(std::ceil(1.0 / epsilon - 1e-12));
    if (batch_size < min_batch) {
        fail(fmt::format("batch size {} leaves the top-epsilon set empty (need >= {})", batch_size, min_batch));
    }
    if (iterations < 0) fail("iterations must be >= 0");
    if (grammar.min_length < 1 || grammar.max_length < grammar.min_length) fail("length bounds are inconsistent");
    if (hidden_size < 1) fail("hidden size must be >= 1");
    if (!(const_fit_fraction > 0.0 && const_fit_fraction <= 1.0)) fail("const_fit_fraction must lie in (0, 1]");
    if (const_config.budget < 0) fail("constant-fit budget must be >= 0");
    if (!(adam.learning_rate > 0.0)) fail("learning rate must be positive");
    gp.validate();
}

std::string to_json_line(const IterationRecord& r)
{
    nlohmann::ordered_json j;
    j["iteration"] = r.iteration;
    j["best_reward"] = r.best_reward;
    j["batch_best"] = r.batch_best;
    j["mean_reward"] = r.mean_reward;
    j["baseline"] = r.baseline;
    j["best_expression"] = r.best_expression;
    j["complexity"] = r.complexity;
    j["validation_reward"] = r.validation_reward;
    j["validation_f1"] = r.validation_f1;
    return j.dump();
}

double epsilon_quantile(std::span<const double> rewards, double epsilon)
{
    if (rewards.empty()) {
        throw Error(ErrorKind::EmptyBatch, "quantile of an empty batch");
    }
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorKind::ConfigInvalid, fmt::format("epsilon must lie in (0, 1], got {}", epsilon));
    }
    std::vector<double> sorted(rewards.begin(), rewards.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    // guard against (1 - eps) * N landing a hair above an integer
    auto rank = static_cast<std::size_t>(std::ceil((1.0 - epsilon) * n - 1e-9));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

std::vector<double> risk_weights(std::span<const double> rewards, double epsilon, double* baseline_out)
{
    const double baseline = epsilon_quantile(rewards, epsilon);
    if (baseline_out != nullptr) {
        *baseline_out = baseline;
    }
    const double scale = 1.0 / (epsilon * static_cast<double>(rewards.size()));
    std::vector<double> w(rewards.size(), 0.0);
    for (std::size_t i = 0; i < rewards.size(); ++i) {
        if (rewards[i] >= baseline) {
            w[i] = (rewards[i] - baseline) * scale;
        }
    }
    return w;
}

PolicyParams risk_gradient(const PolicyNet& net, std::span<const Sequence> sequences, std::span<const double> rewards,
                           double epsilon, const GrammarConfig& grammar, double* baseline_out)
{
    if (sequences.size() != rewards.size()) {
        throw Error(ErrorKind::LengthMismatch, "one reward per sequence is required");
    }
    const auto weights = risk_weights(rewards, epsilon, baseline_out);
    auto grad = PolicyParams::zeros(net.input_size(), net.hidden_size(), net.library_size());
    for (std::size_t i = 0; i < sequences.size(); ++i) {
        if (weights[i] != 0.0) {
            accumulate_grad_log_prob(net, sequences[i], grammar, weights[i], grad);
        }
    }
    return grad;
}

std::vector<double> policy_iteration(PolicyNet& net, AdamOptimizer& optimizer, std::size_t batch_size,
                                     double epsilon, const GrammarConfig& grammar,
                                     const std::function<double(const Sequence&)>& reward, Rng& rng)
{
    const auto batch = sample_batch(net, batch_size, rng, grammar);
    std::vector<double> rewards;
    rewards.reserve(batch.sequences.size());
    for (const auto& s : batch.sequences) {
        rewards.push_back(reward(s));
    }
    optimizer.ascend(net.params(), risk_gradient(net, batch.sequences, rewards, epsilon, grammar));
    return rewards;
}

LibraryPtr make_library(const TrainConfig& config, const std::vector<std::string>& feature_names)
{
    return Library::make(feature_names, config.operators, config.constants);
}

namespace {

struct Scores {
    double reward = 0.0;
    double f1 = 0.0;
};

class Scorer {
public:
    Scorer(const FeatureMatrix& x, const Labels& y, const TrainConfig& config) : x_(x), y_(y), config_(config) {}

    Scores operator()(const ExprTree& tree)
    {
        auto key = serialize(tree);
        if (auto it = cache_.find(key); it != cache_.end()) {
            return it->second;
        }
        const auto eval = evaluate_batch(tree, x_);
        Scores s;
        s.reward = reward_from_values(config_.reward, eval, y_, config_.threshold);
        s.f1 = config_.reward == RewardKind::F1 ? s.reward
                                                : reward_from_values(RewardKind::F1, eval, y_, config_.threshold);
        if (!std::isfinite(s.reward)) {
            s.reward = 0.0;
        }
        cache_.emplace(std::move(key), s);
        return s;
    }

    double reward(const ExprTree& tree) { return (*this)(tree).reward; }

private:
    const FeatureMatrix& x_;
    const Labels& y_;
    const TrainConfig& config_;
    std::unordered_map<std::string, Scores> cache_;
};

bool has_both_classes(const Labels& y)
{
    const auto pos = std::count(y.begin(), y.end(), std::uint8_t{1});
    return pos > 0 && static_cast<std::size_t>(pos) < y.size();
}

} // namespace

TrainResult train(const TrainConfig& config_in, const Dataset& data, const IterationCallback& on_iteration)
{
    TrainConfig config = config_in;
    config.gp.grammar = config.grammar;
    config.validate();

    if (!has_both_classes(data.y_train)) {
        throw Error(ErrorKind::DataInvalid, "training split must contain both classes");
    }
    if (data.validation.rows() == 0) {
        throw Error(ErrorKind::DataInvalid, "validation split is empty");
    }

    Rng data_rng(derive_seed(config.seed, 1));
    Rng policy_rng(derive_seed(config.seed, 2));
    Rng gp_rng(derive_seed(config.seed, 3));
    Rng init_rng(derive_seed(config.seed, 4));

    FeatureMatrix train_x = data.train;
    Labels train_y = data.y_train;
    if (config.undersample) {
        auto balanced = undersample(train_x, train_y, data_rng);
        train_x = std::move(balanced.x);
        train_y = std::move(balanced.y);
    }
    if (config.train_subsample > 0 && config.train_subsample < train_x.rows()) {
        std::vector<std::size_t> idx(train_x.rows());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        std::shuffle(idx.begin(), idx.end(), data_rng);
        idx.resize(config.train_subsample);
        std::sort(idx.begin(), idx.end());
        train_x = train_x.take(idx);
        Labels y;
        for (auto i : idx) {
            y.push_back(train_y[i]);
        }
        train_y = std::move(y);
        if (!has_both_classes(train_y)) {
            throw Error(ErrorKind::DataInvalid, "training subsample lost a class");
        }
    }

    const auto library = make_library(config, data.train.names);
    TrainResult result;
    result.policy = PolicyNet::random(library, config.hidden_size, init_rng);
    AdamOptimizer optimizer(config.adam);

    Scorer train_scorer(train_x, train_y, config);
    Scorer valid_scorer(data.validation, data.y_validation, config);

    std::unordered_set<std::string> archived;
    bool have_best = false;
    result.best_train_reward = 0.0;

    auto consider = [&](const Candidate& c) {
        const auto key = serialize(c.tree);
        const auto v = valid_scorer(c.tree);
        if (archived.insert(key).second) {
            result.archive.push_back({c.complexity, v.f1, key});
        }
        const bool better = !have_best || v.reward > result.best.fitness ||
                            (v.reward == result.best.fitness && c.complexity < result.best.complexity);
        if (better) {
            result.best = c;
            result.best.fitness = v.reward;
            result.best_validation_f1 = v.f1;
            have_best = true;
        }
    };

    auto fit = [&](const ExprTree& tree) {
        if (tree.constant_count() == 0 || config.const_config.budget == 0) {
            return tree;
        }
        auto [fitted, report] = optimize_constants(
            tree, [&](const ExprTree& t) { return train_scorer.reward(t); }, config.const_config);
        return fitted;
    };

    const int rounds = std::max(config.iterations, 1);
    for (int it = 0; it < rounds; ++it) {
        const auto start = std::chrono::steady_clock::now();
        const bool update = config.iterations > 0;

        const auto batch = sample_batch(result.policy, config.batch_size, policy_rng, config.grammar);
        std::vector<Candidate> emitted(batch.sequences.size());
        for (std::size_t i = 0; i < emitted.size(); ++i) {
            emitted[i].tree = ExprTree::parse_prefix(library, batch.sequences[i]);
            emitted[i].fitness = train_scorer.reward(emitted[i].tree);
        }

        // constant fitting on the emitted batch
        std::vector<std::size_t> fit_set;
        if (config.const_fit == ConstFitScope::All) {
            fit_set.resize(emitted.size());
            std::iota(fit_set.begin(), fit_set.end(), std::size_t{0});
        } else if (config.const_fit == ConstFitScope::TopFraction) {
            std::vector<std::size_t> order(emitted.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(),
                             [&](auto a, auto b) { return emitted[a].fitness > emitted[b].fitness; });
            const auto count = static_cast<std::size_t>(
                std::ceil(config.const_fit_fraction * static_cast<double>(emitted.size()) - 1e-9));
            fit_set.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(count, order.size())));
        }
        for (auto i : fit_set) {
            emitted[i].tree = fit(emitted[i].tree);
            emitted[i].fitness = train_scorer.reward(emitted[i].tree);
        }
        std::vector<double> rewards;
        rewards.reserve(emitted.size());
        for (auto& c : emitted) {
            c.complexity = complexity(c.tree);
            c.evaluated = true;
            rewards.push_back(c.fitness);
        }

        for (const auto& c : emitted) {
            consider(c);
            result.best_train_reward = std::max(result.best_train_reward, c.fitness);
        }

        std::vector<Candidate> evolved;
        if (update && config.gp.generations > 0) {
            auto refiner = [&](const Candidate& c) {
                Candidate out = c;
                out.tree = fit(c.tree);
                out.fitness = train_scorer.reward(out.tree);
                out.complexity = complexity(out.tree);
                out.evaluated = true;
                return out;
            };
            auto gp = evolve(emitted, [&](const ExprTree& t) { return train_scorer.reward(t); }, config.gp, gp_rng,
                             refiner);
            evolved = std::move(gp.population);
            for (const auto& c : evolved) {
                consider(c);
                result.best_train_reward = std::max(result.best_train_reward, c.fitness);
            }
        }

        double baseline = epsilon_quantile(rewards, config.epsilon);
        if (update) {
            PolicyParams grad;
            if (config.credit == CreditMode::Emitted || evolved.empty()) {
                grad = risk_gradient(result.policy, batch.sequences, rewards, config.epsilon, config.grammar,
                                     &baseline);
            } else {
                std::vector<double> gp_rewards;
                for (const auto& c : evolved) {
                    gp_rewards.push_back(c.fitness);
                }
                const auto weights = risk_weights(gp_rewards, config.epsilon, &baseline);
                grad = PolicyParams::zeros(result.policy.input_size(), result.policy.hidden_size(),
                                           result.policy.library_size());
                for (std::size_t i = 0; i < evolved.size(); ++i) {
                    if (weights[i] == 0.0) {
                        continue;
                    }
                    try {
                        const auto seq = evolved[i].tree.to_prefix();
                        accumulate_grad_log_prob(result.policy, seq, config.grammar, weights[i], grad);
                    } catch (const Error& e) {
                        if (e.kind() != ErrorKind::ZeroProbability && e.kind() != ErrorKind::DeadEnd) {
                            throw;
                        }
                    }
                }
            }
            optimizer.ascend(result.policy.params(), std::move(grad));
        }

        IterationRecord rec;
        rec.iteration = it;
        rec.best_reward = result.best_train_reward;
        rec.batch_best = *std::max_element(rewards.begin(), rewards.end());
        rec.mean_reward = std::accumulate(rewards.begin(), rewards.end(), 0.0) / static_cast<double>(rewards.size());
        rec.baseline = baseline;
        rec.best_expression = render_infix(result.best.tree);
        rec.complexity = result.best.complexity;
        rec.validation_reward = result.best.fitness;
        rec.validation_f1 = result.best_validation_f1;
        result.log.push_back(rec);
        result.seconds.push_back(
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        if (on_iteration) {
            on_iteration(rec);
        }
    }
    return result;
}

} // namespace dsc
