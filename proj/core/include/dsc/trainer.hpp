#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "dsc/classify.hpp"
#include "dsc/constopt.hpp"
#include "dsc/constraints.hpp"
#include "dsc/data.hpp"
#include "dsc/expr.hpp"
#include "dsc/gp.hpp"
#include "dsc/pareto.hpp"
#include "dsc/policy.hpp"

namespace dsc {

/// Which rewards drive the policy update: those of the sequences the policy
/// emitted (after constant fitting), or those of the final GP population
/// (sequences the policy cannot produce are skipped).
enum class CreditMode { Emitted, Gp };

/// Which sampled expressions get their constants fitted before scoring.
enum class ConstFitScope { None, All, TopFraction };

struct TrainConfig {
    std::size_t batch_size = 500;
    double epsilon = 0.05;
    double threshold = 0.5;
    RewardKind reward = RewardKind::F1;
    int iterations = 2000;
    GrammarConfig grammar;
    GpConfig gp;
    std::vector<std::string> operators = Library::default_operators();
    bool constants = true;
    ConstFitScope const_fit = ConstFitScope::TopFraction;
    double const_fit_fraction = 0.05; // for TopFraction
    ConstFitConfig const_config;
    int hidden_size = 32;
    AdamConfig adam;
    CreditMode credit = CreditMode::Emitted;
    bool undersample = true;
    std::size_t train_subsample = 0; // 0: full training split
    std::uint64_t seed = 0;

    /// Throws ConfigInvalid.
    void validate() const;
};

struct IterationRecord {
    int iteration = 0;
    double best_reward = 0.0;   // best training reward seen so far
    double batch_best = 0.0;    // best emitted reward in this batch
    double mean_reward = 0.0;   // mean emitted reward in this batch
    double baseline = 0.0;      // empirical (1 - epsilon) quantile
    std::string best_expression; // best-by-validation candidate so far (infix)
    int complexity = 0;
    double validation_reward = 0.0;
    double validation_f1 = 0.0;
};

/// One JSON object per line, fields in a fixed order, numbers in shortest
/// round-trip form. Contains no timing information.
std::string to_json_line(const IterationRecord& record);

struct TrainResult {
    Candidate best; // fitness holds the validation reward
    double best_validation_f1 = 0.0;
    double best_train_reward = 0.0;
    std::vector<IterationRecord> log;
    std::vector<ParetoPoint> archive; // serialized expression, validation F1
    PolicyNet policy;
    std::vector<double> seconds; // wall time per iteration, kept apart from the log
};

using IterationCallback = std::function<void(const IterationRecord&)>;

/// R at ascending rank ceil((1 - eps) N) - 1. Throws EmptyBatch, ConfigInvalid.
double epsilon_quantile(std::span<const double> rewards, double epsilon);

/// Per-sample coefficient (R - Rq) / (eps N) for R >= Rq, else 0.
std::vector<double> risk_weights(std::span<const double> rewards, double epsilon, double* baseline_out = nullptr);

/// Risk-seeking policy-gradient estimate over a batch of emitted sequences.
PolicyParams risk_gradient(const PolicyNet& net, std::span<const Sequence> sequences, std::span<const double> rewards,
                           double epsilon, const GrammarConfig& grammar, double* baseline_out = nullptr);

/// Sample a batch, score it with `reward`, and take one ascent step.
/// Returns the batch rewards.
std::vector<double> policy_iteration(PolicyNet& net, AdamOptimizer& optimizer, std::size_t batch_size,
                                     double epsilon, const GrammarConfig& grammar,
                                     const std::function<double(const Sequence&)>& reward, Rng& rng);

/// Library for a dataset: its feature columns plus the configured operators.
LibraryPtr make_library(const TrainConfig& config, const std::vector<std::string>& feature_names);

/// Throws ConfigInvalid, DataInvalid.
TrainResult train(const TrainConfig& config, const Dataset& data, const IterationCallback& on_iteration = {});

} // namespace dsc
