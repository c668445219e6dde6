#include <benchmark/benchmark.h>

#include "dsc/classify.hpp"
#include "dsc/data.hpp"
#include "dsc/policy.hpp"
#include "dsc/trainer.hpp"

using namespace dsc;

namespace {

const char* sample_rule = "* sqrt + externalDest type_cash-out + - amount maxDest7 type_transfer";

FeatureMatrix random_features(std::size_t rows)
{
    FeatureMatrix x;
    x.names = engineered_feature_names();
    x.columns.assign(x.names.size(), std::vector<double>(rows));
    Rng rng(1);
    std::normal_distribution<double> g(0.0, 1.0);
    for (auto& c : x.columns) {
        for (auto& v : c) v = g(rng);
    }
    return x;
}

} // namespace

static void BM_EvaluateSampleRule(benchmark::State& state)
{
    const auto x = random_features(static_cast<std::size_t>(state.range(0)));
    const auto tree = deserialize(Library::make(x.names), sample_rule);
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_batch(tree, x));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvaluateSampleRule)->Arg(1000)->Arg(37500);

static void BM_RewardF1(benchmark::State& state)
{
    const auto x = random_features(37500);
    Labels y(x.rows());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = i % 100 == 0;
    const auto tree = deserialize(Library::make(x.names), sample_rule);
    for (auto _ : state) benchmark::DoNotOptimize(reward_f1(tree, x, y, 0.8));
}
BENCHMARK(BM_RewardF1);

static void BM_SampleBatch(benchmark::State& state)
{
    const auto lib = Library::make(engineered_feature_names());
    Rng rng(2);
    const auto net = PolicyNet::random(lib, 32, rng);
    const GrammarConfig g;
    for (auto _ : state) benchmark::DoNotOptimize(sample_batch(net, static_cast<std::size_t>(state.range(0)), rng, g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleBatch)->Arg(200)->Arg(1000);

static void BM_RiskGradient(benchmark::State& state)
{
    const auto lib = Library::make(engineered_feature_names());
    Rng rng(3);
    const auto net = PolicyNet::random(lib, 32, rng);
    const GrammarConfig g;
    const auto batch = sample_batch(net, 200, rng, g).sequences;
    std::vector<double> r(batch.size());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (auto& v : r) v = u(rng);
    for (auto _ : state) benchmark::DoNotOptimize(risk_gradient(net, batch, r, 0.05, g));
}
BENCHMARK(BM_RiskGradient);
BENCHMARK_MAIN();
