#pragma once

#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "dsc/constraints.hpp"
#include "dsc/expr.hpp"
#include "dsc/random.hpp"

namespace dsc {

/// An expression together with what is known about it.
struct Candidate {
    ExprTree tree;
    double fitness = 0.0;
    int complexity = 0;
    bool evaluated = false;
};

struct GpConfig {
    int generations = 20;
    int population_size = 500; // 0 keeps the seed size
    double crossover_prob = 0.5;
    double mutation_prob = 0.05; // per node
    int tournament_size = 5;
    int max_depth = 0; // 0: unbounded
    int max_attempts = 10;
    GrammarConfig grammar;
    bool refit_constants = true;
    double refit_fraction = 0.25;

    /// Throws ConfigInvalid when a field is out of range.
    void validate() const;
};

using Fitness = std::function<double(const ExprTree&)>;
/// Returns an improved copy (e.g. with fitted constants) of a scored candidate.
using Refiner = std::function<Candidate(const Candidate&)>;

struct GpResult {
    std::vector<Candidate> population;
    std::vector<double> best_fitness; // per generation, index 0 = seed
};

/// Tournament selection, subtree crossover and per-node mutation for
/// `generations` rounds, with the best individual carried over unchanged.
/// With generations == 0 the seed comes back scored and otherwise untouched.
GpResult evolve(std::vector<Candidate> seed, const Fitness& fitness, const GpConfig& config, Rng& rng,
                const Refiner& refine = {});

/// Index of the fittest of k uniformly drawn members (without replacement).
/// Ties prefer lower complexity, then the lower index.
std::size_t tournament_select(std::span<const double> fitness, std::span<const int> complexity, std::size_t k,
                              Rng& rng);

/// Swaps the subtree of `a` rooted at node `ia` with the subtree of `b`
/// rooted at `ib`. No validation.
std::pair<ExprTree, ExprTree> crossover_at(const ExprTree& a, std::size_t ia, const ExprTree& b, std::size_t ib);

/// Uniform subtree crossover; retries up to `attempts` times until both
/// children satisfy the grammar (and depth cap), else returns the parents.
std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, Rng& rng, const GrammarConfig& grammar,
                                        int attempts = 10, int max_depth = 0);

/// Replaces each node with probability p by a different token of the same
/// arity; retries up to `attempts` times for a valid result, else returns the
/// input unchanged.
ExprTree mutate(const ExprTree& tree, Rng& rng, double p, const GrammarConfig& grammar, int attempts = 10,
                int max_depth = 0);

int depth(const ExprTree& tree);

} // namespace dsc
