#include "dsc/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "dsc/error.hpp"

namespace dsc {

void GpConfig::validate() const
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::ConfigInvalid, what); };
    if (generations < 0) fail("gp.generations must be >= 0");
    if (population_size != 0 && population_size < 2) fail("gp.population_size must be >= 2");
    if (crossover_prob < 0.0 || crossover_prob > 1.0) fail("gp.crossover_prob must lie in [0, 1]");
    if (mutation_prob < 0.0 || mutation_prob > 1.0) fail("gp.mutation_prob must lie in [0, 1]");
    if (tournament_size < 1) fail("gp.tournament_size must be >= 1");
    if (refit_fraction < 0.0 || refit_fraction > 1.0) fail("gp.refit_fraction must lie in [0, 1]");
    if (grammar.min_length < 1 || grammar.max_length < grammar.min_length) fail("gp length bounds are inconsistent");
}

namespace {

// Preorder tokens plus the constant value carried by each node (unused for
// non-constant nodes).
struct Flat {
    std::vector<TokenId> tokens;
    std::vector<double> values;
};

Flat flatten(const ExprTree& tree)
{
    Flat f;
    f.tokens = tree.to_prefix();
    f.values.assign(tree.size(), 0.0);
    for (std::size_t k = 0; k < tree.size(); ++k) {
        if (const int slot = tree.slot_of(k); slot >= 0) {
            f.values[k] = tree.constants()[static_cast<std::size_t>(slot)];
        }
    }
    return f;
}

ExprTree rebuild(const LibraryPtr& library, const Flat& f)
{
    std::vector<double> constants;
    for (std::size_t k = 0; k < f.tokens.size(); ++k) {
        if ((*library)[f.tokens[k]].op == Op::Constant) {
            constants.push_back(f.values[k]);
        }
    }
    return ExprTree::parse_prefix(library, f.tokens, constants);
}

bool admissible(const ExprTree& tree, const GrammarConfig& grammar, int max_depth)
{
    if (find_violation(tree, grammar)) {
        return false;
    }
    return max_depth <= 0 || depth(tree) <= max_depth;
}

bool better(const Candidate& a, const Candidate& b)
{
    if (a.fitness != b.fitness) {
        return a.fitness > b.fitness;
    }
    return a.complexity < b.complexity;
}

std::size_t best_index(const std::vector<Candidate>& pop)
{
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
        if (better(pop[i], pop[best])) {
            best = i;
        }
    }
    return best;
}

void score(Candidate& c, const Fitness& fitness)
{
    if (c.evaluated) {
        return;
    }
    const double f = fitness(c.tree);
    c.fitness = std::isfinite(f) ? f : 0.0;
    c.complexity = complexity(c.tree);
    c.evaluated = true;
}

void refine_top(std::vector<Candidate>& pop, const GpConfig& config, const Refiner& refine)
{
    if (!refine || !config.refit_constants || config.refit_fraction <= 0.0) {
        return;
    }
    std::vector<std::size_t> order(pop.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return better(pop[a], pop[b]); });
    const auto count = static_cast<std::size_t>(std::ceil(config.refit_fraction * static_cast<double>(pop.size())));
    for (std::size_t k = 0; k < std::min(count, order.size()); ++k) {
        auto& c = pop[order[k]];
        if (c.tree.constant_count() == 0) {
            continue;
        }
        Candidate improved = refine(c);
        if (improved.fitness >= c.fitness) {
            c = std::move(improved);
        }
    }
}

} // namespace

int depth(const ExprTree& tree)
{
    std::vector<int> d(tree.size(), 1);
    int deepest = tree.empty() ? 0 : 1;
    for (std::size_t k = 1; k < tree.size(); ++k) {
        d[k] = d[static_cast<std::size_t>(tree.nodes()[k].parent)] + 1;
        deepest = std::max(deepest, d[k]);
    }
    return deepest;
}

std::size_t tournament_select(std::span<const double> fitness, std::span<const int> complexity, std::size_t k,
                              Rng& rng)
{
    const std::size_t n = fitness.size();
    if (n == 0 || k == 0 || k > n) {
        throw Error(ErrorKind::ConfigInvalid, fmt::format("tournament of size {} over {} candidates", k, n));
    }
    // partial Fisher-Yates draw of k distinct indices
    std::vector<std::size_t> pool(n);
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    std::size_t best = n;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, n - 1);
        std::swap(pool[i], pool[pick(rng)]);
        const std::size_t c = pool[i];
        if (best == n) {
            best = c;
            continue;
        }
        if (fitness[c] > fitness[best] ||
            (fitness[c] == fitness[best] &&
             (complexity[c] < complexity[best] || (complexity[c] == complexity[best] && c < best)))) {
            best = c;
        }
    }
    return best;
}

std::pair<ExprTree, ExprTree> crossover_at(const ExprTree& a, std::size_t ia, const ExprTree& b, std::size_t ib)
{
    const Flat fa = flatten(a);
    const Flat fb = flatten(b);
    const std::size_t ea = a.subtree_end(ia);
    const std::size_t eb = b.subtree_end(ib);

    auto splice = [](const Flat& host, std::size_t from, std::size_t to, const Flat& donor, std::size_t dfrom,
                     std::size_t dto) {
        Flat out;
        out.tokens.assign(host.tokens.begin(), host.tokens.begin() + static_cast<std::ptrdiff_t>(from));
        out.values.assign(host.values.begin(), host.values.begin() + static_cast<std::ptrdiff_t>(from));
        out.tokens.insert(out.tokens.end(), donor.tokens.begin() + static_cast<std::ptrdiff_t>(dfrom),
                          donor.tokens.begin() + static_cast<std::ptrdiff_t>(dto));
        out.values.insert(out.values.end(), donor.values.begin() + static_cast<std::ptrdiff_t>(dfrom),
                          donor.values.begin() + static_cast<std::ptrdiff_t>(dto));
        out.tokens.insert(out.tokens.end(), host.tokens.begin() + static_cast<std::ptrdiff_t>(to), host.tokens.end());
        out.values.insert(out.values.end(), host.values.begin() + static_cast<std::ptrdiff_t>(to), host.values.end());
        return out;
    };
    return {rebuild(a.library_ptr(), splice(fa, ia, ea, fb, ib, eb)),
            rebuild(b.library_ptr(), splice(fb, ib, eb, fa, ia, ea))};
}

std::pair<ExprTree, ExprTree> crossover(const ExprTree& a, const ExprTree& b, Rng& rng, const GrammarConfig& grammar,
                                        int attempts, int max_depth)
{
    std::uniform_int_distribution<std::size_t> pick_a(0, a.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_b(0, b.size() - 1);
    for (int attempt = 0; attempt < attempts; ++attempt) {
        const auto ia = pick_a(rng);
        const auto ib = pick_b(rng);
        auto children = crossover_at(a, ia, b, ib);
        if (admissible(children.first, grammar, max_depth) && admissible(children.second, grammar, max_depth)) {
            return children;
        }
    }
    return {a, b};
}

ExprTree mutate(const ExprTree& tree, Rng& rng, double p, const GrammarConfig& grammar, int attempts, int max_depth)
{
    if (p <= 0.0) {
        return tree;
    }
    const auto& lib = tree.library();
    const Flat original = flatten(tree);
    std::bernoulli_distribution flip(p);

    for (int attempt = 0; attempt < attempts; ++attempt) {
        Flat f = original;
        bool changed = false;
        for (std::size_t k = 0; k < f.tokens.size(); ++k) {
            if (!flip(rng)) {
                continue;
            }
            const auto& pool = lib.with_arity(lib[f.tokens[k]].arity);
            if (pool.size() < 2) {
                continue;
            }
            // uniform over the same-arity tokens other than the current one
            std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 2);
            std::size_t idx = pick(rng);
            const auto current = std::find(pool.begin(), pool.end(), f.tokens[k]);
            if (idx >= static_cast<std::size_t>(current - pool.begin())) {
                ++idx;
            }
            f.tokens[k] = pool[idx];
            if (lib[f.tokens[k]].op == Op::Constant) {
                f.values[k] = 1.0;
            }
            changed = true;
        }
        if (!changed) {
            return tree;
        }
        ExprTree child = rebuild(tree.library_ptr(), f);
        if (admissible(child, grammar, max_depth)) {
            return child;
        }
    }
    return tree;
}

GpResult evolve(std::vector<Candidate> seed, const Fitness& fitness, const GpConfig& config, Rng& rng,
                const Refiner& refine)
{
    config.validate();
    if (seed.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "GP needs a non-empty seed population");
    }
    GpResult result;
    auto& pop = result.population;
    pop = std::move(seed);
    for (auto& c : pop) {
        score(c, fitness);
    }
    result.best_fitness.push_back(pop[best_index(pop)].fitness);
    if (config.generations == 0) {
        return result;
    }

    const std::size_t size = config.population_size > 0 ? static_cast<std::size_t>(config.population_size) : pop.size();
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    for (int g = 0; g < config.generations; ++g) {
        std::vector<double> fit(pop.size());
        std::vector<int> cx(pop.size());
        for (std::size_t i = 0; i < pop.size(); ++i) {
            fit[i] = pop[i].fitness;
            cx[i] = pop[i].complexity;
        }
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(config.tournament_size), pop.size());

        std::vector<Candidate> next;
        next.reserve(size);
        next.push_back(pop[best_index(pop)]);
        while (next.size() < size) {
            const auto& pa = pop[tournament_select(fit, cx, k, rng)];
            const auto& pb = pop[tournament_select(fit, cx, k, rng)];
            ExprTree a = pa.tree;
            ExprTree b = pb.tree;
            if (unit(rng) < config.crossover_prob) {
                std::tie(a, b) = crossover(a, b, rng, config.grammar, config.max_attempts, config.max_depth);
            }
            a = mutate(a, rng, config.mutation_prob, config.grammar, config.max_attempts, config.max_depth);
            b = mutate(b, rng, config.mutation_prob, config.grammar, config.max_attempts, config.max_depth);
            for (auto* child : {&a, &b}) {
                if (next.size() >= size) {
                    break;
                }
                Candidate c;
                c.tree = std::move(*child);
                // unchanged copies keep the parent's score
                if (c.tree == pa.tree) {
                    c = pa;
                } else if (c.tree == pb.tree) {
                    c = pb;
                }
                next.push_back(std::move(c));
            }
        }
        for (auto& c : next) {
            score(c, fitness);
        }
        refine_top(next, config, refine);
        pop = std::move(next);
        result.best_fitness.push_back(pop[best_index(pop)].fitness);
    }
    return result;
}

} // namespace dsc
