#include "dsc/constopt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dsc {

namespace {

struct Vertex {
    std::vector<double> x;
    double value = 0.0; // objective, maximized
};

} // namespace

std::pair<ExprTree, ConstFitReport> optimize_constants(const ExprTree& tree, const TreeObjective& objective,
                                                       const ConstFitConfig& config)
{
    ConstFitReport report;
    const std::size_t dim = tree.constant_count();
    if (dim == 0) {
        report.converged = true;
        return {tree, report};
    }
    if (config.budget <= 0) {
        return {tree, report};
    }

    int used = 0;
    auto evaluate = [&](const std::vector<double>& x) {
        ++used;
        const double v = objective(tree.with_constants(x));
        return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
    };

    std::vector<Vertex> simplex;
    simplex.push_back({tree.constants(), evaluate(tree.constants())});
    report.initial_reward = simplex.front().value;
    for (std::size_t i = 0; i < dim && used < config.budget; ++i) {
        auto x = tree.constants();
        x[i] += config.initial_spread;
        simplex.push_back({x, evaluate(x)});
    }

    constexpr double reflect = 1.0;
    constexpr double expand = 2.0;
    constexpr double contract = 0.5;
    constexpr double shrink = 0.5;

    auto by_value = [](const Vertex& a, const Vertex& b) { return a.value > b.value; };

    while (simplex.size() == dim + 1 && used < config.budget) {
        std::stable_sort(simplex.begin(), simplex.end(), by_value);

        double diameter = 0.0;
        for (std::size_t i = 1; i < simplex.size(); ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                diameter = std::max(diameter, std::abs(simplex[i].x[j] - simplex[0].x[j]));
            }
        }
        if (diameter < config.tolerance) {
            report.converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                centroid[j] += simplex[i].x[j] / static_cast<double>(dim);
            }
        }
        auto along = [&](double coeff) {
            std::vector<double> x(dim);
            for (std::size_t j = 0; j < dim; ++j) {
                x[j] = centroid[j] + coeff * (simplex.back().x[j] - centroid[j]);
            }
            return x;
        };

        Vertex& worst = simplex.back();
        const double second_worst = simplex[dim - 1].value;
        Vertex r{along(-reflect), 0.0};
        r.value = evaluate(r.x);
        if (r.value > simplex.front().value) {
            if (used >= config.budget) {
                worst = r;
                break;
            }
            Vertex e{along(-expand), 0.0};
            e.value = evaluate(e.x);
            worst = e.value > r.value ? e : r;
            continue;
        }
        if (r.value > second_worst) {
            worst = r;
            continue;
        }
        if (used >= config.budget) {
            break;
        }
        const bool outside = r.value > worst.value;
        Vertex c{along(outside ? -contract : contract), 0.0};
        c.value = evaluate(c.x);
        if (c.value > std::max(worst.value, outside ? r.value : worst.value) ||
            (!outside && c.value >= worst.value)) {
            worst = c;
            continue;
        }
        for (std::size_t i = 1; i < simplex.size() && used < config.budget; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                simplex[i].x[j] = simplex[0].x[j] + shrink * (simplex[i].x[j] - simplex[0].x[j]);
            }
            simplex[i].value = evaluate(simplex[i].x);
        }
    }

    const auto best = std::max_element(simplex.begin(), simplex.end(),
                                       [](const Vertex& a, const Vertex& b) { return a.value < b.value; });
    report.iterations_used = used;
    if (best->value > report.initial_reward) {
        report.final_reward = best->value;
        return {tree.with_constants(best->x), report};
    }
    report.final_reward = report.initial_reward;
    return {tree, report};
}

} // namespace dsc
