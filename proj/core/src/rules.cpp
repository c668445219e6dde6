#include "dsc/rules.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "dsc/classify.hpp"
#include "dsc/error.hpp"

namespace dsc {

double invert_threshold(double t)
{
    if (!(t > 0.0 && t < 1.0)) {
        throw Error(ErrorKind::OutOfRange, fmt::format("threshold must lie in (0, 1), got {}", t));
    }
    return std::log(t / (1.0 - t));
}

namespace {

using Terms = std::map<std::string, double>;

struct Form {
    Terms terms;
    double constant = 0.0;

    [[nodiscard]] bool is_constant() const { return terms.empty(); }
};

Form scaled(Form f, double s)
{
    if (s == 0.0) {
        return {};
    }
    for (auto& [_, c] : f.terms) {
        c *= s;
    }
    f.constant *= s;
    return f;
}

Form combine(Form a, const Form& b, double sign)
{
    for (const auto& [name, c] : b.terms) {
        const double v = (a.terms[name] += sign * c);
        if (v == 0.0) {
            a.terms.erase(name);
        }
    }
    a.constant += sign * b.constant;
    return a;
}

[[noreturn]] void not_reducible(const std::string& what)
{
    throw Error(ErrorKind::NotReducible, what);
}

Form reduce_node(const ExprTree& tree, std::size_t k, const std::map<std::string, double>& fixed)
{
    const auto& node = tree.nodes()[k];
    const auto& token = tree.token_at(k);
    switch (token.op) {
    case Op::Feature: {
        if (auto it = fixed.find(token.name); it != fixed.end()) {
            return {{}, it->second};
        }
        return {{{token.name, 1.0}}, 0.0};
    }
    case Op::Constant: return {{}, tree.constants()[static_cast<std::size_t>(tree.slot_of(k))]};
    default: break;
    }

    if (token.arity == 1) {
        const Form a = reduce_node(tree, static_cast<std::size_t>(node.children[0]), fixed);
        if (!a.is_constant()) {
            not_reducible(fmt::format("{} of a non-constant subexpression", token.name));
        }
        const double x = a.constant;
        double v = 0.0;
        switch (token.op) {
        case Op::Sin: v = std::sin(x); break;
        case Op::Cos: v = std::cos(x); break;
        case Op::Exp: v = std::exp(x); break;
        case Op::Log: v = std::log(x); break;
        case Op::Square: v = x * x; break;
        case Op::Sqrt: v = std::sqrt(x); break;
        default: break;
        }
        if (!std::isfinite(v)) {
            not_reducible(fmt::format("{}({}) is not finite", token.name, x));
        }
        return {{}, v};
    }

    const Form a = reduce_node(tree, static_cast<std::size_t>(node.children[0]), fixed);
    const Form b = reduce_node(tree, static_cast<std::size_t>(node.children[1]), fixed);
    switch (token.op) {
    case Op::Add: return combine(a, b, 1.0);
    case Op::Sub: return combine(a, b, -1.0);
    case Op::Mul:
        if (a.is_constant()) {
            return scaled(b, a.constant);
        }
        if (b.is_constant()) {
            return scaled(a, b.constant);
        }
        not_reducible("product of two non-constant subexpressions");
    case Op::Div:
        if (b.is_constant() && b.constant != 0.0) {
            return scaled(a, 1.0 / b.constant);
        }
        not_reducible("division by a non-constant or zero subexpression");
    default: break;
    }
    not_reducible(fmt::format("unsupported token '{}'", token.name));
}

std::string num(double v)
{
    return fmt::format("{:.4f}", v);
}

std::string short_num(double v)
{
    return fmt::format("{:g}", v);
}

// Sign of a fact's implication on sum(c x) >= b: +1 always true, -1 never
// true, 0 undecided.
int decide(const Inequality& ineq, const std::vector<SignFact>& facts)
{
    for (const auto& fact : facts) {
        if (fact.terms.size() != ineq.terms.size() || fact.terms.empty()) {
            continue;
        }
        Terms w(fact.terms.begin(), fact.terms.end());
        if (w.size() != ineq.terms.size()) {
            continue;
        }
        double lambda = 0.0;
        bool proportional = true;
        for (const auto& [name, c] : ineq.terms) {
            auto it = w.find(name);
            if (it == w.end() || it->second == 0.0) {
                proportional = false;
                break;
            }
            const double l = c / it->second;
            if (lambda == 0.0) {
                lambda = l;
            } else if (std::abs(l - lambda) > 1e-9 * std::max(1.0, std::abs(lambda))) {
                proportional = false;
                break;
            }
        }
        if (!proportional || lambda == 0.0) {
            continue;
        }
        const double limit = lambda * fact.bound;
        if (lambda > 0.0) {
            // sum(c x) <= limit
            if (ineq.strict ? ineq.bound >= limit : ineq.bound > limit) {
                return -1;
            }
        } else {
            // sum(c x) >= limit
            if (ineq.strict ? ineq.bound < limit : ineq.bound <= limit) {
                return 1;
            }
        }
    }
    return 0;
}

std::string closed_form(double t, double constant, double scale)
{
    std::string s = fmt::format("ln({}/{})", short_num(t), short_num(1.0 - t));
    if (constant > 0.0) {
        s += fmt::format(" - {}", short_num(constant));
    } else if (constant < 0.0) {
        s += fmt::format(" + {}", short_num(-constant));
    }
    if (scale != 1.0) {
        s = fmt::format("({}) / {}", s, short_num(scale));
    }
    return s;
}

std::string render_terms(const std::vector<std::pair<std::string, double>>& terms)
{
    std::string out;
    for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto& [name, c] = terms[i];
        const double mag = std::abs(c);
        const std::string body = mag == 1.0 ? name : fmt::format("{}*{}", num(mag), name);
        if (i == 0) {
            out += c < 0.0 ? "-" + body : body;
        } else {
            out += c < 0.0 ? " - " + body : " + " + body;
        }
    }
    return out;
}

} // namespace

LinearForm reduce(const ExprTree& tree, const std::vector<std::pair<std::string, double>>& fixed)
{
    if (tree.empty()) {
        not_reducible("empty expression");
    }
    const std::map<std::string, double> values(fixed.begin(), fixed.end());
    const Form f = reduce_node(tree, 0, values);
    LinearForm out;
    out.terms.assign(f.terms.begin(), f.terms.end());
    out.constant = f.constant;
    return out;
}

bool RuleSet::classify(const FeatureMatrix& x, std::size_t row) const
{
    auto value = [&](const std::string& name) {
        const auto c = x.index_of(name);
        if (c == x.cols()) {
            throw Error(ErrorKind::SchemaMismatch, fmt::format("rule feature '{}' missing from data", name));
        }
        return x.columns[c][row];
    };
    for (const auto& rc : cases) {
        const bool match = std::all_of(rc.when.begin(), rc.when.end(), [&](const Literal& l) {
            return value(l.feature) == static_cast<double>(l.value);
        });
        if (!match) {
            continue;
        }
        if (!rc.residual) {
            return rc.label;
        }
        double lhs = 0.0;
        for (const auto& [name, c] : rc.residual->terms) {
            lhs += c * value(name);
        }
        return rc.residual->strict ? lhs > rc.residual->bound : lhs >= rc.residual->bound;
    }
    return default_label;
}

std::vector<std::uint8_t> RuleSet::classify(const FeatureMatrix& x) const
{
    std::vector<std::uint8_t> out(x.rows());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        out[r] = classify(x, r) ? 1 : 0;
    }
    return out;
}

RuleSet extract_rules(const ExprTree& tree, double t, const FeatureSpec& spec, const RuleOptions& options)
{
    RuleSet rules;
    rules.threshold = t;
    rules.raw_threshold = invert_threshold(t);
    rules.strict = options.strict;

    // Boolean features the tree references, split into free flags and groups
    std::vector<std::string> flags;
    std::vector<std::string> groups;
    std::map<std::string, std::vector<std::string>> referenced_members;
    std::set<std::string> seen;
    for (std::size_t k = 0; k < tree.size(); ++k) {
        const auto& token = tree.token_at(k);
        if (token.op != Op::Feature || !seen.insert(token.name).second) {
            continue;
        }
        const auto* info = spec.find(token.name);
        if (info == nullptr || !info->boolean) {
            continue;
        }
        if (info->group.empty()) {
            flags.push_back(token.name);
        } else {
            if (referenced_members.find(info->group) == referenced_members.end()) {
                groups.push_back(info->group);
            }
            referenced_members[info->group].push_back(token.name);
        }
    }
    std::sort(flags.begin(), flags.end());

    // per group: one choice per referenced member, plus "none of them" when
    // the group has other members
    std::vector<std::vector<std::vector<Literal>>> group_choices;
    for (const auto& g : groups) {
        auto members = referenced_members[g];
        std::vector<std::string> ordered;
        for (const auto* m : spec.group_members(g)) {
            if (std::find(members.begin(), members.end(), m->name) != members.end()) {
                ordered.push_back(m->name);
            }
        }
        std::vector<std::vector<Literal>> choices;
        for (const auto& m : ordered) {
            choices.push_back({{m, 1}});
        }
        if (spec.group_members(g).size() > ordered.size()) {
            std::vector<Literal> none;
            for (const auto& m : ordered) {
                none.push_back({m, 0});
            }
            choices.push_back(std::move(none));
        }
        group_choices.push_back(std::move(choices));
    }

    const auto facts = spec.facts_in_model_space();
    std::vector<RuleCase> all;

    const std::size_t flag_cases = std::size_t{1} << flags.size();
    std::vector<std::size_t> pick(group_choices.size(), 0);
    while (true) {
        for (std::size_t mask = 0; mask < flag_cases; ++mask) {
            RuleCase rc;
            std::vector<std::pair<std::string, double>> fixed;
            for (std::size_t g = 0; g < group_choices.size(); ++g) {
                const auto& choice = group_choices[g][pick[g]];
                rc.when.insert(rc.when.end(), choice.begin(), choice.end());
                for (const auto& m : referenced_members[groups[g]]) {
                    const bool on = std::any_of(choice.begin(), choice.end(),
                                                [&](const Literal& l) { return l.feature == m && l.value == 1; });
                    fixed.emplace_back(m, on ? 1.0 : 0.0);
                }
            }
            for (std::size_t f = 0; f < flags.size(); ++f) {
                const int v = static_cast<int>((mask >> f) & 1u);
                rc.when.push_back({flags[f], v});
                fixed.emplace_back(flags[f], static_cast<double>(v));
            }

            const LinearForm form = reduce(tree, fixed);
            if (form.is_constant()) {
                const double s = sigmoid(form.constant);
                rc.label = options.strict ? s > t : s >= t;
            } else {
                // sum(c x) + k >= L  <=>  sum(c/s x) >= (L - k)/s
                const double scale = std::abs(form.terms.front().second);
                Inequality ineq;
                for (const auto& [name, c] : form.terms) {
                    ineq.terms.emplace_back(name, c / scale);
                }
                ineq.bound = (rules.raw_threshold - form.constant) / scale;
                ineq.strict = options.strict;
                ineq.closed_form = closed_form(t, form.constant, scale);
                const int verdict = decide(ineq, facts);
                if (verdict == 0) {
                    rc.residual = std::move(ineq);
                } else {
                    rc.label = verdict > 0;
                }
            }
            all.push_back(std::move(rc));
        }
        // advance the mixed-radix counter over group choices
        std::size_t g = 0;
        while (g < pick.size() && ++pick[g] == group_choices[g].size()) {
            pick[g] = 0;
            ++g;
        }
        if (g == pick.size()) {
            break;
        }
    }

    std::size_t fraud_constant = 0;
    std::size_t legit_constant = 0;
    for (const auto& rc : all) {
        if (!rc.residual) {
            (rc.label ? fraud_constant : legit_constant) += 1;
        }
    }
    rules.default_label = fraud_constant > legit_constant;
    for (auto& rc : all) {
        if (rc.residual || rc.label != rules.default_label) {
            rules.cases.push_back(std::move(rc));
        }
    }
    return rules;
}

namespace {

std::string render_when(const std::vector<Literal>& when, const FeatureSpec& spec)
{
    std::vector<std::string> parts;
    std::map<std::string, std::vector<std::string>> excluded; // group -> labels set to 0
    std::set<std::string> chosen_groups;
    for (const auto& l : when) {
        const auto* info = spec.find(l.feature);
        if (info != nullptr && !info->group.empty()) {
            if (l.value == 1) {
                parts.push_back(fmt::format("{} = {}", info->group, info->label));
                chosen_groups.insert(info->group);
            } else {
                excluded[info->group].push_back(info->label);
            }
            continue;
        }
        parts.push_back(fmt::format("{} = {}", l.feature, l.value));
    }
    for (const auto& [group, labels] : excluded) {
        if (chosen_groups.count(group) == 0) {
            parts.push_back(fmt::format("{} not in {{{}}}", group, fmt::join(labels, ", ")));
        }
    }
    return fmt::format("{}", fmt::join(parts, " and "));
}

const char* label_name(bool fraud)
{
    return fraud ? "fraud" : "legitimate";
}

} // namespace

std::string render_rules(const RuleSet& rules, const FeatureSpec& spec)
{
    std::string out;
    const char* op = rules.strict ? ">" : ">=";
    out += fmt::format("# fraud iff sigmoid(f) {} {}, i.e. f {} {}  # ln({}/{})\n", op, short_num(rules.threshold), op,
                       num(rules.raw_threshold), short_num(rules.threshold), short_num(1.0 - rules.threshold));
    if (rules.cases.empty()) {
        out += fmt::format("always {}\n", label_name(rules.default_label));
        return out;
    }
    for (const auto& rc : rules.cases) {
        const auto when = render_when(rc.when, spec);
        if (rc.residual) {
            const auto& r = *rc.residual;
            const auto ineq = fmt::format("{} {} {}", render_terms(r.terms), r.strict ? ">" : ">=", num(r.bound));
            out += fmt::format("fraud if {}{}{}  # {}\n", when, when.empty() ? "" : " and ", ineq, r.closed_form);
        } else {
            out += fmt::format("{} if {}\n", label_name(rc.label), when.empty() ? "true" : when);
        }
    }
    out += fmt::format("otherwise {}\n", label_name(rules.default_label));
    return out;
}

std::string rules_to_json(const RuleSet& rules)
{
    nlohmann::ordered_json j;
    j["threshold"] = rules.threshold;
    j["raw_threshold"] = rules.raw_threshold;
    j["comparison"] = rules.strict ? ">" : ">=";
    j["default"] = label_name(rules.default_label);
    j["cases"] = nlohmann::json::array();
    for (const auto& rc : rules.cases) {
        nlohmann::ordered_json c;
        c["when"] = nlohmann::ordered_json::object();
        for (const auto& l : rc.when) {
            c["when"][l.feature] = l.value;
        }
        if (rc.residual) {
            nlohmann::ordered_json terms = nlohmann::ordered_json::object();
            for (const auto& [name, coef] : rc.residual->terms) {
                terms[name] = coef;
            }
            c["label"] = "fraud if residual";
            c["residual"] = {{"terms", terms},
                             {"comparison", rc.residual->strict ? ">" : ">="},
                             {"bound", rc.residual->bound},
                             {"bound_rounded", num(rc.residual->bound)},
                             {"closed_form", rc.residual->closed_form}};
        } else {
            c["label"] = label_name(rc.label);
        }
        j["cases"].push_back(c);
    }
    return j.dump(2);
}

} // namespace dsc
