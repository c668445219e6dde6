#include "dsc/expr.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <limits>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "dsc/error.hpp"

namespace dsc {

namespace {

struct OpInfo {
    Op op;
    std::string_view name;
    int arity;
    int complexity;
    bool trig;
};

constexpr std::array<OpInfo, 12> op_table{{
    {Op::Feature, "feature", 0, 1, false},
    {Op::Constant, "const", 0, 1, false},
    {Op::Add, "+", 2, 1, false},
    {Op::Sub, "-", 2, 1, false},
    {Op::Mul, "*", 2, 1, false},
    {Op::Div, "/", 2, 2, false},
    {Op::Sin, "sin", 1, 3, true},
    {Op::Cos, "cos", 1, 3, true},
    {Op::Exp, "exp", 1, 4, false},
    {Op::Log, "log", 1, 4, false},
    {Op::Square, "square", 1, 2, false},
    {Op::Sqrt, "sqrt", 1, 4, false},
}};

const OpInfo& info(Op op) noexcept { return op_table[static_cast<std::size_t>(op)]; }

std::optional<Op> inverse_op(Op op) noexcept
{
    switch (op) {
    case Op::Log: return Op::Exp;
    case Op::Exp: return Op::Log;
    case Op::Sqrt: return Op::Square;
    case Op::Square: return Op::Sqrt;
    default: return std::nullopt;
    }
}

} // namespace

int arity_of(Op op) noexcept { return info(op).arity; }

std::string_view op_name(Op op) noexcept { return info(op).name; }

std::optional<Op> op_from_name(std::string_view name) noexcept
{
    for (const auto& entry : op_table) {
        if (entry.op != Op::Feature && entry.name == name) {
            return entry.op;
        }
    }
    if (name == "add") return Op::Add;
    if (name == "sub" || name == "−") return Op::Sub;
    if (name == "mul" || name == "×") return Op::Mul;
    if (name == "div" || name == "÷") return Op::Div;
    if (name == "√" || name == "square-root") return Op::Sqrt;
    if (name == "sq" || name == "n2") return Op::Square;
    if (name == "constant" || name == "c") return Op::Constant;
    return std::nullopt;
}

int token_complexity(std::string_view name)
{
    if (name == "feature") {
        return 1;
    }
    auto op = op_from_name(name);
    if (!op) {
        throw Error(ErrorKind::UnknownToken, fmt::format("no complexity weight for token '{}'", name));
    }
    return info(*op).complexity;
}

int token_complexity(const Token& token) noexcept { return token.complexity; }

std::vector<std::string> Library::default_operators()
{
    return {"+", "-", "*", "/", "sin", "cos", "exp", "log", "square", "sqrt"};
}

std::shared_ptr<const Library> Library::make(std::vector<std::string> feature_names,
                                             const std::vector<std::string>& operators, bool with_constant)
{
    auto lib = std::make_shared<Library>();
    std::unordered_set<std::string> seen;
    auto add = [&](Token token) {
        if (!seen.insert(token.name).second) {
            throw Error(ErrorKind::ConfigInvalid, fmt::format("duplicate token name '{}'", token.name));
        }
        lib->tokens_.push_back(std::move(token));
    };

    for (std::size_t i = 0; i < feature_names.size(); ++i) {
        const auto& name = feature_names[i];
        if (name.empty() || name.find_first_of(" \t\n") != std::string::npos || name.starts_with("C=")) {
            throw Error(ErrorKind::ConfigInvalid, fmt::format("invalid feature name '{}'", name));
        }
        if (op_from_name(name)) {
            throw Error(ErrorKind::ConfigInvalid, fmt::format("feature name '{}' collides with an operator", name));
        }
        add(Token{Op::Feature, name, static_cast<int>(i), 0, 1, false, std::nullopt});
    }
    for (const auto& name : operators) {
        auto op = op_from_name(name);
        if (!op || *op == Op::Constant) {
            throw Error(ErrorKind::UnknownToken, fmt::format("unknown operator '{}'", name));
        }
        const auto& oi = info(*op);
        add(Token{*op, std::string(oi.name), -1, oi.arity, oi.complexity, oi.trig, std::nullopt});
    }
    if (with_constant) {
        lib->constant_ = static_cast<TokenId>(lib->tokens_.size());
        add(Token{Op::Constant, std::string(constant_name), -1, 0, 1, false, std::nullopt});
    }
    if (lib->tokens_.size() > std::numeric_limits<TokenId>::max()) {
        throw Error(ErrorKind::ConfigInvalid, "library too large");
    }

    for (auto& token : lib->tokens_) {
        if (auto inv = inverse_op(token.op)) {
            for (std::size_t j = 0; j < lib->tokens_.size(); ++j) {
                if (lib->tokens_[j].op == *inv) {
                    token.inverse = static_cast<TokenId>(j);
                }
            }
        }
    }
    for (std::size_t i = 0; i < lib->tokens_.size(); ++i) {
        lib->by_arity_[static_cast<std::size_t>(lib->tokens_[i].arity)].push_back(static_cast<TokenId>(i));
    }
    lib->feature_names_ = std::move(feature_names);
    return lib;
}

std::optional<TokenId> Library::find(std::string_view name) const noexcept
{
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        if (tokens_[i].name == name) {
            return static_cast<TokenId>(i);
        }
    }
    if (auto op = op_from_name(name)) {
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (tokens_[i].op == *op && *op != Op::Feature) {
                return static_cast<TokenId>(i);
            }
        }
    }
    return std::nullopt;
}

TokenId Library::id(std::string_view name) const
{
    if (auto found = find(name)) {
        return *found;
    }
    throw Error(ErrorKind::UnknownToken, fmt::format("token '{}' is not in the library", name));
}

ExprTree ExprTree::parse_prefix(LibraryPtr library, std::span<const TokenId> seq, std::span<const double> constants)
{
    if (seq.empty()) {
        throw Error(ErrorKind::Incomplete, "empty token sequence");
    }
    ExprTree tree;
    tree.library_ = std::move(library);
    tree.nodes_.reserve(seq.size());
    tree.slots_.reserve(seq.size());

    // Stack of (parent node, child position) for the open slots; top is the
    // leftmost open slot in preorder.
    std::vector<std::pair<int, int>> open{{-1, 0}};
    for (std::size_t i = 0; i < seq.size(); ++i) {
        if (open.empty()) {
            throw Error(ErrorKind::Overfull, fmt::format("{} token(s) remain after the tree closed", seq.size() - i));
        }
        const auto& token = (*tree.library_)[seq[i]];
        auto [parent, position] = open.back();
        open.pop_back();

        Node node;
        node.token = seq[i];
        node.parent = parent;
        const int index = static_cast<int>(tree.nodes_.size());
        if (parent >= 0) {
            tree.nodes_[static_cast<std::size_t>(parent)].children[static_cast<std::size_t>(position)] = index;
        }
        tree.nodes_.push_back(node);

        if (token.op == Op::Constant) {
            const auto slot = tree.constants_.size();
            tree.slots_.push_back(static_cast<int>(slot));
            tree.constants_.push_back(slot < constants.size() ? constants[slot] : 1.0);
        } else {
            tree.slots_.push_back(-1);
        }
        for (int c = token.arity - 1; c >= 0; --c) {
            open.emplace_back(index, c);
        }
    }
    if (!open.empty()) {
        throw Error(ErrorKind::Incomplete, fmt::format("{} open slot(s) after the last token", open.size()));
    }
    return tree;
}

std::vector<TokenId> ExprTree::to_prefix() const
{
    std::vector<TokenId> out;
    out.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        out.push_back(n.token);
    }
    return out;
}

ExprTree ExprTree::with_constants(std::vector<double> constants) const
{
    ExprTree copy = *this;
    constants.resize(constants_.size(), 1.0);
    copy.constants_ = std::move(constants);
    return copy;
}

std::size_t ExprTree::subtree_end(std::size_t node) const
{
    std::size_t pending = 1;
    std::size_t i = node;
    while (pending > 0) {
        pending += static_cast<std::size_t>((*library_)[nodes_.at(i).token].arity);
        --pending;
        ++i;
    }
    return i;
}

bool ExprTree::tokens_equal(const ExprTree& other) const noexcept
{
    if (nodes_.size() != other.nodes_.size()) {
        return false;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (nodes_[i].token != other.nodes_[i].token) {
            return false;
        }
    }
    return true;
}

Evaluation evaluate_batch(const ExprTree& tree, const FeatureMatrix& x)
{
    const std::size_t n = x.rows();
    const auto& lib = tree.library();
    const auto& nodes = tree.nodes();

    std::size_t scratch_count = 0;
    for (const auto& node : nodes) {
        const auto& token = lib[node.token];
        if (token.op == Op::Feature) {
            if (static_cast<std::size_t>(token.feature) >= x.cols()) {
                throw Error(ErrorKind::FeatureIndexOutOfRange,
                            fmt::format("feature '{}' (column {}) but matrix has {} columns", token.name,
                                        token.feature, x.cols()));
            }
        } else {
            ++scratch_count;
        }
    }

    std::vector<double> storage(scratch_count * n);
    std::size_t next_buffer = 0;
    std::vector<const double*> stack;
    stack.reserve(nodes.size());

    for (std::size_t k = nodes.size(); k-- > 0;) {
        const auto& token = lib[nodes[k].token];
        if (token.op == Op::Feature) {
            stack.push_back(x.columns[static_cast<std::size_t>(token.feature)].data());
            continue;
        }
        double* out = storage.data() + (next_buffer++) * n;
        if (token.op == Op::Constant) {
            std::fill(out, out + n, tree.constants()[static_cast<std::size_t>(tree.slot_of(k))]);
            stack.push_back(out);
            continue;
        }
        if (token.arity == 1) {
            const double* a = stack.back();
            stack.pop_back();
            switch (token.op) {
            case Op::Sin: for (std::size_t i = 0; i < n; ++i) out[i] = std::sin(a[i]); break;
            case Op::Cos: for (std::size_t i = 0; i < n; ++i) out[i] = std::cos(a[i]); break;
            case Op::Exp: for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(a[i]); break;
            case Op::Log: for (std::size_t i = 0; i < n; ++i) out[i] = std::log(a[i]); break;
            case Op::Square: for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * a[i]; break;
            case Op::Sqrt: for (std::size_t i = 0; i < n; ++i) out[i] = std::sqrt(a[i]); break;
            default: break;
            }
        } else {
            // Left child sits on top: it was pushed last in reverse preorder.
            const double* a = stack.back();
            stack.pop_back();
            const double* b = stack.back();
            stack.pop_back();
            switch (token.op) {
            case Op::Add: for (std::size_t i = 0; i < n; ++i) out[i] = a[i] + b[i]; break;
            case Op::Sub: for (std::size_t i = 0; i < n; ++i) out[i] = a[i] - b[i]; break;
            case Op::Mul: for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i]; break;
            case Op::Div: for (std::size_t i = 0; i < n; ++i) out[i] = a[i] / b[i]; break;
            default: break;
            }
        }
        stack.push_back(out);
    }

    Evaluation result;
    result.values.assign(stack.back(), stack.back() + n);
    for (double v : result.values) {
        if (!std::isfinite(v)) {
            ++result.nonfinite;
        }
    }
    return result;
}

int complexity(const ExprTree& tree) noexcept
{
    int total = 0;
    for (const auto& node : tree.nodes()) {
        total += tree.library()[node.token].complexity;
    }
    return total;
}

namespace {

int precedence(Op op) noexcept
{
    switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Mul:
    case Op::Div: return 2;
    default: return 3; // atoms and function calls
    }
}

std::string format_constant(double value, int precision)
{
    auto text = fmt::format("{:.{}f}", value, precision);
    return value < 0 ? "(" + text + ")" : text;
}

struct Renderer {
    const ExprTree& tree;
    const RenderOptions& options;

    std::string render(std::size_t k) const
    {
        const auto& token = tree.token_at(k);
        const auto& node = tree.nodes()[k];
        switch (token.op) {
        case Op::Feature: return token.name;
        case Op::Constant: {
            const int slot = tree.slot_of(k);
            if (options.symbolic_constants) {
                return fmt::format("c{}", slot + 1);
            }
            return format_constant(tree.constants()[static_cast<std::size_t>(slot)], options.precision);
        }
        default: break;
        }
        if (token.arity == 1) {
            return fmt::format("{}({})", token.name, render(static_cast<std::size_t>(node.children[0])));
        }
        const int p = precedence(token.op);
        const auto left = static_cast<std::size_t>(node.children[0]);
        const auto right = static_cast<std::size_t>(node.children[1]);
        std::string lhs = render(left);
        std::string rhs = render(right);
        if (precedence(tree.token_at(left).op) < p) {
            lhs = "(" + lhs + ")";
        }
        const int rp = precedence(tree.token_at(right).op);
        const bool non_associative = token.op == Op::Sub || token.op == Op::Div;
        if (rp < p || (rp == p && non_associative)) {
            rhs = "(" + rhs + ")";
        }
        return fmt::format("{} {} {}", lhs, token.name, rhs);
    }
};

} // namespace

std::string render_infix(const ExprTree& tree, const RenderOptions& options)
{
    if (tree.empty()) {
        return {};
    }
    return Renderer{tree, options}.render(0);
}

std::string serialize(const ExprTree& tree)
{
    std::string out;
    for (std::size_t k = 0; k < tree.size(); ++k) {
        if (k > 0) {
            out += ' ';
        }
        const auto& token = tree.token_at(k);
        if (token.op == Op::Constant) {
            out += fmt::format("C={}", tree.constants()[static_cast<std::size_t>(tree.slot_of(k))]);
        } else {
            out += token.name;
        }
    }
    return out;
}

ExprTree deserialize(LibraryPtr library, std::string_view line)
{
    std::vector<TokenId> seq;
    std::vector<double> constants;
    std::istringstream in{std::string(line)};
    std::string word;
    while (in >> word) {
        if (word.starts_with("C=")) {
            auto cid = library->constant_id();
            if (!cid) {
                throw Error(ErrorKind::UnknownToken, "constant in expression but library has no constant token");
            }
            double value = 0.0;
            const char* first = word.data() + 2;
            const char* last = word.data() + word.size();
            auto [ptr, ec] = std::from_chars(first, last, value);
            if (ec != std::errc{} || ptr != last) {
                throw Error(ErrorKind::ParseError, fmt::format("bad constant '{}'", word));
            }
            seq.push_back(*cid);
            constants.push_back(value);
            continue;
        }
        const auto id = library->id(word);
        if ((*library)[id].op == Op::Constant) {
            constants.push_back(1.0);
        }
        seq.push_back(id);
    }
    return ExprTree::parse_prefix(std::move(library), seq, constants);
}

} // namespace dsc
