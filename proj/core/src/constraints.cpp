#include "dsc/constraints.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "dsc/error.hpp"

namespace dsc {

PartialTree::PartialTree(const Library& library, const GrammarConfig& grammar)
    : library_(&library), grammar_(grammar)
{
    const auto empty = empty_id();
    open_.push_back(Slot{empty, empty, -1, 0, false});
}

std::vector<char> PartialTree::mask() const
{
    std::vector<char> out;
    mask_into(out);
    return out;
}

void PartialTree::mask_into(std::vector<char>& out) const
{
    const auto& lib = *library_;
    out.assign(lib.size(), 0);
    if (open_.empty()) {
        throw Error(ErrorKind::DeadEnd, "sequence is already complete");
    }
    const Slot& slot = open_.back();
    const int open_after_pop = static_cast<int>(open_.size()) - 1;
    const TokenId empty = empty_id();
    const Token* parent = slot.parent == empty ? nullptr : &lib[slot.parent];
    const bool sibling_is_constant = slot.sibling != empty && lib[slot.sibling].op == Op::Constant;

    bool any = false;
    for (std::size_t i = 0; i < lib.size(); ++i) {
        const Token& token = lib[static_cast<TokenId>(i)];
        // every open slot needs at least one more token
        const int min_total = length_ + 1 + open_after_pop + token.arity;
        if (min_total > grammar_.max_length) {
            continue;
        }
        if (token.arity == 0 && open_after_pop == 0 && length_ + 1 < grammar_.min_length) {
            continue;
        }
        if (token.op == Op::Constant && (parent == nullptr || sibling_is_constant)) {
            continue;
        }
        if (parent != nullptr && parent->arity == 1 && parent->inverse && *parent->inverse == i) {
            continue;
        }
        if (token.is_trig && slot.under_trig) {
            continue;
        }
        out[i] = 1;
        any = true;
    }
    if (!any) {
        throw Error(ErrorKind::DeadEnd,
                    fmt::format("no admissible token at length {} (min {}, max {})", length_, grammar_.min_length,
                                grammar_.max_length));
    }
}

Observation PartialTree::observation() const noexcept
{
    if (open_.empty()) {
        return {empty_id(), empty_id()};
    }
    return {open_.back().parent, open_.back().sibling};
}

void PartialTree::push(TokenId id)
{
    if (open_.empty()) {
        throw Error(ErrorKind::Overfull, "push on a complete sequence");
    }
    const Token& token = (*library_)[id];
    const Slot slot = open_.back();
    open_.pop_back();
    const int node = length_;
    ++length_;

    // The slot now on top (if any) is the right sibling of the one just filled.
    if (slot.position == 0 && !open_.empty() && open_.back().parent_node == slot.parent_node && open_.back().position == 1) {
        open_.back().sibling = id;
    }

    const bool child_under_trig = grammar_.trig_scope == TrigScope::Descendant ? (slot.under_trig || token.is_trig)
                                                                               : token.is_trig;
    const TokenId empty = empty_id();
    for (int c = token.arity - 1; c >= 0; --c) {
        open_.push_back(Slot{id, empty, node, c, child_under_trig});
    }
}

std::vector<char> constraint_mask(const Library& library, std::span<const TokenId> prefix, const GrammarConfig& grammar)
{
    PartialTree state(library, grammar);
    for (auto id : prefix) {
        state.push(id);
    }
    return state.mask();
}

namespace {

bool subtree_has_trig(const ExprTree& tree, std::size_t node)
{
    const auto end = tree.subtree_end(node);
    for (std::size_t k = node + 1; k < end; ++k) {
        if (tree.token_at(k).is_trig) {
            return true;
        }
    }
    return false;
}

} // namespace

std::optional<std::string> find_violation(const ExprTree& tree, const GrammarConfig& grammar)
{
    const int n = static_cast<int>(tree.size());
    if (n < grammar.min_length || n > grammar.max_length) {
        return fmt::format("length {} outside [{}, {}]", n, grammar.min_length, grammar.max_length);
    }
    if (tree.token_at(0).op == Op::Constant) {
        return std::string("root is a constant");
    }
    for (std::size_t k = 0; k < tree.size(); ++k) {
        const auto& token = tree.token_at(k);
        const auto& node = tree.nodes()[k];
        if (token.arity == 2) {
            const auto& a = tree.token_at(static_cast<std::size_t>(node.children[0]));
            const auto& b = tree.token_at(static_cast<std::size_t>(node.children[1]));
            if (a.op == Op::Constant && b.op == Op::Constant) {
                return fmt::format("node {} has two constant leaves", k);
            }
        }
        if (token.arity == 1 && token.inverse) {
            if (tree.nodes()[static_cast<std::size_t>(node.children[0])].token == *token.inverse) {
                return fmt::format("node {} ({}) has its inverse as child", k, token.name);
            }
        }
        if (token.is_trig) {
            bool bad = false;
            if (grammar.trig_scope == TrigScope::Descendant) {
                bad = subtree_has_trig(tree, k);
            } else {
                bad = tree.token_at(static_cast<std::size_t>(node.children[0])).is_trig;
            }
            if (bad) {
                return fmt::format("trig node {} has a trig descendant", k);
            }
        }
    }
    return std::nullopt;
}

} // namespace dsc
