#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dsc/expr.hpp"

namespace dsc {

enum class TrigScope {
    Descendant, // no trig token anywhere below a trig token
    Child,      // only direct children are checked
};

struct GrammarConfig {
    int min_length = 4;
    int max_length = 30;
    TrigScope trig_scope = TrigScope::Descendant;
};

/// Policy observation for the next open slot. Token ids equal to the library
/// size stand for EMPTY (no parent, or no elder sibling).
struct Observation {
    TokenId parent = 0;
    TokenId sibling = 0;
};

/// Incremental state of a preorder sequence under construction. The next slot
/// to fill is always the leftmost open one.
class PartialTree {
public:
    PartialTree(const Library& library, const GrammarConfig& grammar);

    /// mask[i] != 0 iff token i may fill the next slot. Throws DeadEnd when no
    /// token is admissible.
    [[nodiscard]] std::vector<char> mask() const;
    void mask_into(std::vector<char>& out) const;

    [[nodiscard]] Observation observation() const noexcept;

    void push(TokenId token);

    [[nodiscard]] bool complete() const noexcept { return open_.empty(); }
    [[nodiscard]] int length() const noexcept { return length_; }
    [[nodiscard]] TokenId empty_id() const noexcept { return static_cast<TokenId>(library_->size()); }

private:
    struct Slot {
        TokenId parent;           // EMPTY for the root
        TokenId sibling;          // EMPTY unless an elder sibling exists
        int parent_node;          // preorder index of the parent, -1 for the root
        int position;             // child position under its parent
        bool under_trig;          // trig tokens are forbidden in this slot
    };

    const Library* library_;
    GrammarConfig grammar_;
    std::vector<Slot> open_;
    int length_ = 0;
};

/// Builds the mask for the slot following `prefix`; convenience wrapper over
/// PartialTree.
std::vector<char> constraint_mask(const Library& library, std::span<const TokenId> prefix,
                                  const GrammarConfig& grammar);

/// First grammar violation of a complete tree, or nullopt. Checks length
/// bounds, the constant-root rule, the constant-sibling rule, the inverse rule
/// and the trig rule.
std::optional<std::string> find_violation(const ExprTree& tree, const GrammarConfig& grammar);

} // namespace dsc
