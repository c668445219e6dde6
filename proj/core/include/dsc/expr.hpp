#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dsc/matrix.hpp"

namespace dsc {

using TokenId = std::uint16_t;

enum class Op : std::uint8_t {
    Feature,
    Constant,
    Add,
    Sub,
    Mul,
    Div,
    Sin,
    Cos,
    Exp,
    Log,
    Square,
    Sqrt,
};

struct Token {
    Op op{};
    std::string name;
    int feature = -1; // column index, Op::Feature only
    int arity = 0;
    int complexity = 1;
    bool is_trig = false;
    std::optional<TokenId> inverse;
};

/// Token weights: + - * feature constant -> 1, / square -> 2, sin cos -> 3,
/// exp log sqrt -> 4. Throws UnknownToken for any other operator name.
int token_complexity(std::string_view name);
int token_complexity(const Token& token) noexcept;

int arity_of(Op op) noexcept;

/// Canonical serialization name of an operator ("+", "sqrt", ...).
std::string_view op_name(Op op) noexcept;

/// Accepts canonical names and a few aliases ("add", "mul", "÷", "√", ...).
std::optional<Op> op_from_name(std::string_view name) noexcept;

/// The vocabulary an expression is drawn from. Token ids are positions in
/// the library; features occupy ids in column order.
class Library {
public:
    static constexpr std::string_view constant_name = "const";

    /// Builds a library from feature names plus operator names. Operators are
    /// appended after features, then the constant token when requested.
    static std::shared_ptr<const Library> make(std::vector<std::string> feature_names,
                                               const std::vector<std::string>& operators = default_operators(),
                                               bool with_constant = true);

    static std::vector<std::string> default_operators();

    [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
    [[nodiscard]] const Token& operator[](TokenId id) const { return tokens_.at(id); }
    [[nodiscard]] const std::vector<Token>& tokens() const noexcept { return tokens_; }

    [[nodiscard]] std::optional<TokenId> find(std::string_view name) const noexcept;
    /// Like find() but throws UnknownToken.
    [[nodiscard]] TokenId id(std::string_view name) const;

    [[nodiscard]] std::optional<TokenId> constant_id() const noexcept { return constant_; }
    [[nodiscard]] std::size_t feature_count() const noexcept { return feature_names_.size(); }
    [[nodiscard]] const std::vector<std::string>& feature_names() const noexcept { return feature_names_; }

    /// Ids of all tokens with the given arity, in id order.
    [[nodiscard]] const std::vector<TokenId>& with_arity(int arity) const { return by_arity_.at(static_cast<std::size_t>(arity)); }

private:
    std::vector<Token> tokens_;
    std::vector<std::string> feature_names_;
    std::optional<TokenId> constant_;
    std::array<std::vector<TokenId>, 3> by_arity_;
};

using LibraryPtr = std::shared_ptr<const Library>;

/// A syntax tree stored in preorder. Immutable; constant values live in
/// slots numbered by the left-to-right order of constant nodes.
class ExprTree {
public:
    struct Node {
        TokenId token = 0;
        int parent = -1;
        std::array<int, 2> children{-1, -1};
    };

    ExprTree() = default;

    /// Rebuilds the unique tree whose preorder traversal is `seq`. Missing
    /// constants default to 1.0. Throws Incomplete / Overfull.
    static ExprTree parse_prefix(LibraryPtr library, std::span<const TokenId> seq,
                                 std::span<const double> constants = {});

    [[nodiscard]] std::vector<TokenId> to_prefix() const;

    [[nodiscard]] const Library& library() const noexcept { return *library_; }
    [[nodiscard]] const LibraryPtr& library_ptr() const noexcept { return library_; }
    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }
    [[nodiscard]] const Token& token_at(std::size_t node) const { return (*library_)[nodes_.at(node).token]; }

    [[nodiscard]] const std::vector<double>& constants() const noexcept { return constants_; }
    [[nodiscard]] std::size_t constant_count() const noexcept { return constants_.size(); }
    /// Constant slot of a constant node; -1 for other nodes.
    [[nodiscard]] int slot_of(std::size_t node) const { return slots_.at(node); }
    [[nodiscard]] ExprTree with_constants(std::vector<double> constants) const;

    /// One past the last preorder index of the subtree rooted at `node`.
    [[nodiscard]] std::size_t subtree_end(std::size_t node) const;

    friend bool operator==(const ExprTree& a, const ExprTree& b) noexcept
    {
        return a.library_ == b.library_ && a.constants_ == b.constants_ && a.tokens_equal(b);
    }

private:
    [[nodiscard]] bool tokens_equal(const ExprTree& other) const noexcept;

    LibraryPtr library_;
    std::vector<Node> nodes_;
    std::vector<int> slots_;
    std::vector<double> constants_;
};

struct Evaluation {
    std::vector<double> values;
    std::size_t nonfinite = 0; // rows whose value is NaN or +-inf

    [[nodiscard]] bool valid() const noexcept { return nonfinite == 0; }
};

/// Columnar evaluation of the tree over every row of `x`. Non-finite results
/// are counted, not thrown. Throws FeatureIndexOutOfRange when the tree reads
/// a column `x` does not have.
Evaluation evaluate_batch(const ExprTree& tree, const FeatureMatrix& x);

/// Sum of token complexities over all nodes.
int complexity(const ExprTree& tree) noexcept;

struct RenderOptions {
    int precision = 4;
    bool symbolic_constants = false; // c1, c2, ... instead of values
};

std::string render_infix(const ExprTree& tree, const RenderOptions& options = {});

/// One-line prefix form: tokens separated by spaces, constants as C=<value>.
std::string serialize(const ExprTree& tree);
ExprTree deserialize(LibraryPtr library, std::string_view line);

} // namespace dsc
