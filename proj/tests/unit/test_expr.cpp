#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <map>

#include <gtest/gtest.h>

#include "dsc/data.hpp"
#include "dsc/error.hpp"
#include "dsc/expr.hpp"
#include "dsc/policy.hpp"
#include "oracles.hpp"

using namespace dsc;

namespace {

const char* sample_rule = "* sqrt + externalDest type_cash-out + - amount maxDest7 type_transfer";

LibraryPtr xy_library()
{
    return Library::make({"x", "y"});
}

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no dsc::Error thrown";
    return ErrorKind::Io;
}

FeatureMatrix matrix(std::vector<std::string> names, std::vector<std::vector<double>> cols)
{
    return {std::move(names), std::move(cols)};
}

} // namespace

TEST(TokenComplexity, TableWeights)
{
    const std::map<std::string, int> expected{{"+", 1},   {"-", 1},      {"*", 1},    {"/", 2},
                                              {"sin", 3}, {"cos", 3},    {"exp", 4},  {"log", 4},
                                              {"square", 2}, {"sqrt", 4}, {"const", 1}};
    for (const auto& [name, weight] : expected) {
        EXPECT_EQ(token_complexity(name), weight) << name;
    }
    EXPECT_EQ(kind_of([] { (void)token_complexity("tanh"); }), ErrorKind::UnknownToken);
}

TEST(TokenComplexity, FeaturesWeighOne)
{
    const auto lib = xy_library();
    EXPECT_EQ(token_complexity((*lib)[lib->id("x")]), 1);
}

TEST(Library, InversePairsAreSymmetric)
{
    const auto lib = xy_library();
    for (TokenId i = 0; i < lib->size(); ++i) {
        const auto& t = (*lib)[i];
        if (t.inverse) {
            ASSERT_TRUE((*lib)[*t.inverse].inverse.has_value());
            EXPECT_EQ(*(*lib)[*t.inverse].inverse, i);
        }
    }
    EXPECT_EQ(*(*lib)[lib->id("log")].inverse, lib->id("exp"));
    EXPECT_EQ(*(*lib)[lib->id("sqrt")].inverse, lib->id("square"));
}

TEST(Library, RejectsDuplicateNames)
{
    EXPECT_EQ(kind_of([] { (void)Library::make({"x", "x"}); }), ErrorKind::ConfigInvalid);
    EXPECT_EQ(kind_of([] { (void)Library::make({"sin"}); }), ErrorKind::ConfigInvalid);
}

TEST(ParsePrefix, SinOverLogTree)
{
    const auto lib = xy_library();
    const auto tree = deserialize(lib, "/ sin * const x log y");
    RenderOptions symbolic;
    symbolic.symbolic_constants = true;
    EXPECT_EQ(render_infix(tree, symbolic), "sin(c1 * x) / log(y)");
    EXPECT_EQ(serialize(tree), "/ sin * C=1 x log y");
    EXPECT_EQ(tree.constant_count(), 1u);
}

TEST(ParsePrefix, SingleLeaf)
{
    const auto lib = xy_library();
    const auto tree = deserialize(lib, "x");
    EXPECT_EQ(tree.size(), 1u);
    EXPECT_EQ(complexity(tree), 1);
    const auto x = matrix({"x", "y"}, {{3.5, -2.0}, {0.0, 0.0}});
    const auto e = evaluate_batch(tree, x);
    EXPECT_EQ(e.values, (std::vector<double>{3.5, -2.0}));
}

TEST(ParsePrefix, Errors)
{
    const auto lib = xy_library();
    EXPECT_EQ(kind_of([&] { (void)deserialize(lib, "+ x"); }), ErrorKind::Incomplete);
    EXPECT_EQ(kind_of([&] { (void)deserialize(lib, "x y"); }), ErrorKind::Overfull);
    EXPECT_EQ(kind_of([&] { (void)deserialize(lib, "+ x z"); }), ErrorKind::UnknownToken);
}

TEST(ParsePrefix, SampleRuleRoundTrip)
{
    const auto lib = Library::make(engineered_feature_names());
    const auto tree = deserialize(lib, sample_rule);
    const std::vector<std::string> expected{"*",    "sqrt", "+",      "externalDest", "type_cash-out",
                                            "+",    "-",    "amount", "maxDest7",     "type_transfer"};
    EXPECT_EQ(oracle::names_of(*lib, tree.to_prefix()), expected);
    EXPECT_EQ(complexity(tree), 13);
    EXPECT_EQ(serialize(tree), sample_rule);
}

TEST(Complexity, Examples)
{
    const auto lib = Library::make({"x0", "x1"});
    EXPECT_EQ(complexity(deserialize(lib, "+ sin x0 x1")), 6);
    EXPECT_EQ(complexity(deserialize(lib, "x0")), 1);
}

TEST(Evaluate, Examples)
{
    const auto lib = Library::make({"x0", "x1"});
    const auto x = matrix({"x0", "x1"}, {{2.0}, {3.0}});
    EXPECT_EQ(evaluate_batch(deserialize(lib, "+ x0 x1"), x).values[0], 5.0);

    const auto zero = matrix({"x0", "x1"}, {{0.0}, {1.0}});
    const auto bad = evaluate_batch(deserialize(lib, "log x0"), zero);
    EXPECT_FALSE(bad.valid());
}

TEST(Evaluate, SampleRuleRow)
{
    const auto names = engineered_feature_names();
    const auto lib = Library::make(names);
    FeatureMatrix x;
    x.names = names;
    x.columns.assign(names.size(), {0.0});
    auto set = [&](const std::string& n, double v) { x.columns[x.index_of(n)][0] = v; };
    set("externalDest", 1);
    set("type_transfer", 1);
    set("amount", 5);
    set("maxDest7", 5);
    EXPECT_EQ(evaluate_batch(deserialize(lib, sample_rule), x).values[0], 1.0);
}

TEST(Evaluate, MissingColumn)
{
    const auto lib = Library::make({"x0", "x1"});
    const auto x = matrix({"x0"}, {{1.0}});
    EXPECT_EQ(kind_of([&] { (void)evaluate_batch(deserialize(lib, "+ x0 x1"), x); }),
              ErrorKind::FeatureIndexOutOfRange);
}

TEST(Render, Parentheses)
{
    const auto lib = Library::make({"x0", "x1", "x2"});
    EXPECT_EQ(render_infix(deserialize(lib, "+ x0 x1")), "x0 + x1");
    EXPECT_EQ(render_infix(deserialize(lib, "* x0 + x1 x2")), "x0 * (x1 + x2)");
    EXPECT_EQ(render_infix(deserialize(lib, "- x0 - x1 x2")), "x0 - (x1 - x2)");
    EXPECT_EQ(render_infix(deserialize(lib, "- - x0 x1 x2")), "x0 - x1 - x2");
    EXPECT_EQ(render_infix(deserialize(lib, "/ x0 * x1 x2")), "x0 / (x1 * x2)");
    EXPECT_EQ(render_infix(deserialize(lib, "+ x0 C=-2.5")), "x0 + (-2.5000)");
}

TEST(Serialize, ConstantsRoundTripExactly)
{
    const auto lib = Library::make({"x0"});
    const auto tree = deserialize(lib, "+ * C=0.1 x0 C=-123456.789012345");
    const auto again = deserialize(lib, serialize(tree));
    EXPECT_EQ(again.constants(), tree.constants());
    EXPECT_TRUE(again == tree);
}

// Random sampled trees: round trip, additivity, determinism and agreement
// with the recursive row evaluator.
TEST(ExprProperties, RandomTrees)
{
    const std::vector<std::string> names{"a", "b", "d"};
    const auto lib = Library::make(names);
    Rng rng(11);
    const auto net = PolicyNet::random(lib, 16, rng);
    GrammarConfig grammar;
    grammar.max_length = 20;
    const auto batch = sample_batch(net, 10000, rng, grammar);

    FeatureMatrix x;
    x.names = names;
    std::normal_distribution<double> g(0.0, 2.0);
    x.columns.assign(3, std::vector<double>(8));
    for (auto& col : x.columns) {
        for (auto& v : col) v = g(rng);
    }
    std::uniform_real_distribution<double> cval(-3.0, 3.0);

    for (std::size_t i = 0; i < batch.sequences.size(); ++i) {
        const auto& seq = batch.sequences[i];
        auto tree = ExprTree::parse_prefix(lib, seq);
        ASSERT_EQ(tree.to_prefix(), seq);
        ASSERT_TRUE(ExprTree::parse_prefix(lib, tree.to_prefix()) == tree);

        // additivity at the root
        int children = 0;
        for (int c : tree.nodes()[0].children) {
            if (c < 0) continue;
            const auto begin = static_cast<std::size_t>(c);
            const auto end = tree.subtree_end(begin);
            std::vector<TokenId> sub(seq.begin() + static_cast<long>(begin), seq.begin() + static_cast<long>(end));
            children += complexity(ExprTree::parse_prefix(lib, sub));
        }
        ASSERT_EQ(complexity(tree), children + tree.token_at(0).complexity);

        if (i % 10 != 0) continue;
        std::vector<double> consts(tree.constant_count());
        for (auto& c : consts) c = cval(rng);
        tree = tree.with_constants(consts);
        const auto e1 = evaluate_batch(tree, x);
        const auto e2 = evaluate_batch(tree, x);
        const auto names_seq = oracle::names_of(*lib, seq);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            std::map<std::string, double> row;
            for (std::size_t c = 0; c < 3; ++c) row[names[c]] = x.columns[c][r];
            const double want = oracle::eval_row(names_seq, consts, row);
            const double got = e1.values[r];
            if (std::isnan(want)) {
                ASSERT_TRUE(std::isnan(got));
            } else {
                ASSERT_EQ(got, want) << serialize(tree);
            }
            ASSERT_EQ(std::memcmp(&e1.values[r], &e2.values[r], sizeof(double)), 0);
        }
    }
}
