#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "dsc/data.hpp"
#include "dsc_cli/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
    int code;
    std::string out, err;
};

Result cli(const std::vector<std::string>& args)
{
    std::ostringstream out, err;
    const int code = dsc::cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<json> json_lines(const std::string& text)
{
    std::vector<json> out;
    std::istringstream in(text);
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) out.push_back(json::parse(line));
    }
    return out;
}

// The planted rule written against the scaled columns: the raw amount
// difference is rebuilt from the scaler so the tree fires iff
// transfer, external recipient and amount >= maxDest7.
std::string planted_expression(const dsc::FeatureSpec& spec)
{
    const auto& s = *spec.scaler;
    auto find = [&](const std::string& n) {
        for (std::size_t i = 0; i < s.columns.size(); ++i) {
            if (s.columns[i] == n) return i;
        }
        return s.columns.size();
    };
    const auto a = find("amount");
    const auto m = find("maxDest7");
    return fmt::format("* type_transfer * externalDest + - + * amount C={} C={} + * maxDest7 C={} C={} C=1",
                       s.stddev[a], s.mean[a], s.stddev[m], s.mean[m]);
}

class Cli : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        dir_ = fs::temp_directory_path() / "dsc_cli_test";
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ASSERT_EQ(cli({"simulate", "--rows", "6000", "--fraud-rate", "0.02", "--seed", "7", "--out",
                       (dir_ / "tx.csv").string()})
                      .code,
                  0);
        ASSERT_EQ(cli({"ingest", "--csv", (dir_ / "tx.csv").string(), "--out", (dir_ / "data").string()}).code, 0);
    }
    static void TearDownTestSuite() { fs::remove_all(dir_); }

    static fs::path dir_;
};

fs::path Cli::dir_;

} // namespace

TEST_F(Cli, SimulateIsDeterministic)
{
    const auto a = dir_ / "a.csv";
    const auto b = dir_ / "b.csv";
    const auto r = cli({"simulate", "--rows", "1000", "--fraud-rate", "0.01", "--seed", "7", "--out", a.string()});
    EXPECT_EQ(r.code, 0) << r.err;
    cli({"simulate", "--rows", "1000", "--fraud-rate", "0.01", "--seed", "7", "--out", b.string()});
    EXPECT_EQ(slurp(a), slurp(b));
    EXPECT_EQ(dsc::load_csv(a.string()).size(), 1000u);
}

TEST_F(Cli, SimulateRejectsBadRate)
{
    const auto r = cli({"simulate", "--rows", "1000", "--fraud-rate", "0.6", "--out", (dir_ / "bad.csv").string()});
    EXPECT_EQ(r.code, dsc::cli::Usage);
    EXPECT_NE(r.err.find("ConfigInvalid"), std::string::npos);
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(cli({}).code, dsc::cli::Usage);
    EXPECT_EQ(cli({"frobnicate"}).code, dsc::cli::Usage);
    EXPECT_EQ(cli({"eval", "--data", "x"}).code, dsc::cli::Usage);
    EXPECT_EQ(cli({"--help"}).code, dsc::cli::Ok);
}

TEST_F(Cli, IngestBadCsvIsDataError)
{
    const auto bad = dir_ / "bad_input.csv";
    std::ofstream(bad) << "step,type\n1,PAYMENT\n";
    EXPECT_EQ(cli({"ingest", "--csv", bad.string(), "--out", (dir_ / "nope").string()}).code, dsc::cli::DataError);
}

TEST_F(Cli, TrainZeroIterationsWritesArtifacts)
{
    const auto out = dir_ / "run0";
    const auto r = cli({"train", "--data", (dir_ / "data").string(), "--out", out.string(), "--iterations", "0",
                        "--batch-size", "40", "--gp-generations", "1", "--gp-population", "40", "--const-budget", "10"});
    ASSERT_EQ(r.code, 0) << r.err;
    for (const char* f : {"config.json", "runlog.jsonl", "best.expr", "archive.tsv", "policy.ckpt", "timings.tsv"}) {
        EXPECT_TRUE(fs::exists(out / f)) << f;
    }
    EXPECT_EQ(json_lines(slurp(out / "runlog.jsonl")).size(), 1u);
    const auto summary = json::parse(r.out);
    EXPECT_TRUE(summary.contains("best_f1"));
    EXPECT_EQ(slurp(out / "runlog.jsonl").find("second"), std::string::npos);

    const auto cfg = dsc::cli::load_run_config((out / "config.json").string());
    EXPECT_EQ(cfg.train.iterations, 0);
    EXPECT_EQ(cfg.train.batch_size, 40u);
    EXPECT_EQ(cfg.data, (dir_ / "data").string());
}

TEST_F(Cli, TrainMissingDataFails)
{
    const auto r = cli({"train", "--data", (dir_ / "missing").string(), "--out", (dir_ / "runx").string()});
    EXPECT_NE(r.code, 0);
    const auto none = cli({"train", "--out", (dir_ / "runy").string()});
    EXPECT_EQ(none.code, dsc::cli::Usage);
}

TEST_F(Cli, TrainRerunFromSnapshotReproducesLog)
{
    const auto a = dir_ / "runa";
    const auto b = dir_ / "runb";
    const auto r = cli({"train", "--data", (dir_ / "data").string(), "--out", a.string(), "--iterations", "2",
                        "--batch-size", "40", "--gp-generations", "1", "--gp-population", "40", "--const-budget", "10",
                        "--max-length", "12", "--seed", "3"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto again = cli({"train", "--config", (a / "config.json").string(), "--out", b.string()});
    ASSERT_EQ(again.code, 0) << again.err;
    EXPECT_EQ(slurp(a / "runlog.jsonl"), slurp(b / "runlog.jsonl"));
    EXPECT_EQ(slurp(a / "config.json"), slurp(b / "config.json"));
}

TEST_F(Cli, EvalOracleAndSweep)
{
    const auto data = dsc::load_dataset((dir_ / "data").string());
    const auto oracle = dir_ / "oracle.expr";
    std::ofstream(oracle) << "# planted rule\n" << planted_expression(data.spec) << "\n";
    const auto r = cli({"eval", "--expr", oracle.string(), "--data", (dir_ / "data").string(), "--split", "test",
                        "--threshold", "0.6"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto rec = json::parse(r.out);
    EXPECT_GE(rec["f1"].get<double>(), 0.98);

    const auto sweep = cli({"eval", "--expr", oracle.string(), "--data", (dir_ / "data").string(), "--sweep"});
    const auto recs = json_lines(sweep.out);
    ASSERT_EQ(recs.size(), 5u);
    for (std::size_t i = 1; i < recs.size(); ++i) {
        EXPECT_LE(recs[i]["predicted_fraud"].get<long>(), recs[i - 1]["predicted_fraud"].get<long>());
    }

    const auto legit = dir_ / "legit.expr";
    std::ofstream(legit) << "- amount amount\n";
    const auto zero = cli({"eval", "--expr", legit.string(), "--data", (dir_ / "data").string(), "--threshold", "0.7"});
    EXPECT_EQ(json::parse(zero.out)["f1"].get<double>(), 0.0);

    const auto bad = cli({"eval", "--expr", legit.string(), "--data", (dir_ / "data").string(), "--threshold", "1.5"});
    EXPECT_EQ(bad.code, dsc::cli::Usage);
}

TEST_F(Cli, ParetoFront)
{
    const auto archive = dir_ / "archive.tsv";
    std::ofstream(archive) << "complexity\tf1\texpression\n9\t0.76\ta\n13\t0.78\tb\n14\t0.77\tc\n20\t0.5\td\n";
    const auto r = cli({"pareto", "--archive", archive.string(), "--json"});
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = json::parse(r.out);
    ASSERT_EQ(j["front"].size(), 2u);
    EXPECT_EQ(j["front"][0]["complexity"], 9);
    EXPECT_EQ(j["front"][1]["complexity"], 13);
    const auto text = cli({"pareto", "--archive", archive.string()});
    EXPECT_NE(text.out.find("complexity\tf1\texpression"), std::string::npos);
}

TEST_F(Cli, ExplainSampleRule)
{
    const auto r = cli({"explain", "--expr", DSC_FIXTURES "/sample_rule.expr", "--threshold", "0.7", "--features",
                        DSC_FIXTURES "/paysim_features.json"});
    ASSERT_EQ(r.code, 0) << r.err;
    EXPECT_NE(r.out.find("fraud if type = transfer and externalDest = 1 and amount - maxDest7 >= -0.1527"),
              std::string::npos)
        << r.out;
    const auto j = cli({"explain", "--expr", DSC_FIXTURES "/sample_rule.expr", "--threshold", "0.7", "--features",
                        DSC_FIXTURES "/paysim_features.json", "--json"});
    EXPECT_NO_THROW((void)json::parse(j.out));

    const auto unsupported = dir_ / "sin.expr";
    std::ofstream(unsupported) << "+ sin amount externalDest\n";
    const auto bad = cli({"explain", "--expr", unsupported.string(), "--threshold", "0.7", "--features",
                          DSC_FIXTURES "/paysim_features.json"});
    EXPECT_NE(bad.code, 0);
    EXPECT_NE(bad.err.find("NotReducible"), std::string::npos);
}

TEST(RunConfig, JsonRoundTrip)
{
    dsc::cli::RunConfig c;
    c.data = "somewhere";
    c.train.seed = 11;
    c.train.epsilon = 0.1;
    c.train.operators = {"+", "sqrt"};
    c.train.credit = dsc::CreditMode::Gp;
    c.train.gp.generations = 3;
    const auto text = dsc::cli::run_config_to_json(c);
    const auto back = dsc::cli::run_config_from_json(text);
    EXPECT_EQ(dsc::cli::run_config_to_json(back), text);
    EXPECT_EQ(back.train.operators, c.train.operators);
    EXPECT_EQ(back.train.credit, dsc::CreditMode::Gp);
}

TEST(RunConfig, DeskFixtureLoads)
{
    const auto c = dsc::cli::load_run_config(DSC_FIXTURES "/desk.json");
    EXPECT_EQ(c.train.threshold, 0.8);
    EXPECT_EQ(c.train.iterations, 50);
    EXPECT_NO_THROW(c.train.validate());
}
