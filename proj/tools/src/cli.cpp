#include "dsc_cli/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dsc/classify.hpp"
#include "dsc/data.hpp"
#include "dsc/error.hpp"
#include "dsc/pareto.hpp"
#include "dsc/rules.hpp"

namespace dsc::cli {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

std::string reward_name(RewardKind k)
{
    return k == RewardKind::F1 ? "f1" : "ce";
}

RewardKind parse_reward(const std::string& s)
{
    if (s == "f1") return RewardKind::F1;
    if (s == "ce") return RewardKind::CrossEntropy;
    throw Error(ErrorKind::ConfigInvalid, fmt::format("reward must be 'f1' or 'ce', got '{}'", s));
}

std::string scope_name(ConstFitScope s)
{
    switch (s) {
    case ConstFitScope::None: return "none";
    case ConstFitScope::All: return "all";
    case ConstFitScope::TopFraction: return "top";
    }
    return "top";
}

ConstFitScope parse_scope(const std::string& s)
{
    if (s == "none") return ConstFitScope::None;
    if (s == "all") return ConstFitScope::All;
    if (s == "top") return ConstFitScope::TopFraction;
    throw Error(ErrorKind::ConfigInvalid, fmt::format("const_fit.scope must be none, all or top, got '{}'", s));
}

CreditMode parse_credit(const std::string& s)
{
    if (s == "emitted") return CreditMode::Emitted;
    if (s == "gp") return CreditMode::Gp;
    throw Error(ErrorKind::ConfigInvalid, fmt::format("credit must be 'emitted' or 'gp', got '{}'", s));
}

TrigScope parse_trig(const std::string& s)
{
    if (s == "descendant") return TrigScope::Descendant;
    if (s == "child") return TrigScope::Child;
    throw Error(ErrorKind::ConfigInvalid, fmt::format("trig_scope must be 'descendant' or 'child', got '{}'", s));
}

template <typename T>
void read(const json& j, const char* key, T& target)
{
    if (j.contains(key)) {
        target = j.at(key).get<T>();
    }
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path.string()));
    }
    out << text;
}

/// First non-empty, non-comment line of an expression file.
std::string read_expression_line(const std::string& path)
{
    std::istringstream in(slurp(path));
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty() && line.front() != '#') {
            return line;
        }
    }
    throw Error(ErrorKind::ParseError, fmt::format("'{}' holds no expression", path));
}

json metrics_json(const Metrics& m)
{
    return {{"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
}

} // namespace

std::string run_config_to_json(const RunConfig& config)
{
    const auto& t = config.train;
    json j;
    j["data"] = config.data;
    j["seed"] = t.seed;
    j["iterations"] = t.iterations;
    j["batch_size"] = t.batch_size;
    j["epsilon"] = t.epsilon;
    j["threshold"] = t.threshold;
    j["reward"] = reward_name(t.reward);
    j["operators"] = t.operators;
    j["constants"] = t.constants;
    j["min_length"] = t.grammar.min_length;
    j["max_length"] = t.grammar.max_length;
    j["trig_scope"] = t.grammar.trig_scope == TrigScope::Descendant ? "descendant" : "child";
    j["hidden_size"] = t.hidden_size;
    j["learning_rate"] = t.adam.learning_rate;
    j["clip_norm"] = t.adam.clip_norm;
    j["credit"] = t.credit == CreditMode::Emitted ? "emitted" : "gp";
    j["undersample"] = t.undersample;
    j["train_subsample"] = t.train_subsample;
    j["const_fit"] = {{"scope", scope_name(t.const_fit)},
                      {"fraction", t.const_fit_fraction},
                      {"budget", t.const_config.budget},
                      {"spread", t.const_config.initial_spread},
                      {"tolerance", t.const_config.tolerance}};
    j["gp"] = {{"generations", t.gp.generations},
               {"population_size", t.gp.population_size},
               {"crossover_prob", t.gp.crossover_prob},
               {"mutation_prob", t.gp.mutation_prob},
               {"tournament_size", t.gp.tournament_size},
               {"max_depth", t.gp.max_depth},
               {"max_attempts", t.gp.max_attempts},
               {"refit_constants", t.gp.refit_constants},
               {"refit_fraction", t.gp.refit_fraction}};
    return j.dump(2) + "\n";
}

RunConfig run_config_from_json(const std::string& text, RunConfig base)
{
    auto& t = base.train;
    try {
        const auto j = json::parse(text);
        read(j, "data", base.data);
        read(j, "seed", t.seed);
        read(j, "iterations", t.iterations);
        read(j, "batch_size", t.batch_size);
        read(j, "epsilon", t.epsilon);
        read(j, "threshold", t.threshold);
        if (j.contains("reward")) t.reward = parse_reward(j.at("reward").get<std::string>());
        read(j, "operators", t.operators);
        read(j, "constants", t.constants);
        read(j, "min_length", t.grammar.min_length);
        read(j, "max_length", t.grammar.max_length);
        if (j.contains("trig_scope")) t.grammar.trig_scope = parse_trig(j.at("trig_scope").get<std::string>());
        read(j, "hidden_size", t.hidden_size);
        read(j, "learning_rate", t.adam.learning_rate);
        read(j, "clip_norm", t.adam.clip_norm);
        if (j.contains("credit")) t.credit = parse_credit(j.at("credit").get<std::string>());
        read(j, "undersample", t.undersample);
        read(j, "train_subsample", t.train_subsample);
        if (j.contains("const_fit")) {
            const auto& c = j.at("const_fit");
            if (c.contains("scope")) t.const_fit = parse_scope(c.at("scope").get<std::string>());
            read(c, "fraction", t.const_fit_fraction);
            read(c, "budget", t.const_config.budget);
            read(c, "spread", t.const_config.initial_spread);
            read(c, "tolerance", t.const_config.tolerance);
        }
        if (j.contains("gp")) {
            const auto& g = j.at("gp");
            read(g, "generations", t.gp.generations);
            read(g, "population_size", t.gp.population_size);
            read(g, "crossover_prob", t.gp.crossover_prob);
            read(g, "mutation_prob", t.gp.mutation_prob);
            read(g, "tournament_size", t.gp.tournament_size);
            read(g, "max_depth", t.gp.max_depth);
            read(g, "max_attempts", t.gp.max_attempts);
            read(g, "refit_constants", t.gp.refit_constants);
            read(g, "refit_fraction", t.gp.refit_fraction);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::ConfigInvalid, fmt::format("config: {}", e.what()));
    }
    return base;
}

RunConfig load_run_config(const std::string& path, RunConfig base)
{
    return run_config_from_json(slurp(path), std::move(base));
}

int exit_code_for(const std::exception& e)
{
    const auto* err = dynamic_cast<const Error*>(&e);
    if (err == nullptr) {
        return RuntimeError;
    }
    switch (err->kind()) {
    case ErrorKind::ConfigInvalid:
    case ErrorKind::OutOfRange: return Usage;
    case ErrorKind::SchemaMismatch:
    case ErrorKind::ParseError:
    case ErrorKind::SingleClass:
    case ErrorKind::DataInvalid:
    case ErrorKind::EmptyDataset:
    case ErrorKind::EmptyArchive:
    case ErrorKind::LengthMismatch:
    case ErrorKind::UnknownToken:
    case ErrorKind::Incomplete:
    case ErrorKind::Overfull:
    case ErrorKind::FeatureIndexOutOfRange:
    case ErrorKind::Io: return DataError;
    default: return RuntimeError;
    }
}

namespace {

struct TrainFlags {
    std::string config;
    std::string data;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<int> iterations;
    std::optional<std::size_t> batch_size;
    std::optional<double> epsilon;
    std::optional<double> threshold;
    std::optional<std::string> reward;
    std::optional<int> gp_generations;
    std::optional<int> gp_population;
    std::optional<int> const_budget;
    std::optional<double> learning_rate;
    std::optional<std::string> credit;
    std::optional<bool> undersample;
    std::optional<int> max_length;
};

int cmd_simulate(const SyntheticConfig& config, const std::string& path, std::ostream& out)
{
    const auto rows = generate_synthetic(config);
    write_csv(rows, path);
    const auto fraud = std::count_if(rows.begin(), rows.end(), [](const RawTransaction& r) { return r.is_fraud; });
    out << fmt::format("wrote {} rows ({} fraud) to {}\n", rows.size(), fraud, path);
    return Ok;
}

int cmd_ingest(const std::string& csv, const std::string& directory, std::uint64_t seed, bool noise,
               std::ostream& out, std::ostream& err)
{
    auto rows = load_csv(csv);
    Rng rng(derive_seed(seed, 7));
    EngineerConfig ec;
    ec.noise = noise;
    const auto table = engineer_features(std::move(rows), rng, ec);
    const auto data = split_scale(table, paysim_feature_spec(), rng);
    for (const auto& w : data.warnings) {
        err << "warning: " << w << '\n';
    }
    save_dataset(data, directory);
    out << fmt::format("train {} / validation {} / test {} rows, {} features -> {}\n", data.train.rows(),
                       data.validation.rows(), data.test.rows(), data.train.cols(), directory);
    return Ok;
}

int cmd_train(const TrainFlags& flags, std::ostream& out)
{
    RunConfig config;
    config.train.iterations = 50;
    if (!flags.config.empty()) {
        config = load_run_config(flags.config, config);
    }
    auto& t = config.train;
    if (!flags.data.empty()) config.data = flags.data;
    if (flags.seed) t.seed = *flags.seed;
    if (flags.iterations) t.iterations = *flags.iterations;
    if (flags.batch_size) t.batch_size = *flags.batch_size;
    if (flags.epsilon) t.epsilon = *flags.epsilon;
    if (flags.threshold) t.threshold = *flags.threshold;
    if (flags.reward) t.reward = parse_reward(*flags.reward);
    if (flags.gp_generations) t.gp.generations = *flags.gp_generations;
    if (flags.gp_population) t.gp.population_size = *flags.gp_population;
    if (flags.const_budget) t.const_config.budget = *flags.const_budget;
    if (flags.learning_rate) t.adam.learning_rate = *flags.learning_rate;
    if (flags.credit) t.credit = parse_credit(*flags.credit);
    if (flags.undersample) t.undersample = *flags.undersample;
    if (flags.max_length) t.grammar.max_length = *flags.max_length;
    if (config.data.empty()) {
        throw Error(ErrorKind::ConfigInvalid, "no data directory given (--data or \"data\" in the config)");
    }
    auto checked = t;
    checked.gp.grammar = checked.grammar;
    checked.validate();

    const auto data = load_dataset(config.data);
    const fs::path dir(flags.out);
    fs::create_directories(dir);
    write_file(dir / "config.json", run_config_to_json(config));

    std::ofstream log(dir / "runlog.jsonl", std::ios::binary);
    if (!log) {
        throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", (dir / "runlog.jsonl").string()));
    }
    const auto result = train(t, data, [&](const IterationRecord& r) {
        log << to_json_line(r) << '\n';
        log.flush();
    });

    std::string timings = "iteration\tseconds\n";
    for (std::size_t i = 0; i < result.seconds.size(); ++i) {
        timings += fmt::format("{}\t{:.6f}\n", i, result.seconds[i]);
    }
    write_file(dir / "timings.tsv", timings);
    write_file(dir / "best.expr", fmt::format("# {}\n{}\n", render_infix(result.best.tree), serialize(result.best.tree)));
    write_archive(result.archive, (dir / "archive.tsv").string());
    save_checkpoint(result.policy, (dir / "policy.ckpt").string());

    json summary;
    summary["best_expression"] = render_infix(result.best.tree);
    summary["complexity"] = result.best.complexity;
    summary["validation_reward"] = result.best.fitness;
    summary["best_f1"] = result.best_validation_f1;
    summary["best_train_reward"] = result.best_train_reward;
    summary["iterations"] = t.iterations;
    summary["archive_size"] = result.archive.size();
    out << summary.dump() << '\n';
    return Ok;
}

int cmd_eval(const std::string& expr_path, const std::string& data_dir, const std::string& split_name,
             std::optional<double> threshold, bool sweep, std::ostream& out)
{
    const auto data = load_dataset(data_dir);
    Split split = Split::Test;
    if (split_name == "train") {
        split = Split::Train;
    } else if (split_name == "validation") {
        split = Split::Validation;
    } else if (split_name != "test") {
        throw Error(ErrorKind::ConfigInvalid, fmt::format("unknown split '{}'", split_name));
    }
    const auto library = Library::make(data.train.names);
    const auto tree = deserialize(library, read_expression_line(expr_path));
    const auto values = evaluate_batch(tree, data.x(split));

    std::vector<double> thresholds;
    if (sweep) {
        thresholds = {0.5, 0.6, 0.7, 0.8, 0.9};
    } else {
        thresholds = {threshold.value_or(0.5)};
    }
    for (double t : thresholds) {
        if (!(t > 0.0 && t < 1.0)) {
            throw Error(ErrorKind::OutOfRange, fmt::format("threshold must lie in (0, 1), got {}", t));
        }
        const auto predicted = predict_values(values.values, t);
        const auto c = confusion(predicted, data.y(split));
        json rec;
        rec["split"] = split_name;
        rec["threshold"] = t;
        rec["predicted_fraud"] = c.tp + c.fp;
        rec["rows"] = c.total();
        auto m = metrics_json(metrics(c));
        rec.update(m);
        out << rec.dump() << '\n';
    }
    return Ok;
}

int cmd_pareto(const std::string& archive_path, double min_gain, bool as_json, std::ostream& out)
{
    const auto front = pareto_front(read_archive(archive_path));
    const auto knee = elbow(front, min_gain);
    if (as_json) {
        json j;
        j["front"] = json::array();
        for (const auto& p : front) {
            j["front"].push_back({{"complexity", p.complexity}, {"f1", p.f1}, {"expression", p.expression}});
        }
        j["elbow"] = {{"complexity", knee.complexity}, {"f1", knee.f1}, {"expression", knee.expression}};
        out << j.dump() << '\n';
        return Ok;
    }
    out << "complexity\tf1\texpression\n";
    for (const auto& p : front) {
        out << fmt::format("{}\t{:.4f}\t{}{}\n", p.complexity, p.f1, p.expression, p == knee ? "\t<- elbow" : "");
    }
    return Ok;
}

int cmd_explain(const std::string& expr_path, double t, const std::string& spec_path, bool strict, bool as_json,
                std::ostream& out)
{
    const auto spec = load_feature_spec(spec_path);
    std::vector<std::string> names;
    for (const auto& f : spec.features) {
        names.push_back(f.name);
    }
    const auto tree = deserialize(Library::make(names), read_expression_line(expr_path));
    RuleOptions options;
    options.strict = strict;
    const auto rules = extract_rules(tree, t, spec, options);
    out << (as_json ? rules_to_json(rules) + "\n" : render_rules(rules, spec));
    return Ok;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Deep symbolic classification"};
    app.require_subcommand(1);

    SyntheticConfig sim;
    std::string sim_out;
    auto* simulate = app.add_subcommand("simulate", "Write a synthetic PaySim-schema CSV");
    simulate->add_option("--rows", sim.rows, "Row count")->capture_default_str();
    simulate->add_option("--fraud-rate", sim.fraud_rate, "Fraud rate")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Seed")->capture_default_str();
    simulate->add_option("--label-noise", sim.label_noise, "Label noise")->capture_default_str();
    simulate->add_option("--out", sim_out, "Output CSV")->required();

    std::string ingest_csv, ingest_out;
    std::uint64_t ingest_seed = 0;
    bool ingest_no_noise = false;
    auto* ingest = app.add_subcommand("ingest", "Engineer features, split and scale a CSV");
    ingest->add_option("--csv", ingest_csv, "PaySim-schema CSV")->required();
    ingest->add_option("--out", ingest_out, "Dataset directory")->required();
    ingest->add_option("--seed", ingest_seed, "Seed")->capture_default_str();
    ingest->add_flag("--no-noise", ingest_no_noise, "Skip aggregate noise");

    TrainFlags tf;
    auto* trainc = app.add_subcommand("train", "Train and write run artifacts");
    trainc->add_option("--config", tf.config, "JSON run config");
    trainc->add_option("--data", tf.data, "Dataset directory");
    trainc->add_option("--out", tf.out, "Output directory")->required();
    trainc->add_option("--seed", tf.seed);
    trainc->add_option("--iterations", tf.iterations);
    trainc->add_option("--batch-size", tf.batch_size);
    trainc->add_option("--epsilon", tf.epsilon);
    trainc->add_option("--threshold", tf.threshold);
    trainc->add_option("--reward", tf.reward, "f1 or ce");
    trainc->add_option("--gp-generations", tf.gp_generations);
    trainc->add_option("--gp-population", tf.gp_population);
    trainc->add_option("--const-budget", tf.const_budget);
    trainc->add_option("--learning-rate", tf.learning_rate);
    trainc->add_option("--credit", tf.credit, "emitted or gp");
    trainc->add_option("--undersample", tf.undersample, "true or false");
    trainc->add_option("--max-length", tf.max_length);

    std::string eval_expr, eval_data, eval_split = "test";
    std::optional<double> eval_t;
    bool eval_sweep = false;
    auto* evalc = app.add_subcommand("eval", "Metrics of an expression on a split");
    evalc->add_option("--expr", eval_expr, "Expression file")->required();
    evalc->add_option("--data", eval_data, "Dataset directory")->required();
    evalc->add_option("--split", eval_split, "train, validation or test")->capture_default_str();
    evalc->add_option("--threshold", eval_t);
    evalc->add_flag("--sweep", eval_sweep, "Thresholds 0.5, 0.6, ..., 0.9");

    std::string pareto_archive;
    double pareto_gain = 0.005;
    bool pareto_json = false;
    auto* paretoc = app.add_subcommand("pareto", "Pareto front of an archive");
    paretoc->add_option("--archive", pareto_archive, "archive.tsv")->required();
    paretoc->add_option("--min-gain", pareto_gain)->capture_default_str();
    paretoc->add_flag("--json", pareto_json);

    std::string explain_expr, explain_spec;
    double explain_t = 0.5;
    bool explain_strict = false, explain_json = false;
    auto* explain = app.add_subcommand("explain", "Decision rules of a thresholded expression");
    explain->add_option("--expr", explain_expr, "Expression file")->required();
    explain->add_option("--threshold", explain_t)->capture_default_str();
    explain->add_option("--features", explain_spec, "Feature spec JSON")->required();
    explain->add_flag("--strict", explain_strict, "sigma(f) > t instead of >= t");
    explain->add_flag("--json", explain_json);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? Ok : Usage;
    }

    try {
        if (*simulate) return cmd_simulate(sim, sim_out, out);
        if (*ingest) return cmd_ingest(ingest_csv, ingest_out, ingest_seed, !ingest_no_noise, out, err);
        if (*trainc) return cmd_train(tf, out);
        if (*evalc) return cmd_eval(eval_expr, eval_data, eval_split, eval_t, eval_sweep, out);
        if (*paretoc) return cmd_pareto(pareto_archive, pareto_gain, pareto_json, out);
        if (*explain) return cmd_explain(explain_expr, explain_t, explain_spec, explain_strict, explain_json, out);
    } catch (const Error& e) {
        err << "error (" << to_string(e.kind()) << "): " << e.what() << '\n';
        return exit_code_for(e);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return RuntimeError;
    }
    return Usage;
}

} // namespace dsc::cli
