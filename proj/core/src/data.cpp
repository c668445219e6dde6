#include "dsc/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "dsc/error.hpp"

namespace dsc {

using json = nlohmann::json;

std::string_view paysim_name(TxType type) noexcept
{
    switch (type) {
    case TxType::CashIn: return "CASH_IN";
    case TxType::CashOut: return "CASH_OUT";
    case TxType::Debit: return "DEBIT";
    case TxType::Payment: return "PAYMENT";
    case TxType::Transfer: return "TRANSFER";
    }
    return "PAYMENT";
}

std::string_view feature_label(TxType type) noexcept
{
    switch (type) {
    case TxType::CashIn: return "cash-in";
    case TxType::CashOut: return "cash-out";
    case TxType::Debit: return "debit";
    case TxType::Payment: return "payment";
    case TxType::Transfer: return "transfer";
    }
    return "payment";
}

namespace {

std::optional<TxType> parse_type(std::string_view text)
{
    for (auto t : all_tx_types) {
        if (text == paysim_name(t) || text == feature_label(t)) {
            return t;
        }
    }
    return std::nullopt;
}

std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

template <typename T>
T parse_number(std::string_view field, const std::string& source, std::size_t line, std::string_view column)
{
    T value{};
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw Error(ErrorKind::ParseError,
                    fmt::format("{}:{}: column '{}' has non-numeric value '{}'", source, line, column, field));
    }
    return value;
}

} // namespace

std::vector<RawTransaction> read_csv(std::istream& in, const std::string& source)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::SchemaMismatch, fmt::format("{}: empty file", source));
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    const auto header = split_fields(line);
    std::array<std::size_t, paysim_columns.size()> index{};
    for (std::size_t c = 0; c < paysim_columns.size(); ++c) {
        const auto it = std::find(header.begin(), header.end(), std::string_view(paysim_columns[c]));
        if (it == header.end()) {
            throw Error(ErrorKind::SchemaMismatch, fmt::format("{}: missing column '{}'", source, paysim_columns[c]));
        }
        index[c] = static_cast<std::size_t>(it - header.begin());
    }

    std::vector<RawTransaction> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: expected {} fields, found {}", source, line_no,
                                                           header.size(), fields.size()));
        }
        auto field = [&](std::size_t c) { return fields[index[c]]; };
        RawTransaction r;
        r.step = parse_number<int>(field(0), source, line_no, "step");
        auto type = parse_type(field(1));
        if (!type) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: unknown type '{}'", source, line_no, field(1)));
        }
        r.type = *type;
        r.amount = parse_number<double>(field(2), source, line_no, "amount");
        r.name_orig = std::string(field(3));
        r.oldbalance_org = parse_number<double>(field(4), source, line_no, "oldbalanceOrg");
        r.newbalance_orig = parse_number<double>(field(5), source, line_no, "newbalanceOrig");
        r.name_dest = std::string(field(6));
        r.oldbalance_dest = parse_number<double>(field(7), source, line_no, "oldbalanceDest");
        r.newbalance_dest = parse_number<double>(field(8), source, line_no, "newbalanceDest");
        r.is_fraud = parse_number<int>(field(9), source, line_no, "isFraud");
        r.is_flagged_fraud = parse_number<int>(field(10), source, line_no, "isFlaggedFraud");

        if (r.amount < 0.0) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: negative amount {}", source, line_no, r.amount));
        }
        if (r.oldbalance_org < 0.0 || r.newbalance_orig < 0.0 || r.oldbalance_dest < 0.0 || r.newbalance_dest < 0.0) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: negative balance", source, line_no));
        }
        if ((r.is_fraud != 0 && r.is_fraud != 1) || (r.is_flagged_fraud != 0 && r.is_flagged_fraud != 1)) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: flags must be 0 or 1", source, line_no));
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

std::vector<RawTransaction> load_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
    }
    return read_csv(in, path);
}

void write_csv(const std::vector<RawTransaction>& rows, std::ostream& out)
{
    for (std::size_t c = 0; c < paysim_columns.size(); ++c) {
        out << (c ? "," : "") << paysim_columns[c];
    }
    out << '\n';
    for (const auto& r : rows) {
        out << fmt::format("{},{},{:.2f},{},{:.2f},{:.2f},{},{:.2f},{:.2f},{},{}\n", r.step, paysim_name(r.type),
                           r.amount, r.name_orig, r.oldbalance_org, r.newbalance_orig, r.name_dest, r.oldbalance_dest,
                           r.newbalance_dest, r.is_fraud, r.is_flagged_fraud);
    }
}

void write_csv(const std::vector<RawTransaction>& rows, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path));
    }
    write_csv(rows, out);
}

std::vector<std::string> engineered_feature_names()
{
    std::vector<std::string> names{"step",         "amount",       "oldbalanceOrg", "newbalanceOrig", "oldbalanceDest",
                                   "newbalanceDest", "externalOrig", "externalDest", "meanOrig",       "meanDest",
                                   "maxOrig",      "maxDest",      "meanDest3",     "meanDest7",      "maxDest3",
                                   "maxDest7",     "numTransOrig", "numTransDest"};
    for (auto t : all_tx_types) {
        names.push_back("type_" + std::string(feature_label(t)));
    }
    return names;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q)
{
    if (sorted.empty()) {
        return 0.0;
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct AccountStats {
    std::vector<double> amounts;
    double sum = 0.0;
    double max1 = -std::numeric_limits<double>::infinity(); // largest
    double max2 = -std::numeric_limits<double>::infinity(); // second largest (with multiplicity)
    double sigma = 0.0;

    void add(double a)
    {
        amounts.push_back(a);
        sum += a;
        if (a >= max1) {
            max2 = max1;
            max1 = a;
        } else if (a > max2) {
            max2 = a;
        }
    }

    void finish(const EngineerConfig& config)
    {
        auto sorted = amounts;
        std::sort(sorted.begin(), sorted.end());
        const double q = quantile_sorted(sorted, config.noise_quantile);
        sigma = config.noise ? config.noise_scale * (q - sorted.front()) : 0.0;
    }

    // aggregates over the account's other rows; 0 when there are none
    [[nodiscard]] double mean_excluding(double a) const
    {
        return amounts.size() > 1 ? (sum - a) / static_cast<double>(amounts.size() - 1) : 0.0;
    }
    [[nodiscard]] double max_excluding(double a) const
    {
        if (amounts.size() <= 1) {
            return 0.0;
        }
        return a == max1 ? max2 : max1;
    }
};

} // namespace

FeatureTable engineer_features(std::vector<RawTransaction> rows, Rng& rng, const EngineerConfig& config)
{
    std::stable_sort(rows.begin(), rows.end(),
                     [](const RawTransaction& a, const RawTransaction& b) { return a.step < b.step; });

    std::unordered_map<std::string, AccountStats> orig;
    std::unordered_map<std::string, AccountStats> dest;
    for (const auto& r : rows) {
        orig[r.name_orig].add(r.amount);
        dest[r.name_dest].add(r.amount);
    }
    for (auto& [_, s] : orig) {
        s.finish(config);
    }
    for (auto& [_, s] : dest) {
        s.finish(config);
    }

    const auto names = engineered_feature_names();
    FeatureTable table;
    table.x.names = names;
    table.x.columns.assign(names.size(), std::vector<double>(rows.size()));
    table.y.resize(rows.size());
    auto col = [&](std::size_t c) -> std::vector<double>& { return table.x.columns[c]; };

    std::unordered_map<std::string, std::deque<double>> windows;
    std::normal_distribution<double> gauss(0.0, 1.0);

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const bool ext_orig = r.oldbalance_org == 0.0 && r.newbalance_orig == 0.0;
        const bool ext_dest = r.oldbalance_dest == 0.0 && r.newbalance_dest == 0.0;
        double old_org = r.oldbalance_org;
        double new_dest = r.newbalance_dest;
        if (ext_orig) {
            old_org = r.newbalance_orig + r.amount;
        }
        if (ext_dest) {
            new_dest = r.oldbalance_dest + r.amount;
        }

        const auto& so = orig.at(r.name_orig);
        const auto& sd = dest.at(r.name_dest);
        // noise draws happen in a fixed order per row
        const double n1 = gauss(rng) * so.sigma;
        const double n2 = gauss(rng) * sd.sigma;
        const double n3 = gauss(rng) * so.sigma;
        const double n4 = gauss(rng) * sd.sigma;

        auto& window = windows[r.name_dest];
        window.push_back(r.amount);
        if (window.size() > 7) {
            window.pop_front();
        }
        double sum3 = 0.0, sum7 = 0.0, max3 = 0.0, max7 = 0.0;
        const std::size_t w = window.size();
        for (std::size_t k = 0; k < w; ++k) {
            const double a = window[w - 1 - k];
            if (k < 3) {
                sum3 += a;
                max3 = k == 0 ? a : std::max(max3, a);
            }
            sum7 += a;
            max7 = k == 0 ? a : std::max(max7, a);
        }

        std::size_t c = 0;
        col(c++)[i] = r.step;
        col(c++)[i] = r.amount;
        col(c++)[i] = old_org;
        col(c++)[i] = r.newbalance_orig;
        col(c++)[i] = r.oldbalance_dest;
        col(c++)[i] = new_dest;
        col(c++)[i] = ext_orig ? 1.0 : 0.0;
        col(c++)[i] = ext_dest ? 1.0 : 0.0;
        col(c++)[i] = so.mean_excluding(r.amount) + n1;
        col(c++)[i] = sd.mean_excluding(r.amount) + n2;
        col(c++)[i] = so.max_excluding(r.amount) + n3;
        col(c++)[i] = sd.max_excluding(r.amount) + n4;
        col(c++)[i] = sum3 / static_cast<double>(std::min<std::size_t>(w, 3));
        col(c++)[i] = sum7 / static_cast<double>(w);
        col(c++)[i] = max3;
        col(c++)[i] = max7;
        col(c++)[i] = static_cast<double>(so.amounts.size());
        col(c++)[i] = static_cast<double>(sd.amounts.size());
        for (auto t : all_tx_types) {
            col(c++)[i] = r.type == t ? 1.0 : 0.0;
        }
        table.y[i] = static_cast<std::uint8_t>(r.is_fraud);
    }
    return table;
}

FeatureSpec paysim_feature_spec()
{
    FeatureSpec spec;
    for (const auto& name : engineered_feature_names()) {
        FeatureInfo info;
        info.name = name;
        if (name == "externalOrig" || name == "externalDest") {
            info.boolean = true;
        } else if (name.starts_with("type_")) {
            info.boolean = true;
            info.group = "type";
            info.label = name.substr(5);
        }
        spec.features.push_back(std::move(info));
    }
    spec.facts.push_back({{{"amount", 1.0}, {"maxDest7", -1.0}}, 0.0, "maxDest7 includes the current amount"});
    spec.facts.push_back({{{"amount", 1.0}, {"maxDest3", -1.0}}, 0.0, "maxDest3 includes the current amount"});
    return spec;
}

const FeatureMatrix& Dataset::x(Split s) const noexcept
{
    switch (s) {
    case Split::Train: return train;
    case Split::Validation: return validation;
    case Split::Test: return test;
    }
    return train;
}

const Labels& Dataset::y(Split s) const noexcept
{
    switch (s) {
    case Split::Train: return y_train;
    case Split::Validation: return y_validation;
    case Split::Test: return y_test;
    }
    return y_train;
}

namespace {

Labels take_labels(const Labels& y, const std::vector<std::size_t>& idx)
{
    Labels out;
    out.reserve(idx.size());
    for (auto i : idx) {
        out.push_back(y[i]);
    }
    return out;
}

void apply_scaler(FeatureMatrix& x, const Scaler& s)
{
    for (std::size_t c = 0; c < x.cols(); ++c) {
        if (!s.scaled[c]) {
            continue;
        }
        for (auto& v : x.columns[c]) {
            v = (v - s.mean[c]) / s.stddev[c];
        }
    }
}

} // namespace

Dataset split_scale(const FeatureTable& table, const FeatureSpec& spec, Rng& rng, const SplitFractions& fractions)
{
    const double total = fractions.train + fractions.validation + fractions.test;
    if (std::abs(total - 1.0) > 1e-9 || fractions.train <= 0.0 || fractions.validation < 0.0 || fractions.test < 0.0) {
        throw Error(ErrorKind::ConfigInvalid, "split fractions must be non-negative and sum to 1");
    }
    const std::size_t n = table.x.rows();
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::shuffle(perm.begin(), perm.end(), rng);

    const auto n_train = static_cast<std::size_t>(std::llround(fractions.train * static_cast<double>(n)));
    const auto n_val = std::min(n - n_train, static_cast<std::size_t>(std::llround(fractions.validation * static_cast<double>(n))));
    std::vector<std::size_t> i_train(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    std::vector<std::size_t> i_val(perm.begin() + static_cast<std::ptrdiff_t>(n_train),
                                   perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
    std::vector<std::size_t> i_test(perm.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), perm.end());
    // keep each split in original (time) order
    std::sort(i_train.begin(), i_train.end());
    std::sort(i_val.begin(), i_val.end());
    std::sort(i_test.begin(), i_test.end());

    Dataset data;
    data.train = table.x.take(i_train);
    data.validation = table.x.take(i_val);
    data.test = table.x.take(i_test);
    data.y_train = take_labels(table.y, i_train);
    data.y_validation = take_labels(table.y, i_val);
    data.y_test = take_labels(table.y, i_test);

    Scaler scaler;
    scaler.columns = table.x.names;
    scaler.mean.assign(table.x.cols(), 0.0);
    scaler.stddev.assign(table.x.cols(), 1.0);
    scaler.scaled.assign(table.x.cols(), false);
    for (std::size_t c = 0; c < table.x.cols(); ++c) {
        const auto* info = spec.find(table.x.names[c]);
        if (info != nullptr && info->boolean) {
            continue;
        }
        const auto& v = data.train.columns[c];
        if (v.empty()) {
            continue;
        }
        const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double a : v) {
            ss += (a - mean) * (a - mean);
        }
        const double sd = std::sqrt(ss / static_cast<double>(v.size()));
        if (!(sd > 0.0) || !std::isfinite(sd)) {
            data.warnings.push_back(fmt::format("column '{}' has zero variance on the training split; left unscaled",
                                                table.x.names[c]));
            continue;
        }
        scaler.mean[c] = mean;
        scaler.stddev[c] = sd;
        scaler.scaled[c] = true;
    }
    apply_scaler(data.train, scaler);
    apply_scaler(data.validation, scaler);
    apply_scaler(data.test, scaler);

    data.spec = spec;
    data.spec.scaler = std::move(scaler);
    return data;
}

FeatureTable undersample(const FeatureMatrix& x, const Labels& y, Rng& rng)
{
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) {
        (y[i] ? pos : neg).push_back(i);
    }
    if (pos.empty() || neg.empty()) {
        throw Error(ErrorKind::SingleClass, "undersampling needs both classes");
    }
    std::vector<std::size_t> keep = pos;
    if (neg.size() > pos.size()) {
        std::shuffle(neg.begin(), neg.end(), rng);
        neg.resize(pos.size());
    }
    keep.insert(keep.end(), neg.begin(), neg.end());
    std::sort(keep.begin(), keep.end());
    return {x.take(keep), take_labels(y, keep)};
}

// ---------------------------------------------------------------- FeatureSpec

const FeatureInfo* FeatureSpec::find(const std::string& name) const noexcept
{
    for (const auto& f : features) {
        if (f.name == name) {
            return &f;
        }
    }
    return nullptr;
}

std::vector<const FeatureInfo*> FeatureSpec::group_members(const std::string& group) const
{
    std::vector<const FeatureInfo*> out;
    for (const auto& f : features) {
        if (!group.empty() && f.group == group) {
            out.push_back(&f);
        }
    }
    return out;
}

std::vector<SignFact> FeatureSpec::facts_in_model_space() const
{
    if (!scaler) {
        return facts;
    }
    std::vector<SignFact> out;
    for (const auto& fact : facts) {
        // x = std * s + mean for scaled columns
        SignFact t;
        t.bound = fact.bound;
        t.note = fact.note;
        for (const auto& [name, w] : fact.terms) {
            const auto it = std::find(scaler->columns.begin(), scaler->columns.end(), name);
            if (it == scaler->columns.end()) {
                t.terms.emplace_back(name, w);
                continue;
            }
            const auto c = static_cast<std::size_t>(it - scaler->columns.begin());
            if (scaler->scaled[c]) {
                t.terms.emplace_back(name, w * scaler->stddev[c]);
                t.bound -= w * scaler->mean[c];
            } else {
                t.terms.emplace_back(name, w);
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::string feature_spec_to_json(const FeatureSpec& spec)
{
    json j;
    j["features"] = json::array();
    for (const auto& f : spec.features) {
        json jf{{"name", f.name}, {"boolean", f.boolean}};
        if (!f.group.empty()) {
            jf["group"] = f.group;
            jf["label"] = f.label;
        }
        j["features"].push_back(jf);
    }
    j["sign_facts"] = json::array();
    for (const auto& fact : spec.facts) {
        json terms = json::object();
        for (const auto& [name, w] : fact.terms) {
            terms[name] = w;
        }
        j["sign_facts"].push_back({{"terms", terms}, {"bound", fact.bound}, {"note", fact.note}});
    }
    if (spec.scaler) {
        const auto& s = *spec.scaler;
        j["scaler"] = {{"columns", s.columns}, {"mean", s.mean}, {"std", s.stddev}, {"scaled", s.scaled}};
    }
    return j.dump(2);
}

FeatureSpec feature_spec_from_json(const std::string& text)
{
    FeatureSpec spec;
    try {
        const auto j = json::parse(text);
        for (const auto& jf : j.at("features")) {
            FeatureInfo f;
            f.name = jf.at("name").get<std::string>();
            f.boolean = jf.value("boolean", false);
            f.group = jf.value("group", std::string{});
            f.label = jf.value("label", f.name);
            spec.features.push_back(std::move(f));
        }
        if (j.contains("sign_facts")) {
            for (const auto& jfact : j.at("sign_facts")) {
                SignFact fact;
                for (const auto& [name, w] : jfact.at("terms").items()) {
                    fact.terms.emplace_back(name, w.get<double>());
                }
                fact.bound = jfact.value("bound", 0.0);
                fact.note = jfact.value("note", std::string{});
                spec.facts.push_back(std::move(fact));
            }
        }
        if (j.contains("scaler")) {
            const auto& js = j.at("scaler");
            Scaler s;
            s.columns = js.at("columns").get<std::vector<std::string>>();
            s.mean = js.at("mean").get<std::vector<double>>();
            s.stddev = js.at("std").get<std::vector<double>>();
            s.scaled = js.at("scaled").get<std::vector<bool>>();
            if (s.mean.size() != s.columns.size() || s.stddev.size() != s.columns.size() ||
                s.scaled.size() != s.columns.size()) {
                throw Error(ErrorKind::SchemaMismatch, "scaler arrays differ in length");
            }
            spec.scaler = std::move(s);
        }
    } catch (const json::exception& e) {
        throw Error(ErrorKind::SchemaMismatch, fmt::format("feature spec: {}", e.what()));
    }
    return spec;
}

FeatureSpec load_feature_spec(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return feature_spec_from_json(buffer.str());
}

void save_feature_spec(const FeatureSpec& spec, const std::string& path)
{
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path));
    }
    out << feature_spec_to_json(spec) << '\n';
}

// ---------------------------------------------------------------- dataset io

void save_dataset(const Dataset& data, const std::string& directory)
{
    namespace fs = std::filesystem;
    fs::create_directories(directory);
    const auto path = (fs::path(directory) / "dataset.csv").string();
    std::ofstream out(path);
    if (!out) {
        throw Error(ErrorKind::Io, fmt::format("cannot write '{}'", path));
    }
    out << "split,isFraud";
    for (const auto& name : data.train.names) {
        out << ',' << name;
    }
    out << '\n';
    const std::array<std::pair<Split, const char*>, 3> splits{
        {{Split::Train, "train"}, {Split::Validation, "validation"}, {Split::Test, "test"}}};
    for (const auto& [split, label] : splits) {
        const auto& x = data.x(split);
        const auto& y = data.y(split);
        for (std::size_t r = 0; r < x.rows(); ++r) {
            out << label << ',' << static_cast<int>(y[r]);
            for (std::size_t c = 0; c < x.cols(); ++c) {
                out << ',' << fmt::format("{}", x.columns[c][r]);
            }
            out << '\n';
        }
    }
    save_feature_spec(data.spec, (fs::path(directory) / "features.json").string());
}

Dataset load_dataset(const std::string& directory)
{
    namespace fs = std::filesystem;
    const auto path = (fs::path(directory) / "dataset.csv").string();
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Io, fmt::format("cannot open '{}'", path));
    }
    Dataset data;
    data.spec = load_feature_spec((fs::path(directory) / "features.json").string());

    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorKind::SchemaMismatch, fmt::format("{}: empty file", path));
    }
    auto header = split_fields(line);
    if (header.size() < 3 || header[0] != "split" || header[1] != "isFraud") {
        throw Error(ErrorKind::SchemaMismatch, fmt::format("{}: header must start with split,isFraud", path));
    }
    std::vector<std::string> names(header.begin() + 2, header.end());
    for (auto* x : {&data.train, &data.validation, &data.test}) {
        x->names = names;
        x->columns.assign(names.size(), {});
    }
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: wrong field count", path, line_no));
        }
        Split split{};
        if (fields[0] == "train") {
            split = Split::Train;
        } else if (fields[0] == "validation") {
            split = Split::Validation;
        } else if (fields[0] == "test") {
            split = Split::Test;
        } else {
            throw Error(ErrorKind::ParseError, fmt::format("{}:{}: unknown split '{}'", path, line_no, fields[0]));
        }
        auto& x = const_cast<FeatureMatrix&>(data.x(split));
        auto& y = const_cast<Labels&>(data.y(split));
        y.push_back(static_cast<std::uint8_t>(parse_number<int>(fields[1], path, line_no, "isFraud")));
        for (std::size_t c = 0; c < names.size(); ++c) {
            x.columns[c].push_back(parse_number<double>(fields[c + 2], path, line_no, names[c]));
        }
    }
    return data;
}

} // namespace dsc
