#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dsc/classify.hpp"
#include "dsc/feature_spec.hpp"
#include "dsc/matrix.hpp"
#include "dsc/random.hpp"

namespace dsc {

enum class TxType : std::uint8_t { CashIn, CashOut, Debit, Payment, Transfer };

/// PaySim spelling ("CASH_OUT") and feature spelling ("cash-out").
std::string_view paysim_name(TxType type) noexcept;
std::string_view feature_label(TxType type) noexcept;
inline constexpr std::array<TxType, 5> all_tx_types{TxType::CashIn, TxType::CashOut, TxType::Debit, TxType::Payment,
                                                    TxType::Transfer};

struct RawTransaction {
    int step = 0;
    TxType type = TxType::Payment;
    double amount = 0.0;
    std::string name_orig;
    double oldbalance_org = 0.0;
    double newbalance_orig = 0.0;
    std::string name_dest;
    double oldbalance_dest = 0.0;
    double newbalance_dest = 0.0;
    int is_fraud = 0;
    int is_flagged_fraud = 0;
};

/// PaySim columns, in the order written by write_csv.
inline constexpr std::array<const char*, 11> paysim_columns{
    "step",           "type",           "amount",  "nameOrig",      "oldbalanceOrg", "newbalanceOrig",
    "nameDest",       "oldbalanceDest", "newbalanceDest", "isFraud", "isFlaggedFraud"};

/// Header order may differ from paysim_columns. Throws SchemaMismatch on
/// missing columns, ParseError (with the 1-based line number) on bad rows.
std::vector<RawTransaction> load_csv(const std::string& path);
std::vector<RawTransaction> read_csv(std::istream& in, const std::string& source = "<stream>");
void write_csv(const std::vector<RawTransaction>& rows, std::ostream& out);
void write_csv(const std::vector<RawTransaction>& rows, const std::string& path);

struct FeatureTable {
    FeatureMatrix x;
    Labels y;
};

struct EngineerConfig {
    bool noise = true;          // Gaussian noise on whole-history aggregates
    double noise_scale = 0.01;  // sigma = noise_scale * (q - min)
    double noise_quantile = 0.75;
};

/// Engineered feature columns, in output order.
std::vector<std::string> engineered_feature_names();

/// External-account flags and balance imputation, whole-history mean/max per
/// customer and recipient (excluding the current row, plus noise), recipient
/// windows of the last 3 / 7 amounts (including the current row), account
/// transaction counts and a one-hot encoding of `type`. Rows are processed
/// in stable step order.
FeatureTable engineer_features(std::vector<RawTransaction> rows, Rng& rng, const EngineerConfig& config = {});

/// Metadata for engineered_feature_names(): Boolean flags, the `type` one-hot
/// group, and the facts amount - maxDest3 <= 0, amount - maxDest7 <= 0.
FeatureSpec paysim_feature_spec();

enum class Split : std::uint8_t { Train, Validation, Test };

struct Dataset {
    FeatureMatrix train, validation, test;
    Labels y_train, y_validation, y_test;
    FeatureSpec spec; // spec.scaler holds the fitted scaler
    std::vector<std::string> warnings;

    [[nodiscard]] const FeatureMatrix& x(Split s) const noexcept;
    [[nodiscard]] const Labels& y(Split s) const noexcept;
};

struct SplitFractions {
    double train = 0.75;
    double validation = 0.10;
    double test = 0.15;
};

/// Random row split, then standard scaling of the non-Boolean columns with
/// statistics from the training rows only. Zero-variance columns are left
/// unscaled with a warning.
Dataset split_scale(const FeatureTable& table, const FeatureSpec& spec, Rng& rng, const SplitFractions& fractions = {});

/// All positive rows plus an equal-size uniform sample of negative rows, in
/// original order. Throws SingleClass.
FeatureTable undersample(const FeatureMatrix& x, const Labels& y, Rng& rng);

struct SyntheticConfig {
    std::size_t rows = 50000;
    double fraud_rate = 0.01;
    std::uint64_t seed = 0;
    double label_noise = 0.005;
    int steps = 744; // one month of hourly steps
};

/// PaySim-shaped transactions whose labels follow a planted rule:
/// type == TRANSFER, recipient external (zero balances) and amount at least
/// the largest of the recipient's last 7 amounts (current included), with
/// label noise. Deterministic per seed. Throws ConfigInvalid.
std::vector<RawTransaction> generate_synthetic(const SyntheticConfig& config);

/// The planted rule evaluated directly on raw rows (in file order, which
/// must be step order), before label noise.
Labels planted_rule_labels(const std::vector<RawTransaction>& rows);

/// Engineered dataset on disk: dataset.csv (split,isFraud,features...) and
/// features.json (FeatureSpec with scaler).
void save_dataset(const Dataset& data, const std::string& directory);
Dataset load_dataset(const std::string& directory);

} // namespace dsc
