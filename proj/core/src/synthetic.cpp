#include <algorithm>
#include <cmath>
#include <deque>
#include <unordered_map>

#include <fmt/format.h>

#include "dsc/data.hpp"
#include "dsc/error.hpp"

namespace dsc {

namespace {

constexpr std::size_t recent_window = 7;

double cents(double v)
{
    return std::round(v * 100.0) / 100.0;
}

struct Recipient {
    std::string name;
    bool external = false;
    double balance = 0.0;
    std::deque<double> recent; // last window-1 amounts received
};

double recent_max(const Recipient& r)
{
    return r.recent.empty() ? 0.0 : *std::max_element(r.recent.begin(), r.recent.end());
}

void remember(Recipient& r, double amount)
{
    r.recent.push_back(amount);
    if (r.recent.size() > recent_window - 1) {
        r.recent.pop_front();
    }
}

} // namespace

std::vector<RawTransaction> generate_synthetic(const SyntheticConfig& config)
{
    if (config.rows < 100) {
        throw Error(ErrorKind::ConfigInvalid, fmt::format("synthetic rows must be >= 100, got {}", config.rows));
    }
    if (!(config.fraud_rate > 0.0 && config.fraud_rate < 0.5)) {
        throw Error(ErrorKind::ConfigInvalid, fmt::format("fraud rate must lie in (0, 0.5), got {}", config.fraud_rate));
    }
    if (!(config.label_noise >= 0.0 && config.label_noise <= 0.01)) {
        throw Error(ErrorKind::ConfigInvalid, "label noise must lie in [0, 0.01]");
    }
    if (config.steps < 1) {
        throw Error(ErrorKind::ConfigInvalid, "steps must be >= 1");
    }

    Rng rng(derive_seed(config.seed, 0x5157));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
    auto lognormal = [&](double mu, double sigma) {
        std::normal_distribution<double> g(mu, sigma);
        return std::exp(g(rng));
    };

    const std::size_t n_internal = std::max<std::size_t>(10, config.rows / 20);
    const std::size_t n_external = std::max<std::size_t>(10, config.rows / 40);
    const std::size_t n_merchant = std::max<std::size_t>(10, config.rows / 10);
    std::vector<Recipient> internal(n_internal);
    std::vector<Recipient> external(n_external);
    for (std::size_t i = 0; i < n_internal; ++i) {
        internal[i].name = fmt::format("C9{:08d}", i);
        internal[i].balance = cents(lognormal(11.0, 1.0) + 1000.0);
    }
    for (std::size_t i = 0; i < n_external; ++i) {
        external[i].name = fmt::format("C8{:08d}", i);
        external[i].external = true;
    }
    std::vector<std::size_t> external_with_history;
    std::vector<bool> has_history(n_external, false);

    std::vector<std::string> returning; // customers who may transact again
    std::size_t next_customer = 0;

    // type mix: cash-in, cash-out, debit, payment, transfer
    std::discrete_distribution<int> type_mix({0.22, 0.35, 0.01, 0.34, 0.08});
    std::uniform_int_distribution<std::size_t> pick_internal(0, n_internal - 1);
    std::uniform_int_distribution<std::size_t> pick_external(0, n_external - 1);
    std::uniform_int_distribution<std::size_t> pick_merchant(0, n_merchant - 1);

    // most internal recipients are seen once, the rest come from a pool
    Recipient fresh;
    std::size_t next_fresh = 0;
    auto internal_dest = [&]() -> Recipient* {
        if (unit(rng) < 0.3) {
            return &internal[pick_internal(rng)];
        }
        fresh = Recipient{fmt::format("C7{:08d}", next_fresh++), false, cents(lognormal(11.0, 1.0) + 1000.0), {}};
        return &fresh;
    };

    std::vector<RawTransaction> rows;
    rows.reserve(config.rows);
    for (std::size_t i = 0; i < config.rows; ++i) {
        RawTransaction r;
        r.step = 1 + static_cast<int>((i * static_cast<std::size_t>(config.steps)) / config.rows);

        if (!returning.empty() && unit(rng) < 0.1) {
            std::uniform_int_distribution<std::size_t> pick(0, returning.size() - 1);
            r.name_orig = returning[pick(rng)];
        } else {
            r.name_orig = fmt::format("C1{:08d}", next_customer++);
            if (unit(rng) < 0.05) {
                returning.push_back(r.name_orig);
            }
        }

        const bool fraud = unit(rng) < config.fraud_rate;
        Recipient* dest = nullptr;
        if (fraud) {
            r.type = TxType::Transfer;
            if (!external_with_history.empty() && unit(rng) < 0.9) {
                std::uniform_int_distribution<std::size_t> pick(0, external_with_history.size() - 1);
                dest = &external[external_with_history[pick(rng)]];
            } else {
                dest = &external[pick_external(rng)];
            }
            const double prior = recent_max(*dest);
            r.amount = prior > 0.0 ? prior * uniform(1.0, 1.3) : lognormal(12.0, 1.0);
        } else {
            r.type = all_tx_types[static_cast<std::size_t>(type_mix(rng))];
            switch (r.type) {
            case TxType::CashIn:
                dest = internal_dest();
                r.amount = lognormal(11.3, 1.0);
                break;
            case TxType::CashOut:
                dest = unit(rng) < 0.5 ? &external[pick_external(rng)] : internal_dest();
                r.amount = lognormal(11.5, 1.0);
                break;
            case TxType::Debit:
                dest = internal_dest();
                r.amount = lognormal(8.5, 1.0);
                break;
            case TxType::Payment:
                dest = nullptr;
                r.amount = lognormal(9.0, 1.0);
                break;
            case TxType::Transfer:
                if (!external_with_history.empty() && unit(rng) < 0.5) {
                    std::uniform_int_distribution<std::size_t> pick(0, external_with_history.size() - 1);
                    dest = &external[external_with_history[pick(rng)]];
                    r.amount = recent_max(*dest) * uniform(0.05, 0.6);
                } else {
                    dest = internal_dest();
                    r.amount = lognormal(12.0, 1.0);
                }
                break;
            }
        }
        r.amount = std::max(cents(r.amount), 0.01);

        if (unit(rng) < 0.1) {
            // originating account held at another institution
            r.oldbalance_org = 0.0;
            r.newbalance_orig = 0.0;
        } else if (r.type == TxType::CashIn) {
            r.oldbalance_org = cents(lognormal(10.0, 1.5));
            r.newbalance_orig = cents(r.oldbalance_org + r.amount);
        } else {
            r.oldbalance_org = cents(r.amount * uniform(1.0, 4.0));
            r.newbalance_orig = cents(r.oldbalance_org - r.amount);
        }

        if (dest == nullptr) {
            r.name_dest = unit(rng) < 0.3 ? fmt::format("M{:09d}", pick_merchant(rng))
                                           : fmt::format("M8{:08d}", next_fresh++);
        } else {
            r.name_dest = dest->name;
            if (!dest->external) {
                r.oldbalance_dest = dest->balance;
                dest->balance = cents(dest->balance + r.amount);
                r.newbalance_dest = dest->balance;
            }
            remember(*dest, r.amount);
            if (dest->external) {
                const auto idx = static_cast<std::size_t>(dest - external.data());
                if (!has_history[idx]) {
                    has_history[idx] = true;
                    external_with_history.push_back(idx);
                }
            }
        }
        rows.push_back(std::move(r));
    }

    const Labels planted = planted_rule_labels(rows);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const bool flip = planted[i] ? unit(rng) < config.label_noise
                                     : unit(rng) < config.label_noise * config.fraud_rate;
        rows[i].is_fraud = (planted[i] != 0) != flip ? 1 : 0;
        rows[i].is_flagged_fraud = rows[i].is_fraud && rows[i].type == TxType::Transfer && rows[i].amount > 200000.0;
    }
    return rows;
}

Labels planted_rule_labels(const std::vector<RawTransaction>& rows)
{
    std::unordered_map<std::string, std::deque<double>> windows;
    Labels out(rows.size(), 0);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        auto& w = windows[r.name_dest];
        w.push_back(r.amount);
        if (w.size() > recent_window) {
            w.pop_front();
        }
        const bool external = r.oldbalance_dest == 0.0 && r.newbalance_dest == 0.0;
        const double max7 = *std::max_element(w.begin(), w.end());
        out[i] = r.type == TxType::Transfer && external && r.amount >= max7 ? 1 : 0;
    }
    return out;
}

} // namespace dsc
