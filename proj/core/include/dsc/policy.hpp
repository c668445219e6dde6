#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dsc/constraints.hpp"
#include "dsc/expr.hpp"
#include "dsc/random.hpp"

namespace dsc {

/// Parameters of a single-layer gated recurrent cell followed by a linear
/// read-out. Input is the concatenated one-hot of (parent, sibling) over the
/// library plus EMPTY.
///
///   z  = sigmoid(Wz x + Uz h + bz)
///   r  = sigmoid(Wr x + Ur h + br)
///   n  = tanh(Wn x + Un (r * h) + bn)
///   h' = (1 - z) * n + z * h
///   logits = Wo h' + bo
struct PolicyParams {
    Eigen::MatrixXd w_z, u_z, w_r, u_r, w_n, u_n, w_out;
    Eigen::VectorXd b_z, b_r, b_n, b_out;

    static PolicyParams zeros(Eigen::Index inputs, Eigen::Index hidden, Eigen::Index outputs);

    /// Visits every tensor as (name, matrix view) in a fixed order.
    template <typename F>
    void for_each(F&& f)
    {
        f("w_z", w_z.data(), w_z.rows(), w_z.cols());
        f("u_z", u_z.data(), u_z.rows(), u_z.cols());
        f("b_z", b_z.data(), b_z.rows(), Eigen::Index{1});
        f("w_r", w_r.data(), w_r.rows(), w_r.cols());
        f("u_r", u_r.data(), u_r.rows(), u_r.cols());
        f("b_r", b_r.data(), b_r.rows(), Eigen::Index{1});
        f("w_n", w_n.data(), w_n.rows(), w_n.cols());
        f("u_n", u_n.data(), u_n.rows(), u_n.cols());
        f("b_n", b_n.data(), b_n.rows(), Eigen::Index{1});
        f("w_out", w_out.data(), w_out.rows(), w_out.cols());
        f("b_out", b_out.data(), b_out.rows(), Eigen::Index{1});
    }
    template <typename F>
    void for_each(F&& f) const
    {
        const_cast<PolicyParams*>(this)->for_each(
            [&](const char* name, double* data, Eigen::Index rows, Eigen::Index cols) {
                f(name, static_cast<const double*>(data), rows, cols);
            });
    }

    [[nodiscard]] std::size_t parameter_count() const;
    [[nodiscard]] double squared_norm() const;
    /// All parameters flattened in for_each order.
    [[nodiscard]] std::vector<double> flatten() const;
    void assign(std::span<const double> flat);

    PolicyParams& operator+=(const PolicyParams& other);
    PolicyParams& operator*=(double scale);
    /// this += scale * other
    void add_scaled(const PolicyParams& other, double scale);
};

class PolicyNet {
public:
    PolicyNet() = default;
    PolicyNet(LibraryPtr library, int hidden_size);

    /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero read-out bias.
    static PolicyNet random(LibraryPtr library, int hidden_size, Rng& rng);

    [[nodiscard]] const Library& library() const noexcept { return *library_; }
    [[nodiscard]] const LibraryPtr& library_ptr() const noexcept { return library_; }
    [[nodiscard]] Eigen::Index library_size() const noexcept { return static_cast<Eigen::Index>(library_->size()); }
    [[nodiscard]] Eigen::Index hidden_size() const noexcept { return hidden_; }
    [[nodiscard]] Eigen::Index input_size() const noexcept { return 2 * (library_size() + 1); }

    PolicyParams& params() noexcept { return params_; }
    [[nodiscard]] const PolicyParams& params() const noexcept { return params_; }

private:
    LibraryPtr library_;
    Eigen::Index hidden_ = 0;
    PolicyParams params_;
};

struct StepOutput {
    Eigen::VectorXd logits;
    Eigen::VectorXd hidden;
};

/// One recurrent step. Deterministic in (net, obs, hidden).
StepOutput policy_step(const PolicyNet& net, const Observation& obs, const Eigen::VectorXd& hidden);

using Sequence = std::vector<TokenId>;

struct SampleBatch {
    std::vector<Sequence> sequences;
    std::vector<double> log_probs;
    /// masks[i][t] is the admissibility mask used at step t of sequence i.
    std::vector<std::vector<std::vector<char>>> masks;
};

SampleBatch sample_batch(const PolicyNet& net, std::size_t count, Rng& rng, const GrammarConfig& grammar);

/// Masked-softmax probabilities for the given logits (zero where masked).
Eigen::VectorXd masked_softmax(const Eigen::VectorXd& logits, const std::vector<char>& mask);

/// Sum of per-step log-probabilities under the masked softmax. Throws
/// ZeroProbability when a token is masked at its step.
double log_prob(const PolicyNet& net, std::span<const TokenId> seq, const GrammarConfig& grammar);

/// Exact gradient of log_prob with respect to every parameter (backprop
/// through time). Optionally reports the log-probability itself.
PolicyParams grad_log_prob(const PolicyNet& net, std::span<const TokenId> seq, const GrammarConfig& grammar,
                           double* log_prob_out = nullptr);

/// acc += weight * grad log p(seq). Returns log p(seq).
double accumulate_grad_log_prob(const PolicyNet& net, std::span<const TokenId> seq, const GrammarConfig& grammar,
                                double weight, PolicyParams& acc);

struct AdamConfig {
    double learning_rate = 5e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double clip_norm = 5.0; // <= 0 disables clipping
};

/// Adam, used for ascent: params += step(grad).
class AdamOptimizer {
public:
    AdamOptimizer() = default;
    explicit AdamOptimizer(const AdamConfig& config) : config_(config) {}

    void ascend(PolicyParams& params, PolicyParams grad);

    [[nodiscard]] long steps() const noexcept { return t_; }

private:
    AdamConfig config_;
    std::vector<double> m_, v_;
    long t_ = 0;
};

/// Little-endian checkpoint container: "DSCP", u32 version, u32 tensor count,
/// then per tensor u32 name length, name bytes, u32 rows, u32 cols and
/// rows*cols f64 values in column-major order.
void save_checkpoint(const PolicyNet& net, const std::string& path);
void load_checkpoint(PolicyNet& net, const std::string& path);

} // namespace dsc
