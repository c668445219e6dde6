#include "dsc/policy.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "dsc/error.hpp"

namespace dsc {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

PolicyParams PolicyParams::zeros(Index inputs, Index hidden, Index outputs)
{
    PolicyParams p;
    p.w_z = MatrixXd::Zero(hidden, inputs);
    p.w_r = MatrixXd::Zero(hidden, inputs);
    p.w_n = MatrixXd::Zero(hidden, inputs);
    p.u_z = MatrixXd::Zero(hidden, hidden);
    p.u_r = MatrixXd::Zero(hidden, hidden);
    p.u_n = MatrixXd::Zero(hidden, hidden);
    p.b_z = VectorXd::Zero(hidden);
    p.b_r = VectorXd::Zero(hidden);
    p.b_n = VectorXd::Zero(hidden);
    p.w_out = MatrixXd::Zero(outputs, hidden);
    p.b_out = VectorXd::Zero(outputs);
    return p;
}

std::size_t PolicyParams::parameter_count() const
{
    std::size_t n = 0;
    for_each([&](const char*, const double*, Index rows, Index cols) { n += static_cast<std::size_t>(rows * cols); });
    return n;
}

double PolicyParams::squared_norm() const
{
    double s = 0.0;
    for_each([&](const char*, const double* data, Index rows, Index cols) {
        for (Index i = 0; i < rows * cols; ++i) {
            s += data[i] * data[i];
        }
    });
    return s;
}

std::vector<double> PolicyParams::flatten() const
{
    std::vector<double> flat;
    flat.reserve(parameter_count());
    for_each([&](const char*, const double* data, Index rows, Index cols) { flat.insert(flat.end(), data, data + rows * cols); });
    return flat;
}

void PolicyParams::assign(std::span<const double> flat)
{
    std::size_t offset = 0;
    for_each([&](const char*, double* data, Index rows, Index cols) {
        const auto n = static_cast<std::size_t>(rows * cols);
        std::copy_n(flat.begin() + static_cast<std::ptrdiff_t>(offset), n, data);
        offset += n;
    });
}

PolicyParams& PolicyParams::operator+=(const PolicyParams& other)
{
    add_scaled(other, 1.0);
    return *this;
}

PolicyParams& PolicyParams::operator*=(double scale)
{
    for_each([&](const char*, double* data, Index rows, Index cols) {
        for (Index i = 0; i < rows * cols; ++i) {
            data[i] *= scale;
        }
    });
    return *this;
}

void PolicyParams::add_scaled(const PolicyParams& other, double scale)
{
    w_z += scale * other.w_z;
    u_z += scale * other.u_z;
    b_z += scale * other.b_z;
    w_r += scale * other.w_r;
    u_r += scale * other.u_r;
    b_r += scale * other.b_r;
    w_n += scale * other.w_n;
    u_n += scale * other.u_n;
    b_n += scale * other.b_n;
    w_out += scale * other.w_out;
    b_out += scale * other.b_out;
}

PolicyNet::PolicyNet(LibraryPtr library, int hidden_size) : library_(std::move(library)), hidden_(hidden_size)
{
    if (hidden_size <= 0) {
        throw Error(ErrorKind::ConfigInvalid, "hidden size must be positive");
    }
    params_ = PolicyParams::zeros(input_size(), hidden_, library_size());
}

PolicyNet PolicyNet::random(LibraryPtr library, int hidden_size, Rng& rng)
{
    PolicyNet net(std::move(library), hidden_size);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_size));
    std::uniform_real_distribution<double> dist(-bound, bound);
    net.params_.for_each([&](const char* name, double* data, Index rows, Index cols) {
        if (std::string_view(name) == "b_out") {
            return;
        }
        for (Index i = 0; i < rows * cols; ++i) {
            data[i] = dist(rng);
        }
    });
    return net;
}

namespace {

double sigmoid_scalar(double v) noexcept
{
    return v >= 0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

VectorXd sigmoid_vec(const VectorXd& v)
{
    return v.unaryExpr([](double a) { return sigmoid_scalar(a); });
}

// Everything the backward pass needs from one forward step.
struct StepCache {
    Index parent_col = 0;
    Index sibling_col = 0;
    VectorXd h_prev, z, r, n, h;
    VectorXd probs;
    TokenId action = 0;
};

void forward_step(const PolicyParams& p, Index parent_col, Index sibling_col, const VectorXd& h_prev, StepCache& c)
{
    c.parent_col = parent_col;
    c.sibling_col = sibling_col;
    c.h_prev = h_prev;
    c.z = sigmoid_vec(p.w_z.col(parent_col) + p.w_z.col(sibling_col) + p.u_z * h_prev + p.b_z);
    c.r = sigmoid_vec(p.w_r.col(parent_col) + p.w_r.col(sibling_col) + p.u_r * h_prev + p.b_r);
    const VectorXd rh = c.r.cwiseProduct(h_prev);
    c.n = (p.w_n.col(parent_col) + p.w_n.col(sibling_col) + p.u_n * rh + p.b_n).array().tanh().matrix();
    c.h = (VectorXd::Ones(h_prev.size()) - c.z).cwiseProduct(c.n) + c.z.cwiseProduct(h_prev);
}

Index sibling_column(const PolicyNet& net, TokenId sibling) noexcept
{
    return net.library_size() + 1 + static_cast<Index>(sibling);
}

// Replays `seq` through the grammar and the network, filling per-step caches.
double replay(const PolicyNet& net, std::span<const TokenId> seq, const GrammarConfig& grammar,
              std::vector<StepCache>& caches)
{
    const auto& p = net.params();
    PartialTree state(net.library(), grammar);
    VectorXd h = VectorXd::Zero(net.hidden_size());
    std::vector<char> mask;
    caches.resize(seq.size());
    double total = 0.0;
    for (std::size_t t = 0; t < seq.size(); ++t) {
        if (state.complete()) {
            throw Error(ErrorKind::Overfull, "sequence continues after the tree closed");
        }
        const auto obs = state.observation();
        auto& c = caches[t];
        forward_step(p, obs.parent, sibling_column(net, obs.sibling), h, c);
        state.mask_into(mask);
        const TokenId a = seq[t];
        if (a >= mask.size() || !mask[a]) {
            throw Error(ErrorKind::ZeroProbability, fmt::format("token {} is masked at step {}", a, t));
        }
        const VectorXd logits = p.w_out * c.h + p.b_out;
        c.probs = masked_softmax(logits, mask);
        c.action = a;
        total += std::log(c.probs[a]);
        state.push(a);
        h = c.h;
    }
    if (!state.complete()) {
        throw Error(ErrorKind::Incomplete, "sequence ends with open slots");
    }
    return total;
}

} // namespace

StepOutput policy_step(const PolicyNet& net, const Observation& obs, const VectorXd& hidden)
{
    StepCache c;
    forward_step(net.params(), obs.parent, sibling_column(net, obs.sibling), hidden, c);
    return {net.params().w_out * c.h + net.params().b_out, c.h};
}

VectorXd masked_softmax(const VectorXd& logits, const std::vector<char>& mask)
{
    double max_logit = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < logits.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) {
            max_logit = std::max(max_logit, logits[i]);
        }
    }
    VectorXd probs = VectorXd::Zero(logits.size());
    double sum = 0.0;
    for (Index i = 0; i < logits.size(); ++i) {
        if (mask[static_cast<std::size_t>(i)]) {
            probs[i] = std::exp(logits[i] - max_logit);
            sum += probs[i];
        }
    }
    probs /= sum;
    return probs;
}

SampleBatch sample_batch(const PolicyNet& net, std::size_t count, Rng& rng, const GrammarConfig& grammar)
{
    if (count == 0) {
        throw Error(ErrorKind::ConfigInvalid, "batch size must be at least 1");
    }
    const auto& p = net.params();
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    SampleBatch batch;
    batch.sequences.resize(count);
    batch.log_probs.resize(count);
    batch.masks.resize(count);
    StepCache c;
    for (std::size_t i = 0; i < count; ++i) {
        PartialTree state(net.library(), grammar);
        VectorXd h = VectorXd::Zero(net.hidden_size());
        double total = 0.0;
        auto& seq = batch.sequences[i];
        auto& masks = batch.masks[i];
        while (!state.complete()) {
            const auto obs = state.observation();
            forward_step(p, obs.parent, sibling_column(net, obs.sibling), h, c);
            masks.push_back(state.mask());
            const VectorXd probs = masked_softmax(p.w_out * c.h + p.b_out, masks.back());
            const double u = unit(rng);
            double cumulative = 0.0;
            Index chosen = -1;
            for (Index k = 0; k < probs.size(); ++k) {
                if (probs[k] <= 0.0) {
                    continue;
                }
                chosen = k;
                cumulative += probs[k];
                if (u < cumulative) {
                    break;
                }
            }
            const auto token = static_cast<TokenId>(chosen);
            total += std::log(probs[chosen]);
            seq.push_back(token);
            state.push(token);
            h = c.h;
        }
        batch.log_probs[i] = total;
    }
    return batch;
}

double log_prob(const PolicyNet& net, std::span<const TokenId> seq, const GrammarConfig& grammar)
{
    std::vector<StepCache> caches;
    return replay(net, seq, grammar, caches);
}

double accumulate_grad_log_prob(const PolicyNet& net, std::span<const TokenId> seq, const GrammarConfig& grammar,
                                double weight, PolicyParams& acc)
{
    std::vector<StepCache> caches;
    const double lp = replay(net, seq, grammar, caches);
    if (weight == 0.0) {
        return lp;
    }
    const auto& p = net.params();
    const Index hidden = net.hidden_size();
    VectorXd dh_next = VectorXd::Zero(hidden);

    for (std::size_t t = caches.size(); t-- > 0;) {
        const auto& c = caches[t];
        // d log p(a) / d logits = onehot(a) - probs (masked entries have probs 0)
        VectorXd dlogits = -c.probs;
        dlogits[c.action] += 1.0;
        dlogits *= weight;

        acc.w_out.noalias() += dlogits * c.h.transpose();
        acc.b_out += dlogits;
        VectorXd dh = p.w_out.transpose() * dlogits + dh_next;

        const VectorXd one = VectorXd::Ones(hidden);
        const VectorXd dz = dh.cwiseProduct(c.h_prev - c.n);
        const VectorXd dn = dh.cwiseProduct(one - c.z);
        VectorXd dh_prev = dh.cwiseProduct(c.z);

        const VectorXd da_n = dn.cwiseProduct(one - c.n.cwiseProduct(c.n));
        const VectorXd rh = c.r.cwiseProduct(c.h_prev);
        acc.w_n.col(c.parent_col) += da_n;
        acc.w_n.col(c.sibling_col) += da_n;
        acc.b_n += da_n;
        acc.u_n.noalias() += da_n * rh.transpose();
        const VectorXd drh = p.u_n.transpose() * da_n;
        const VectorXd dr = drh.cwiseProduct(c.h_prev);
        dh_prev += drh.cwiseProduct(c.r);

        const VectorXd da_r = dr.cwiseProduct(c.r.cwiseProduct(one - c.r));
        acc.w_r.col(c.parent_col) += da_r;
        acc.w_r.col(c.sibling_col) += da_r;
        acc.b_r += da_r;
        acc.u_r.noalias() += da_r * c.h_prev.transpose();
        dh_prev.noalias() += p.u_r.transpose() * da_r;

        const VectorXd da_z = dz.cwiseProduct(c.z.cwiseProduct(one - c.z));
        acc.w_z.col(c.parent_col) += da_z;
        acc.w_z.col(c.sibling_col) += da_z;
        acc.b_z += da_z;
        acc.u_z.noalias() += da_z * c.h_prev.transpose();
        dh_prev.noalias() += p.u_z.transpose() * da_z;

        dh_next = dh_prev;
    }
    return lp;
}

PolicyParams grad_log_prob(const PolicyNet& net, std::span<const TokenId> seq, const GrammarConfig& grammar,
                           double* log_prob_out)
{
    auto grad = PolicyParams::zeros(net.input_size(), net.hidden_size(), net.library_size());
    const double lp = accumulate_grad_log_prob(net, seq, grammar, 1.0, grad);
    if (log_prob_out != nullptr) {
        *log_prob_out = lp;
    }
    return grad;
}

void AdamOptimizer::ascend(PolicyParams& params, PolicyParams grad)
{
    if (config_.clip_norm > 0.0) {
        const double norm = std::sqrt(grad.squared_norm());
        if (norm > config_.clip_norm) {
            grad *= config_.clip_norm / norm;
        }
    }
    auto theta = params.flatten();
    const auto g = grad.flatten();
    if (m_.size() != theta.size()) {
        m_.assign(theta.size(), 0.0);
        v_.assign(theta.size(), 0.0);
        t_ = 0;
    }
    ++t_;
    const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < theta.size(); ++i) {
        m_[i] = config_.beta1 * m_[i] + (1.0 - config_.beta1) * g[i];
        v_[i] = config_.beta2 * v_[i] + (1.0 - config_.beta2) * g[i] * g[i];
        const double m_hat = m_[i] / c1;
        const double v_hat = v_[i] / c2;
        theta[i] += config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
    params.assign(theta);
}

} // namespace dsc
