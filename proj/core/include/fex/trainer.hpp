#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fex/nnet.hpp"
#include "fex/policy.hpp"
#include "fex/predictor.hpp"
#include "fex/synthdata.hpp"
#include "fex/types.hpp"

namespace fex {

/// T masks sampled from one policy snapshot, with their scores and the
/// behavior log-likelihoods that anchor the PPO ratio denominator.
struct Trajectory {
    std::vector<Mask> masks;
    std::vector<double> scores;
    std::vector<double> behavior_log_probs;
    std::size_t sample_index = 0;
    std::size_t class_index = 0;

    std::size_t length() const { return masks.size(); }
};

/// Network g with one sigmoid head of width N per class; a head's clamped
/// output is both the Bernoulli mean vector and the emitted attribution, so
/// explaining costs one forward pass and zero predictor queries.
class ExplainerModel {
public:
    ExplainerModel(nnet::MlpNetwork net, std::size_t n_features, std::size_t n_classes);

    static ExplainerModel xavier(std::size_t n_features, std::size_t n_classes,
                                 const std::vector<std::size_t>& hidden_sizes,
                                 std::uint64_t seed);

    std::size_t n_features() const { return n_features_; }
    std::size_t n_classes() const { return n_classes_; }

    /// Clamped head for class k; entries in [kLambdaClamp, 1-kLambdaClamp].
    Attribution explain(const Sample& x, std::size_t class_index) const;

    BernoulliPolicy policy(const Sample& x, std::size_t class_index) const;

    /// Clamped outputs of every head, row-major K x N.
    std::vector<double> all_heads(const Sample& x) const;

    nnet::MlpNetwork& network() { return net_; }
    const nnet::MlpNetwork& network() const { return net_; }

private:
    nnet::MlpNetwork net_;
    std::size_t n_features_;
    std::size_t n_classes_;
};

/// Network v with one identity output per class estimating E_q[c].
class ValueModel {
public:
    ValueModel(nnet::MlpNetwork net, std::size_t n_classes);

    static ValueModel xavier(std::size_t n_features, std::size_t n_classes,
                             const std::vector<std::size_t>& hidden_sizes,
                             std::uint64_t seed);

    std::size_t n_classes() const { return n_classes_; }
    double value(const Sample& x, std::size_t class_index) const;

    nnet::MlpNetwork& network() { return net_; }
    const nnet::MlpNetwork& network() const { return net_; }

private:
    nnet::MlpNetwork net_;
    std::size_t n_classes_;
};

struct TrainingConfig {
    std::size_t trajectory_length = 5; // T
    double clip_eps = 0.2;
    double lambda_en = 1e-5;
    double lambda_v = 0.5;
    double lambda_kl = 1.0;
    std::size_t inner_updates = 4; // gradient updates per collection
    std::size_t batch_size = 64;
    std::size_t epochs = 20;
    double lr = 1e-3;
    std::uint64_t seed = 0;
    bool normalize_advantages = false;
    unsigned threads = 1;

    void validate() const;
};

/// One trajectory per (sample, class) pair, sampled from Bern(g_y(x)) with
/// deterministic per-sample substreams of `seed`.
std::vector<Trajectory> collect_trajectories(const ExplainerModel& g, const Predictor& p,
                                             std::span<const Sample> samples,
                                             std::span<const std::size_t> classes,
                                             std::size_t trajectory_length,
                                             std::uint64_t seed, unsigned threads = 1);

/// R(tau) = (1/T) sum_t c(m_t, x).
double trajectory_return(const Trajectory& traj);

/// A = (c - v) / T.
double advantage(double score, double value, std::size_t trajectory_length);

/// Mean over trajectories of sum_t (1/T) (c_t - v_y(x))^2.
double value_loss(const ValueModel& v, std::span<const Sample> samples,
                  std::span<const Trajectory> trajectories);

/// Gradient of value_loss with respect to v's parameters.
nnet::GradientBundle value_loss_grad(const ValueModel& v, std::span<const Sample> samples,
                                     std::span<const Trajectory> trajectories);

/// Clipped surrogate, averaged over every (trajectory, step):
/// min(r A, clip(r, 1-eps, 1+eps) A) with r = q(m|x) / q_behavior(m|x).
/// `values` holds the per-trajectory baseline v_y(x) frozen at collection.
double ppo_surrogate(const ExplainerModel& g, std::span<const Sample> samples,
                     std::span<const Trajectory> trajectories,
                     std::span<const double> values, double clip_eps);

/// Gradient of ppo_surrogate with respect to g's parameters (ascent direction).
nnet::GradientBundle ppo_surrogate_grad(const ExplainerModel& g,
                                        std::span<const Sample> samples,
                                        std::span<const Trajectory> trajectories,
                                        std::span<const double> values, double clip_eps);

/// Policy entropy H(Bern(g_y(x))) and its gradient in g's parameters.
double policy_entropy(const ExplainerModel& g, const Sample& x, std::size_t class_index);
nnet::GradientBundle policy_entropy_grad(const ExplainerModel& g, const Sample& x,
                                         std::size_t class_index);

/// D_kl(Softmax(per-head mean log attribution) || f(x)); f entries floored
/// at 1e-9 inside the log ratio.
double kl_regularizer(const ExplainerModel& g, const ProbVector& f_probs, const Sample& x);
nnet::GradientBundle kl_regularizer_grad(const ExplainerModel& g, const ProbVector& f_probs,
                                         const Sample& x);

struct LossComponents {
    double surrogate = 0.0;
    double entropy = 0.0;
    double value_loss = 0.0;
    double kl = 0.0;
};

/// L = -surrogate - lambda_en H + lambda_v L_v + lambda_kl L_kl (minimized).
double total_loss(const LossComponents& c, const TrainingConfig& cfg);

struct TrainLogRecord {
    std::size_t epoch = 0;
    std::size_t batch = 0;
    double mean_return = 0.0;
    double surrogate = 0.0;
    double value_loss = 0.0;
    double kl = 0.0;
    double entropy = 0.0;
};

std::string to_json_line(const TrainLogRecord& rec);
void write_training_log(const std::string& path, const std::vector<TrainLogRecord>& log);

struct TrainingResult {
    ExplainerModel explainer;
    ValueModel value;
    std::vector<TrainLogRecord> log;
};

/// PPO training over the dataset: per batch, classes come from argmax f(x),
/// trajectories are collected under Bern(g_y(x)), and `inner_updates` Adam
/// steps run against the frozen behavior log-probs before the next batch.
/// Aborts with NumericError on non-finite losses or a no-learning signal
/// (lambda pinned at 0.5 with flat returns past half the epoch budget).
TrainingResult run_training(const LabeledDataset& data, const Predictor& p,
                            ExplainerModel explainer, ValueModel value,
                            const TrainingConfig& cfg);

} // namespace fex
