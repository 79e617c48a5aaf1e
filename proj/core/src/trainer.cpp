#include "fex/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "fex/mask_ops.hpp"
#include "fex/parallel.hpp"
#include "fex/rng.hpp"
#include "json.hpp"

namespace fex {

namespace {

constexpr double kProbFloor = 1e-9; // floor for f_k inside the KL log ratio

std::vector<std::size_t> explainer_sizes(std::size_t n_features, std::size_t n_classes,
                                         const std::vector<std::size_t>& hidden) {
    std::vector<std::size_t> sizes;
    sizes.push_back(n_features);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(n_features * n_classes);
    return sizes;
}

std::vector<std::size_t> value_sizes(std::size_t n_features, std::size_t n_classes,
                                     const std::vector<std::size_t>& hidden) {
    std::vector<std::size_t> sizes;
    sizes.push_back(n_features);
    sizes.insert(sizes.end(), hidden.begin(), hidden.end());
    sizes.push_back(n_classes);
    return sizes;
}

} // namespace

ExplainerModel::ExplainerModel(nnet::MlpNetwork net, std::size_t n_features,
                               std::size_t n_classes)
    : net_(std::move(net)), n_features_(n_features), n_classes_(n_classes) {
    if (net_.input_size() != n_features_ ||
        net_.output_size() != n_features_ * n_classes_) {
        throw DimensionError("explainer network must map N -> K*N");
    }
    if (net_.output_activation() != nnet::Activation::Sigmoid) {
        throw ConfigError("explainer requires sigmoid heads");
    }
}

ExplainerModel ExplainerModel::xavier(std::size_t n_features, std::size_t n_classes,
                                      const std::vector<std::size_t>& hidden_sizes,
                                      std::uint64_t seed) {
    return ExplainerModel(
        nnet::MlpNetwork::xavier(explainer_sizes(n_features, n_classes, hidden_sizes),
                                 nnet::Activation::Sigmoid, seed),
        n_features, n_classes);
}

Attribution ExplainerModel::explain(const Sample& x, std::size_t class_index) const {
    if (class_index >= n_classes_) throw DimensionError("class index out of range");
    const std::vector<double> out = net_.forward(x.features);
    std::vector<double> lambda(n_features_);
    const std::size_t off = class_index * n_features_;
    for (std::size_t i = 0; i < n_features_; ++i) lambda[i] = clamp_lambda(out[off + i]);
    return Attribution(std::move(lambda), true);
}

BernoulliPolicy ExplainerModel::policy(const Sample& x, std::size_t class_index) const {
    return BernoulliPolicy(explain(x, class_index).values);
}

std::vector<double> ExplainerModel::all_heads(const Sample& x) const {
    std::vector<double> out = net_.forward(x.features);
    for (double& v : out) v = clamp_lambda(v);
    return out;
}

ValueModel::ValueModel(nnet::MlpNetwork net, std::size_t n_classes)
    : net_(std::move(net)), n_classes_(n_classes) {
    if (net_.output_size() != n_classes_) {
        throw DimensionError("value network must have one output per class");
    }
    if (net_.output_activation() != nnet::Activation::Identity) {
        throw ConfigError("value network uses identity outputs");
    }
}

ValueModel ValueModel::xavier(std::size_t n_features, std::size_t n_classes,
                              const std::vector<std::size_t>& hidden_sizes,
                              std::uint64_t seed) {
    return ValueModel(nnet::MlpNetwork::xavier(value_sizes(n_features, n_classes, hidden_sizes),
                                               nnet::Activation::Identity, seed),
                      n_classes);
}

double ValueModel::value(const Sample& x, std::size_t class_index) const {
    if (class_index >= n_classes_) throw DimensionError("class index out of range");
    return net_.forward(x.features)[class_index];
}

void TrainingConfig::validate() const {
    if (trajectory_length < 1) throw ConfigError("trajectory_length must be >= 1");
    if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw ConfigError("clip_eps must be in (0,1)");
    if (lambda_en < 0.0 || lambda_v < 0.0 || lambda_kl < 0.0) {
        throw ConfigError("loss coefficients must be >= 0");
    }
    if (inner_updates < 1) throw ConfigError("inner_updates must be >= 1");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (!(lr >= 0.0)) throw ConfigError("lr must be >= 0");
}

std::vector<Trajectory> collect_trajectories(const ExplainerModel& g, const Predictor& p,
                                             std::span<const Sample> samples,
                                             std::span<const std::size_t> classes,
                                             std::size_t trajectory_length,
                                             std::uint64_t seed, unsigned threads) {
    if (samples.size() != classes.size()) {
        throw DimensionError("samples and classes must align");
    }
    if (trajectory_length < 1) throw ConfigError("trajectory_length must be >= 1");

    std::vector<Trajectory> out(samples.size());
    parallel_for(
        samples.size(), threads,
        [&](std::uint64_t j) {
            const Sample& x = samples[j];
            const std::size_t y = classes[j];
            const BernoulliPolicy pol = g.policy(x, y);
            Rng rng(derive_seed(seed, j));

            Trajectory traj;
            traj.sample_index = j;
            traj.class_index = y;
            traj.masks = pol.sample_masks(trajectory_length, rng);
            traj.scores.reserve(trajectory_length);
            traj.behavior_log_probs.reserve(trajectory_length);
            for (const Mask& m : traj.masks) {
                traj.scores.push_back(naive_score(p, m, x, y));
                traj.behavior_log_probs.push_back(pol.log_prob(m));
            }
            out[j] = std::move(traj);
        },
        /*chunk=*/1);
    return out;
}

double trajectory_return(const Trajectory& traj) {
    if (traj.scores.empty()) throw DimensionError("empty trajectory");
    const double sum = std::accumulate(traj.scores.begin(), traj.scores.end(), 0.0);
    return sum / static_cast<double>(traj.scores.size());
}

double advantage(double score, double value, std::size_t trajectory_length) {
    if (trajectory_length < 1) throw ConfigError("trajectory length must be >= 1");
    return (score - value) / static_cast<double>(trajectory_length);
}

double value_loss(const ValueModel& v, std::span<const Sample> samples,
                  std::span<const Trajectory> trajectories) {
    if (trajectories.empty()) return 0.0;
    double total = 0.0;
    for (const Trajectory& traj : trajectories) {
        const double vk = v.value(samples[traj.sample_index], traj.class_index);
        const double inv_t = 1.0 / static_cast<double>(traj.length());
        for (double c : traj.scores) {
            const double d = c - vk;
            total += inv_t * d * d;
        }
    }
    return total / static_cast<double>(trajectories.size());
}

nnet::GradientBundle value_loss_grad(const ValueModel& v, std::span<const Sample> samples,
                                     std::span<const Trajectory> trajectories) {
    nnet::GradientBundle grad = v.network().zero_gradients();
    if (trajectories.empty()) return grad;
    const double inv_n = 1.0 / static_cast<double>(trajectories.size());
    for (const Trajectory& traj : trajectories) {
        const Sample& x = samples[traj.sample_index];
        const double vk = v.value(x, traj.class_index);
        const double inv_t = 1.0 / static_cast<double>(traj.length());
        double dv = 0.0;
        for (double c : traj.scores) dv += 2.0 * inv_t * (vk - c);
        std::vector<double> upstream(v.n_classes(), 0.0);
        upstream[traj.class_index] = dv * inv_n;
        grad.add_scaled(v.network().backward(x.features, upstream), 1.0);
    }
    return grad;
}

namespace {

/// Per-sample dSurrogate/dlambda for the PPO-clip objective; returns the
/// number of (trajectory, step) terms consumed.
std::size_t ppo_lambda_grad(const BernoulliPolicy& pol, const Trajectory& traj,
                            double baseline_value, double clip_eps,
                            std::span<const double> frozen_advantages,
                            std::vector<double>& dlambda, double& surrogate_sum) {
    const std::size_t t_len = traj.length();
    for (std::size_t t = 0; t < t_len; ++t) {
        const double adv = frozen_advantages.empty()
                               ? advantage(traj.scores[t], baseline_value, t_len)
                               : frozen_advantages[t];
        const double cur_lp = pol.log_prob(traj.masks[t]);
        const double ratio = std::exp(cur_lp - traj.behavior_log_probs[t]);
        if (!std::isfinite(ratio)) {
            throw NumericError("non-finite PPO ratio");
        }
        const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
        const double surr_plain = ratio * adv;
        const double surr_clip = clipped * adv;
        surrogate_sum += std::min(surr_plain, surr_clip);
        if (surr_plain <= surr_clip) {
            // active branch is r*A; d(r)/dlambda = r * dlogq/dlambda
            const std::vector<double> score_grad = pol.log_prob_grad(traj.masks[t]);
            const double w = adv * ratio;
            for (std::size_t i = 0; i < dlambda.size(); ++i) {
                dlambda[i] += w * score_grad[i];
            }
        }
        // else: clipped branch is active and saturated; zero gradient
    }
    return t_len;
}

struct KlTerms {
    double kl = 0.0;
    std::vector<double> dlambda_all_heads; // K*N, gradient in the clamped outputs
};

KlTerms kl_terms(const std::vector<double>& heads, std::size_t n_features,
                 std::size_t n_classes, const ProbVector& f_probs) {
    KlTerms out;
    std::vector<double> mean_log(n_classes, 0.0);
    for (std::size_t k = 0; k < n_classes; ++k) {
        double acc = 0.0;
        for (std::size_t i = 0; i < n_features; ++i) {
            acc += std::log(heads[k * n_features + i]);
        }
        mean_log[k] = acc / static_cast<double>(n_features);
    }
    const double smax = *std::max_element(mean_log.begin(), mean_log.end());
    std::vector<double> softmax(n_classes);
    double z = 0.0;
    for (std::size_t k = 0; k < n_classes; ++k) {
        softmax[k] = std::exp(mean_log[k] - smax);
        z += softmax[k];
    }
    for (double& v : softmax) v /= z;

    std::vector<double> a(n_classes);
    for (std::size_t k = 0; k < n_classes; ++k) {
        a[k] = std::log(softmax[k]) - std::log(std::max(f_probs[k], kProbFloor));
        out.kl += softmax[k] * a[k];
    }

    out.dlambda_all_heads.assign(n_classes * n_features, 0.0);
    for (std::size_t k = 0; k < n_classes; ++k) {
        const double ds = softmax[k] * (a[k] - out.kl); // dKL/d(mean_log_k)
        for (std::size_t i = 0; i < n_features; ++i) {
            const double lam = heads[k * n_features + i];
            out.dlambda_all_heads[k * n_features + i] =
                ds / (static_cast<double>(n_features) * lam);
        }
    }
    return out;
}

/// Chains dLoss/dlambda into network parameter space. `raw` holds the
/// unclamped sigmoid outputs; clamped coordinates contribute zero gradient.
nnet::GradientBundle chain_to_network(const nnet::MlpNetwork& net, const Sample& x,
                                      const std::vector<double>& raw,
                                      const std::vector<double>& dlambda) {
    std::vector<double> upstream(raw.size(), 0.0);
    for (std::size_t j = 0; j < raw.size(); ++j) {
        const bool interior = raw[j] > kLambdaClamp && raw[j] < 1.0 - kLambdaClamp;
        upstream[j] = interior ? dlambda[j] : 0.0;
    }
    return net.backward(x.features, upstream);
}

} // namespace

double ppo_surrogate(const ExplainerModel& g, std::span<const Sample> samples,
                     std::span<const Trajectory> trajectories,
                     std::span<const double> values, double clip_eps) {
    if (trajectories.size() != values.size()) {
        throw DimensionError("one baseline value per trajectory required");
    }
    double surrogate_sum = 0.0;
    std::size_t terms = 0;
    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const Trajectory& traj = trajectories[j];
        const BernoulliPolicy pol = g.policy(samples[traj.sample_index], traj.class_index);
        std::vector<double> scratch(pol.size(), 0.0);
        terms += ppo_lambda_grad(pol, traj, values[j], clip_eps, {}, scratch, surrogate_sum);
    }
    return terms > 0 ? surrogate_sum / static_cast<double>(terms) : 0.0;
}

nnet::GradientBundle ppo_surrogate_grad(const ExplainerModel& g,
                                        std::span<const Sample> samples,
                                        std::span<const Trajectory> trajectories,
                                        std::span<const double> values, double clip_eps) {
    if (trajectories.size() != values.size()) {
        throw DimensionError("one baseline value per trajectory required");
    }
    nnet::GradientBundle grad = g.network().zero_gradients();
    std::size_t terms = 0;
    for (const Trajectory& traj : trajectories) terms += traj.length();
    if (terms == 0) return grad;
    const double inv_terms = 1.0 / static_cast<double>(terms);

    for (std::size_t j = 0; j < trajectories.size(); ++j) {
        const Trajectory& traj = trajectories[j];
        const Sample& x = samples[traj.sample_index];
        const std::vector<double> raw = g.network().forward(x.features);
        std::vector<double> lambda(g.n_features());
        const std::size_t off = traj.class_index * g.n_features();
        for (std::size_t i = 0; i < g.n_features(); ++i) {
            lambda[i] = clamp_lambda(raw[off + i]);
        }
        const BernoulliPolicy pol(lambda);

        std::vector<double> dlam_head(g.n_features(), 0.0);
        double ignored = 0.0;
        ppo_lambda_grad(pol, traj, values[j], clip_eps, {}, dlam_head, ignored);

        std::vector<double> dlambda(raw.size(), 0.0);
        for (std::size_t i = 0; i < g.n_features(); ++i) {
            dlambda[off + i] = dlam_head[i] * inv_terms;
        }
        grad.add_scaled(chain_to_network(g.network(), x, raw, dlambda), 1.0);
    }
    return grad;
}

double policy_entropy(const ExplainerModel& g, const Sample& x, std::size_t class_index) {
    return g.policy(x, class_index).entropy();
}

nnet::GradientBundle policy_entropy_grad(const ExplainerModel& g, const Sample& x,
                                         std::size_t class_index) {
    const std::vector<double> raw = g.network().forward(x.features);
    std::vector<double> lambda(g.n_features());
    const std::size_t off = class_index * g.n_features();
    for (std::size_t i = 0; i < g.n_features(); ++i) lambda[i] = clamp_lambda(raw[off + i]);
    const BernoulliPolicy pol(lambda);
    const std::vector<double> dh = pol.entropy_grad();

    std::vector<double> dlambda(raw.size(), 0.0);
    for (std::size_t i = 0; i < g.n_features(); ++i) dlambda[off + i] = dh[i];
    return chain_to_network(g.network(), x, raw, dlambda);
}

double kl_regularizer(const ExplainerModel& g, const ProbVector& f_probs, const Sample& x) {
    if (f_probs.size() != g.n_classes()) {
        throw DimensionError("f probability vector width != number of heads");
    }
    return kl_terms(g.all_heads(x), g.n_features(), g.n_classes(), f_probs).kl;
}

nnet::GradientBundle kl_regularizer_grad(const ExplainerModel& g, const ProbVector& f_probs,
                                         const Sample& x) {
    if (f_probs.size() != g.n_classes()) {
        throw DimensionError("f probability vector width != number of heads");
    }
    const std::vector<double> raw = g.network().forward(x.features);
    std::vector<double> heads(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j) heads[j] = clamp_lambda(raw[j]);
    const KlTerms terms = kl_terms(heads, g.n_features(), g.n_classes(), f_probs);
    return chain_to_network(g.network(), x, raw, terms.dlambda_all_heads);
}

double total_loss(const LossComponents& c, const TrainingConfig& cfg) {
    return -c.surrogate - cfg.lambda_en * c.entropy + cfg.lambda_v * c.value_loss +
           cfg.lambda_kl * c.kl;
}

std::string to_json_line(const TrainLogRecord& rec) {
    nlohmann::json j;
    j["epoch"] = rec.epoch;
    j["batch"] = rec.batch;
    j["mean_return"] = rec.mean_return;
    j["surrogate"] = rec.surrogate;
    j["value_loss"] = rec.value_loss;
    j["kl"] = rec.kl;
    j["entropy"] = rec.entropy;
    return j.dump();
}

void write_training_log(const std::string& path, const std::vector<TrainLogRecord>& log) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    for (const TrainLogRecord& rec : log) out << to_json_line(rec) << "\n";
}

TrainingResult run_training(const LabeledDataset& data, const Predictor& p,
                            ExplainerModel explainer, ValueModel value,
                            const TrainingConfig& cfg) {
    cfg.validate();
    if (data.samples.empty()) throw ConfigError("cannot train on an empty dataset");
    if (data.n_features != p.n_features() || data.n_features != explainer.n_features()) {
        throw DimensionError("dataset, predictor and explainer widths disagree");
    }
    if (explainer.n_classes() != p.n_classes() || value.n_classes() != p.n_classes()) {
        throw DimensionError("head counts disagree with predictor classes");
    }

    TrainingResult result{std::move(explainer), std::move(value), {}};
    if (cfg.epochs == 0) return result;

    const std::size_t n = data.samples.size();
    const std::size_t t_len = cfg.trajectory_length;

    // f(x) never changes during explainer training: precompute the explained
    // class and the probability vector feeding the KL term
    std::vector<std::size_t> classes(n);
    std::vector<ProbVector> f_probs(n);
    for (std::size_t i = 0; i < n; ++i) {
        f_probs[i] = p.predict_proba(data.samples[i]);
        std::size_t best = 0;
        for (std::size_t k = 1; k < f_probs[i].size(); ++k) {
            if (f_probs[i][k] > f_probs[i][best]) best = k;
        }
        classes[i] = best;
    }

    nnet::AdamState g_adam = nnet::AdamState::for_network(result.explainer.network());
    nnet::AdamState v_adam = nnet::AdamState::for_network(result.value.network());

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng shuffle_rng(derive_seed(cfg.seed, 0x6f72646572ULL));

    std::vector<double> epoch_returns;
    std::uint64_t collection_counter = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_index(i));
            std::swap(order[i - 1], order[j]);
        }

        double epoch_return_sum = 0.0;
        double epoch_dev_sum = 0.0;
        std::size_t epoch_traj_count = 0;
        std::size_t batch_index = 0;

        for (std::size_t start = 0; start < n; start += cfg.batch_size, ++batch_index) {
            const std::size_t end = std::min(n, start + cfg.batch_size);
            const std::size_t bsize = end - start;

            std::vector<Sample> batch(bsize);
            std::vector<std::size_t> batch_classes(bsize);
            for (std::size_t b = 0; b < bsize; ++b) {
                batch[b] = data.samples[order[start + b]];
                batch_classes[b] = classes[order[start + b]];
            }

            const std::uint64_t collect_seed =
                derive_seed(derive_seed(cfg.seed, 0xc0111ec7ULL), collection_counter++);
            const std::vector<Trajectory> trajs = collect_trajectories(
                result.explainer, p, batch, batch_classes, t_len, collect_seed, cfg.threads);

            // baselines frozen at collection time
            std::vector<double> baselines(bsize);
            for (std::size_t b = 0; b < bsize; ++b) {
                baselines[b] = result.value.value(batch[b], batch_classes[b]);
            }

            // frozen advantages, optionally batch-standardized
            std::vector<std::vector<double>> advantages(bsize);
            {
                double mean = 0.0;
                std::size_t cnt = 0;
                for (std::size_t b = 0; b < bsize; ++b) {
                    advantages[b].resize(t_len);
                    for (std::size_t t = 0; t < t_len; ++t) {
                        advantages[b][t] = advantage(trajs[b].scores[t], baselines[b], t_len);
                        mean += advantages[b][t];
                        ++cnt;
                    }
                }
                if (cfg.normalize_advantages && cnt > 1) {
                    mean /= static_cast<double>(cnt);
                    double var = 0.0;
                    for (const auto& row : advantages)
                        for (double a : row) var += (a - mean) * (a - mean);
                    const double sd = std::sqrt(var / static_cast<double>(cnt)) + 1e-8;
                    for (auto& row : advantages)
                        for (double& a : row) a = (a - mean) / sd;
                }
            }

            // log the objective pieces as seen at collection (r = 1)
            {
                TrainLogRecord rec;
                rec.epoch = epoch;
                rec.batch = batch_index;
                double ret = 0.0, ent = 0.0, kl = 0.0;
                for (std::size_t b = 0; b < bsize; ++b) {
                    ret += trajectory_return(trajs[b]);
                    const BernoulliPolicy pol =
                        result.explainer.policy(batch[b], batch_classes[b]);
                    ent += pol.entropy();
                    kl += kl_regularizer(result.explainer, f_probs[order[start + b]],
                                         batch[b]);
                    double dev = 0.0;
                    for (double l : pol.lambda()) dev += std::abs(l - 0.5);
                    epoch_dev_sum += dev / static_cast<double>(pol.size());
                }
                rec.mean_return = ret / static_cast<double>(bsize);
                rec.surrogate = ppo_surrogate(result.explainer, batch, trajs, baselines,
                                              cfg.clip_eps);
                rec.value_loss = value_loss(result.value, batch, trajs);
                rec.kl = kl / static_cast<double>(bsize);
                rec.entropy = ent / static_cast<double>(bsize);
                if (!std::isfinite(rec.mean_return) || !std::isfinite(rec.surrogate) ||
                    !std::isfinite(rec.value_loss) || !std::isfinite(rec.kl) ||
                    !std::isfinite(rec.entropy)) {
                    throw NumericError("non-finite loss during training");
                }
                result.log.push_back(rec);
                epoch_return_sum += rec.mean_return * static_cast<double>(bsize);
                epoch_traj_count += bsize;
            }

            std::size_t terms = 0;
            for (const Trajectory& traj : trajs) terms += traj.length();
            const double inv_terms = 1.0 / static_cast<double>(terms);
            const double inv_batch = 1.0 / static_cast<double>(bsize);

            for (std::size_t update = 0; update < cfg.inner_updates; ++update) {
                // fused per-sample upstream in lambda space keeps one backward
                // pass per network and sample; slots reduce in sample order so
                // results do not depend on the thread count
                std::vector<nnet::GradientBundle> g_slots(bsize);
                std::vector<nnet::GradientBundle> v_slots(bsize);

                parallel_for(
                    bsize, cfg.threads,
                    [&](std::uint64_t b) {
                        const Sample& x = batch[b];
                        const std::size_t y = batch_classes[b];
                        const std::size_t off = y * result.explainer.n_features();
                        const std::vector<double> raw =
                            result.explainer.network().forward(x.features);
                        std::vector<double> heads(raw.size());
                        for (std::size_t jj = 0; jj < raw.size(); ++jj) {
                            heads[jj] = clamp_lambda(raw[jj]);
                        }
                        std::vector<double> head_y(
                            heads.begin() + static_cast<std::ptrdiff_t>(off),
                            heads.begin() +
                                static_cast<std::ptrdiff_t>(off + result.explainer.n_features()));
                        const BernoulliPolicy pol(head_y);

                        // surrogate term (ascent -> negated into the loss)
                        std::vector<double> dlam_ppo(pol.size(), 0.0);
                        double surr_ignored = 0.0;
                        ppo_lambda_grad(pol, trajs[b], baselines[b], cfg.clip_eps,
                                        advantages[b], dlam_ppo, surr_ignored);

                        const std::vector<double> dlam_ent = pol.entropy_grad();
                        const KlTerms kl =
                            kl_terms(heads, result.explainer.n_features(),
                                     result.explainer.n_classes(), f_probs[order[start + b]]);

                        std::vector<double> dloss(raw.size(), 0.0);
                        for (std::size_t jj = 0; jj < raw.size(); ++jj) {
                            dloss[jj] = cfg.lambda_kl * kl.dlambda_all_heads[jj] * inv_batch;
                        }
                        for (std::size_t i = 0; i < pol.size(); ++i) {
                            dloss[off + i] += -dlam_ppo[i] * inv_terms -
                                              cfg.lambda_en * dlam_ent[i] * inv_batch;
                        }
                        g_slots[b] = chain_to_network(result.explainer.network(), x, raw,
                                                      dloss);

                        // value head regression toward the collected scores
                        const double vk = result.value.value(x, y);
                        double dv = 0.0;
                        const double inv_t = 1.0 / static_cast<double>(trajs[b].length());
                        for (double c : trajs[b].scores) dv += 2.0 * inv_t * (vk - c);
                        std::vector<double> v_up(result.value.n_classes(), 0.0);
                        v_up[y] = cfg.lambda_v * dv * inv_batch;
                        v_slots[b] = result.value.network().backward(x.features, v_up);
                    },
                    /*chunk=*/1);

                nnet::GradientBundle g_grad = result.explainer.network().zero_gradients();
                nnet::GradientBundle v_grad = result.value.network().zero_gradients();
                for (std::size_t b = 0; b < bsize; ++b) {
                    g_grad.add_scaled(g_slots[b], 1.0);
                    v_grad.add_scaled(v_slots[b], 1.0);
                }
                if (!g_grad.all_finite() || !v_grad.all_finite()) {
                    throw NumericError("non-finite gradient during training");
                }
                nnet::adam_step(result.explainer.network(), g_grad, g_adam, cfg.lr);
                nnet::adam_step(result.value.network(), v_grad, v_adam, cfg.lr);
            }
        }

        // no-learning guard: a policy pinned at 0.5 with flat returns past
        // half the budget means the gradients are not reaching the network
        const double epoch_return = epoch_return_sum / static_cast<double>(epoch_traj_count);
        const double epoch_dev = epoch_dev_sum / static_cast<double>(epoch_traj_count);
        epoch_returns.push_back(epoch_return);
        if (cfg.epochs >= 2 && epoch + 1 > cfg.epochs / 2 && epoch_dev < 0.01) {
            const std::size_t window = std::max<std::size_t>(2, cfg.epochs / 4);
            if (epoch_returns.size() >= window) {
                const auto first = epoch_returns.end() - static_cast<std::ptrdiff_t>(window);
                const auto [lo, hi] = std::minmax_element(first, epoch_returns.end());
                // 0.02 leaves room for resampling noise in the per-epoch means
                if (*hi - *lo <= 0.02) {
                    throw NumericError(
                        "no-learning signal: policy pinned at 0.5 with flat returns");
                }
            }
        }
    }
    return result;
}

} // namespace fex
