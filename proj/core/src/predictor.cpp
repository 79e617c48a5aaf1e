#include "fex/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "fex/mask_ops.hpp"
#include "fex/rng.hpp"

namespace fex {

int Predictor::argmax_class(const Sample& x) const {
    const ProbVector probs = predict_proba(x);
    std::size_t best = 0;
    for (std::size_t k = 1; k < probs.size(); ++k) {
        if (probs[k] > probs[best]) best = k;
    }
    return static_cast<int>(best);
}

double naive_score(const Predictor& p, const Mask& mask, const Sample& x,
                   std::size_t class_index) {
    if (class_index >= p.n_classes()) {
        throw DimensionError("class index " + std::to_string(class_index) +
                             " out of range [0, " + std::to_string(p.n_classes()) + ")");
    }
    const std::size_t km = retained_count(mask);
    if (km == 0) return 0.0;
    const ProbVector probs = p.predict_proba(apply_mask(mask, x));
    return probs[class_index] / static_cast<double>(km);
}

BuiltinPredictor::BuiltinPredictor(nnet::MlpNetwork net, std::size_t n_classes)
    : net_(std::move(net)), n_classes_(n_classes) {
    if (net_.output_size() != n_classes_) {
        throw DimensionError("predictor network output size != n_classes");
    }
    if (net_.output_activation() != nnet::Activation::Softmax) {
        throw ConfigError("builtin predictor requires a softmax head");
    }
}

ProbVector BuiltinPredictor::predict_proba(const Sample& x) const {
    ProbVector out(net_.forward(x.features));
    return out;
}

BuiltinPredictor train_builtin(const LabeledDataset& data, const PredictorTrainOptions& opts,
                               PredictorTrainLog* log) {
    if (data.samples.empty()) throw ConfigError("cannot train on an empty dataset");
    for (const Sample& s : data.samples) {
        if (!s.label || *s.label < 0 || static_cast<std::size_t>(*s.label) >= data.n_classes) {
            throw ConfigError("dataset labels must lie in [0, n_classes)");
        }
    }

    std::vector<std::size_t> sizes;
    sizes.push_back(data.n_features);
    sizes.insert(sizes.end(), opts.hidden_sizes.begin(), opts.hidden_sizes.end());
    sizes.push_back(data.n_classes);
    nnet::MlpNetwork net = nnet::MlpNetwork::xavier(sizes, nnet::Activation::Softmax,
                                                    derive_seed(opts.seed, 0x696e6974ULL));
    nnet::AdamState adam = nnet::AdamState::for_network(net);

    const std::size_t n = data.samples.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;

    Rng shuffle_rng(derive_seed(opts.seed, 0x73687566ULL));
    const std::size_t bs = std::max<std::size_t>(1, opts.batch_size);

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(shuffle_rng.uniform_index(i));
            std::swap(order[i - 1], order[j]);
        }
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < n; start += bs) {
            const std::size_t end = std::min(n, start + bs);
            nnet::GradientBundle grad = net.zero_gradients();
            for (std::size_t b = start; b < end; ++b) {
                const Sample& s = data.samples[order[b]];
                const std::vector<double> probs = net.forward(s.features);
                const std::size_t y = static_cast<std::size_t>(*s.label);
                epoch_loss += -std::log(std::max(probs[y], 1e-12));
                // upstream of -log p_y; the softmax jacobian in backward
                // turns this into the usual probs - onehot(y) delta
                std::vector<double> upstream(probs.size(), 0.0);
                upstream[y] = -1.0 / std::max(probs[y], 1e-12);
                grad.add_scaled(net.backward(s.features, upstream),
                                1.0 / static_cast<double>(end - start));
            }
            nnet::adam_step(net, grad, adam, opts.lr);
        }
        if (log) log->epoch_loss.push_back(epoch_loss / static_cast<double>(n));
    }
    return BuiltinPredictor(std::move(net), data.n_classes);
}

double accuracy(const Predictor& p, const LabeledDataset& data) {
    if (data.samples.empty()) return 0.0;
    std::size_t hits = 0;
    for (const Sample& s : data.samples) {
        if (s.label && p.argmax_class(s) == *s.label) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(data.samples.size());
}

} // namespace fex
