#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "fex/nnet.hpp"
#include "fex/synthdata.hpp"
#include "fex/types.hpp"

namespace fex {

/// The prediction function f being explained. Implementations must be safe
/// for concurrent predict_proba calls unless documented otherwise.
class Predictor {
public:
    virtual ~Predictor() = default;

    virtual std::size_t n_features() const = 0;
    virtual std::size_t n_classes() const = 0;
    virtual ProbVector predict_proba(const Sample& x) const = 0;
    virtual std::string kind() const = 0;

    int argmax_class(const Sample& x) const;
};

/// c(m, x) = f_k(m (.) x) / K_m; the zero mask scores 0.
double naive_score(const Predictor& p, const Mask& mask, const Sample& x,
                   std::size_t class_index);

/// Softmax MLP trained with cross-entropy; immutable once constructed.
class BuiltinPredictor final : public Predictor {
public:
    BuiltinPredictor(nnet::MlpNetwork net, std::size_t n_classes);

    std::size_t n_features() const override { return net_.input_size(); }
    std::size_t n_classes() const override { return n_classes_; }
    ProbVector predict_proba(const Sample& x) const override;
    std::string kind() const override { return "builtin-mlp"; }

    const nnet::MlpNetwork& network() const { return net_; }

private:
    nnet::MlpNetwork net_;
    std::size_t n_classes_;
};

/// Arbitrary function as a predictor; mainly for composition and tests.
class FunctionPredictor final : public Predictor {
public:
    FunctionPredictor(std::size_t n_features, std::size_t n_classes,
                      std::function<ProbVector(const Sample&)> fn)
        : n_features_(n_features), n_classes_(n_classes), fn_(std::move(fn)) {}

    std::size_t n_features() const override { return n_features_; }
    std::size_t n_classes() const override { return n_classes_; }
    ProbVector predict_proba(const Sample& x) const override { return fn_(x); }
    std::string kind() const override { return "function"; }

private:
    std::size_t n_features_;
    std::size_t n_classes_;
    std::function<ProbVector(const Sample&)> fn_;
};

/// Decorator counting predict_proba calls; used for query-cost assertions.
class CountingPredictor final : public Predictor {
public:
    explicit CountingPredictor(const Predictor& inner) : inner_(inner) {}

    std::size_t n_features() const override { return inner_.n_features(); }
    std::size_t n_classes() const override { return inner_.n_classes(); }
    ProbVector predict_proba(const Sample& x) const override {
        ++queries_;
        return inner_.predict_proba(x);
    }
    std::string kind() const override { return inner_.kind(); }

    std::uint64_t queries() const { return queries_; }
    void reset() { queries_ = 0; }

private:
    const Predictor& inner_;
    mutable std::uint64_t queries_ = 0;
};

/// Serializes predict_proba calls; wraps exclusive-use predictors (bridges)
/// when callers run threaded.
class SynchronizedPredictor final : public Predictor {
public:
    explicit SynchronizedPredictor(const Predictor& inner) : inner_(inner) {}

    std::size_t n_features() const override { return inner_.n_features(); }
    std::size_t n_classes() const override { return inner_.n_classes(); }
    ProbVector predict_proba(const Sample& x) const override {
        std::lock_guard<std::mutex> lock(mu_);
        return inner_.predict_proba(x);
    }
    std::string kind() const override { return inner_.kind(); }

private:
    const Predictor& inner_;
    mutable std::mutex mu_;
};

struct PredictorTrainOptions {
    std::vector<std::size_t> hidden_sizes = {32, 32};
    std::size_t epochs = 40;
    double lr = 1e-3;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
};

struct PredictorTrainLog {
    std::vector<double> epoch_loss; // mean cross-entropy per epoch
};

/// Cross-entropy training of a softmax MLP on a labeled dataset.
BuiltinPredictor train_builtin(const LabeledDataset& data, const PredictorTrainOptions& opts,
                               PredictorTrainLog* log = nullptr);

double accuracy(const Predictor& p, const LabeledDataset& data);

} // namespace fex
