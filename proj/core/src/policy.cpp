#include "fex/policy.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace fex {

double clamp_lambda(double v) {
    return std::clamp(v, kLambdaClamp, 1.0 - kLambdaClamp);
}

BernoulliPolicy::BernoulliPolicy(std::vector<double> lambda) : lambda_(std::move(lambda)) {
    if (lambda_.empty()) throw DimensionError("empty policy");
    for (double& l : lambda_) {
        if (!std::isfinite(l)) throw NumericError("non-finite policy parameter");
        l = clamp_lambda(l);
    }
}

std::vector<Mask> BernoulliPolicy::sample_masks(std::size_t t, Rng& rng) const {
    if (t < 1) throw ConfigError("trajectory length must be >= 1");
    std::vector<Mask> out;
    out.reserve(t);
    for (std::size_t s = 0; s < t; ++s) {
        Mask m;
        m.bits.resize(lambda_.size());
        for (std::size_t i = 0; i < lambda_.size(); ++i) {
            m.bits[i] = rng.bernoulli(lambda_[i]) ? 1 : 0;
        }
        out.push_back(std::move(m));
    }
    return out;
}

std::vector<Mask> BernoulliPolicy::sample_masks(std::size_t t, std::uint64_t seed) const {
    Rng rng(seed);
    return sample_masks(t, rng);
}

double BernoulliPolicy::log_prob(const Mask& m) const {
    if (m.size() != lambda_.size()) {
        throw DimensionError("mask width " + std::to_string(m.size()) +
                             " != policy width " + std::to_string(lambda_.size()));
    }
    double lp = 0.0;
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
        lp += m.bits[i] ? std::log(lambda_[i]) : std::log(1.0 - lambda_[i]);
    }
    return lp;
}

std::vector<double> BernoulliPolicy::log_prob_grad(const Mask& m) const {
    if (m.size() != lambda_.size()) throw DimensionError("mask width != policy width");
    std::vector<double> g(lambda_.size());
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
        g[i] = m.bits[i] ? 1.0 / lambda_[i] : -1.0 / (1.0 - lambda_[i]);
    }
    return g;
}

double BernoulliPolicy::entropy() const {
    double h = 0.0;
    for (double l : lambda_) {
        h -= l * std::log(l) + (1.0 - l) * std::log(1.0 - l);
    }
    return h;
}

std::vector<double> BernoulliPolicy::entropy_grad() const {
    std::vector<double> g(lambda_.size());
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
        g[i] = std::log((1.0 - lambda_[i]) / lambda_[i]);
    }
    return g;
}

Attribution BernoulliPolicy::mean() const {
    return Attribution(lambda_, true);
}

} // namespace fex
