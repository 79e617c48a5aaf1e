#include "fex/nnet.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fex/rng.hpp"

namespace fex::nnet {

namespace {

void affine(const std::vector<double>& w, const std::vector<double>& b,
            std::span<const double> in, std::vector<double>& out) {
    const std::size_t n_out = b.size();
    const std::size_t n_in = in.size();
    out.assign(n_out, 0.0);
    for (std::size_t r = 0; r < n_out; ++r) {
        double acc = b[r];
        const double* row = w.data() + r * n_in;
        for (std::size_t c = 0; c < n_in; ++c) acc += row[c] * in[c];
        out[r] = acc;
    }
}

void apply_output_activation(Activation act, std::vector<double>& z) {
    switch (act) {
    case Activation::Identity:
        return;
    case Activation::Sigmoid:
        for (double& v : z) v = 1.0 / (1.0 + std::exp(-v));
        return;
    case Activation::Softmax: {
        const double zmax = *std::max_element(z.begin(), z.end());
        double sum = 0.0;
        for (double& v : z) {
            v = std::exp(v - zmax);
            sum += v;
        }
        for (double& v : z) v /= sum;
        return;
    }
    }
}

} // namespace

const char* activation_name(Activation a) {
    switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Softmax: return "softmax";
    }
    return "identity";
}

Activation activation_from_name(const std::string& name) {
    if (name == "identity") return Activation::Identity;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "softmax") return Activation::Softmax;
    throw ConfigError("unknown activation '" + name + "'");
}

void GradientBundle::add_scaled(const GradientBundle& other, double scale) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        for (std::size_t i = 0; i < weights[l].size(); ++i) {
            weights[l][i] += scale * other.weights[l][i];
        }
        for (std::size_t i = 0; i < biases[l].size(); ++i) {
            biases[l][i] += scale * other.biases[l][i];
        }
    }
}

void GradientBundle::scale(double s) {
    for (auto& w : weights)
        for (double& v : w) v *= s;
    for (auto& b : biases)
        for (double& v : b) v *= s;
}

bool GradientBundle::all_finite() const {
    for (const auto& w : weights)
        for (double v : w)
            if (!std::isfinite(v)) return false;
    for (const auto& b : biases)
        for (double v : b)
            if (!std::isfinite(v)) return false;
    return true;
}

MlpNetwork::MlpNetwork(std::vector<std::size_t> layer_sizes, Activation output_activation)
    : layer_sizes_(std::move(layer_sizes)), output_activation_(output_activation) {
    if (layer_sizes_.size() < 2) {
        throw ConfigError("network needs at least input and output layers");
    }
    for (std::size_t s : layer_sizes_) {
        if (s == 0) throw ConfigError("zero-width layer rejected");
    }
    const std::size_t n_layers = layer_sizes_.size() - 1;
    weights_.resize(n_layers);
    biases_.resize(n_layers);
    for (std::size_t l = 0; l < n_layers; ++l) {
        weights_[l].assign(layer_sizes_[l] * layer_sizes_[l + 1], 0.0);
        biases_[l].assign(layer_sizes_[l + 1], 0.0);
    }
}

MlpNetwork MlpNetwork::xavier(std::vector<std::size_t> layer_sizes,
                              Activation output_activation, std::uint64_t seed) {
    MlpNetwork net(std::move(layer_sizes), output_activation);
    Rng rng(seed);
    for (std::size_t l = 0; l < net.layer_count(); ++l) {
        const double fan_in = static_cast<double>(net.layer_sizes_[l]);
        const double fan_out = static_cast<double>(net.layer_sizes_[l + 1]);
        const double limit = std::sqrt(6.0 / (fan_in + fan_out));
        for (double& w : net.weights_[l]) w = rng.uniform(-limit, limit);
    }
    return net;
}

std::size_t MlpNetwork::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        n += weights_[l].size() + biases_[l].size();
    }
    return n;
}

std::vector<double> MlpNetwork::forward(std::span<const double> x) const {
    if (x.size() != input_size()) {
        throw DimensionError("input length " + std::to_string(x.size()) +
                             " != network input " + std::to_string(input_size()));
    }
    std::vector<double> cur(x.begin(), x.end());
    std::vector<double> next;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        affine(weights_[l], biases_[l], cur, next);
        if (l + 1 < weights_.size()) {
            for (double& v : next) v = std::tanh(v);
        } else {
            apply_output_activation(output_activation_, next);
        }
        cur.swap(next);
    }
    return cur;
}

GradientBundle MlpNetwork::backward(std::span<const double> x,
                                    std::span<const double> upstream) const {
    if (x.size() != input_size()) {
        throw DimensionError("backward: input size mismatch");
    }
    if (upstream.size() != output_size()) {
        throw DimensionError("backward: upstream size mismatch");
    }

    // Forward tape: post-activation values per layer (index 0 = input).
    const std::size_t n_layers = weights_.size();
    std::vector<std::vector<double>> act(n_layers + 1);
    act[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < n_layers; ++l) {
        affine(weights_[l], biases_[l], act[l], act[l + 1]);
        if (l + 1 < n_layers) {
            for (double& v : act[l + 1]) v = std::tanh(v);
        } else {
            apply_output_activation(output_activation_, act[l + 1]);
        }
    }

    GradientBundle g = zero_gradients();

    // delta = dL/d(pre-activation) of the current layer.
    std::vector<double> delta(output_size());
    const std::vector<double>& y = act[n_layers];
    switch (output_activation_) {
    case Activation::Identity:
        for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = upstream[i];
        break;
    case Activation::Sigmoid:
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta[i] = upstream[i] * y[i] * (1.0 - y[i]);
        }
        break;
    case Activation::Softmax: {
        double dot = 0.0;
        for (std::size_t i = 0; i < delta.size(); ++i) dot += upstream[i] * y[i];
        for (std::size_t i = 0; i < delta.size(); ++i) {
            delta[i] = y[i] * (upstream[i] - dot);
        }
        break;
    }
    }

    for (std::size_t li = n_layers; li-- > 0;) {
        const std::vector<double>& in = act[li];
        const std::size_t n_out = biases_[li].size();
        const std::size_t n_in = in.size();
        for (std::size_t r = 0; r < n_out; ++r) {
            g.biases[li][r] = delta[r];
            double* grow = g.weights[li].data() + r * n_in;
            const double d = delta[r];
            for (std::size_t c = 0; c < n_in; ++c) grow[c] = d * in[c];
        }
        if (li == 0) break;
        std::vector<double> prev_delta(n_in, 0.0);
        for (std::size_t r = 0; r < n_out; ++r) {
            const double d = delta[r];
            const double* row = weights_[li].data() + r * n_in;
            for (std::size_t c = 0; c < n_in; ++c) prev_delta[c] += d * row[c];
        }
        // chain through the tanh of layer li-1's output
        for (std::size_t c = 0; c < n_in; ++c) {
            prev_delta[c] *= 1.0 - in[c] * in[c];
        }
        delta.swap(prev_delta);
    }
    return g;
}

GradientBundle MlpNetwork::zero_gradients() const {
    GradientBundle g;
    g.weights.resize(weights_.size());
    g.biases.resize(biases_.size());
    for (std::size_t l = 0; l < weights_.size(); ++l) {
        g.weights[l].assign(weights_[l].size(), 0.0);
        g.biases[l].assign(biases_[l].size(), 0.0);
    }
    return g;
}

AdamState AdamState::for_network(const MlpNetwork& net) {
    AdamState s;
    const auto& w = net.weights();
    const auto& b = net.biases();
    s.m_weights.resize(w.size());
    s.v_weights.resize(w.size());
    s.m_biases.resize(b.size());
    s.v_biases.resize(b.size());
    for (std::size_t l = 0; l < w.size(); ++l) {
        s.m_weights[l].assign(w[l].size(), 0.0);
        s.v_weights[l].assign(w[l].size(), 0.0);
        s.m_biases[l].assign(b[l].size(), 0.0);
        s.v_biases[l].assign(b[l].size(), 0.0);
    }
    return s;
}

void adam_step(MlpNetwork& net, const GradientBundle& grads, AdamState& state, double lr) {
    auto& w = net.weights();
    auto& b = net.biases();
    if (grads.weights.size() != w.size()) {
        throw DimensionError("adam_step: gradient shape mismatch");
    }
    state.step += 1;
    const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));

    auto update = [&](std::vector<double>& p, const std::vector<double>& g,
                      std::vector<double>& m, std::vector<double>& v) {
        if (g.size() != p.size()) throw DimensionError("adam_step: gradient shape mismatch");
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = kAdamBeta1 * m[i] + (1.0 - kAdamBeta1) * g[i];
            v[i] = kAdamBeta2 * v[i] + (1.0 - kAdamBeta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            p[i] -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
        }
    };
    for (std::size_t l = 0; l < w.size(); ++l) {
        update(w[l], grads.weights[l], state.m_weights[l], state.v_weights[l]);
        update(b[l], grads.biases[l], state.m_biases[l], state.v_biases[l]);
    }
}

double finite_diff_check(const MlpNetwork& net, std::span<const double> x,
                         const LossProbe& probe, double step) {
    const std::vector<double> y = net.forward(x);
    const std::vector<double> up = probe.grad(y);
    const GradientBundle analytic = net.backward(x, up);

    MlpNetwork probe_net = net;
    double max_rel = 0.0;
    auto check_param = [&](double& p, double analytic_g) {
        const double saved = p;
        p = saved + step;
        const double hi = probe.value(probe_net.forward(x));
        p = saved - step;
        const double lo = probe.value(probe_net.forward(x));
        p = saved;
        const double numeric = (hi - lo) / (2.0 * step);
        const double rel =
            std::abs(analytic_g - numeric) / std::max(1e-12, std::abs(numeric));
        max_rel = std::max(max_rel, rel);
    };
    for (std::size_t l = 0; l < probe_net.layer_count(); ++l) {
        auto& w = probe_net.weights()[l];
        for (std::size_t i = 0; i < w.size(); ++i) check_param(w[i], analytic.weights[l][i]);
        auto& b = probe_net.biases()[l];
        for (std::size_t i = 0; i < b.size(); ++i) check_param(b[i], analytic.biases[l][i]);
    }
    return max_rel;
}

} // namespace fex::nnet
