#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "fex/types.hpp"

namespace fex::nnet {

enum class Activation { Identity, Sigmoid, Softmax };

const char* activation_name(Activation a);
Activation activation_from_name(const std::string& name);

/// Per-parameter gradients, shapes mirroring the owning network.
struct GradientBundle {
    std::vector<std::vector<double>> weights;
    std::vector<std::vector<double>> biases;

    void add_scaled(const GradientBundle& other, double scale);
    void scale(double s);
    bool all_finite() const;
};

/// Fully connected network: tanh hidden layers, configurable output head,
/// 64-bit floats throughout.
class MlpNetwork {
public:
    /// layer_sizes = [input, hidden..., output]; every size >= 1.
    MlpNetwork(std::vector<std::size_t> layer_sizes, Activation output_activation);

    /// Xavier-uniform weights, zero biases, deterministic under `seed`.
    static MlpNetwork xavier(std::vector<std::size_t> layer_sizes,
                             Activation output_activation, std::uint64_t seed);

    std::vector<double> forward(std::span<const double> x) const;

    /// Gradient of upstream . output with respect to every parameter.
    GradientBundle backward(std::span<const double> x,
                            std::span<const double> upstream) const;

    GradientBundle zero_gradients() const;

    std::size_t input_size() const { return layer_sizes_.front(); }
    std::size_t output_size() const { return layer_sizes_.back(); }
    std::size_t layer_count() const { return weights_.size(); }
    const std::vector<std::size_t>& layer_sizes() const { return layer_sizes_; }
    Activation output_activation() const { return output_activation_; }

    std::vector<std::vector<double>>& weights() { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    std::size_t parameter_count() const;

private:
    std::vector<std::size_t> layer_sizes_;
    std::vector<std::vector<double>> weights_; // row-major, out x in
    std::vector<std::vector<double>> biases_;
    Activation output_activation_;
};

/// Adam moment estimates; call adam_step with a fixed (beta1, beta2, eps).
struct AdamState {
    std::vector<std::vector<double>> m_weights, v_weights;
    std::vector<std::vector<double>> m_biases, v_biases;
    std::uint64_t step = 0;

    static AdamState for_network(const MlpNetwork& net);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;

/// One bias-corrected Adam update of the network parameters in place.
void adam_step(MlpNetwork& net, const GradientBundle& grads, AdamState& state, double lr);

/// Scalar probe over the network output, with its analytic output-gradient.
struct LossProbe {
    std::function<double(std::span<const double>)> value;
    std::function<std::vector<double>(std::span<const double>)> grad;
};

/// Max over parameters of |analytic - numeric| / max(1e-12, |numeric|),
/// numeric via central differences with the given step.
double finite_diff_check(const MlpNetwork& net, std::span<const double> x,
                         const LossProbe& probe, double step = 1e-5);

} // namespace fex::nnet
