#pragma once

#include <cstdint>
#include <vector>

#include "fex/rng.hpp"
#include "fex/types.hpp"

namespace fex {

inline constexpr double kLambdaClamp = 1e-4;

/// Clamps v into [kLambdaClamp, 1 - kLambdaClamp].
double clamp_lambda(double v);

/// Multivariate Bernoulli mask distribution q = Bern(lambda). Immutable;
/// sampling takes a caller-owned RNG stream.
class BernoulliPolicy {
public:
    /// Entries are clamped into [kLambdaClamp, 1 - kLambdaClamp].
    explicit BernoulliPolicy(std::vector<double> lambda);

    const std::vector<double>& lambda() const { return lambda_; }
    std::size_t size() const { return lambda_.size(); }

    /// t independent draws; coordinate i is 1 with probability lambda_i.
    std::vector<Mask> sample_masks(std::size_t t, Rng& rng) const;
    std::vector<Mask> sample_masks(std::size_t t, std::uint64_t seed) const;

    /// sum_i [m_i ln l_i + (1-m_i) ln(1-l_i)]; finite by clamping.
    double log_prob(const Mask& m) const;

    /// d log_prob / d lambda_i = m_i/l_i - (1-m_i)/(1-l_i).
    std::vector<double> log_prob_grad(const Mask& m) const;

    /// sum_i of the per-coordinate binary entropy; >= 0.
    double entropy() const;

    /// d entropy / d lambda_i = ln((1-l_i)/l_i).
    std::vector<double> entropy_grad() const;

    /// Closed-form E[m] = lambda, flagged as a normalized attribution.
    Attribution mean() const;

private:
    std::vector<double> lambda_;
};

} // namespace fex
