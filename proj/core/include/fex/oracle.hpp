#pragma once

#include <cstdint>
#include <vector>

#include "fex/mask_ops.hpp"
#include "fex/predictor.hpp"
#include "fex/types.hpp"

namespace fex {

/// Ground-truth attribution from exhaustive enumeration of all nonzero masks.
struct OracleReport {
    Attribution phi;            // unnormalized, phi_i = sum over masks with m_i=1 of c(m,x)
    double normalization = 0.0; // A(x) = sum over nonzero masks of c(m,x)
    Attribution normalized_phi; // phi / A(x), entries in [0,1]
    std::uint64_t n_masks_evaluated = 0; // 2^N - 1
};

/// Exhaustive empirical attribution for class k. Throws CapacityError when
/// N exceeds the cap and NormalizationError when f is zero on every mask.
OracleReport empirical_attribution(const Predictor& p, const Sample& x,
                                   std::size_t class_index,
                                   std::size_t max_features = kMaxOracleFeatures,
                                   unsigned threads = 1);

/// The distribution p(m|x) = c(m,x) / A(x) over nonzero masks.
class MaskDistribution {
public:
    MaskDistribution(std::size_t n, std::vector<double> probs);

    std::size_t width() const { return n_; }
    /// Probability of a mask by its integer index; index 0 (zero mask) is 0.
    double probability_by_index(std::uint64_t mask_index) const;
    double probability(const Mask& m) const;
    const std::vector<double>& probabilities() const { return probs_; }

    /// E_p[m], computed by enumeration.
    std::vector<double> expectation() const;

private:
    std::size_t n_;
    std::vector<double> probs_; // size 2^n, indexed by mask integer
};

MaskDistribution exact_mask_distribution(const Predictor& p, const Sample& x,
                                         std::size_t class_index,
                                         std::size_t max_features = kMaxOracleFeatures);

/// Unbiased Monte Carlo estimate of phi: masks drawn uniformly from the
/// nonzero masks, scaled by (2^N - 1) / n_samples.
Attribution monte_carlo_attribution(const Predictor& p, const Sample& x,
                                    std::size_t class_index, std::size_t n_samples,
                                    std::uint64_t seed);

} // namespace fex
