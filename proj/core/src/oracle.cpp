#include "fex/oracle.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "fex/rng.hpp"

namespace fex {

namespace {

constexpr std::uint64_t kEnumChunk = 4096;

struct PartialSums {
    std::vector<double> phi;
    double a = 0.0;
};

/// Sums c(m,x) contributions over a contiguous range of mask integers.
PartialSums sum_mask_range(const Predictor& p, const Sample& x, std::size_t class_index,
                           std::uint64_t begin, std::uint64_t end) {
    const std::size_t n = x.size();
    PartialSums out;
    out.phi.assign(n, 0.0);
    Sample masked;
    masked.features.resize(n);
    for (std::uint64_t v = begin; v < end; ++v) {
        std::size_t km = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const bool bit = (v >> i) & 1u;
            masked.features[i] = bit ? x.features[i] : 0.0;
            km += bit;
        }
        const ProbVector probs = p.predict_proba(masked);
        const double c = probs[class_index] / static_cast<double>(km);
        out.a += c;
        for (std::size_t i = 0; i < n; ++i) {
            if ((v >> i) & 1u) out.phi[i] += c;
        }
    }
    return out;
}

/// Chunked enumeration over [1, 2^n - 1] with partials combined in chunk
/// order, so the result is identical for every thread count.
PartialSums enumerate_sums(const Predictor& p, const Sample& x, std::size_t class_index,
                           unsigned threads) {
    const std::size_t n = x.size();
    const std::uint64_t total = (std::uint64_t{1} << n) - 1;
    const std::uint64_t n_chunks = (total + kEnumChunk - 1) / kEnumChunk;

    std::vector<PartialSums> partials(n_chunks);
    if (threads <= 1 || n_chunks == 1) {
        for (std::uint64_t c = 0; c < n_chunks; ++c) {
            const std::uint64_t begin = 1 + c * kEnumChunk;
            const std::uint64_t end = std::min(total + 1, begin + kEnumChunk);
            partials[c] = sum_mask_range(p, x, class_index, begin, end);
        }
    } else {
        std::atomic<std::uint64_t> next{0};
        auto worker = [&] {
            for (;;) {
                const std::uint64_t c = next.fetch_add(1);
                if (c >= n_chunks) break;
                const std::uint64_t begin = 1 + c * kEnumChunk;
                const std::uint64_t end = std::min(total + 1, begin + kEnumChunk);
                partials[c] = sum_mask_range(p, x, class_index, begin, end);
            }
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    PartialSums combined;
    combined.phi.assign(n, 0.0);
    for (const PartialSums& part : partials) {
        combined.a += part.a;
        for (std::size_t i = 0; i < n; ++i) combined.phi[i] += part.phi[i];
    }
    return combined;
}

void check_capacity(const Predictor& p, const Sample& x, std::size_t class_index,
                    std::size_t max_features) {
    if (x.size() != p.n_features()) {
        throw DimensionError("sample width != predictor n_features");
    }
    if (class_index >= p.n_classes()) {
        throw DimensionError("class index out of range");
    }
    if (x.size() < 1 || x.size() > max_features) {
        throw CapacityError("exhaustive enumeration limited to " +
                            std::to_string(max_features) + " features, got " +
                            std::to_string(x.size()));
    }
}

} // namespace

OracleReport empirical_attribution(const Predictor& p, const Sample& x,
                                   std::size_t class_index, std::size_t max_features,
                                   unsigned threads) {
    check_capacity(p, x, class_index, max_features);
    const std::size_t n = x.size();
    const PartialSums sums = enumerate_sums(p, x, class_index, threads);

    if (!(sums.a > 0.0)) {
        throw NormalizationError("A(x) = 0: prediction vanishes on every nonzero mask");
    }

    OracleReport report;
    report.phi = Attribution(sums.phi, false);
    report.normalization = sums.a;
    std::vector<double> norm(n);
    for (std::size_t i = 0; i < n; ++i) norm[i] = sums.phi[i] / sums.a;
    report.normalized_phi = Attribution(std::move(norm), true);
    report.n_masks_evaluated = (std::uint64_t{1} << n) - 1;
    return report;
}

MaskDistribution::MaskDistribution(std::size_t n, std::vector<double> probs)
    : n_(n), probs_(std::move(probs)) {
    if (probs_.size() != (std::uint64_t{1} << n)) {
        throw DimensionError("mask distribution needs 2^n entries");
    }
}

double MaskDistribution::probability_by_index(std::uint64_t mask_index) const {
    if (mask_index >= probs_.size()) {
        throw DimensionError("mask index out of range");
    }
    return probs_[mask_index];
}

double MaskDistribution::probability(const Mask& m) const {
    if (m.size() != n_) throw DimensionError("mask width mismatch");
    return probs_[m.to_index()];
}

std::vector<double> MaskDistribution::expectation() const {
    std::vector<double> ex(n_, 0.0);
    for (std::uint64_t v = 0; v < probs_.size(); ++v) {
        const double pm = probs_[v];
        if (pm == 0.0) continue;
        for (std::size_t i = 0; i < n_; ++i) {
            if ((v >> i) & 1u) ex[i] += pm;
        }
    }
    return ex;
}

MaskDistribution exact_mask_distribution(const Predictor& p, const Sample& x,
                                         std::size_t class_index, std::size_t max_features) {
    check_capacity(p, x, class_index, max_features);
    const std::size_t n = x.size();
    const std::uint64_t total = std::uint64_t{1} << n;

    std::vector<double> scores(total, 0.0);
    double a = 0.0;
    for (std::uint64_t v = 1; v < total; ++v) {
        const double c = naive_score(p, Mask::from_index(v, n), x, class_index);
        scores[v] = c;
        a += c;
    }
    if (!(a > 0.0)) {
        throw NormalizationError("A(x) = 0: prediction vanishes on every nonzero mask");
    }
    for (double& s : scores) s /= a;
    return MaskDistribution(n, std::move(scores));
}

Attribution monte_carlo_attribution(const Predictor& p, const Sample& x,
                                    std::size_t class_index, std::size_t n_samples,
                                    std::uint64_t seed) {
    if (n_samples < 1) throw ConfigError("monte carlo needs n_samples >= 1");
    if (x.size() != p.n_features()) {
        throw DimensionError("sample width != predictor n_features");
    }
    if (class_index >= p.n_classes()) {
        throw DimensionError("class index out of range");
    }
    const std::size_t n = x.size();
    Rng rng(derive_seed(seed, 0x6d63617474ULL));

    // uniform over nonzero masks: fair coins per coordinate, rejecting the
    // all-zero draw (works for any n, matches integer sampling for n <= 64)
    auto draw_mask = [&]() {
        Mask m;
        m.bits.resize(n);
        for (;;) {
            bool any = false;
            std::size_t i = 0;
            while (i < n) {
                std::uint64_t word = rng.next_u64();
                const std::size_t take = std::min<std::size_t>(64, n - i);
                for (std::size_t b = 0; b < take; ++b, ++i) {
                    const std::uint8_t bit = static_cast<std::uint8_t>((word >> b) & 1u);
                    m.bits[i] = bit;
                    any = any || bit;
                }
            }
            if (any) return m;
            i = 0;
        }
    };

    std::vector<double> acc(n, 0.0);
    for (std::size_t s = 0; s < n_samples; ++s) {
        const Mask m = draw_mask();
        const double c = naive_score(p, m, x, class_index);
        if (c == 0.0) continue;
        for (std::size_t i = 0; i < n; ++i) {
            if (m.bits[i]) acc[i] += c;
        }
    }
    const double scale =
        (std::exp2(static_cast<double>(n)) - 1.0) / static_cast<double>(n_samples);
    for (double& v : acc) v *= scale;
    return Attribution(std::move(acc), false);
}

} // namespace fex
