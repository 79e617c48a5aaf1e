#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fex/types.hpp"

namespace fex {

/// Labeled samples plus generator provenance. ground_truth maps a class index
/// to the feature indices whose values drive that class's evidence.
struct LabeledDataset {
    std::vector<Sample> samples;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    std::map<int, std::set<std::size_t>> ground_truth;

    std::string task;
    std::uint64_t seed = 0;
    double threshold = 0.0;

    std::size_t size() const { return samples.size(); }
};

/// Features ~ U[0,1] i.i.d.; label 1 when the mean over a seed-chosen subset
/// of k_informative features exceeds `threshold`. The subset is recorded as
/// class 1's ground truth (high planted values are class-1 evidence).
LabeledDataset gen_planted(std::size_t n_samples, std::size_t n_features,
                           std::size_t k_informative, double threshold,
                           std::uint64_t seed);

/// Two classes decided by disjoint seed-chosen feature pairs S0 and S1:
/// label 0 when mean(x[S0]) > mean(x[S1]), else 1.
LabeledDataset gen_two_class_disjoint(std::size_t n_samples, std::size_t n_features,
                                      std::uint64_t seed);

/// CSV layout: header f0,...,f{N-1},label; shortest round-trip decimal floats.
/// Metadata (K, ground truth, generator parameters) lives in <path>.meta.json.
void save_csv(const LabeledDataset& data, const std::string& path);
LabeledDataset load_csv(const std::string& path);

} // namespace fex
