#pragma once

#include <functional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fex/oracle.hpp"
#include "fex/predictor.hpp"
#include "fex/synthdata.hpp"
#include "fex/trainer.hpp"
#include "fex/types.hpp"

namespace fex {

enum class MaskOrder {
    Descending, // most important masked first (positive AUC, lower is better)
    Ascending,  // least important masked first (negative AUC, higher is better)
};

struct CurveReport {
    std::vector<double> fractions; // strictly increasing, 0.0 .. 1.0 inclusive
    std::vector<double> scores;    // f_k of the progressively masked input
    double auc = 0.0;              // trapezoid over fractions
};

/// Progressive masking curve: point d masks the top-d features in the given
/// importance order (ties broken by ascending feature index).
CurveReport deletion_curve(const Attribution& attr, const Predictor& p, const Sample& x,
                           std::size_t class_index, MaskOrder order);

void write_curve_csv(const CurveReport& curve, const std::string& path);

using AttributionSource = std::function<Attribution(const Sample&, std::size_t)>;

struct BatchAucReport {
    double positive_auc = 0.0; // desc-order mean, lower is better
    double negative_auc = 0.0; // asc-order mean, higher is better
    std::size_t n_samples = 0;
};

/// Mean AUCs over the dataset; each sample is explained and evaluated for its
/// predicted class (argmax of f).
BatchAucReport batch_auc(const AttributionSource& source, const Predictor& p,
                         const LabeledDataset& data, unsigned threads = 1);

/// |top-k(attr) intersect true_features| / k.
double recovery_precision(const Attribution& attr, const std::set<std::size_t>& true_features,
                          std::size_t k);

struct AgreementReport {
    double pearson = 0.0;
    double spearman = 0.0;
};

/// Correlation of an attribution against the oracle's normalized phi.
AgreementReport oracle_agreement(const Attribution& attr, const OracleReport& report);

double pearson_correlation(std::span<const double> a, std::span<const double> b);
double spearman_correlation(std::span<const double> a, std::span<const double> b);

struct BenchmarkReport {
    double explainer_seconds_per_explanation = 0.0;
    double mc_seconds_per_explanation = 0.0;
    double speedup = 0.0;
    std::uint64_t explainer_predictor_queries = 0; // must be 0
    std::uint64_t mc_predictor_queries = 0;        // mc_samples per explanation
    std::size_t n_explanations = 0;
    std::size_t mc_samples = 0;
};

/// Wall time per explanation for one g forward versus Monte Carlo with
/// `mc_samples` predictor queries, plus exact query counts.
BenchmarkReport benchmark_inference(const ExplainerModel& explainer, const Predictor& p,
                                    const LabeledDataset& data, std::size_t mc_samples = 100,
                                    std::size_t n_explanations = 1000);

} // namespace fex
