#pragma once

#include <cstdint>
#include <string>

#include "fex/predictor.hpp"
#include "fex/trainer.hpp"

namespace fex {

/// On-disk model format: a JSON document tagged "fex-ckpt" version 1 with a
/// plain architecture descriptor and base64-encoded little-endian IEEE-754
/// parameter blocks. Round-trips reproduce forward outputs bit-identically.
inline constexpr const char* kCheckpointFormat = "fex-ckpt";
inline constexpr int kCheckpointVersion = 1;

void save_predictor_checkpoint(const std::string& path, const BuiltinPredictor& p,
                               std::uint64_t seed, const std::string& config_json = "{}");
BuiltinPredictor load_predictor_checkpoint(const std::string& path);

void save_explainer_checkpoint(const std::string& path, const ExplainerModel& g,
                               std::uint64_t seed, const std::string& config_json = "{}");
ExplainerModel load_explainer_checkpoint(const std::string& path);

void save_value_checkpoint(const std::string& path, const ValueModel& v,
                           std::uint64_t seed, const std::string& config_json = "{}");
ValueModel load_value_checkpoint(const std::string& path);

/// Peeks at the "kind" field ("predictor" | "explainer" | "value").
std::string checkpoint_kind(const std::string& path);

} // namespace fex
