#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "fex/predictor.hpp"

namespace fex {

/// Child process speaking the newline-delimited JSON wire protocol:
///   handshake (child -> parent): {"fex_bridge":1,"n_features":N,"n_classes":K}
///   request   (parent -> child): {"id":<u64>,"input":[f64,...]}
///   response  (child -> parent): {"id":<u64>,"probs":[f64,...]}
/// Exactly one request is in flight at a time; a handle is exclusive-use.
class BridgePredictor final : public Predictor {
public:
    ~BridgePredictor() override;

    BridgePredictor(const BridgePredictor&) = delete;
    BridgePredictor& operator=(const BridgePredictor&) = delete;

    std::size_t n_features() const override;
    std::size_t n_classes() const override;
    ProbVector predict_proba(const Sample& x) const override;
    std::string kind() const override { return "blackbox-bridge"; }

private:
    friend std::unique_ptr<BridgePredictor> open_blackbox_bridge(
        const std::string& command, std::chrono::milliseconds timeout);
    struct Impl;
    explicit BridgePredictor(std::unique_ptr<Impl> impl);
    std::unique_ptr<Impl> impl_;
};

/// Spawns `command` via /bin/sh and validates the handshake line.
/// `timeout` bounds each wire interaction (default 10 s).
std::unique_ptr<BridgePredictor> open_blackbox_bridge(
    const std::string& command,
    std::chrono::milliseconds timeout = std::chrono::milliseconds(10000));

/// Serves `p` over the wire protocol on the given streams until EOF.
/// This is the child-side counterpart of open_blackbox_bridge.
void serve_bridge(const Predictor& p, std::istream& in, std::ostream& out);

} // namespace fex
