#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fex {

// Error categories double as the machine-parsable prefixes the CLI prints.
class FexError : public std::runtime_error {
public:
    FexError(std::string category, const std::string& msg)
        : std::runtime_error(msg), category_(std::move(category)) {}
    const std::string& category() const noexcept { return category_; }

private:
    std::string category_;
};

class DimensionError : public FexError {
public:
    explicit DimensionError(const std::string& msg) : FexError("dimension", msg) {}
};

class CapacityError : public FexError {
public:
    explicit CapacityError(const std::string& msg) : FexError("capacity", msg) {}
};

class NormalizationError : public FexError {
public:
    explicit NormalizationError(const std::string& msg) : FexError("normalization", msg) {}
};

class NumericError : public FexError {
public:
    explicit NumericError(const std::string& msg) : FexError("numeric", msg) {}
};

class ParseError : public FexError {
public:
    ParseError(const std::string& msg, std::size_t line = 0)
        : FexError("parse", line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class ProtocolError : public FexError {
public:
    ProtocolError(const std::string& msg, std::size_t line = 0)
        : FexError("protocol", line > 0 ? msg + " (line " + std::to_string(line) + ")" : msg),
          line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class BridgeError : public FexError {
public:
    explicit BridgeError(const std::string& msg) : FexError("bridge", msg) {}
};

class IoError : public FexError {
public:
    explicit IoError(const std::string& msg) : FexError("io", msg) {}
};

class ConfigError : public FexError {
public:
    explicit ConfigError(const std::string& msg) : FexError("config", msg) {}
};

/// Binary feature-selection vector; entry 1 retains feature i, 0 removes it.
struct Mask {
    std::vector<std::uint8_t> bits;

    Mask() = default;
    explicit Mask(std::vector<std::uint8_t> b) : bits(std::move(b)) {}
    Mask(std::initializer_list<std::uint8_t> b) : bits(b) {}

    std::size_t size() const noexcept { return bits.size(); }
    bool operator==(const Mask& other) const = default;

    /// Mask whose bit i equals bit i of `index` (feature 0 = least-significant bit).
    static Mask from_index(std::uint64_t index, std::size_t n);
    /// Inverse of from_index; requires size() <= 64.
    std::uint64_t to_index() const;
};

/// One input vector, optionally labeled.
struct Sample {
    std::vector<double> features;
    std::optional<int> label;

    Sample() = default;
    explicit Sample(std::vector<double> f, std::optional<int> l = std::nullopt)
        : features(std::move(f)), label(l) {}

    std::size_t size() const noexcept { return features.size(); }
};

/// Non-negative per-feature importance scores. When `normalized` is set the
/// values are expectations of {0,1} coordinates and lie in [0,1].
struct Attribution {
    std::vector<double> values;
    bool normalized = false;

    Attribution() = default;
    explicit Attribution(std::vector<double> v, bool norm = false)
        : values(std::move(v)), normalized(norm) {}

    std::size_t size() const noexcept { return values.size(); }
};

/// Probability vector over K classes; entries >= 0 summing to 1 within 1e-9.
struct ProbVector {
    std::vector<double> probs;

    ProbVector() = default;
    explicit ProbVector(std::vector<double> p) : probs(std::move(p)) {}

    std::size_t size() const noexcept { return probs.size(); }
    double operator[](std::size_t k) const { return probs[k]; }

    /// Throws NumericError unless entries are >= 0 and sum to 1 within `tol`.
    void validate(double tol = 1e-9) const;
};

} // namespace fex
