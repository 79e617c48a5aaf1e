#include "fex/mask_ops.hpp"

#include <string>

namespace fex {

Mask Mask::from_index(std::uint64_t index, std::size_t n) {
    Mask m;
    m.bits.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        m.bits[i] = static_cast<std::uint8_t>((index >> i) & 1u);
    }
    return m;
}

std::uint64_t Mask::to_index() const {
    if (bits.size() > 64) {
        throw CapacityError("mask wider than 64 bits has no integer index");
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < bits.size(); ++i) {
        if (bits[i]) v |= (std::uint64_t{1} << i);
    }
    return v;
}

void ProbVector::validate(double tol) const {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw NumericError("probability entry negative or NaN");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
        throw NumericError("probabilities sum to " + std::to_string(sum) + ", expected 1");
    }
}

Sample apply_mask(const Mask& mask, const Sample& x) {
    if (mask.size() != x.size()) {
        throw DimensionError("mask length " + std::to_string(mask.size()) +
                             " != feature length " + std::to_string(x.size()));
    }
    Sample out;
    out.features.resize(x.size());
    out.label = x.label;
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.features[i] = mask.bits[i] ? x.features[i] : 0.0;
    }
    return out;
}

std::size_t retained_count(const Mask& mask) {
    std::size_t k = 0;
    for (auto b : mask.bits) k += b;
    return k;
}

MaskRange::MaskRange(std::size_t n, std::size_t max_features) : n_(n) {
    if (n < 1 || n > max_features) {
        throw CapacityError("mask enumeration width " + std::to_string(n) +
                            " outside [1, " + std::to_string(max_features) + "]");
    }
    count_ = (std::uint64_t{1} << n) - 1;
}

} // namespace fex
