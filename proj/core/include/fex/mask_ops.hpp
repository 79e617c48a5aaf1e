#pragma once

#include <cstdint>
#include <iterator>

#include "fex/types.hpp"

namespace fex {

inline constexpr std::size_t kMaxOracleFeatures = 20;

/// Elementwise product m (.) x; removed positions become exactly 0.0.
Sample apply_mask(const Mask& mask, const Sample& x);

/// K_m: number of retained (1) entries.
std::size_t retained_count(const Mask& mask);

/// Iterates the 2^n - 1 nonzero masks of width n in ascending integer order
/// (feature 0 is the least-significant bit).
class MaskRange {
public:
    explicit MaskRange(std::size_t n, std::size_t max_features = kMaxOracleFeatures);

    class iterator {
    public:
        using iterator_category = std::input_iterator_tag;
        using value_type = Mask;
        using difference_type = std::int64_t;
        using pointer = const Mask*;
        using reference = Mask;

        iterator(std::uint64_t index, std::size_t n) : index_(index), n_(n) {}
        Mask operator*() const { return Mask::from_index(index_, n_); }
        iterator& operator++() { ++index_; return *this; }
        iterator operator++(int) { iterator tmp = *this; ++index_; return tmp; }
        bool operator==(const iterator& o) const { return index_ == o.index_; }

    private:
        std::uint64_t index_;
        std::size_t n_;
    };

    iterator begin() const { return iterator(1, n_); }
    iterator end() const { return iterator(count_ + 1, n_); }

    std::size_t width() const noexcept { return n_; }
    /// 2^n - 1.
    std::uint64_t count() const noexcept { return count_; }

private:
    std::size_t n_;
    std::uint64_t count_;
};

inline MaskRange enumerate_nonzero_masks(std::size_t n,
                                         std::size_t max_features = kMaxOracleFeatures) {
    return MaskRange(n, max_features);
}

} // namespace fex
