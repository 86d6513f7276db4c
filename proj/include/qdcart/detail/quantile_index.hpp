#pragma once

#include <bit>
#include <cstddef>
#include <vector>

#include "qdcart/errors.hpp"

namespace qdcart::detail {

/// Insert-only multiset over a fixed sorted value universe, backed by a
/// pair of Fenwick trees. Supports rank selection together with the count
/// and sum of all strictly smaller elements in O(log U).
class QuantileIndex {
public:
    explicit QuantileIndex(std::vector<double> sorted_unique)
        : universe_(std::move(sorted_unique)),
          cnt_(universe_.size() + 1, 0),
          sum_(universe_.size() + 1, 0.0L) {
        highbit_ = universe_.empty() ? 0 : std::bit_floor(universe_.size());
    }

    void clear() {
        std::fill(cnt_.begin(), cnt_.end(), 0);
        std::fill(sum_.begin(), sum_.end(), 0.0L);
        size_ = 0;
    }

    /// Inserts one copy of universe[pos].
    void insert(std::size_t pos) {
        const double v = universe_[pos];
        for (std::size_t i = pos + 1; i < cnt_.size(); i += i & (~i + 1)) {
            cnt_[i] += 1;
            sum_[i] += v;
        }
        ++size_;
    }

    long long size() const { return size_; }

    struct KthInfo {
        double value = 0.0;           // the k-th smallest element
        long long count_below = 0;    // elements strictly smaller than value
        long double sum_below = 0.0L; // their sum
    };

    /// k in [1, size()].
    KthInfo kth(long long k) const {
        if (k < 1 || k > size_) throw InternalError("rank out of range");
        std::size_t pos = 0;
        long long rem = k;
        KthInfo info;
        for (std::size_t b = highbit_; b > 0; b >>= 1) {
            const std::size_t next = pos + b;
            if (next < cnt_.size() && cnt_[next] < rem) {
                pos = next;
                rem -= cnt_[pos];
                info.count_below += cnt_[pos];
                info.sum_below += sum_[pos];
            }
        }
        info.value = universe_[pos];
        return info;
    }

private:
    std::vector<double> universe_;
    std::vector<long long> cnt_;
    std::vector<long double> sum_;
    std::size_t highbit_ = 0;
    long long size_ = 0;
};

}  // namespace qdcart::detail
