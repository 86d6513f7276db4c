#include "qdcart/quantile.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace qdcart {

std::size_t quantile_rank(QuantileLevel tau, std::size_t m) {
    if (m == 0) throw UsageError("empty segment has no quantile");
    const double t = tau.value() * static_cast<double>(m);
    auto k = static_cast<std::size_t>(std::ceil(t));
    if (k < 1) k = 1;
    if (k > m) k = m;
    return k;
}

SortedSegment SortedSegment::from_unsorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    SortedSegment seg;
    seg.values = std::move(v);
    rebuild_prefix(seg);
    return seg;
}

SortedSegment SortedSegment::single(double v) {
    SortedSegment seg;
    seg.values = {v};
    seg.prefix = {0.0L, static_cast<long double>(v)};
    return seg;
}

void rebuild_prefix(SortedSegment& seg) {
    seg.prefix.resize(seg.values.size() + 1);
    long double run = 0.0L;
    seg.prefix[0] = 0.0L;
    for (std::size_t i = 0; i < seg.values.size(); ++i) {
        run += seg.values[i];
        seg.prefix[i + 1] = run;
    }
}

double empirical_quantile(QuantileLevel tau, const SortedSegment& seg) {
    if (seg.empty()) throw UsageError("empty segment has no quantile");
    return seg.values[quantile_rank(tau, seg.size()) - 1];
}

double check_loss_from_sums(double tau, long double s_k, long double s_m, long long k,
                            long long m, double q) {
    const auto t = static_cast<long double>(tau);
    const long double upper = (s_m - s_k) - static_cast<long double>(m - k) * q;
    const long double lower = static_cast<long double>(k) * q - s_k;
    const long double loss = t * upper + (1.0L - t) * lower;
    return loss > 0.0L ? static_cast<double>(loss) : 0.0;
}

RectCost sql_cost(QuantileLevel tau, const SortedSegment& seg) {
    if (seg.empty()) throw UsageError("empty segment has no check loss");
    const auto m = static_cast<long long>(seg.size());
    const auto k = static_cast<long long>(quantile_rank(tau, seg.size()));
    const double q = seg.values[static_cast<std::size_t>(k - 1)];
    RectCost cost;
    cost.quantile = q;
    cost.sql = check_loss_from_sums(tau.value(), seg.prefix[static_cast<std::size_t>(k)],
                                    seg.prefix[seg.size()], k, m, q);
    return cost;
}

SortedSegment merge(const SortedSegment& a, const SortedSegment& b) {
    SortedSegment out;
    const std::size_t n = a.size() + b.size();
    out.values.resize(n);
    out.prefix.resize(n + 1);
    out.prefix[0] = 0.0L;
    long double run = 0.0L;
    std::size_t i = 0, j = 0;
    for (std::size_t k = 0; k < n; ++k) {
        double v;
        if (j >= b.size() || (i < a.size() && a.values[i] <= b.values[j]))
            v = a.values[i++];
        else
            v = b.values[j++];
        out.values[k] = v;
        run += v;
        out.prefix[k + 1] = run;
    }
    return out;
}

double sse_from_moments(long long m, double s1, double s2) {
    if (m < 1) throw UsageError("moment count must be positive");
    const long double sse = static_cast<long double>(s2) -
                            static_cast<long double>(s1) * s1 / static_cast<long double>(m);
    return sse > 0.0L ? static_cast<double>(sse) : 0.0;
}

PrefixMoments::PrefixMoments(const LatticeShape& shape, std::span<const double> y)
    : shape_(shape) {
    if (static_cast<long long>(y.size()) != shape.cell_count())
        throw DataError("observation count does not match the lattice");
    const int d = shape.ndim();
    long long padded = 1;
    for (int j = d - 1; j >= 0; --j) {
        stride_[static_cast<std::size_t>(j)] = padded;
        padded *= shape.side(j) + 1;
    }
    s1_.assign(static_cast<std::size_t>(padded), 0.0L);
    s2_.assign(static_cast<std::size_t>(padded), 0.0L);

    // table[c] = sum over cells <= c (1-based corners, index 0 = empty)
    std::array<int, kMaxDim> c{};
    for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j)] = 1;
    std::size_t cell = 0;
    for (;;) {
        long long pos = 0;
        for (int j = 0; j < d; ++j)
            pos += c[static_cast<std::size_t>(j)] * stride_[static_cast<std::size_t>(j)];
        const double v = y[cell++];
        long double acc1 = static_cast<long double>(v);
        long double acc2 = static_cast<long double>(v) * v;
        for (unsigned mask = 1; mask < (1u << d); ++mask) {
            long long p = pos;
            for (int j = 0; j < d; ++j)
                if (mask & (1u << j)) p -= stride_[static_cast<std::size_t>(j)];
            const int sign = (std::popcount(mask) % 2 == 1) ? 1 : -1;
            acc1 += sign * s1_[static_cast<std::size_t>(p)];
            acc2 += sign * s2_[static_cast<std::size_t>(p)];
        }
        s1_[static_cast<std::size_t>(pos)] = acc1;
        s2_[static_cast<std::size_t>(pos)] = acc2;

        int j = d - 1;
        for (; j >= 0; --j) {
            if (c[static_cast<std::size_t>(j)] < shape.side(j)) {
                ++c[static_cast<std::size_t>(j)];
                break;
            }
            c[static_cast<std::size_t>(j)] = 1;
        }
        if (j < 0) break;
    }
}

long double PrefixMoments::corner_sum(const std::vector<long double>& table, const Rect& r) const {
    const int d = shape_.ndim();
    long double total = 0.0L;
    for (unsigned mask = 0; mask < (1u << d); ++mask) {
        long long pos = 0;
        int lows = 0;
        for (int j = 0; j < d; ++j) {
            const bool low = mask & (1u << j);
            const int coord = low ? r.lo[static_cast<std::size_t>(j)] - 1 : r.hi[static_cast<std::size_t>(j)];
            lows += low ? 1 : 0;
            pos += coord * stride_[static_cast<std::size_t>(j)];
        }
        total += (lows % 2 == 0) ? table[static_cast<std::size_t>(pos)]
                                 : -table[static_cast<std::size_t>(pos)];
    }
    return total;
}

PrefixMoments::Moments PrefixMoments::rect_moments(const Rect& r) const {
    Moments m;
    m.count = r.size();
    m.sum = static_cast<double>(corner_sum(s1_, r));
    m.sum_sq = static_cast<double>(corner_sum(s2_, r));
    return m;
}

double PrefixMoments::rect_sse(const Rect& r) const {
    const long long m = r.size();
    const long double s1 = corner_sum(s1_, r);
    const long double s2 = corner_sum(s2_, r);
    const long double sse = s2 - s1 * s1 / static_cast<long double>(m);
    return sse > 0.0L ? static_cast<double>(sse) : 0.0;
}

double PrefixMoments::rect_mean(const Rect& r) const {
    return static_cast<double>(corner_sum(s1_, r) / static_cast<long double>(r.size()));
}

}  // namespace qdcart
