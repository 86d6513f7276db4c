#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "qdcart/errors.hpp"
#include "qdcart/lattice.hpp"

namespace qdcart {

/// Quantile level in the open interval (0, 1).
class QuantileLevel {
public:
    explicit QuantileLevel(double tau) : tau_(tau) {
        if (!(tau > 0.0 && tau < 1.0)) throw UsageError("quantile level must lie in (0, 1)");
    }
    double value() const { return tau_; }

private:
    double tau_;
};

/// Check loss: tau*x for x >= 0, (tau-1)*x otherwise.
inline double rho(QuantileLevel tau, double x) {
    return x >= 0.0 ? tau.value() * x : (tau.value() - 1.0) * x;
}

/// 1-based order-statistic rank of the empirical tau-quantile of m values:
/// ceil(tau*m), which equals tau*m when that product is an integer.
std::size_t quantile_rank(QuantileLevel tau, std::size_t m);

/// Sorted observation values of one rectangle together with prefix sums.
/// prefix[k] is the sum of the k smallest values; the extended-precision
/// accumulator keeps the closed-form check-loss evaluation accurate to a
/// few ulp even when the prefix magnitudes dwarf the loss.
struct SortedSegment {
    std::vector<double> values;
    std::vector<long double> prefix;

    static SortedSegment from_unsorted(std::vector<double> v);
    static SortedSegment single(double v);

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    void clear() {
        values = {};
        prefix = {};
    }
};

/// Rebuilds `prefix` from `values` (assumed sorted).
void rebuild_prefix(SortedSegment& seg);

/// Left-endpoint empirical tau-quantile: the order statistic at
/// quantile_rank. Minimizes a -> sum_i rho(values[i] - a); when the
/// minimizer is an interval, returns its left endpoint.
double empirical_quantile(QuantileLevel tau, const SortedSegment& seg);

struct RectCost {
    double sql = 0.0;       // sum of check loss about the quantile
    double quantile = 0.0;  // the fitted value
};

/// Check loss of m sorted values about their rank-k order statistic q,
/// evaluated from prefix sums:
///   tau*[(S_m - S_k) - (m-k)*q] + (1-tau)*[k*q - S_k].
double check_loss_from_sums(double tau, long double s_k, long double s_m, long long k,
                            long long m, double q);

/// Quantile and total check loss about it for one segment.
RectCost sql_cost(QuantileLevel tau, const SortedSegment& seg);

/// Merges two sorted segments in O(|a|+|b|), rebuilding prefix sums.
SortedSegment merge(const SortedSegment& a, const SortedSegment& b);

/// Within-rectangle sum of squared residuals about the mean, from moments.
double sse_from_moments(long long m, double s1, double s2);

/// d-dimensional prefix-sum tables of y and y^2 for O(2^d) rectangle
/// moment queries (mean-regression leaf costs).
class PrefixMoments {
public:
    PrefixMoments(const LatticeShape& shape, std::span<const double> y);

    struct Moments {
        long long count = 0;
        double sum = 0.0;
        double sum_sq = 0.0;
    };

    Moments rect_moments(const Rect& r) const;
    double rect_sse(const Rect& r) const;
    double rect_mean(const Rect& r) const;

private:
    long double corner_sum(const std::vector<long double>& table, const Rect& r) const;

    LatticeShape shape_;
    std::array<long long, kMaxDim> stride_{};
    std::vector<long double> s1_;
    std::vector<long double> s2_;
};

}  // namespace qdcart
