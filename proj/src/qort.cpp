#include <algorithm>
#include <cmath>
#include <limits>

#include "qdcart/detail/quantile_index.hpp"
#include "qdcart/solver.hpp"

namespace qdcart {

// Segmentation DP: E(j) = min over i <= j-gamma+1 of E(i-1) + SQL([i,j]) + lambda,
// with SQL([i,j]) maintained incrementally while i scans down from j through an
// insert-only order-statistics index. O(n^2 log n) overall.
FitResult fit_qort_1d(const LatticeShape& shape, std::span<const double> y,
                      const SolverConfig& cfg) {
    if (shape.ndim() != 1) throw UsageError("qort1d requires a 1-d lattice");
    detail::validate_input(shape, y, cfg.gamma, cfg.lambda);
    const long long n = shape.cell_count();
    const long long gamma = cfg.gamma;
    const double lambda = cfg.lambda;
    const double tau = cfg.tau.value();

    std::vector<double> universe(y.begin(), y.end());
    std::sort(universe.begin(), universe.end());
    universe.erase(std::unique(universe.begin(), universe.end()), universe.end());
    std::vector<std::size_t> pos_of(static_cast<std::size_t>(n));
    for (long long i = 0; i < n; ++i)
        pos_of[static_cast<std::size_t>(i)] = static_cast<std::size_t>(
            std::lower_bound(universe.begin(), universe.end(), y[static_cast<std::size_t>(i)]) -
            universe.begin());

    detail::QuantileIndex index(universe);

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> best(static_cast<std::size_t>(n) + 1, inf);
    std::vector<long long> back(static_cast<std::size_t>(n) + 1, -1);
    best[0] = 0.0;

    for (long long j = 1; j <= n; ++j) {
        index.clear();
        long double total = 0.0L;
        for (long long i = j; i >= 1; --i) {
            index.insert(pos_of[static_cast<std::size_t>(i - 1)]);
            total += y[static_cast<std::size_t>(i - 1)];
            const long long m = j - i + 1;
            if (m < gamma) continue;
            if (!std::isfinite(best[static_cast<std::size_t>(i - 1)])) continue;
            const auto k =
                static_cast<long long>(quantile_rank(cfg.tau, static_cast<std::size_t>(m)));
            const auto info = index.kth(k);
            const long double s_k =
                info.sum_below + static_cast<long double>(k - info.count_below) * info.value;
            const double seg_loss = check_loss_from_sums(tau, s_k, total, k, m, info.value);
            const double cand = (best[static_cast<std::size_t>(i - 1)] + seg_loss) + lambda;
            if (cand < best[static_cast<std::size_t>(j)]) {
                best[static_cast<std::size_t>(j)] = cand;
                back[static_cast<std::size_t>(j)] = i;
            }
        }
    }
    if (!std::isfinite(best[static_cast<std::size_t>(n)]))
        throw InfeasibleError("no segmentation satisfies the minimum segment length");

    std::vector<std::pair<long long, long long>> segments;  // [lo, hi], collected right to left
    for (long long j = n; j > 0;) {
        const long long i = back[static_cast<std::size_t>(j)];
        segments.emplace_back(i, j);
        j = i - 1;
    }
    std::reverse(segments.begin(), segments.end());

    FitResult result;
    result.objective = best[static_cast<std::size_t>(n)];
    result.theta.assign(static_cast<std::size_t>(n), 0.0);

    // left-deep split tree: each cut separates the leading segment
    auto make_rect = [&](long long lo, long long hi) {
        Rect r;
        r.ndim = 1;
        r.lo[0] = static_cast<int>(lo);
        r.hi[0] = static_cast<int>(hi);
        return r;
    };
    Partition part;
    int parent = -1;
    for (std::size_t s = 0; s < segments.size(); ++s) {
        const auto [lo, hi] = segments[s];
        const bool last = s + 1 == segments.size();
        const int node = static_cast<int>(part.nodes.size());
        part.nodes.push_back(SplitNode{make_rect(lo, static_cast<long long>(n)), -1, -1, -1});
        if (parent >= 0) {
            part.nodes[static_cast<std::size_t>(parent)].right = node;
        }
        if (!last) {
            const int leaf = static_cast<int>(part.nodes.size());
            part.nodes.push_back(SplitNode{make_rect(lo, hi), -1, -1, -1});
            part.nodes[static_cast<std::size_t>(node)].dim = 0;
            part.nodes[static_cast<std::size_t>(node)].left = leaf;
            parent = node;
        }
        part.leaves.push_back(make_rect(lo, hi));

        std::vector<double> vals(y.begin() + lo - 1, y.begin() + hi);
        const auto seg = SortedSegment::from_unsorted(std::move(vals));
        const double q = empirical_quantile(cfg.tau, seg);
        for (long long c = lo; c <= hi; ++c) result.theta[static_cast<std::size_t>(c - 1)] = q;
    }

    result.partition = std::move(part);
    result.config = cfg;
    result.config.method = Method::qort1d;
    return result;
}

}  // namespace qdcart
