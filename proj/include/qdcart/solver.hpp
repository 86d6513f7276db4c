#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qdcart/lattice.hpp"
#include "qdcart/quantile.hpp"

namespace qdcart {

enum class Method { qdcart, dcart, qort1d };

std::string method_name(Method m);
Method method_from_name(const std::string& name);

struct SolverConfig {
    QuantileLevel tau{0.5};
    double lambda = 1.0;     // penalty per partition piece, > 0
    long long gamma = 1;     // minimum rectangle size, >= 1
    Method method = Method::qdcart;
    bool keep_segments = false;  // debug: retain every dyadic rectangle's sorted segment
};

/// Bottom-up DP tables over dyadic rectangles. `split[id]` is -1 where
/// not splitting is optimal, the 0-based split dimension otherwise, and
/// kAbsent for rectangles the solve never visited (size below gamma).
struct DpTables {
    static constexpr std::int8_t kAbsent = -2;
    std::vector<double> opt;
    std::vector<std::int8_t> split;
};

struct SplitNode {
    Rect rect;
    int dim = -1;   // -1 marks a leaf
    int left = -1;  // child indices into Partition::nodes
    int right = -1;
};

/// A recursive dyadic (or, for the 1-d tree solver, hierarchical)
/// partition: the split tree plus its leaf rectangles in DFS order.
struct Partition {
    std::vector<SplitNode> nodes;  // nodes[0] is the root
    std::vector<Rect> leaves;

    std::size_t leaf_count() const { return leaves.size(); }
};

struct FitResult {
    std::vector<double> theta;  // fitted value per cell, row-major
    Partition partition;
    double objective = 0.0;     // loss + lambda * leaf count
    SolverConfig config;
};

/// Precomputed, lambda-independent state for quantile fits on one data
/// array: the per-rectangle quantiles and check losses, built bottom-up
/// by merging sorted segments along canonical splits. Solving for a
/// particular lambda is then a cheap table sweep, so a lambda grid costs
/// one preparation plus one sweep per grid point.
///
/// Immutable after construction; concurrent solves are safe.
class QdcartProblem {
public:
    QdcartProblem(const LatticeShape& shape, std::span<const double> y, QuantileLevel tau,
                  long long gamma, bool keep_segments = false);

    DpTables solve(double lambda) const;
    FitResult fit(double lambda) const;

    const LatticeShape& shape() const { return layout_->shape(); }
    const DyadicLayout& layout() const { return *layout_; }
    QuantileLevel tau() const { return tau_; }
    long long gamma() const { return gamma_; }

    double sql_of(DyadicId id) const { return sql_[id]; }
    double quantile_of(DyadicId id) const { return qhat_[id]; }
    double sql_root() const { return sql_[layout_->root_id()]; }

    /// Populated only when constructed with keep_segments.
    const std::vector<SortedSegment>& segments() const { return segments_; }

private:
    void build_tables(std::span<const double> y, bool keep_segments);

    std::shared_ptr<const DyadicLayout> layout_;
    QuantileLevel tau_;
    long long gamma_;
    std::vector<double> sql_;
    std::vector<double> qhat_;
    std::vector<SortedSegment> segments_;
};

/// Mean-regression counterpart: leaf cost is the within-rectangle sum of
/// squared residuals, evaluated from global prefix-moment tables.
class DcartProblem {
public:
    DcartProblem(const LatticeShape& shape, std::span<const double> y, long long gamma);

    DpTables solve(double lambda) const;
    FitResult fit(double lambda) const;

    const LatticeShape& shape() const { return layout_->shape(); }
    const DyadicLayout& layout() const { return *layout_; }
    long long gamma() const { return gamma_; }
    double sse_of(DyadicId id) const { return cost_[id]; }

private:
    std::shared_ptr<const DyadicLayout> layout_;
    long long gamma_;
    std::vector<double> cost_;
    std::vector<double> mean_;
};

/// Exact minimizer of sum_i rho_tau(y_i - theta_i) + lambda * |partition|
/// over recursive dyadic partitions whose rectangles all have size >=
/// gamma. Ties prefer not splitting, then the smallest dimension.
FitResult fit_qdcart(const LatticeShape& shape, std::span<const double> y,
                     const SolverConfig& cfg);

/// Same search space with squared-error leaf costs and mean leaf values.
FitResult fit_dcart(const LatticeShape& shape, std::span<const double> y,
                    const SolverConfig& cfg);

/// 1-d exact segmentation DP over all partitions of [1, n] into segments
/// of length >= gamma (hierarchical splits: cuts at any position).
FitResult fit_qort_1d(const LatticeShape& shape, std::span<const double> y,
                      const SolverConfig& cfg);

/// Dispatches on cfg.method.
FitResult fit(const LatticeShape& shape, std::span<const double> y, const SolverConfig& cfg);

/// Walks SPLIT decisions top-down from the root. Throws InternalError on
/// a missing table entry; validates every leaf against gamma.
Partition extract_partition(const DyadicLayout& layout, const DpTables& tables,
                            long long gamma);

/// Assigns each cell the empirical tau-quantile of its leaf. Idempotent.
std::vector<double> project(const LatticeShape& shape, const Partition& partition,
                            std::span<const double> y, QuantileLevel tau);

namespace detail {

/// Shared bottom-up OPT/SPLIT sweep; `leaf_cost` is indexed by DyadicId
/// and read only for rectangles of size >= gamma.
DpTables solve_dp(const DyadicLayout& layout, std::span<const double> leaf_cost,
                  long long gamma, double lambda);

void validate_input(const LatticeShape& shape, std::span<const double> y, long long gamma,
                    double lambda);

}  // namespace detail

}  // namespace qdcart
