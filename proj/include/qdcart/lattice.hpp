#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qdcart/errors.hpp"

namespace qdcart {

inline constexpr int kMaxDim = 4;

/// Dense integer key identifying one dyadic rectangle of a lattice.
/// Computed by mixed-radix packing of per-dimension dyadic-interval
/// indices; bijective with the dyadic rectangles of the shape.
using DyadicId = std::uint64_t;

/// A d-dimensional lattice with per-dimension side lengths n_1..n_d.
/// Cells are addressed by 1-based coordinates and stored row-major with
/// the first dimension slowest.
class LatticeShape {
public:
    explicit LatticeShape(std::vector<int> dims);
    LatticeShape(std::initializer_list<int> dims)
        : LatticeShape(std::vector<int>(dims)) {}

    int ndim() const { return static_cast<int>(dims_.size()); }
    int side(int dim) const { return dims_[static_cast<std::size_t>(dim)]; }
    const std::vector<int>& dims() const { return dims_; }
    long long cell_count() const { return cells_; }

    bool operator==(const LatticeShape& other) const { return dims_ == other.dims_; }

private:
    std::vector<int> dims_;
    long long cells_ = 0;
};

/// Axis-aligned discrete rectangle with 1-based inclusive bounds.
struct Rect {
    std::array<int, kMaxDim> lo{};
    std::array<int, kMaxDim> hi{};
    int ndim = 0;

    int length(int dim) const { return hi[static_cast<std::size_t>(dim)] - lo[static_cast<std::size_t>(dim)] + 1; }
    long long size() const {
        long long s = 1;
        for (int j = 0; j < ndim; ++j) s *= length(j);
        return s;
    }
    bool operator==(const Rect&) const = default;
};

/// The rectangle covering the whole lattice.
Rect full_rect(const LatticeShape& shape);

/// Splits `r` along `dim` (0-based) at the floor midpoint
/// m = floor((lo+hi)/2): left = [lo,m], right = [m+1,hi].
/// Returns nothing when the interval in `dim` is a singleton.
/// Throws UsageError for an out-of-range dimension.
std::optional<std::pair<Rect, Rect>> dyadic_split(const Rect& r, int dim);

struct CanonicalSplit {
    int dim;
    Rect left;
    Rect right;
};

/// The dyadic split of the first (dictionary-order) non-singleton
/// dimension; nothing iff `r` is a single cell.
std::optional<CanonicalSplit> canonical_split(const Rect& r);

/// 1-based row-major linear index of a cell given 1-based coordinates.
long long linear_index(const LatticeShape& shape, std::span<const int> coords);

/// 1-based linear indices of every cell of `r`, in row-major order.
std::vector<long long> cells(const LatticeShape& shape, const Rect& r);

namespace detail {

/// Applies `fn` to the 0-based buffer offset of every cell of `r`.
template <class Fn>
void for_each_cell_offset(const LatticeShape& shape, const Rect& r, Fn&& fn) {
    const int d = shape.ndim();
    std::array<long long, kMaxDim> stride{};
    stride[static_cast<std::size_t>(d - 1)] = 1;
    for (int j = d - 2; j >= 0; --j)
        stride[static_cast<std::size_t>(j)] =
            stride[static_cast<std::size_t>(j + 1)] * shape.side(j + 1);

    std::array<int, kMaxDim> c{};
    for (int j = 0; j < d; ++j) c[static_cast<std::size_t>(j)] = r.lo[static_cast<std::size_t>(j)];
    long long off = 0;
    for (int j = 0; j < d; ++j)
        off += (c[static_cast<std::size_t>(j)] - 1) * stride[static_cast<std::size_t>(j)];
    for (;;) {
        fn(off);
        int j = d - 1;
        for (; j >= 0; --j) {
            if (c[static_cast<std::size_t>(j)] < r.hi[static_cast<std::size_t>(j)]) {
                ++c[static_cast<std::size_t>(j)];
                off += stride[static_cast<std::size_t>(j)];
                break;
            }
            off -= stride[static_cast<std::size_t>(j)] *
                   (c[static_cast<std::size_t>(j)] - r.lo[static_cast<std::size_t>(j)]);
            c[static_cast<std::size_t>(j)] = r.lo[static_cast<std::size_t>(j)];
        }
        if (j < 0) break;
    }
}

}  // namespace detail

/// One dyadic interval of a single dimension. `left`/`right` index the
/// child intervals within the same dimension's table, -1 for singletons.
struct DyadicInterval {
    int lo = 0;
    int hi = 0;
    int left = -1;
    int right = -1;

    int length() const { return hi - lo + 1; }
    bool singleton() const { return lo == hi; }
};

/// Precomputed dyadic geometry of one lattice shape: the per-dimension
/// interval trees, mixed-radix id packing, and the bottom-up visitation
/// order over rectangle classes (a class = one tuple of per-dimension
/// interval lengths; all rectangles in a class share their size and the
/// feasibility of every split).
///
/// Layouts are immutable after construction and safe to share across
/// threads. `get` caches one instance per shape.
class DyadicLayout {
public:
    explicit DyadicLayout(LatticeShape shape);

    // dims_ points into member storage
    DyadicLayout(const DyadicLayout&) = delete;
    DyadicLayout& operator=(const DyadicLayout&) = delete;

    static std::shared_ptr<const DyadicLayout> get(const LatticeShape& shape);

    const LatticeShape& shape() const { return shape_; }
    int ndim() const { return shape_.ndim(); }
    std::uint64_t rect_count() const { return rect_count_; }
    DyadicId root_id() const { return root_id_; }

    const std::vector<DyadicInterval>& intervals(int dim) const {
        return dims_[static_cast<std::size_t>(dim)].items;
    }
    std::uint64_t stride(int dim) const { return strides_[static_cast<std::size_t>(dim)]; }

    /// Rectangle bounds for an id (decodes the mixed-radix key).
    Rect rect_of(DyadicId id) const;

    /// Id of the rectangle formed by the given per-dimension interval indices.
    DyadicId encode(std::span<const int> interval_idx) const;

    /// One visitation class: every rectangle whose per-dimension interval
    /// lengths equal `len`. Classes are visited in nondecreasing total
    /// length (sum of side lengths), so both children of any split of a
    /// rectangle precede it.
    struct ClassInfo {
        std::array<int, kMaxDim> group{};   // index into groups(dim)
        std::array<int, kMaxDim> len{};     // interval length per dimension
        int total_len = 0;
        long long size = 0;                 // product of len
        int canonical_dim = -1;             // first non-singleton dim, -1 for cells
    };

    const std::vector<ClassInfo>& classes() const { return classes_; }

    /// Interval indices of one length group of one dimension.
    const std::vector<int>& group_members(int dim, int group) const {
        return dims_[static_cast<std::size_t>(dim)].groups[static_cast<std::size_t>(group)];
    }

    /// Calls fn(id, interval_idx) for every rectangle of the class.
    /// `interval_idx` points at ndim() ints, valid only during the call.
    template <class Fn>
    void for_each_rect(const ClassInfo& cls, Fn&& fn) const {
        const int d = ndim();
        std::array<const std::vector<int>*, kMaxDim> members{};
        std::array<int, kMaxDim> pos{};
        std::array<int, kMaxDim> ival{};
        DyadicId id = 0;
        for (int j = 0; j < d; ++j) {
            members[static_cast<std::size_t>(j)] =
                &group_members(j, cls.group[static_cast<std::size_t>(j)]);
            ival[static_cast<std::size_t>(j)] = (*members[static_cast<std::size_t>(j)])[0];
            id += static_cast<DyadicId>(ival[static_cast<std::size_t>(j)]) *
                  strides_[static_cast<std::size_t>(j)];
        }
        for (;;) {
            fn(id, std::span<const int>(ival.data(), static_cast<std::size_t>(d)));
            int j = d - 1;
            for (; j >= 0; --j) {
                auto& m = *members[static_cast<std::size_t>(j)];
                if (++pos[static_cast<std::size_t>(j)] < static_cast<int>(m.size())) {
                    int next = m[static_cast<std::size_t>(pos[static_cast<std::size_t>(j)])];
                    id += static_cast<DyadicId>(next - ival[static_cast<std::size_t>(j)]) *
                          strides_[static_cast<std::size_t>(j)];
                    ival[static_cast<std::size_t>(j)] = next;
                    break;
                }
                pos[static_cast<std::size_t>(j)] = 0;
                int first = m[0];
                id += static_cast<DyadicId>(first - ival[static_cast<std::size_t>(j)]) *
                      strides_[static_cast<std::size_t>(j)];
                ival[static_cast<std::size_t>(j)] = first;
            }
            if (j < 0) break;
        }
    }

    /// Number of rectangles that consume a rectangle's sorted segment as a
    /// canonical-split child. A rectangle C is a canonical child of P iff
    /// P equals C with dimension j replaced by the tree parent of C_j and
    /// every dimension before j is a singleton in C.
    int canonical_parent_count(std::span<const int> interval_idx) const;

private:
    struct DimTable {
        std::vector<DyadicInterval> items;          // items[0] = [1, n]
        std::vector<int> lengths;                   // distinct lengths, ascending
        std::vector<std::vector<int>> groups;       // interval indices per length
    };

    void build_dim(int n, DimTable& t);

    LatticeShape shape_;
    std::array<DimTable, kMaxDim> dims_raw_{};
    std::span<DimTable> dims_;
    std::array<std::uint64_t, kMaxDim> strides_{};
    std::uint64_t rect_count_ = 0;
    DyadicId root_id_ = 0;
    std::vector<ClassInfo> classes_;
};

/// Every dyadic rectangle of the lattice paired with its id, in
/// nondecreasing order of rectangle length (sum of side lengths).
std::vector<std::pair<DyadicId, Rect>> enumerate_dyadic_rects(const LatticeShape& shape);

}  // namespace qdcart
