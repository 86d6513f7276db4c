#include "qdcart/lattice.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace qdcart {

LatticeShape::LatticeShape(std::vector<int> dims) : dims_(std::move(dims)) {
    if (dims_.empty() || static_cast<int>(dims_.size()) > kMaxDim)
        throw UsageError("lattice dimension must be between 1 and " + std::to_string(kMaxDim));
    cells_ = 1;
    for (int n : dims_) {
        if (n < 1) throw UsageError("lattice sides must be positive");
        if (cells_ > (1LL << 40) / n) throw UsageError("lattice too large");
        cells_ *= n;
    }
}

Rect full_rect(const LatticeShape& shape) {
    Rect r;
    r.ndim = shape.ndim();
    for (int j = 0; j < r.ndim; ++j) {
        r.lo[static_cast<std::size_t>(j)] = 1;
        r.hi[static_cast<std::size_t>(j)] = shape.side(j);
    }
    return r;
}

std::optional<std::pair<Rect, Rect>> dyadic_split(const Rect& r, int dim) {
    if (dim < 0 || dim >= r.ndim) throw UsageError("split dimension out of range");
    const auto j = static_cast<std::size_t>(dim);
    if (r.lo[j] == r.hi[j]) return std::nullopt;
    const int mid = (r.lo[j] + r.hi[j]) / 2;
    Rect left = r, right = r;
    left.hi[j] = mid;
    right.lo[j] = mid + 1;
    return std::make_pair(left, right);
}

std::optional<CanonicalSplit> canonical_split(const Rect& r) {
    for (int j = 0; j < r.ndim; ++j) {
        if (auto s = dyadic_split(r, j)) return CanonicalSplit{j, s->first, s->second};
    }
    return std::nullopt;
}

long long linear_index(const LatticeShape& shape, std::span<const int> coords) {
    if (static_cast<int>(coords.size()) != shape.ndim())
        throw UsageError("coordinate count does not match the lattice dimension");
    long long off = 0;
    for (int j = 0; j < shape.ndim(); ++j) {
        const int c = coords[static_cast<std::size_t>(j)];
        if (c < 1 || c > shape.side(j)) throw UsageError("coordinate out of range");
        off = off * shape.side(j) + (c - 1);
    }
    return off + 1;
}

std::vector<long long> cells(const LatticeShape& shape, const Rect& r) {
    std::vector<long long> out;
    out.reserve(static_cast<std::size_t>(r.size()));
    detail::for_each_cell_offset(shape, r, [&](long long off) { out.push_back(off + 1); });
    return out;
}

void DyadicLayout::build_dim(int n, DimTable& t) {
    t.items.reserve(static_cast<std::size_t>(2 * n - 1));
    t.items.push_back(DyadicInterval{1, n, -1, -1});
    for (std::size_t i = 0; i < t.items.size(); ++i) {
        if (t.items[i].singleton()) continue;
        const int lo = t.items[i].lo, hi = t.items[i].hi;
        const int mid = (lo + hi) / 2;
        const int left = static_cast<int>(t.items.size());
        t.items.push_back(DyadicInterval{lo, mid, -1, -1});
        const int right = static_cast<int>(t.items.size());
        t.items.push_back(DyadicInterval{mid + 1, hi, -1, -1});
        t.items[i].left = left;
        t.items[i].right = right;
    }
    // distinct lengths and groups
    std::vector<int> lens;
    for (const auto& iv : t.items) lens.push_back(iv.length());
    std::sort(lens.begin(), lens.end());
    lens.erase(std::unique(lens.begin(), lens.end()), lens.end());
    t.lengths = lens;
    t.groups.assign(t.lengths.size(), {});
    for (std::size_t i = 0; i < t.items.size(); ++i) {
        const auto it = std::lower_bound(t.lengths.begin(), t.lengths.end(), t.items[i].length());
        t.groups[static_cast<std::size_t>(it - t.lengths.begin())].push_back(static_cast<int>(i));
    }
}

DyadicLayout::DyadicLayout(LatticeShape shape) : shape_(std::move(shape)) {
    const int d = shape_.ndim();
    dims_ = std::span<DimTable>(dims_raw_.data(), static_cast<std::size_t>(d));
    for (int j = 0; j < d; ++j) build_dim(shape_.side(j), dims_[static_cast<std::size_t>(j)]);

    rect_count_ = 1;
    for (int j = d - 1; j >= 0; --j) {
        strides_[static_cast<std::size_t>(j)] = (j == d - 1)
            ? 1
            : strides_[static_cast<std::size_t>(j + 1)] *
                  dims_[static_cast<std::size_t>(j + 1)].items.size();
        rect_count_ *= dims_[static_cast<std::size_t>(j)].items.size();
    }
    root_id_ = 0;  // the full interval has index 0 in every dimension

    // enumerate classes and order them bottom-up by total length
    std::vector<ClassInfo> classes;
    ClassInfo cur;
    auto rec = [&](auto&& self, int dim) -> void {
        if (dim == d) {
            cur.total_len = 0;
            cur.size = 1;
            cur.canonical_dim = -1;
            for (int j = 0; j < d; ++j) {
                cur.total_len += cur.len[static_cast<std::size_t>(j)];
                cur.size *= cur.len[static_cast<std::size_t>(j)];
                if (cur.canonical_dim < 0 && cur.len[static_cast<std::size_t>(j)] > 1)
                    cur.canonical_dim = j;
            }
            classes.push_back(cur);
            return;
        }
        const auto& t = dims_[static_cast<std::size_t>(dim)];
        for (std::size_t g = 0; g < t.lengths.size(); ++g) {
            cur.group[static_cast<std::size_t>(dim)] = static_cast<int>(g);
            cur.len[static_cast<std::size_t>(dim)] = t.lengths[g];
            self(self, dim + 1);
        }
    };
    rec(rec, 0);
    std::stable_sort(classes.begin(), classes.end(),
                     [](const ClassInfo& a, const ClassInfo& b) { return a.total_len < b.total_len; });
    classes_ = std::move(classes);
}

Rect DyadicLayout::rect_of(DyadicId id) const {
    Rect r;
    r.ndim = ndim();
    for (int j = 0; j < ndim(); ++j) {
        const auto& t = dims_[static_cast<std::size_t>(j)];
        const auto idx = static_cast<std::size_t>((id / strides_[static_cast<std::size_t>(j)]) %
                                                  t.items.size());
        r.lo[static_cast<std::size_t>(j)] = t.items[idx].lo;
        r.hi[static_cast<std::size_t>(j)] = t.items[idx].hi;
    }
    return r;
}

DyadicId DyadicLayout::encode(std::span<const int> interval_idx) const {
    DyadicId id = 0;
    for (int j = 0; j < ndim(); ++j)
        id += static_cast<DyadicId>(interval_idx[static_cast<std::size_t>(j)]) *
              strides_[static_cast<std::size_t>(j)];
    return id;
}

int DyadicLayout::canonical_parent_count(std::span<const int> interval_idx) const {
    int count = 0;
    for (int j = 0; j < ndim(); ++j) {
        const auto& iv =
            dims_[static_cast<std::size_t>(j)].items[static_cast<std::size_t>(
                interval_idx[static_cast<std::size_t>(j)])];
        if (interval_idx[static_cast<std::size_t>(j)] != 0) ++count;  // index 0 is [1, n]
        if (!iv.singleton()) break;
    }
    return count;
}

std::shared_ptr<const DyadicLayout> DyadicLayout::get(const LatticeShape& shape) {
    static std::mutex mu;
    static std::map<std::vector<int>, std::shared_ptr<const DyadicLayout>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(shape.dims());
    if (it != cache.end()) return it->second;
    auto layout = std::make_shared<const DyadicLayout>(shape);
    cache.emplace(shape.dims(), layout);
    return layout;
}

std::vector<std::pair<DyadicId, Rect>> enumerate_dyadic_rects(const LatticeShape& shape) {
    const auto layout = DyadicLayout::get(shape);
    std::vector<std::pair<DyadicId, Rect>> out;
    out.reserve(layout->rect_count());
    for (const auto& cls : layout->classes()) {
        layout->for_each_rect(cls, [&](DyadicId id, std::span<const int>) {
            out.emplace_back(id, layout->rect_of(id));
        });
    }
    return out;
}

}  // namespace qdcart
