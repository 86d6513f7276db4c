#include "qdcart/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qdcart {

std::string method_name(Method m) {
    switch (m) {
        case Method::qdcart: return "qdcart";
        case Method::dcart: return "dcart";
        case Method::qort1d: return "qort1d";
    }
    throw InternalError("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "qdcart") return Method::qdcart;
    if (name == "dcart") return Method::dcart;
    if (name == "qort1d") return Method::qort1d;
    throw UsageError("unknown method '" + name + "'");
}

namespace detail {

void validate_input(const LatticeShape& shape, std::span<const double> y, long long gamma,
                    double lambda) {
    if (static_cast<long long>(y.size()) != shape.cell_count())
        throw DataError("observation count does not match the lattice");
    for (double v : y)
        if (!std::isfinite(v)) throw DataError("observations must be finite");
    if (gamma < 1) throw UsageError("gamma must be at least 1");
    if (gamma > shape.cell_count())
        throw InfeasibleError("gamma exceeds the number of lattice cells");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw UsageError("lambda must be positive and finite");
}

DpTables solve_dp(const DyadicLayout& layout, std::span<const double> leaf_cost,
                  long long gamma, double lambda) {
    const int d = layout.ndim();
    DpTables t;
    t.opt.assign(layout.rect_count(), std::numeric_limits<double>::infinity());
    t.split.assign(layout.rect_count(), DpTables::kAbsent);

    for (const auto& cls : layout.classes()) {
        if (cls.size < gamma) continue;

        // split feasibility is class-constant: child sizes depend only on
        // the per-dimension lengths
        std::array<bool, kMaxDim> allowed{};
        bool any_allowed = false;
        for (int j = 0; j < d; ++j) {
            const int len = cls.len[static_cast<std::size_t>(j)];
            if (len <= 1) continue;
            const long long base = cls.size / len;
            const long long left = base * ((len + 1) / 2);
            const long long right = base * (len / 2);
            if (std::min(left, right) >= gamma) {
                allowed[static_cast<std::size_t>(j)] = true;
                any_allowed = true;
            }
        }

        layout.for_each_rect(cls, [&](DyadicId id, std::span<const int> ival) {
            double best = leaf_cost[id] + lambda;
            std::int8_t best_dim = -1;
            if (any_allowed) {
                for (int j = 0; j < d; ++j) {
                    if (!allowed[static_cast<std::size_t>(j)]) continue;
                    const auto& iv = layout.intervals(j)[static_cast<std::size_t>(
                        ival[static_cast<std::size_t>(j)])];
                    const std::uint64_t stride = layout.stride(j);
                    const DyadicId l =
                        id + (static_cast<DyadicId>(iv.left) - ival[static_cast<std::size_t>(j)]) * stride;
                    const DyadicId r =
                        id + (static_cast<DyadicId>(iv.right) - ival[static_cast<std::size_t>(j)]) * stride;
                    const double cand = t.opt[l] + t.opt[r];
                    if (cand < best) {
                        best = cand;
                        best_dim = static_cast<std::int8_t>(j);
                    }
                }
            }
            t.opt[id] = best;
            t.split[id] = best_dim;
        });
    }
    return t;
}

}  // namespace detail

namespace {

struct ExtractedLeaf {
    Rect rect;
    DyadicId id;
};

Partition extract_impl(const DyadicLayout& layout, const DpTables& tables, long long gamma,
                       std::vector<ExtractedLeaf>* leaf_ids) {
    Partition part;
    struct Item {
        DyadicId id;
        int node;
    };
    std::vector<Item> stack;
    part.nodes.push_back(SplitNode{layout.rect_of(layout.root_id()), -1, -1, -1});
    stack.push_back(Item{layout.root_id(), 0});
    while (!stack.empty()) {
        const Item item = stack.back();
        stack.pop_back();
        if (item.id >= tables.split.size() || tables.split[item.id] == DpTables::kAbsent)
            throw InternalError("missing DP table entry during extraction");
        const int dim = tables.split[item.id];
        const Rect rect = part.nodes[static_cast<std::size_t>(item.node)].rect;
        if (dim < 0) {
            if (rect.size() < gamma) throw InternalError("extracted leaf smaller than gamma");
            part.nodes[static_cast<std::size_t>(item.node)].dim = -1;
            part.leaves.push_back(rect);
            if (leaf_ids) leaf_ids->push_back(ExtractedLeaf{rect, item.id});
            continue;
        }
        const auto halves = dyadic_split(rect, dim);
        if (!halves) throw InternalError("split recorded for a singleton interval");

        // child ids: replace this dimension's interval by its tree children
        const auto ival = static_cast<std::size_t>(
            (item.id / layout.stride(dim)) % layout.intervals(dim).size());
        const auto& iv = layout.intervals(dim)[ival];
        const DyadicId l =
            item.id + (static_cast<DyadicId>(iv.left) - ival) * layout.stride(dim);
        const DyadicId r =
            item.id + (static_cast<DyadicId>(iv.right) - ival) * layout.stride(dim);

        const int left_node = static_cast<int>(part.nodes.size());
        part.nodes.push_back(SplitNode{halves->first, -1, -1, -1});
        const int right_node = static_cast<int>(part.nodes.size());
        part.nodes.push_back(SplitNode{halves->second, -1, -1, -1});
        part.nodes[static_cast<std::size_t>(item.node)].dim = dim;
        part.nodes[static_cast<std::size_t>(item.node)].left = left_node;
        part.nodes[static_cast<std::size_t>(item.node)].right = right_node;
        // right pushed first so the left subtree is emitted first (DFS order)
        stack.push_back(Item{r, right_node});
        stack.push_back(Item{l, left_node});
    }
    return part;
}

}  // namespace

Partition extract_partition(const DyadicLayout& layout, const DpTables& tables,
                            long long gamma) {
    return extract_impl(layout, tables, gamma, nullptr);
}

QdcartProblem::QdcartProblem(const LatticeShape& shape, std::span<const double> y,
                             QuantileLevel tau, long long gamma, bool keep_segments)
    : layout_(DyadicLayout::get(shape)), tau_(tau), gamma_(gamma) {
    detail::validate_input(shape, y, gamma, 1.0);
    build_tables(y, keep_segments);
}

// Bottom-up sweep over length classes. Each class owns one arena holding
// the sorted values of all its rectangles; a rectangle's slice is written
// once by merging its canonical children and read by every canonical
// parent. The check loss is captured during the merge from a running
// extended-precision sum (the same accumulation order as a prefix array,
// so the result is bit-identical to sql_cost on the stored segment).
void QdcartProblem::build_tables(std::span<const double> y, bool keep_segments) {
    const auto R = layout_->rect_count();
    const int d = layout_->ndim();
    sql_.assign(R, 0.0);
    qhat_.assign(R, 0.0);

    struct Arena {
        std::unique_ptr<double[]> data;
        long long live = 0;  // rectangles whose slices may still be read
    };
    const auto& classes = layout_->classes();
    std::vector<Arena> arenas(classes.size());
    std::vector<const double*> slice(R, nullptr);
    std::vector<std::int32_t> arena_of(R, -1);
    std::vector<std::uint8_t> refs(R, 0);

    std::array<long long, kMaxDim> cell_stride{};
    cell_stride[static_cast<std::size_t>(d - 1)] = 1;
    for (int j = d - 2; j >= 0; --j)
        cell_stride[static_cast<std::size_t>(j)] =
            cell_stride[static_cast<std::size_t>(j + 1)] * layout_->shape().side(j + 1);

    auto consume = [&](DyadicId child) {
        if (keep_segments) return;
        if (--refs[child] == 0) {
            Arena& a = arenas[static_cast<std::size_t>(arena_of[child])];
            if (--a.live == 0) a.data.reset();
        }
    };

    for (std::size_t ci = 0; ci < classes.size(); ++ci) {
        const auto& cls = classes[ci];
        const int cd = cls.canonical_dim;
        const auto m = cls.size;
        const auto k = static_cast<long long>(
            quantile_rank(tau_, static_cast<std::size_t>(m)));

        long long count = 1;
        for (int j = 0; j < d; ++j)
            count *= static_cast<long long>(
                layout_->group_members(j, cls.group[static_cast<std::size_t>(j)]).size());
        Arena& arena = arenas[ci];
        arena.data.reset(new double[static_cast<std::size_t>(count * m)]);
        arena.live = count;
        double* out = arena.data.get();

        long long left_size = 0;
        if (cd >= 0) left_size = (m / cls.len[static_cast<std::size_t>(cd)]) *
                                 ((cls.len[static_cast<std::size_t>(cd)] + 1) / 2);

        layout_->for_each_rect(cls, [&](DyadicId id, std::span<const int> ival) {
            double q = 0.0;
            long double s_k = 0.0L, s_m = 0.0L;
            if (cd < 0) {
                long long off = 0;
                for (int j = 0; j < d; ++j) {
                    const auto& iv = layout_->intervals(j)[static_cast<std::size_t>(
                        ival[static_cast<std::size_t>(j)])];
                    off += static_cast<long long>(iv.lo - 1) *
                           cell_stride[static_cast<std::size_t>(j)];
                }
                const double v = y[static_cast<std::size_t>(off)];
                out[0] = v;
                q = v;
                s_k = s_m = static_cast<long double>(v);
            } else {
                const auto& iv = layout_->intervals(cd)[static_cast<std::size_t>(
                    ival[static_cast<std::size_t>(cd)])];
                const std::uint64_t stride = layout_->stride(cd);
                const DyadicId l =
                    id + (static_cast<DyadicId>(iv.left) - ival[static_cast<std::size_t>(cd)]) *
                             stride;
                const DyadicId r =
                    id + (static_cast<DyadicId>(iv.right) - ival[static_cast<std::size_t>(cd)]) *
                             stride;
                const double* a = slice[l];
                const double* b = slice[r];
                const long long na = left_size, nb = m - left_size;
                long long i = 0, j = 0, t = 0;
                long double run = 0.0L;
                // branch-free main loop; ties take the left child, matching
                // a stable sequential merge
                while (i < na && j < nb) {
                    const double va = a[i], vb = b[j];
                    const bool take_a = va <= vb;
                    const double v = take_a ? va : vb;
                    i += take_a;
                    j += 1 - static_cast<long long>(take_a);
                    out[t] = v;
                    run += v;
                    ++t;
                    if (t == k) {
                        s_k = run;
                        q = v;
                    }
                }
                for (; i < na; ++i, ++t) {
                    const double v = a[i];
                    out[t] = v;
                    run += v;
                    if (t + 1 == k) {
                        s_k = run;
                        q = v;
                    }
                }
                for (; j < nb; ++j, ++t) {
                    const double v = b[j];
                    out[t] = v;
                    run += v;
                    if (t + 1 == k) {
                        s_k = run;
                        q = v;
                    }
                }
                s_m = run;
                consume(l);
                consume(r);
            }
            sql_[id] = check_loss_from_sums(tau_.value(), s_k, s_m, k, m, q);
            qhat_[id] = q;
            slice[id] = out;
            arena_of[id] = static_cast<std::int32_t>(ci);
            const int consumers = layout_->canonical_parent_count(ival);
            refs[id] = static_cast<std::uint8_t>(consumers);
            if (consumers == 0 && !keep_segments && --arena.live == 0) arena.data.reset();
            out += m;
        });
    }

    if (keep_segments) {
        segments_.assign(R, SortedSegment{});
        for (std::size_t ci = 0; ci < classes.size(); ++ci) {
            const auto m = classes[ci].size;
            layout_->for_each_rect(classes[ci], [&](DyadicId id, std::span<const int>) {
                SortedSegment seg;
                seg.values.assign(slice[id], slice[id] + m);
                rebuild_prefix(seg);
                segments_[id] = std::move(seg);
            });
        }
    }
}

DpTables QdcartProblem::solve(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw UsageError("lambda must be positive and finite");
    return detail::solve_dp(*layout_, sql_, gamma_, lambda);
}

FitResult QdcartProblem::fit(double lambda) const {
    const DpTables tables = solve(lambda);
    std::vector<ExtractedLeaf> leaf_ids;
    FitResult result;
    result.partition = extract_impl(*layout_, tables, gamma_, &leaf_ids);
    result.objective = tables.opt[layout_->root_id()];
    result.theta.assign(static_cast<std::size_t>(shape().cell_count()), 0.0);
    for (const auto& leaf : leaf_ids) {
        const double v = qhat_[leaf.id];
        detail::for_each_cell_offset(shape(), leaf.rect, [&](long long off) {
            result.theta[static_cast<std::size_t>(off)] = v;
        });
    }
    result.config.tau = tau_;
    result.config.lambda = lambda;
    result.config.gamma = gamma_;
    result.config.method = Method::qdcart;
    return result;
}

DcartProblem::DcartProblem(const LatticeShape& shape, std::span<const double> y,
                           long long gamma)
    : layout_(DyadicLayout::get(shape)), gamma_(gamma) {
    detail::validate_input(shape, y, gamma, 1.0);
    const PrefixMoments moments(shape, y);
    const auto R = layout_->rect_count();
    cost_.assign(R, 0.0);
    mean_.assign(R, 0.0);
    for (const auto& cls : layout_->classes()) {
        if (cls.size < gamma_) continue;
        layout_->for_each_rect(cls, [&](DyadicId id, std::span<const int>) {
            const Rect r = layout_->rect_of(id);
            cost_[id] = moments.rect_sse(r);
            mean_[id] = moments.rect_mean(r);
        });
    }
}

DpTables DcartProblem::solve(double lambda) const {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw UsageError("lambda must be positive and finite");
    return detail::solve_dp(*layout_, cost_, gamma_, lambda);
}

FitResult DcartProblem::fit(double lambda) const {
    const DpTables tables = solve(lambda);
    std::vector<ExtractedLeaf> leaf_ids;
    FitResult result;
    result.partition = extract_impl(*layout_, tables, gamma_, &leaf_ids);
    result.objective = tables.opt[layout_->root_id()];
    result.theta.assign(static_cast<std::size_t>(shape().cell_count()), 0.0);
    for (const auto& leaf : leaf_ids) {
        const double v = mean_[leaf.id];
        detail::for_each_cell_offset(shape(), leaf.rect, [&](long long off) {
            result.theta[static_cast<std::size_t>(off)] = v;
        });
    }
    result.config.lambda = lambda;
    result.config.gamma = gamma_;
    result.config.method = Method::dcart;
    return result;
}

FitResult fit_qdcart(const LatticeShape& shape, std::span<const double> y,
                     const SolverConfig& cfg) {
    detail::validate_input(shape, y, cfg.gamma, cfg.lambda);
    const QdcartProblem problem(shape, y, cfg.tau, cfg.gamma, cfg.keep_segments);
    return problem.fit(cfg.lambda);
}

FitResult fit_dcart(const LatticeShape& shape, std::span<const double> y,
                    const SolverConfig& cfg) {
    detail::validate_input(shape, y, cfg.gamma, cfg.lambda);
    const DcartProblem problem(shape, y, cfg.gamma);
    return problem.fit(cfg.lambda);
}

FitResult fit(const LatticeShape& shape, std::span<const double> y, const SolverConfig& cfg) {
    switch (cfg.method) {
        case Method::qdcart: return fit_qdcart(shape, y, cfg);
        case Method::dcart: return fit_dcart(shape, y, cfg);
        case Method::qort1d: return fit_qort_1d(shape, y, cfg);
    }
    throw InternalError("unknown method");
}

std::vector<double> project(const LatticeShape& shape, const Partition& partition,
                            std::span<const double> y, QuantileLevel tau) {
    if (static_cast<long long>(y.size()) != shape.cell_count())
        throw DataError("observation count does not match the lattice");
    std::vector<double> out(y.size(), 0.0);
    std::vector<double> buf;
    for (const Rect& leaf : partition.leaves) {
        buf.clear();
        detail::for_each_cell_offset(shape, leaf, [&](long long off) {
            buf.push_back(y[static_cast<std::size_t>(off)]);
        });
        const auto seg = SortedSegment::from_unsorted(buf);
        const double q = empirical_quantile(tau, seg);
        detail::for_each_cell_offset(shape, leaf, [&](long long off) {
            out[static_cast<std::size_t>(off)] = q;
        });
    }
    return out;
}

}  // namespace qdcart
