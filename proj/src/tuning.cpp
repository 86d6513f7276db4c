#include "qdcart/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace qdcart {

LambdaGrid grid_1d() {
    LambdaGrid g;
    g.kind = GridKind::grid1d;
    g.values.reserve(25);
    for (int j = 0; j < 25; ++j) g.values.push_back(std::pow(2.0, -2.0 + 0.25 * j));
    return g;
}

LambdaGrid grid_2d() {
    LambdaGrid g;
    g.kind = GridKind::grid2d;
    g.values.reserve(60);
    for (int j = 0; j < 60; ++j) g.values.push_back(std::pow(10.0, -1.0 + 6.5 * j / 59.0));
    return g;
}

LambdaGrid custom_grid(std::vector<double> values) {
    if (values.empty()) throw UsageError("lambda grid must be nonempty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0) || !std::isfinite(values[i]))
            throw UsageError("lambda grid values must be positive and finite");
        if (i > 0 && values[i] <= values[i - 1])
            throw UsageError("lambda grid must be strictly increasing");
    }
    return LambdaGrid{std::move(values), GridKind::custom};
}

long long default_gamma(const LatticeShape& shape) {
    if (shape.ndim() == 1) return std::min<long long>(8, shape.cell_count());
    const auto bits = static_cast<long long>(
        std::ceil(std::log2(static_cast<double>(shape.cell_count()))));
    return std::clamp<long long>(bits, 1, shape.cell_count());
}

double quantile_sigma(QuantileLevel tau) {
    return (1.0 - std::abs(1.0 - 2.0 * tau.value())) / 2.0;
}

BicScore bic(const LatticeShape& shape, std::span<const double> y, const FitResult& fit,
             DfMode df_mode) {
    if (static_cast<long long>(y.size()) != shape.cell_count() ||
        fit.theta.size() != y.size())
        throw UsageError("fit and observations must share the lattice");
    const double sigma = quantile_sigma(fit.config.tau);
    if (!(sigma > 0.0)) throw UsageError("BIC is undefined at this quantile level");

    long double loss = 0.0L;
    for (std::size_t i = 0; i < y.size(); ++i)
        loss += rho(fit.config.tau, y[i] - fit.theta[i]);

    long long v = 0;
    if (df_mode == DfMode::jump_count) {
        if (shape.ndim() != 1)
            throw UsageError("jump-count degrees of freedom require a 1-d lattice");
        for (std::size_t i = 0; i + 1 < fit.theta.size(); ++i)
            if (std::abs(fit.theta[i] - fit.theta[i + 1]) > 1e-3) ++v;
    } else {
        v = static_cast<long long>(fit.partition.leaf_count());
    }

    BicScore s;
    s.lambda = fit.config.lambda;
    s.loss = static_cast<double>(loss);
    s.v = v;
    s.bic = (2.0 / sigma) * s.loss +
            static_cast<double>(v) * std::log(static_cast<double>(shape.cell_count()));
    return s;
}

SelectResult select_lambda(const LatticeShape& shape, std::span<const double> y,
                           const SolverConfig& base, const LambdaGrid& grid, DfMode df_mode) {
    if (grid.values.empty()) throw UsageError("lambda grid must be nonempty");

    SelectResult out;
    out.scores.reserve(grid.values.size());

    auto fit_at = [&](double lambda) {
        SolverConfig cfg = base;
        cfg.lambda = lambda;
        return fit(shape, y, cfg);
    };

    // reuse the lambda-independent tables for the grid sweep
    std::unique_ptr<QdcartProblem> qproblem;
    std::unique_ptr<DcartProblem> dproblem;
    if (base.method == Method::qdcart)
        qproblem = std::make_unique<QdcartProblem>(shape, y, base.tau, base.gamma);
    else if (base.method == Method::dcart)
        dproblem = std::make_unique<DcartProblem>(shape, y, base.gamma);

    bool have = false;
    double best_bic = 0.0;
    for (double lambda : grid.values) {
        FitResult f = qproblem   ? qproblem->fit(lambda)
                      : dproblem ? dproblem->fit(lambda)
                                 : fit_at(lambda);
        f.config.tau = base.tau;  // dcart fits carry no quantile level of their own
        const BicScore s = bic(shape, y, f, df_mode);
        out.scores.push_back(s);
        if (!have || s.bic <= best_bic) {  // <= so equal scores move to larger lambda
            best_bic = s.bic;
            out.lambda = lambda;
            out.fit = std::move(f);
            have = true;
        }
    }
    return out;
}

}  // namespace qdcart
