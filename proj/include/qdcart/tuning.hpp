#pragma once

#include <span>
#include <vector>

#include "qdcart/solver.hpp"

namespace qdcart {

enum class GridKind { grid1d, grid2d, qtvd_style, custom };

struct LambdaGrid {
    std::vector<double> values;  // strictly increasing, all positive
    GridKind kind = GridKind::custom;
};

/// 25 geometric values 2^-2, 2^-1.75, ..., 2^4.
LambdaGrid grid_1d();

/// 60 values with log10(lambda) uniform on [-1, 5.5].
LambdaGrid grid_2d();

LambdaGrid custom_grid(std::vector<double> values);

/// Default minimum leaf size: 8 in one dimension, ceil(log2 N) otherwise.
long long default_gamma(const LatticeShape& shape);

/// sigma = (1 - |1 - 2*tau|) / 2, the scale in the quantile BIC.
double quantile_sigma(QuantileLevel tau);

enum class DfMode { jump_count, leaf_count };

struct BicScore {
    double lambda = 0.0;
    double bic = 0.0;
    long long v = 0;     // degrees of freedom
    double loss = 0.0;   // sum of check loss at the fit
};

/// BIC = (2/sigma) * loss + v * log(N). Jump-count degrees of freedom
/// (consecutive differences above 1e-3) require a 1-d fit; leaf-count
/// uses the number of partition leaves.
BicScore bic(const LatticeShape& shape, std::span<const double> y, const FitResult& fit,
             DfMode df_mode);

struct SelectResult {
    double lambda = 0.0;
    FitResult fit;
    std::vector<BicScore> scores;  // one per grid value, in grid order
};

/// Fits every grid value and returns the BIC argmin; ties prefer the
/// larger lambda. `base.lambda` is ignored.
SelectResult select_lambda(const LatticeShape& shape, std::span<const double> y,
                           const SolverConfig& base, const LambdaGrid& grid, DfMode df_mode);

}  // namespace qdcart
