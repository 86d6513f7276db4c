#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qdcart/simulation.hpp"
#include "qdcart/solver.hpp"
#include "qdcart/tuning.hpp"

namespace qdcart {

/// Monte-Carlo benchmark: for each (scenario, n, method) cell, fit every
/// grid lambda on `replicates` generated data sets and report the mean
/// squared error against the true signal at the grid-minimizing lambda.
struct BenchSpec {
    std::vector<int> scenarios;
    std::vector<int> sizes;
    std::vector<Method> methods{Method::qdcart, Method::dcart};
    int replicates = 100;
    double tau = 0.5;
    long long gamma = 0;               // 0 = per-dimension default
    std::optional<LambdaGrid> grid;    // unset = per-dimension default grid
    std::uint64_t base_seed = 20240809;
};

struct BenchRow {
    int scenario = 0;
    int n = 0;
    Method method = Method::qdcart;
    double mse_mean = 0.0;
    double mse_stderr = 0.0;
    double lambda_star = 0.0;
    double wall_time_seconds = 0.0;
};

struct SurfacePoint {
    int scenario = 0;
    int n = 0;
    Method method = Method::qdcart;
    double lambda = 0.0;
    double mse_mean = 0.0;
    double mse_stderr = 0.0;
};

struct BenchResult {
    std::vector<BenchRow> rows;
    std::vector<SurfacePoint> surface;  // full per-lambda error surface
};

BenchResult run_benchmark(const BenchSpec& spec);

/// Fixed benchmark CSV header.
extern const char* const kBenchHeader;

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows);
void write_surface_csv(const std::string& path, const std::vector<SurfacePoint>& points);

}  // namespace qdcart
