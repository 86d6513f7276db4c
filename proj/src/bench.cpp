#include "qdcart/bench.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <memory>

#include "qdcart/csv.hpp"
#include "qdcart/threading.hpp"

namespace qdcart {

const char* const kBenchHeader =
    "scenario,n,method,mse_mean,mse_stderr,lambda_star,wall_time_seconds";

namespace {

void validate_spec(const BenchSpec& spec) {
    if (spec.scenarios.empty()) throw UsageError("benchmark needs at least one scenario");
    if (spec.sizes.empty()) throw UsageError("benchmark needs at least one size");
    if (spec.methods.empty()) throw UsageError("benchmark needs at least one method");
    if (spec.replicates < 1) throw UsageError("replicates must be at least 1");
    for (int id : spec.scenarios)
        for (int n : spec.sizes) make_scenario(id, n);
    for (Method m : spec.methods)
        if (m == Method::qort1d)
            for (int id : spec.scenarios)
                if (id > 4) throw UsageError("qort1d applies to 1-d scenarios only");
}

double mse(std::span<const double> theta, std::span<const double> truth) {
    long double acc = 0.0L;
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const long double d = theta[i] - truth[i];
        acc += d * d;
    }
    return static_cast<double>(acc / static_cast<long double>(theta.size()));
}

}  // namespace

BenchResult run_benchmark(const BenchSpec& spec) {
    validate_spec(spec);
    BenchResult result;
    const int workers = worker_count();

    for (int id : spec.scenarios) {
        for (int n : spec.sizes) {
            const Scenario sc = make_scenario(id, n);
            const LatticeShape shape = sc.shape();
            const LambdaGrid grid =
                spec.grid ? *spec.grid : (sc.dim() == 1 ? grid_1d() : grid_2d());
            const long long gamma = spec.gamma > 0 ? spec.gamma : default_gamma(shape);
            const QuantileLevel tau(spec.tau);

            for (Method method : spec.methods) {
                const auto t0 = std::chrono::steady_clock::now();
                const auto n_lambda = grid.values.size();
                const auto reps = static_cast<std::size_t>(spec.replicates);

                // per-replicate MSE for every lambda, slot-indexed so the
                // result is identical under any thread count
                std::vector<double> errs(reps * n_lambda, 0.0);
                parallel_for(
                    reps,
                    [&](std::size_t r) {
                        const Dataset ds =
                            generate(sc, spec.base_seed + static_cast<std::uint64_t>(r));
                        std::unique_ptr<QdcartProblem> qp;
                        std::unique_ptr<DcartProblem> dp;
                        if (method == Method::qdcart)
                            qp = std::make_unique<QdcartProblem>(shape, ds.y, tau, gamma);
                        else if (method == Method::dcart)
                            dp = std::make_unique<DcartProblem>(shape, ds.y, gamma);
                        for (std::size_t l = 0; l < n_lambda; ++l) {
                            FitResult f;
                            if (qp)
                                f = qp->fit(grid.values[l]);
                            else if (dp)
                                f = dp->fit(grid.values[l]);
                            else {
                                SolverConfig cfg;
                                cfg.tau = tau;
                                cfg.gamma = gamma;
                                cfg.lambda = grid.values[l];
                                cfg.method = method;
                                f = fit(shape, ds.y, cfg);
                            }
                            errs[r * n_lambda + l] = mse(f.theta, ds.theta_star);
                        }
                    },
                    workers);

                // column means and the grid argmin (first minimizer)
                std::size_t best = 0;
                double best_mean = 0.0;
                std::vector<double> means(n_lambda, 0.0);
                for (std::size_t l = 0; l < n_lambda; ++l) {
                    long double acc = 0.0L;
                    for (std::size_t r = 0; r < reps; ++r) acc += errs[r * n_lambda + l];
                    means[l] = static_cast<double>(acc / static_cast<long double>(reps));
                    if (l == 0 || means[l] < best_mean) {
                        best = l;
                        best_mean = means[l];
                    }
                }
                auto stderr_at = [&](std::size_t l) {
                    if (reps < 2) return 0.0;
                    long double acc = 0.0L;
                    for (std::size_t r = 0; r < reps; ++r) {
                        const long double d = errs[r * n_lambda + l] - means[l];
                        acc += d * d;
                    }
                    const long double var = acc / static_cast<long double>(reps - 1);
                    return static_cast<double>(
                        std::sqrt(static_cast<double>(var) / static_cast<double>(reps)));
                };

                for (std::size_t l = 0; l < n_lambda; ++l)
                    result.surface.push_back(SurfacePoint{id, n, method, grid.values[l],
                                                          means[l], stderr_at(l)});

                const auto t1 = std::chrono::steady_clock::now();
                BenchRow row;
                row.scenario = id;
                row.n = n;
                row.method = method;
                row.mse_mean = best_mean;
                row.mse_stderr = stderr_at(best);
                row.lambda_star = grid.values[best];
                row.wall_time_seconds = std::chrono::duration<double>(t1 - t0).count();
                result.rows.push_back(row);
            }
        }
    }
    return result;
}

void write_bench_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << kBenchHeader << '\n';
    for (const auto& r : rows) {
        out << r.scenario << ',' << r.n << ',' << method_name(r.method) << ','
            << format_double(r.mse_mean) << ',' << format_double(r.mse_stderr) << ','
            << format_double(r.lambda_star) << ',' << format_double(r.wall_time_seconds)
            << '\n';
    }
}

void write_surface_csv(const std::string& path, const std::vector<SurfacePoint>& points) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "scenario,n,method,lambda,mse_mean,mse_stderr\n";
    for (const auto& p : points) {
        out << p.scenario << ',' << p.n << ',' << method_name(p.method) << ','
            << format_double(p.lambda) << ',' << format_double(p.mse_mean) << ','
            << format_double(p.mse_stderr) << '\n';
    }
}

}  // namespace qdcart
