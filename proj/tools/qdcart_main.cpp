#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qdcart/bench.hpp"
#include "qdcart/csv.hpp"
#include "qdcart/errors.hpp"
#include "qdcart/simulation.hpp"
#include "qdcart/solver.hpp"
#include "qdcart/tuning.hpp"

namespace {

using namespace qdcart;

// --shape d:n1[,n2...]
LatticeShape parse_shape(const std::string& text) {
    try {
        const auto colon = text.find(':');
        if (colon == std::string::npos) throw UsageError("--shape expects d:n1[,n2...]");
        const int d = std::stoi(text.substr(0, colon));
        std::vector<int> dims;
        std::string rest = text.substr(colon + 1);
        std::size_t start = 0;
        while (start <= rest.size()) {
            const auto comma = rest.find(',', start);
            const auto end = comma == std::string::npos ? rest.size() : comma;
            dims.push_back(std::stoi(rest.substr(start, end - start)));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (static_cast<int>(dims.size()) != d)
            throw UsageError("--shape lists " + std::to_string(dims.size()) +
                             " sides for d=" + std::to_string(d));
        if (d > 2) throw UsageError("the CLI reads and writes 1-d and 2-d CSV only");
        return LatticeShape(dims);
    } catch (const std::invalid_argument&) {
        throw UsageError("--shape expects d:n1[,n2...]");
    } catch (const std::out_of_range&) {
        throw UsageError("--shape value out of range");
    }
}

LatticeShape resolve_shape(const CsvData& data, const std::string& shape_flag) {
    const LatticeShape from_file = data.shape();
    if (shape_flag.empty()) return from_file;
    const LatticeShape requested = parse_shape(shape_flag);
    if (!(requested == from_file))
        throw UsageError("--shape does not match the input file layout");
    return requested;
}

LambdaGrid resolve_grid(const std::string& grid_name, const std::vector<double>& values,
                        int ndim) {
    if (grid_name == "1d") return grid_1d();
    if (grid_name == "2d") return grid_2d();
    if (grid_name == "custom") {
        if (values.empty()) throw UsageError("--grid custom requires --grid-values");
        return custom_grid(values);
    }
    if (!grid_name.empty()) throw UsageError("unknown grid '" + grid_name + "'");
    return ndim == 1 ? grid_1d() : grid_2d();
}

DfMode resolve_df(const std::string& name, int ndim) {
    if (name == "jump") return DfMode::jump_count;
    if (name == "leaf") return DfMode::leaf_count;
    if (!name.empty()) throw UsageError("unknown df mode '" + name + "'");
    return ndim == 1 ? DfMode::jump_count : DfMode::leaf_count;
}

struct DenoiseArgs {
    std::string input, output, shape, method = "qdcart", grid, df;
    std::vector<double> grid_values;
    double tau = 0.5;
    std::optional<double> lambda;
    bool use_bic = false;
    long long gamma = 0;
};

int run_denoise(const DenoiseArgs& a) {
    if (a.lambda.has_value() == a.use_bic)
        throw UsageError("specify exactly one of --lambda and --bic");
    const CsvData data = read_numeric_csv(a.input);
    const LatticeShape shape = resolve_shape(data, a.shape);

    SolverConfig cfg;
    cfg.tau = QuantileLevel(a.tau);
    cfg.gamma = a.gamma > 0 ? a.gamma : default_gamma(shape);
    cfg.method = method_from_name(a.method);

    FitResult result;
    std::optional<double> selected;
    if (a.use_bic) {
        const LambdaGrid grid = resolve_grid(a.grid, a.grid_values, shape.ndim());
        const DfMode df = resolve_df(a.df, shape.ndim());
        SelectResult sel = select_lambda(shape, data.values, cfg, grid, df);
        result = std::move(sel.fit);
        selected = sel.lambda;
    } else {
        cfg.lambda = *a.lambda;
        result = fit(shape, data.values, cfg);
    }

    write_csv(a.output, shape, result.theta);
    std::cout << "objective=" << format_double(result.objective) << '\n';
    std::cout << "leaves=" << result.partition.leaf_count() << '\n';
    if (selected) std::cout << "lambda=" << format_double(*selected) << '\n';
    return 0;
}

struct SimulateArgs {
    std::string stem;
    int scenario = 1;
    int n = 0;
    std::uint64_t seed = 1;
};

int run_simulate(const SimulateArgs& a) {
    const Scenario sc = make_scenario(a.scenario, a.n);
    const Dataset ds = generate(sc, a.seed);
    const LatticeShape shape = sc.shape();
    write_csv(a.stem + "_y.csv", shape, ds.y);
    write_csv(a.stem + "_theta.csv", shape, ds.theta_star);
    std::cout << "wrote " << a.stem << "_y.csv and " << a.stem << "_theta.csv\n";
    return 0;
}

struct BenchArgs {
    std::string output, full_output, grid, config;
    std::vector<double> grid_values;
    std::vector<int> scenarios, sizes;
    std::vector<std::string> methods{"qdcart", "dcart"};
    int replicates = 100;
    double tau = 0.5;
    long long gamma = 0;
    std::uint64_t seed = 20240809;
};

template <class T>
T parse_scalar(const std::string& text, const std::string& key);

template <>
double parse_scalar(const std::string& text, const std::string& key) {
    try {
        return std::stod(text);
    } catch (...) {
        throw UsageError("config value for '" + key + "' is not a number");
    }
}

template <>
long long parse_scalar(const std::string& text, const std::string& key) {
    try {
        return std::stoll(text);
    } catch (...) {
        throw UsageError("config value for '" + key + "' is not an integer");
    }
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        const auto end = comma == std::string::npos ? text.size() : comma;
        out.push_back(text.substr(start, end - start));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

// plain key=value lines mirroring the flags; values given on the command
// line win over the file
void apply_bench_config(BenchArgs& a, const CLI::App& sub) {
    std::ifstream in(a.config);
    if (!in) throw UsageError("cannot open config file '" + a.config + "'");
    std::string line;
    std::size_t line_no = 0;
    auto flag_given = [&](const std::string& name) { return sub.count(name) > 0; };
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw UsageError("config line " + std::to_string(line_no) + ": expected key=value");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "scenarios") {
            if (flag_given("--scenarios")) continue;
            a.scenarios.clear();
            for (const auto& t : split_list(value))
                a.scenarios.push_back(static_cast<int>(parse_scalar<long long>(t, key)));
        } else if (key == "sizes") {
            if (flag_given("--sizes")) continue;
            a.sizes.clear();
            for (const auto& t : split_list(value))
                a.sizes.push_back(static_cast<int>(parse_scalar<long long>(t, key)));
        } else if (key == "methods") {
            if (flag_given("--methods")) continue;
            a.methods = split_list(value);
        } else if (key == "replicates") {
            if (!flag_given("--replicates"))
                a.replicates = static_cast<int>(parse_scalar<long long>(value, key));
        } else if (key == "tau") {
            if (!flag_given("--tau")) a.tau = parse_scalar<double>(value, key);
        } else if (key == "gamma") {
            if (!flag_given("--gamma")) a.gamma = parse_scalar<long long>(value, key);
        } else if (key == "seed") {
            if (!flag_given("--seed"))
                a.seed = static_cast<std::uint64_t>(parse_scalar<long long>(value, key));
        } else if (key == "grid") {
            if (!flag_given("--grid")) a.grid = value;
        } else if (key == "grid-values" || key == "grid_values") {
            if (flag_given("--grid-values")) continue;
            a.grid_values.clear();
            for (const auto& t : split_list(value))
                a.grid_values.push_back(parse_scalar<double>(t, key));
        } else if (key == "full") {
            if (!flag_given("--full")) a.full_output = value;
        } else {
            throw UsageError("config line " + std::to_string(line_no) + ": unknown key '" +
                             key + "'");
        }
    }
}

int run_bench(const BenchArgs& a) {
    if (a.scenarios.empty()) throw UsageError("--scenarios is required (flag or config file)");
    if (a.sizes.empty()) throw UsageError("--sizes is required (flag or config file)");
    BenchSpec spec;
    spec.scenarios = a.scenarios;
    spec.sizes = a.sizes;
    spec.methods.clear();
    for (const auto& m : a.methods) spec.methods.push_back(method_from_name(m));
    spec.replicates = a.replicates;
    spec.tau = a.tau;
    spec.gamma = a.gamma;
    spec.base_seed = a.seed;
    if (!a.grid.empty()) {
        if (a.grid == "custom")
            spec.grid = custom_grid(a.grid_values);
        else if (a.grid == "1d")
            spec.grid = grid_1d();
        else if (a.grid == "2d")
            spec.grid = grid_2d();
        else
            throw UsageError("unknown grid '" + a.grid + "'");
    }
    const BenchResult result = run_benchmark(spec);
    write_bench_csv(a.output, result.rows);
    if (!a.full_output.empty()) write_surface_csv(a.full_output, result.surface);
    std::cout << "wrote " << result.rows.size() << " rows to " << a.output << '\n';
    return 0;
}

struct TuneArgs {
    std::string input, output, grid, df, method = "qdcart";
    std::vector<double> grid_values;
    double tau = 0.5;
    long long gamma = 0;
};

int run_tune(const TuneArgs& a) {
    const CsvData data = read_numeric_csv(a.input);
    const LatticeShape shape = data.shape();

    SolverConfig cfg;
    cfg.tau = QuantileLevel(a.tau);
    cfg.gamma = a.gamma > 0 ? a.gamma : default_gamma(shape);
    cfg.method = method_from_name(a.method);

    const LambdaGrid grid = resolve_grid(a.grid, a.grid_values, shape.ndim());
    const DfMode df = resolve_df(a.df, shape.ndim());
    SelectResult sel = select_lambda(shape, data.values, cfg, grid, df);

    std::cout << "# tau=" << format_double(a.tau)
              << " sigma=" << format_double(quantile_sigma(cfg.tau))
              << " gamma=" << cfg.gamma << " method=" << a.method
              << " df=" << (df == DfMode::jump_count ? "jump" : "leaf") << '\n';
    std::cout << "lambda,v,loss,bic\n";
    for (const auto& s : sel.scores)
        std::cout << format_double(s.lambda) << ',' << s.v << ',' << format_double(s.loss)
                  << ',' << format_double(s.bic) << '\n';
    std::cout << "# selected_lambda=" << format_double(sel.lambda) << '\n';

    write_csv(a.output, shape, sel.fit.theta);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Piecewise-constant quantile denoising on lattices"};
    app.require_subcommand(1);

    DenoiseArgs dn;
    auto* denoise = app.add_subcommand("denoise", "Fit one lattice CSV and write the fitted values");
    denoise->add_option("input", dn.input, "Input CSV")->required();
    denoise->add_option("output", dn.output, "Output CSV")->required();
    denoise->add_option("--tau", dn.tau, "Quantile level in (0,1)");
    auto* lam = denoise->add_option("--lambda", dn.lambda, "Penalty per partition piece");
    denoise->add_flag("--bic", dn.use_bic, "Select lambda by quantile BIC")->excludes(lam);
    denoise->add_option("--gamma", dn.gamma, "Minimum leaf size (default: 8 in 1-d, ceil(log2 N) in 2-d)");
    denoise->add_option("--method", dn.method, "qdcart | dcart | qort1d");
    denoise->add_option("--shape", dn.shape, "Expected shape d:n1[,n2]");
    denoise->add_option("--grid", dn.grid, "1d | 2d | custom (with --bic)");
    denoise->add_option("--grid-values", dn.grid_values, "Custom grid values")->delimiter(',');
    denoise->add_option("--df", dn.df, "jump | leaf degrees of freedom (with --bic)");

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Generate scenario data as CSV");
    simulate->add_option("output", sim.stem, "Output stem; writes <stem>_y.csv and <stem>_theta.csv")
        ->required();
    simulate->add_option("--scenario", sim.scenario, "Scenario id 1..7")->required();
    simulate->add_option("--n", sim.n, "Side length")->required();
    simulate->add_option("--seed", sim.seed, "Random seed");

    BenchArgs bn;
    auto* bench = app.add_subcommand("benchmark", "Monte-Carlo error benchmark over a lambda grid");
    bench->add_option("output", bn.output, "Output CSV")->required();
    bench->add_option("--scenarios", bn.scenarios, "Scenario ids")->delimiter(',');
    bench->add_option("--sizes", bn.sizes, "Side lengths")->delimiter(',');
    bench->add_option("--methods", bn.methods, "Methods to run")->delimiter(',');
    bench->add_option("--replicates", bn.replicates, "Data sets per cell");
    bench->add_option("--tau", bn.tau, "Quantile level");
    bench->add_option("--gamma", bn.gamma, "Minimum leaf size (0 = default)");
    bench->add_option("--grid", bn.grid, "1d | 2d | custom");
    bench->add_option("--grid-values", bn.grid_values, "Custom grid values")->delimiter(',');
    bench->add_option("--seed", bn.seed, "Base seed; replicate r uses seed+r");
    bench->add_option("--full", bn.full_output, "Also write the per-lambda error surface here");
    bench->add_option("--config", bn.config, "key=value file mirroring the flags; flags override");

    TuneArgs tn;
    auto* tune = app.add_subcommand("tune", "BIC lambda selection; prints the score table");
    tune->add_option("input", tn.input, "Input CSV")->required();
    tune->add_option("output", tn.output, "Output CSV for the selected fit")->required();
    tune->add_option("--tau", tn.tau, "Quantile level");
    tune->add_option("--gamma", tn.gamma, "Minimum leaf size (0 = default)");
    tune->add_option("--grid", tn.grid, "1d | 2d | custom");
    tune->add_option("--grid-values", tn.grid_values, "Custom grid values")->delimiter(',');
    tune->add_option("--df", tn.df, "jump | leaf");
    tune->add_option("--method", tn.method, "qdcart | dcart | qort1d");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*denoise) return run_denoise(dn);
        if (*simulate) return run_simulate(sim);
        if (*bench) {
            if (!bn.config.empty()) apply_bench_config(bn, *bench);
            return run_bench(bn);
        }
        if (*tune) return run_tune(tn);
        return 2;
    } catch (const qdcart::ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const InfeasibleError& e) {
        std::cerr << "infeasible: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 1;
    }
}
