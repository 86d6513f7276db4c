// End-to-end checks of the command-line interface: exit codes, stdout
// key=value contract, CSV outputs, determinism, and thread invariance.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Run {
    int exit_code = -1;
    std::string out;
};

fs::path work_dir() {
    static fs::path dir = [] {
        auto d = fs::temp_directory_path() / "qdcart_cli_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

Run run_cli(const std::string& args, const std::string& env = "") {
    const fs::path out_file = work_dir() / "stdout.txt";
    std::string cmd = env + " " + std::string(QDCART_CLI_PATH) + " " + args + " >" +
                      out_file.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out_file);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

bool contains(const std::string& hay, const std::string& needle) {
    return hay.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("denoise reproduces the worked step example") {
    const auto in = work_dir() / "step.csv";
    const auto out = work_dir() / "step_fit.csv";
    write_text(in, "0\n0\n10\n10\n");
    const Run r = run_cli("denoise " + in.string() + " " + out.string() +
                          " --tau 0.5 --lambda 1 --gamma 1");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "objective=2"));
    CHECK(contains(r.out, "leaves=2"));
    CHECK(slurp(out) == "0\n0\n10\n10\n");
}

TEST_CASE("reported objective matches a recomputation from the output file") {
    const auto in = work_dir() / "recheck.csv";
    const auto out = work_dir() / "recheck_fit.csv";
    std::ostringstream data;
    const double y[12] = {0.5, 0.1, 0.4, 3.2, 3.9, 3.4, 3.6, 0.2, 0.3, 0.1, 0.6, 0.2};
    for (double v : y) data << v << "\n";
    write_text(in, data.str());
    const double lambda = 0.7, tau = 0.5;
    const Run r = run_cli("denoise " + in.string() + " " + out.string() +
                          " --tau 0.5 --lambda 0.7 --gamma 2");
    REQUIRE(r.exit_code == 0);

    double objective = -1.0;
    long long leaves = -1;
    std::istringstream lines(r.out);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.rfind("objective=", 0) == 0) objective = std::stod(line.substr(10));
        if (line.rfind("leaves=", 0) == 0) leaves = std::stoll(line.substr(7));
    }
    REQUIRE(objective >= 0.0);
    REQUIRE(leaves >= 1);

    std::istringstream fit(slurp(out));
    double loss = 0.0;
    for (double v : y) {
        std::getline(fit, line);
        const double t = std::stod(line);
        const double x = v - t;
        loss += x >= 0 ? tau * x : (tau - 1.0) * x;
    }
    const double recomputed = loss + lambda * static_cast<double>(leaves);
    CHECK(std::abs(objective - recomputed) <= 1e-9 * (1.0 + std::abs(objective)));
}

TEST_CASE("denoise keeps constant input constant") {
    const auto in = work_dir() / "const.csv";
    const auto out = work_dir() / "const_fit.csv";
    write_text(in, "7.5\n7.5\n7.5\n7.5\n");
    const Run r = run_cli("denoise " + in.string() + " " + out.string() + " --lambda 3");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "leaves=1"));
    CHECK(slurp(out) == "7.5\n7.5\n7.5\n7.5\n");
}

TEST_CASE("denoise exit codes") {
    const auto in = work_dir() / "four.csv";
    const auto out = work_dir() / "four_fit.csv";
    write_text(in, "1\n2\n3\n4\n");
    SUBCASE("infeasible gamma is exit 3") {
        CHECK(run_cli("denoise " + in.string() + " " + out.string() + " --lambda 1 --gamma 5")
                  .exit_code == 3);
    }
    SUBCASE("lambda and bic together is exit 2") {
        CHECK(run_cli("denoise " + in.string() + " " + out.string() + " --lambda 1 --bic")
                  .exit_code == 2);
    }
    SUBCASE("neither lambda nor bic is exit 2") {
        CHECK(run_cli("denoise " + in.string() + " " + out.string()).exit_code == 2);
    }
    SUBCASE("parse failure is exit 2 with a location") {
        const auto bad = work_dir() / "bad.csv";
        write_text(bad, "1\nnope\n");
        const Run r = run_cli("denoise " + bad.string() + " " + out.string() + " --lambda 1");
        CHECK(r.exit_code == 2);
        CHECK(contains(r.out, "line 2"));
    }
    SUBCASE("shape mismatch is exit 2") {
        CHECK(run_cli("denoise " + in.string() + " " + out.string() +
                      " --lambda 1 --shape 2:2,2")
                  .exit_code == 2);
    }
    SUBCASE("matching shape flag is accepted") {
        CHECK(run_cli("denoise " + in.string() + " " + out.string() +
                      " --lambda 1 --shape 1:4")
                  .exit_code == 0);
    }
    SUBCASE("unknown method is exit 2") {
        CHECK(run_cli("denoise " + in.string() + " " + out.string() +
                      " --lambda 1 --method foo")
                  .exit_code == 2);
    }
}

TEST_CASE("denoise with bic prints the selected lambda") {
    const auto in = work_dir() / "bic_in.csv";
    const auto out = work_dir() / "bic_fit.csv";
    std::ostringstream data;
    for (int i = 0; i < 16; ++i) data << (i < 8 ? 0 : 4) << "\n";
    write_text(in, data.str());
    const Run r = run_cli("denoise " + in.string() + " " + out.string() +
                          " --bic --gamma 2 --grid custom --grid-values 0.5,1,2");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "lambda="));
}

TEST_CASE("denoise 2-d input and qort method") {
    const auto in2 = work_dir() / "grid.csv";
    const auto out2 = work_dir() / "grid_fit.csv";
    write_text(in2, "0,0,5,5\n0,0,5,5\n0,0,5,5\n0,0,5,5\n");
    const Run r2 = run_cli("denoise " + in2.string() + " " + out2.string() +
                           " --lambda 0.5 --gamma 1");
    CHECK(r2.exit_code == 0);
    CHECK(slurp(out2) == "0,0,5,5\n0,0,5,5\n0,0,5,5\n0,0,5,5\n");

    const auto in1 = work_dir() / "seq.csv";
    const auto out1 = work_dir() / "seq_fit.csv";
    write_text(in1, "0\n0\n0\n5\n5\n");
    const Run r1 = run_cli("denoise " + in1.string() + " " + out1.string() +
                           " --lambda 0.5 --gamma 1 --method qort1d");
    CHECK(r1.exit_code == 0);
    CHECK(contains(r1.out, "objective=1"));
    CHECK(slurp(out1) == "0\n0\n0\n5\n5\n");

    // qort on 2-d input is a usage error
    CHECK(run_cli("denoise " + in2.string() + " " + out2.string() +
                  " --lambda 0.5 --method qort1d")
              .exit_code == 2);
}

TEST_CASE("simulate writes deterministic files and validates flags") {
    const auto stem_a = (work_dir() / "sim_a").string();
    const auto stem_b = (work_dir() / "sim_b").string();
    CHECK(run_cli("simulate " + stem_a + " --scenario 1 --n 512 --seed 7").exit_code == 0);
    CHECK(run_cli("simulate " + stem_b + " --scenario 1 --n 512 --seed 7").exit_code == 0);
    CHECK(slurp(stem_a + "_y.csv") == slurp(stem_b + "_y.csv"));
    CHECK(slurp(stem_a + "_theta.csv") == slurp(stem_b + "_theta.csv"));

    const auto stem_c = (work_dir() / "sim_c").string();
    CHECK(run_cli("simulate " + stem_c + " --scenario 1 --n 512 --seed 8").exit_code == 0);
    CHECK(slurp(stem_a + "_y.csv") != slurp(stem_c + "_y.csv"));

    CHECK(run_cli("simulate " + stem_a + " --scenario 2 --n 16").exit_code == 2);

    const auto stem_d = (work_dir() / "sim_d").string();
    CHECK(run_cli("simulate " + stem_d + " --scenario 5 --n 64 --seed 1").exit_code == 0);
    std::istringstream rows(slurp(stem_d + "_y.csv"));
    std::string line;
    int count = 0, cols = 0;
    while (std::getline(rows, line)) {
        if (line.empty()) continue;
        ++count;
        cols = 1 + static_cast<int>(std::count(line.begin(), line.end(), ','));
    }
    CHECK(count == 64);
    CHECK(cols == 64);
}

TEST_CASE("benchmark rows are deterministic and thread invariant") {
    const auto out1 = work_dir() / "bench1.csv";
    const auto out2 = work_dir() / "bench2.csv";
    const auto surface = work_dir() / "surface.csv";
    const std::string args =
        " --scenarios 1 --sizes 64 --methods qdcart,dcart --replicates 3"
        " --grid custom --grid-values 0.5,2 --seed 11 --gamma 4";
    const Run r1 = run_cli("benchmark " + out1.string() + args + " --full " + surface.string(),
                           "QDCART_THREADS=1");
    CHECK(r1.exit_code == 0);
    const Run r2 = run_cli("benchmark " + out2.string() + args, "QDCART_THREADS=4");
    CHECK(r2.exit_code == 0);

    const std::string csv1 = slurp(out1), csv2 = slurp(out2);
    CHECK(contains(csv1, "scenario,n,method,mse_mean,mse_stderr,lambda_star,wall_time_seconds"));

    // all but the wall-time column must match across thread counts
    auto strip_time = [](const std::string& text) {
        std::istringstream in(text);
        std::string line, acc;
        while (std::getline(in, line)) {
            const auto cut = line.rfind(',');
            acc += line.substr(0, cut) + "\n";
        }
        return acc;
    };
    CHECK(strip_time(csv1) == strip_time(csv2));

    // lambda_star attains the minimum of the dumped surface
    std::istringstream sf(slurp(surface));
    std::string line;
    std::getline(sf, line);  // header
    double best_qdcart = 1e300;
    while (std::getline(sf, line)) {
        if (line.empty() || !contains(line, ",qdcart,")) continue;
        const auto c1 = line.rfind(',');
        const auto c2 = line.rfind(',', c1 - 1);
        best_qdcart = std::min(best_qdcart, std::stod(line.substr(c2 + 1, c1 - c2 - 1)));
    }
    bool found = false;
    std::istringstream rows(csv1);
    std::getline(rows, line);
    while (std::getline(rows, line)) {
        if (!contains(line, ",qdcart,")) continue;
        std::istringstream fields(line);
        std::string f;
        for (int i = 0; i < 4 && std::getline(fields, f, ','); ++i) {}
        CHECK(std::stod(f) == doctest::Approx(best_qdcart).epsilon(1e-12));
        found = true;
    }
    CHECK(found);

    CHECK(run_cli("benchmark " + out1.string() +
                  " --scenarios 5 --sizes 64 --methods qort1d --replicates 1")
              .exit_code == 2);
}

TEST_CASE("benchmark config file mirrors flags and flags win") {
    const auto cfg = work_dir() / "bench.cfg";
    write_text(cfg, "scenarios=1\nsizes=32\nmethods=qdcart\nreplicates=2\n"
                    "grid=custom\ngrid-values=0.5,2\nseed=3\ngamma=4\n");
    const auto out1 = work_dir() / "bench_cfg.csv";
    const Run r1 = run_cli("benchmark " + out1.string() + " --config " + cfg.string());
    CHECK(r1.exit_code == 0);
    const std::string base = slurp(out1);
    CHECK(contains(base, "1,32,qdcart"));

    // a flag overrides the file value
    const auto out2 = work_dir() / "bench_cfg2.csv";
    const Run r2 = run_cli("benchmark " + out2.string() + " --config " + cfg.string() +
                           " --sizes 64");
    CHECK(r2.exit_code == 0);
    CHECK(contains(slurp(out2), "1,64,qdcart"));
}

TEST_CASE("tune prints the score table with metadata") {
    const auto in = work_dir() / "tune_in.csv";
    const auto out = work_dir() / "tune_fit.csv";
    std::ostringstream data;
    for (int i = 0; i < 32; ++i) data << (i < 16 ? 0.0 : 2.0) << "\n";
    write_text(in, data.str());

    const Run r = run_cli("tune " + in.string() + " " + out.string() +
                          " --tau 0.5 --gamma 4 --df jump");
    CHECK(r.exit_code == 0);
    CHECK(contains(r.out, "sigma=0.5"));
    CHECK(contains(r.out, "lambda,v,loss,bic"));
    CHECK(contains(r.out, "selected_lambda="));

    // constant input: zero jumps, the largest grid value wins ties
    const auto cin = work_dir() / "tune_const.csv";
    write_text(cin, "1\n1\n1\n1\n1\n1\n1\n1\n");
    const Run rc = run_cli("tune " + cin.string() + " " + out.string() + " --gamma 1");
    CHECK(rc.exit_code == 0);
    CHECK(contains(rc.out, "selected_lambda=16"));

    // single-value custom grid selects that value
    const Run r1 = run_cli("tune " + cin.string() + " " + out.string() +
                           " --grid custom --grid-values 2.5");
    CHECK(r1.exit_code == 0);
    CHECK(contains(r1.out, "selected_lambda=2.5"));
}

TEST_CASE("help and missing subcommand") {
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("frobnicate").exit_code == 2);
}
