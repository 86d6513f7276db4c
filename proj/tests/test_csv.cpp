#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "qdcart/csv.hpp"

using namespace qdcart;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = (std::filesystem::temp_directory_path() / name).string();
    }
    ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

}  // namespace

TEST_SUITE("csv") {

TEST_CASE("1-d round trip") {
    TempFile f("qdcart_csv_1d.csv");
    write_csv_1d(f.path, std::vector<double>{1.5, -2.25, 0.0});
    const CsvData data = read_numeric_csv(f.path);
    CHECK_FALSE(data.two_d());
    CHECK(data.rows == 3);
    CHECK(data.values == std::vector<double>{1.5, -2.25, 0.0});
}

TEST_CASE("2-d round trip preserves layout") {
    TempFile f("qdcart_csv_2d.csv");
    const std::vector<double> vals{1, 2, 3, 4, 5, 6};
    write_csv_2d(f.path, vals, 2, 3);
    const CsvData data = read_numeric_csv(f.path);
    CHECK(data.two_d());
    CHECK(data.rows == 2);
    CHECK(data.cols == 3);
    CHECK(data.values == vals);
    CHECK(data.shape() == LatticeShape{2, 3});
}

TEST_CASE("round trips are bit exact for random doubles") {
    std::mt19937_64 rng(4242);
    std::vector<double> vals;
    std::normal_distribution<double> nd;
    for (int i = 0; i < 500; ++i) vals.push_back(nd(rng) * std::pow(10.0, int(rng() % 17) - 8));
    vals.push_back(0.1);
    vals.push_back(-0.0);
    vals.push_back(1e300);
    vals.push_back(5e-324);
    TempFile f("qdcart_csv_rt.csv");
    write_csv_1d(f.path, vals);
    const CsvData data = read_numeric_csv(f.path);
    REQUIRE(data.values.size() == vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        CHECK(std::memcmp(&data.values[i], &vals[i], sizeof(double)) == 0);
    }
}

TEST_CASE("parse failures carry line and column positions") {
    TempFile f("qdcart_csv_bad.csv");
    SUBCASE("non-numeric token") {
        write_text(f.path, "1.5\nabc\n2.5\n");
        try {
            read_numeric_csv(f.path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(e.column() == 1);
        }
    }
    SUBCASE("ragged rows") {
        write_text(f.path, "1,2,3\n4,5\n");
        CHECK_THROWS_AS(read_numeric_csv(f.path), ParseError);
    }
    SUBCASE("non-finite value") {
        write_text(f.path, "1\ninf\n");
        CHECK_THROWS_AS(read_numeric_csv(f.path), ParseError);
    }
    SUBCASE("column position inside a row") {
        write_text(f.path, "1,2\n3,x\n");
        try {
            read_numeric_csv(f.path);
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() == 2);
            CHECK(e.column() == 3);
        }
    }
    SUBCASE("empty file") {
        write_text(f.path, "");
        CHECK_THROWS_AS(read_numeric_csv(f.path), ParseError);
    }
    SUBCASE("blank interior line") {
        write_text(f.path, "1\n\n2\n");
        CHECK_THROWS_AS(read_numeric_csv(f.path), ParseError);
    }
    SUBCASE("missing file") { CHECK_THROWS_AS(read_numeric_csv("/nonexistent/x.csv"), ParseError); }
}

TEST_CASE("trailing newline and CRLF are tolerated") {
    TempFile f("qdcart_csv_crlf.csv");
    write_text(f.path, "1.5\r\n2.5\r\n");
    const CsvData data = read_numeric_csv(f.path);
    CHECK(data.values == std::vector<double>{1.5, 2.5});
}

}  // TEST_SUITE
