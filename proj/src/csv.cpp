#include "qdcart/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace qdcart {

CsvData read_numeric_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError(0, 0, "cannot open '" + path + "'");

    CsvData data;
    std::string line;
    std::size_t line_no = 0;
    int expected_cols = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            // allow a trailing blank line only
            std::string rest;
            while (std::getline(in, rest)) {
                if (!rest.empty() && rest.back() == '\r') rest.pop_back();
                if (!rest.empty()) throw ParseError(line_no, 1, "blank line inside data");
                ++line_no;
            }
            break;
        }
        int cols = 0;
        std::size_t start = 0;
        while (true) {
            std::size_t comma = line.find(',', start);
            const std::size_t end = comma == std::string::npos ? line.size() : comma;
            std::size_t b = start, e = end;
            while (b < e && (line[b] == ' ' || line[b] == '\t')) ++b;
            while (e > b && (line[e - 1] == ' ' || line[e - 1] == '\t')) --e;
            double v = 0.0;
            const auto res = std::from_chars(line.data() + b, line.data() + e, v);
            if (res.ec != std::errc() || res.ptr != line.data() + e)
                throw ParseError(line_no, start + 1, "expected a number");
            if (!std::isfinite(v))
                throw ParseError(line_no, start + 1, "non-finite value");
            data.values.push_back(v);
            ++cols;
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (expected_cols < 0)
            expected_cols = cols;
        else if (cols != expected_cols)
            throw ParseError(line_no, 1,
                             "row has " + std::to_string(cols) + " values, expected " +
                                 std::to_string(expected_cols));
        ++data.rows;
    }
    if (data.rows == 0) throw ParseError(1, 1, "empty input");
    data.cols = expected_cols;
    return data;
}

std::string format_double(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

void write_rows(const std::string& path, std::span<const double> values, int rows, int cols) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path + "'");
    std::string line;
    std::size_t pos = 0;
    for (int r = 0; r < rows; ++r) {
        line.clear();
        for (int c = 0; c < cols; ++c) {
            if (c) line += ',';
            line += format_double(values[pos++]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace

void write_csv_1d(const std::string& path, std::span<const double> values) {
    write_rows(path, values, static_cast<int>(values.size()), 1);
}

void write_csv_2d(const std::string& path, std::span<const double> values, int rows, int cols) {
    if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) != values.size())
        throw UsageError("value count does not match rows x cols");
    write_rows(path, values, rows, cols);
}

void write_csv(const std::string& path, const LatticeShape& shape,
               std::span<const double> values) {
    if (shape.ndim() == 1)
        write_csv_1d(path, values);
    else if (shape.ndim() == 2)
        write_csv_2d(path, values, shape.side(0), shape.side(1));
    else
        throw UsageError("CSV output supports 1-d and 2-d lattices only");
}

}  // namespace qdcart
