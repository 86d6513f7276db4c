#pragma once

#include <span>
#include <string>
#include <vector>

#include "qdcart/errors.hpp"
#include "qdcart/lattice.hpp"

namespace qdcart {

/// Headerless numeric CSV: one value per line (1-d) or rows of
/// comma-separated values (2-d, row-major).
struct CsvData {
    std::vector<double> values;
    int rows = 0;
    int cols = 0;

    bool two_d() const { return cols > 1; }
    LatticeShape shape() const {
        return cols > 1 ? LatticeShape{rows, cols} : LatticeShape{rows};
    }
};

/// Throws ParseError (with 1-based line/column) on malformed input,
/// ragged rows, or non-finite values.
CsvData read_numeric_csv(const std::string& path);

/// Shortest decimal representation that round-trips the double exactly.
std::string format_double(double v);

void write_csv_1d(const std::string& path, std::span<const double> values);
void write_csv_2d(const std::string& path, std::span<const double> values, int rows, int cols);

/// Writes 1-d or 2-d depending on the shape (d <= 2).
void write_csv(const std::string& path, const LatticeShape& shape,
               std::span<const double> values);

}  // namespace qdcart
