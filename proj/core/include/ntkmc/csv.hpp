#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace ntkmc {

/// One parsed CSV record with the 1-based line it came from.
struct CsvRecord {
  std::size_t line = 0;
  std::vector<std::string> fields;
};

/// Splits a file into comma-separated records. Blank lines and lines
/// starting with '#' are skipped; fields are trimmed. No quoting support.
std::vector<CsvRecord> read_csv(const std::string& path);

/// Parses a numeric field; empty fields and "NaN"/"nan" give NaN when
/// `allow_missing`, anything else unparsable is a FormatError naming the line.
double parse_number(const std::string& field, std::size_t line, bool allow_missing = false);

/// Dense numeric matrix, one CSV row per matrix row. Ragged rows are a
/// FormatError. Missing cells become NaN when `allow_missing`.
Eigen::MatrixXd read_dense_matrix(const std::string& path, bool allow_missing = false);

/// Writes with 17 significant digits so values round-trip exactly.
void write_dense_matrix(const std::string& path, const Eigen::MatrixXd& matrix);

}  // namespace ntkmc
