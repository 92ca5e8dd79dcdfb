#include "ntkmc/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ntkmc/errors.hpp"

namespace ntkmc {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string where(std::size_t line) { return "line " + std::to_string(line); }

}  // namespace

std::vector<CsvRecord> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open '" + path + "'");
  std::vector<CsvRecord> records;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    const std::string stripped = trim(text);
    if (stripped.empty() || stripped.front() == '#') continue;
    CsvRecord record{line, {}};
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      record.fields.push_back(trim(text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    records.push_back(std::move(record));
  }
  return records;
}

double parse_number(const std::string& field, std::size_t line, bool allow_missing) {
  if (field.empty() || field == "NaN" || field == "nan" || field == "NA") {
    if (allow_missing) return std::numeric_limits<double>::quiet_NaN();
    throw FormatError(where(line) + ": missing value");
  }
  double value = 0.0;
  const char* first = field.data();
  const char* last = first + field.size();
  if (*first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw FormatError(where(line) + ": not a number: '" + field + "'");
  return value;
}

Eigen::MatrixXd read_dense_matrix(const std::string& path, bool allow_missing) {
  const auto records = read_csv(path);
  if (records.empty()) throw FormatError("'" + path + "' contains no rows");
  const std::size_t cols = records.front().fields.size();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(records.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.fields.size() != cols) {
      std::ostringstream msg;
      msg << path << ": " << where(rec.line) << " has " << rec.fields.size() << " fields, expected " << cols;
      throw FormatError(msg.str());
    }
    for (std::size_t c = 0; c < cols; ++c)
      out(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          parse_number(rec.fields[c], rec.line, allow_missing);
  }
  return out;
}

void write_dense_matrix(const std::string& path, const Eigen::MatrixXd& matrix) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write '" + path + "'");
  out.precision(17);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c) out << ',';
      const double v = matrix(r, c);
      if (std::isnan(v))
        out << "NaN";
      else
        out << v;
    }
    out << '\n';
  }
  if (!out) throw FormatError("failed writing '" + path + "'");
}

}  // namespace ntkmc
