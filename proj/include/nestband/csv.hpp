#pragma once

// Comma-separated numeric matrices: one row per line, no header, '.' decimal.
// Missing values print as the literal "NA".

#include "nestband/cholcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace nestband {

/// Parses numeric CSV text. `source` names the input in error messages,
/// which carry 1-based row and column numbers. Blank lines are skipped.
Matrix parse_matrix_csv(const std::string& text, const std::string& source = "input");

/// Throws IoError when the file cannot be read.
Matrix read_matrix_csv(const std::string& path);

struct LabeledTable {
  Matrix values;
  std::vector<std::string> labels;
};

/// `label_col` is a 0-based column index; -1 selects the last column. The
/// label column may hold any text; every other cell must be numeric.
LabeledTable parse_labeled_csv(const std::string& text, Index label_col,
                               const std::string& source = "input");
LabeledTable read_labeled_csv(const std::string& path, Index label_col);

/// Shortest text that reads back to the same double (17 significant digits).
std::string format_number(double v);
std::string format_value(const std::optional<double>& v);

std::string matrix_to_csv(const Matrix& m);

std::string read_text(const std::string& path);
/// Truncates and writes. Throws IoError on failure.
void write_text(const std::string& path, const std::string& text);
void write_matrix_csv(const std::string& path, const Matrix& m);

}  // namespace nestband
