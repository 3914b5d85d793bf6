#include "nestband/csv.hpp"

#include "nestband/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace nestband {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::vector<std::string>> split_cells(const std::string& text,
                                                  std::vector<std::size_t>* line_numbers) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(trim(line.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(cells));
    line_numbers->push_back(line_no);
  }
  return rows;
}

std::string where(const std::string& source, std::size_t line, std::size_t col) {
  return source + ": row " + std::to_string(line) + ", column " + std::to_string(col);
}

double parse_cell(const std::string& cell, const std::string& source, std::size_t line, std::size_t col) {
  if (cell == "NA") throw ParseError(where(source, line, col) + ": missing value (NA) is not supported");
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (!cell.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw ParseError(where(source, line, col) + ": '" + cell + "' is not a finite number");
  }
  return v;
}

}  // namespace

Matrix parse_matrix_csv(const std::string& text, const std::string& source) {
  std::vector<std::size_t> lines;
  const auto rows = split_cells(text, &lines);
  if (rows.empty()) throw ParseError(source + ": no data rows");
  const std::size_t cols = rows.front().size();
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw ParseError(source + ": row " + std::to_string(lines[r]) + " has " +
                       std::to_string(rows[r].size()) + " columns, expected " + std::to_string(cols));
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = parse_cell(rows[r][c], source, lines[r], c + 1);
    }
  }
  return m;
}

Matrix read_matrix_csv(const std::string& path) {
  return parse_matrix_csv(read_text(path), path);
}

LabeledTable parse_labeled_csv(const std::string& text, Index label_col, const std::string& source) {
  std::vector<std::size_t> lines;
  const auto rows = split_cells(text, &lines);
  if (rows.empty()) throw ParseError(source + ": no data rows");
  const std::size_t cols = rows.front().size();
  if (cols < 2) throw ParseError(source + ": need a label column and at least one variable");
  const std::size_t label = label_col < 0 ? cols - 1 : static_cast<std::size_t>(label_col);
  if (label >= cols) {
    throw ParseError(source + ": label column " + std::to_string(label + 1) + " does not exist (" +
                     std::to_string(cols) + " columns)");
  }
  LabeledTable t;
  t.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(cols - 1));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) {
      throw ParseError(source + ": row " + std::to_string(lines[r]) + " has " +
                       std::to_string(rows[r].size()) + " columns, expected " + std::to_string(cols));
    }
    Index out_col = 0;
    for (std::size_t c = 0; c < cols; ++c) {
      if (c == label) {
        if (rows[r][c].empty()) throw ParseError(where(source, lines[r], c + 1) + ": empty label");
        t.labels.push_back(rows[r][c]);
      } else {
        t.values(static_cast<Index>(r), out_col++) = parse_cell(rows[r][c], source, lines[r], c + 1);
      }
    }
  }
  return t;
}

LabeledTable read_labeled_csv(const std::string& path, Index label_col) {
  return parse_labeled_csv(read_text(path), label_col, path);
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NA";
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_value(const std::optional<double>& v) {
  return v ? format_number(*v) : "NA";
}

std::string matrix_to_csv(const Matrix& m) {
  std::string out;
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out += ',';
      out += format_number(m(r, c));
    }
    out += '\n';
  }
  return out;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("error writing '" + path + "'");
}

void write_matrix_csv(const std::string& path, const Matrix& m) {
  write_text(path, matrix_to_csv(m));
}

}  // namespace nestband
