#include "slim/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace slim::csvio {

std::string format_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& s, int row, int col) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    throw CsvError("row " + std::to_string(row) + ", column " +
                   std::to_string(col) + ": cannot parse '" + s +
                   "' as a number");
  return v;
}

std::vector<std::string> default_header(int p) {
  std::vector<std::string> h;
  h.reserve(p);
  for (int j = 0; j < p; ++j) h.push_back("c" + std::to_string(j));
  return h;
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

} // namespace

void write_matrix(const std::string& path, const Matrix& M,
                  const std::vector<std::string>& header) {
  if (static_cast<long>(header.size()) != M.cols())
    throw CsvError("header size does not match column count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw CsvError("cannot open '" + path + "' for writing");
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (j) out << ',';
    out << header[j];
  }
  out << '\n';
  for (long i = 0; i < M.rows(); ++i) {
    for (long j = 0; j < M.cols(); ++j) {
      if (j) out << ',';
      out << format_double(M(i, j));
    }
    out << '\n';
  }
  if (!out) throw CsvError("write failed for '" + path + "'");
}

void write_vector(const std::string& path, const Vector& v,
                  const std::string& name) {
  write_matrix(path, v, {name});
}

Table read_table(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  std::string content = buf.str();

  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < content.size()) {
    std::size_t pos = content.find('\n', start);
    if (pos == std::string::npos) pos = content.size();
    std::string line = content.substr(start, pos - start);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(std::move(line));
    start = pos + 1;
  }
  if (lines.empty()) throw CsvError("'" + path + "' is empty");

  Table table;
  table.header = split_fields(lines[0]);
  long cols = static_cast<long>(table.header.size());
  long rows = static_cast<long>(lines.size()) - 1;
  table.values.resize(rows, cols);
  for (long i = 0; i < rows; ++i) {
    auto fields = split_fields(lines[i + 1]);
    if (static_cast<long>(fields.size()) != cols)
      throw CsvError("row " + std::to_string(i + 1) + ": expected " +
                     std::to_string(cols) + " fields, got " +
                     std::to_string(fields.size()));
    for (long j = 0; j < cols; ++j)
      table.values(i, j) =
          parse_double(fields[j], static_cast<int>(i + 1),
                       static_cast<int>(j));
  }
  return table;
}

Matrix read_matrix(const std::string& path) { return read_table(path).values; }

Vector read_vector(const std::string& path) {
  Table t = read_table(path);
  if (t.values.cols() != 1)
    throw CsvError("'" + path + "': expected a single column, got " +
                   std::to_string(t.values.cols()));
  return t.values.col(0);
}

} // namespace slim::csvio
