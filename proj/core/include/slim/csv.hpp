#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "slim/types.hpp"

namespace slim::csvio {

// Malformed input; message names the offending row/column.
struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dialect everywhere: comma separator, one header row, '.' decimal,
// LF line endings, UTF-8. Doubles are written shortest-round-trip.

void write_matrix(const std::string& path, const Matrix& M,
                  const std::vector<std::string>& header);
void write_vector(const std::string& path, const Vector& v,
                  const std::string& name);

std::vector<std::string> default_header(int p);  // c0..c{p-1}

struct Table {
  std::vector<std::string> header;
  Matrix values;
};

Table read_table(const std::string& path);
Matrix read_matrix(const std::string& path);
Vector read_vector(const std::string& path);

std::string format_double(double v);
double parse_double(const std::string& s, int row, int col);

} // namespace slim::csvio
