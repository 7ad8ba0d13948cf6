#include "smest/ingest/csv.hpp"

#include <cerrno>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "smest/core/error.hpp"

namespace smest::ingest {

using core::IoError;
using core::ValidationError;

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  CsvTable table;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      table.header = split_fields(line);
      continue;
    }
    if (line.empty()) continue;
    table.rows.push_back({split_fields(line), line_no});
  }
  if (line_no == 0) throw ValidationError("'" + path.string() + "' is empty (missing header)");
  return table;
}

void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::string& file_label) {
  if (table.header == expected) return;
  std::string want;
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (i > 0) want += ',';
    want += expected[i];
  }
  std::string got;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i > 0) got += ',';
    got += table.header[i];
  }
  throw ValidationError(file_label + ": bad header (expected '" + want + "', got '" + got + "')");
}

double parse_double_field(const std::string& text, const std::string& file_label, int line,
                          const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const double value = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw ValidationError(file_label + ":" + std::to_string(line) + ": column '" + column +
                          "': not a number: '" + text + "'");
  }
  return value;
}

long parse_long_field(const std::string& text, const std::string& file_label, int line,
                      const std::string& column) {
  errno = 0;
  char* end = nullptr;
  const long value = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw ValidationError(file_label + ":" + std::to_string(line) + ": column '" + column +
                          "': not an integer: '" + text + "'");
  }
  return value;
}

}  // namespace smest::ingest
