#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace smest::ingest {

/**
 * @brief Minimal comma-separated table with line provenance.
 *
 * The pipeline's CSV schemas are plain (no quoting or embedded commas);
 * fields are split on ',' verbatim, CR/LF tolerant. Every row remembers its
 * 1-based source line for error reporting.
 */
struct CsvTable {
  struct Row {
    std::vector<std::string> fields;
    int line = 0;
  };

  std::vector<std::string> header;
  std::vector<Row> rows;
};

/// Reads and splits a CSV file. Throws IoError if unreadable, ValidationError if empty.
CsvTable read_csv(const std::filesystem::path& path);

/// Asserts the header matches exactly; throws ValidationError naming the file.
void require_header(const CsvTable& table, const std::vector<std::string>& expected,
                    const std::string& file_label);

/// Field parsers that cite file and line on failure.
double parse_double_field(const std::string& text, const std::string& file_label, int line,
                          const std::string& column);
long parse_long_field(const std::string& text, const std::string& file_label, int line,
                      const std::string& column);

}  // namespace smest::ingest
