#pragma once

#include <string>
#include <vector>

namespace gm {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  // Leading '#' lines, with the marker stripped. Used for embedded metadata.
  std::vector<std::string> comments;

  int column(const std::string& name) const;  // -1 when absent
};

// RFC-4180-ish reader: quoted fields, escaped quotes, CRLF tolerant.
// Lines starting with '#' before the header are collected as comments.
CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text, const std::string& origin);

std::string csv_escape(const std::string& field);

// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

double parse_double(const std::string& s, const std::string& context);

}  // namespace gm
