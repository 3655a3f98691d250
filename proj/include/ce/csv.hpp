#pragma once

#include <string>
#include <vector>

#include "ce/types.hpp"

namespace ce {

// Comma-separated table with a header row.  Cells are plain strings with
// no quoting; parse followed by to_string reproduces the input bytes.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::string to_string() const;
  static CsvTable parse(const std::string& text);

  void write(const std::string& path) const;
  static CsvTable load(const std::string& path);
};

// Shortest representation that round-trips the value.
std::string fmt_double(double v);
std::string fmt_index(index_t v);

}  // namespace ce
