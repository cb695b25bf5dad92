#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "epscope/core.hpp"

namespace epscope {

// Shortest round-trip decimal form of a double; identical runs give
// byte-identical files.
std::string format_double(double v);

// Minimal CSV emitter with a fixed column order.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns);
  void add_row(const std::vector<double>& values);
  void add_row(std::vector<std::string> cells);
  std::string str() const;
  void write(const std::filesystem::path& path) const;
  std::size_t n_rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace epscope
