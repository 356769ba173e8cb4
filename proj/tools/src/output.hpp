#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace mlab::cli {

/// Shortest text with 17 significant digits, locale independent.
std::string fmt(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
  void add(std::vector<std::string> row);
  std::size_t rows() const { return rows_.size(); }
  std::string render() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes through a sibling temp file and a rename so readers never see a
/// partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace mlab::cli
