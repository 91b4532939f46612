#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace exclusim {

/// Writes `content` next to `path` under a temporary name, then renames it into
/// place, so readers never observe a partial file.
void write_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

//! Git blob id: SHA-1 of "blob <size>\0" followed by the content.
std::string git_blob_hash(const std::string& content);

//! Shortest decimal form that reads back to the same double.
std::string format_double(double v);

/// CSV with a header row and LF line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const noexcept { return rows_.size(); }
  const std::vector<std::string>& header() const noexcept { return header_; }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace exclusim
