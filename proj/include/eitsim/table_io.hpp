#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace eitsim {

/// Shortest round-trip decimal form, independent of the C locale.
std::string format_number(double x);

/// Tab-separated table; column names carry their unit suffix.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);

  void add_row(const std::vector<double>& values);
  /// Rows may mix numbers and short text cells (region letters, labels).
  void add_row(const std::vector<std::string>& cells);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace eitsim
