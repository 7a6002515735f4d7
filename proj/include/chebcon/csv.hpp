#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <variant>
#include <vector>

namespace chebcon {

using CsvCell = std::variant<std::string, double, long long, unsigned long long>;

// Shortest round-trip formatting, '.' decimal separator, no locale.
std::string format_number(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add(std::vector<CsvCell> row);
  std::string str() const;
  void write(const std::filesystem::path& path) const;

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<CsvCell>> rows_;
};

}  // namespace chebcon
