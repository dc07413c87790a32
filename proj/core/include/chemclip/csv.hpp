#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace chemclip::csv {

// Minimal RFC 4180 reader: comma delimiter, double-quote quoting, header row
// required. Lines are numbered from 1 (the header).
class Table {
 public:
  static Table read(const std::filesystem::path& path);
  static Table parse(std::istream& in, const std::string& source_name = "<stream>");

  const std::vector<std::string>& header() const { return header_; }
  std::size_t size() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }
  std::size_t line(std::size_t i) const { return lines_[i]; }

  std::optional<std::size_t> find_column(std::string_view name) const;
  // Throws Error(kMissingColumn).
  std::size_t column(std::string_view name) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
  std::vector<std::size_t> lines_;
};

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Locale-independent numeric parsing of a whole field.
std::optional<double> to_double(std::string_view field);
std::optional<long long> to_integer(std::string_view field);

// Shortest round-trip representation.
std::string format_double(double value);

}  // namespace chemclip::csv
