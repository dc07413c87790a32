#include "chemclip/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "chemclip/error.hpp"

namespace chemclip::csv {
namespace {

// Splits one logical record; quoted fields may span physical lines, in which
// case more input is pulled from `in`.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  std::string line;
  if (!std::getline(in, line)) return false;
  ++line_no;
  fields.clear();
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i >= line.size()) {
      if (quoted) {
        std::string more;
        if (!std::getline(in, more)) {
          throw RowError(ErrorCode::kMalformedRow, line_no, "unterminated quoted field");
        }
        ++line_no;
        field += '\n';
        line = std::move(more);
        i = 0;
        continue;
      }
      break;
    }
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i + 1 == line.size()) {
      // CRLF line ending
    } else {
      field += c;
    }
    ++i;
  }
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kMissingInput, "cannot open " + path.string());
  return parse(in, path.string());
}

Table Table::parse(std::istream& in, const std::string& source_name) {
  Table table;
  table.source_ = source_name;
  std::size_t line_no = 0;
  std::vector<std::string> fields;
  if (!read_record(in, fields, line_no)) {
    throw Error(ErrorCode::kFormatError, source_name + ": missing header row");
  }
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
  table.header_ = fields;
  while (true) {
    const std::size_t start = line_no + 1;
    if (!read_record(in, fields, line_no)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header_.size()) {
      throw RowError(ErrorCode::kMalformedRow, start,
                     source_name + ": expected " + std::to_string(table.header_.size()) + " fields, got " +
                         std::to_string(fields.size()));
    }
    table.rows_.push_back(fields);
    table.lines_.push_back(start);
  }
  return table;
}

std::optional<std::size_t> Table::find_column(std::string_view name) const {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (header_[i] == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::column(std::string_view name) const {
  if (auto idx = find_column(name)) return *idx;
  throw Error(ErrorCode::kMissingColumn, source_ + ": missing column '" + std::string(name) + "'");
}

std::string escape(std::string_view field) {
  if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::optional<double> to_double(std::string_view field) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

std::optional<long long> to_integer(std::string_view field) {
  while (!field.empty() && field.front() == ' ') field.remove_prefix(1);
  while (!field.empty() && field.back() == ' ') field.remove_suffix(1);
  if (field.empty()) return std::nullopt;
  if (field.front() == '+') field.remove_prefix(1);
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (ec != std::errc() || ptr != field.data() + field.size()) return std::nullopt;
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

}  // namespace chemclip::csv
