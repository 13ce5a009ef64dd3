#include "icp/core.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace icp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

CsvTable read_csv_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));
  CsvTable table;
  std::string line;
  bool have_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto view = trim(line);
    if (view.empty()) continue;
    if (!have_header && view.front() == '#') {
      table.comments.emplace_back(trim(view.substr(1)));
      continue;
    }
    auto fields = split_fields(view);
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size())
      throw DataError(fmt::format("'{}' line {}: expected {} fields, found {}", path.string(),
                                  line_no, table.header.size(), fields.size()));
    table.rows.push_back(std::move(fields));
  }
  if (!have_header) throw DataError(fmt::format("'{}' has no header row", path.string()));
  return table;
}

Dataset load_csv(const std::filesystem::path& path, std::string_view head_column) {
  const CsvTable table = read_csv_table(path);
  Index head = -1;
  for (std::size_t j = 0; j < table.header.size(); ++j) {
    if (table.header[j] != head_column) continue;
    if (head >= 0)
      throw DataError(fmt::format("'{}': head column '{}' appears more than once", path.string(),
                                  head_column));
    head = static_cast<Index>(j);
  }
  if (head < 0)
    throw DataError(fmt::format("'{}': no head column '{}'", path.string(), head_column));
  if (table.header.size() < 2)
    throw DataError(fmt::format("'{}': no feature columns", path.string()));
  if (table.rows.empty()) throw DataError(fmt::format("'{}': no data rows", path.string()));

  const auto n = static_cast<Index>(table.rows.size());
  const auto p = static_cast<Index>(table.header.size()) - 1;
  Dataset d;
  d.x.resize(n, p);
  d.y.resize(n);
  d.head_name = std::string(head_column);
  for (std::size_t j = 0; j < table.header.size(); ++j)
    if (static_cast<Index>(j) != head) d.feature_names.push_back(table.header[j]);

  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    Index col = 0;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const std::string& cell = row[j];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr != cell.data() + cell.size() || cell.empty() || !std::isfinite(v))
        throw DataError(fmt::format("'{}': invalid value '{}' at row {}, column '{}'",
                                    path.string(), cell, i + 1, table.header[j]));
      if (static_cast<Index>(j) == head)
        d.y(i) = v;
      else
        d.x(i, col++) = v;
    }
  }
  validate(d);
  return d;
}

void save_csv(const Dataset& d, const std::filesystem::path& path,
              std::span<const std::string> comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& c : comments) out << "# " << c << '\n';
  out << d.head_name;
  for (const auto& name : d.feature_names) out << ',' << name;
  out << '\n';
  for (Index i = 0; i < d.rows(); ++i) {
    out << format_real(d.y(i));
    for (Index j = 0; j < d.cols(); ++j) out << ',' << format_real(d.x(i, j));
    out << '\n';
  }
  if (!out) throw DataError(fmt::format("failed writing '{}'", path.string()));
}

}  // namespace icp
