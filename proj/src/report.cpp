#include "icp/report.hpp"

#include <fmt/format.h>

#include <fstream>
#include <map>
#include <set>

namespace icp {
namespace {

constexpr std::array kMethods{ConformalMethod::full, ConformalMethod::split,
                              ConformalMethod::jackknife};

std::ofstream open_output(const std::filesystem::path& path,
                          const std::vector<std::string>& comments) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& c : comments) out << "# " << c << '\n';
  return out;
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : "NA"; }

double parse_real(const std::string& s, const std::filesystem::path& path, std::size_t row) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw DataError(fmt::format("'{}': invalid number '{}' in row {}", path.string(), s, row + 1));
}

std::string path_suffix(Path p) {
  switch (p) {
    case Path::standard: return "";
    case Path::relevant: return "r";
    case Path::relevant_simulated: return "rs";
  }
  return "";
}

// Queries in order of first appearance.
std::vector<std::string> query_order(const std::vector<IntervalRecord>& records) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& r : records)
    if (seen.insert(r.cell.query).second) out.push_back(r.cell.query);
  return out;
}

}  // namespace

std::string provenance_line(std::uint64_t seed, const std::string& config_hash) {
  return fmt::format("icp {} seed={} config_hash={}", ICP_VERSION, seed, config_hash);
}

void write_intervals_csv(const std::vector<IntervalRecord>& records,
                         const std::filesystem::path& path,
                         const std::vector<std::string>& comments) {
  auto out = open_output(path, comments);
  out << "similarity,query,method,regressor,path,y0,point,lo,up,degenerate,sample_rows,fallback\n";
  for (const auto& r : records) {
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", to_string(r.cell.similarity),
                       r.cell.query, to_string(r.cell.method), to_string(r.cell.regressor),
                       to_string(r.cell.path), r.y0 ? format_real(*r.y0) : "",
                       format_real(r.interval.point), format_real(r.interval.lo),
                       format_real(r.interval.up), r.interval.degenerate ? 1 : 0, r.sample_rows,
                       r.fallback ? 1 : 0);
  }
}

std::vector<IntervalRecord> read_intervals_csv(const std::filesystem::path& path,
                                               std::vector<std::string>* comments) {
  const CsvTable table = read_csv_table(path);
  const std::vector<std::string> expected{"similarity", "query", "method", "regressor",
                                          "path",       "y0",    "point",  "lo",
                                          "up",         "degenerate", "sample_rows", "fallback"};
  if (table.header != expected)
    throw DataError(fmt::format("'{}' is not an interval table", path.string()));
  if (comments != nullptr) *comments = table.comments;
  std::vector<IntervalRecord> out;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& f = table.rows[i];
    IntervalRecord r;
    try {
      r.cell = Cell{parse_similarity(f[0]), parse_method(f[2]), parse_regressor(f[3]),
                    parse_path(f[4]), f[1]};
    } catch (const ConfigError& e) {
      throw DataError(fmt::format("'{}' row {}: {}", path.string(), i + 1, e.what()));
    }
    if (!f[5].empty()) r.y0 = parse_real(f[5], path, i);
    r.interval.point = parse_real(f[6], path, i);
    r.interval.lo = parse_real(f[7], path, i);
    r.interval.up = parse_real(f[8], path, i);
    r.interval.degenerate = f[9] == "1";
    r.interval.path = r.cell.path;
    r.interval.method = r.cell.method;
    r.interval.regressor = r.cell.regressor;
    r.sample_rows = static_cast<Index>(parse_real(f[10], path, i));
    r.fallback = f[11] == "1";
    out.push_back(std::move(r));
  }
  return out;
}

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path,
                       const std::vector<std::string>& comments) {
  auto out = open_output(path, comments);
  out << "similarity,query,method,regressor,path,diffpred,pctpred,int,ab,covered\n";
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", to_string(r.cell.similarity),
                       r.cell.query, to_string(r.cell.method), to_string(r.cell.regressor),
                       to_string(r.cell.path), format_real(r.a_dist), optional_real(r.b_pct),
                       format_real(r.c_len), optional_real(r.d_norm), r.covered ? 1 : 0);
}

std::vector<std::string> raw_table_labels() {
  std::vector<std::string> labels{"y0"};
  for (const std::string stem : {"pred", "lo", "up"})
    for (const std::string reg : {"", "l"})
      for (const auto p : {Path::standard, Path::relevant, Path::relevant_simulated})
        labels.push_back(stem + reg + path_suffix(p));
  return labels;
}

void write_raw_table(const std::vector<IntervalRecord>& records, Similarity similarity,
                     const std::filesystem::path& path, const std::vector<std::string>& comments) {
  std::map<Cell, const IntervalRecord*> by_cell;
  std::map<std::string, std::optional<double>> truth;
  std::set<ConformalMethod> methods;
  for (const auto& r : records) {
    if (r.cell.similarity != similarity) continue;
    by_cell[r.cell] = &r;
    truth[r.cell.query] = r.y0;
    methods.insert(r.cell.method);
  }
  const auto queries = query_order(records);

  struct Column {
    ConformalMethod method;
    std::string query;
  };
  std::vector<Column> columns;
  for (const auto m : kMethods)
    if (methods.count(m))
      for (const auto& q : queries) columns.push_back({m, q});

  auto out = open_output(path, comments);
  out << "variable";
  for (const auto& c : columns) out << ',' << to_string(c.method) << '_' << c.query;
  out << '\n';

  out << "y0";
  for (const auto& c : columns) out << ',' << optional_real(truth[c.query]);
  out << '\n';
  for (const std::string stem : {"pred", "lo", "up"}) {
    for (const auto reg : {RegressorKind::ols, RegressorKind::lasso}) {
      for (const auto p : {Path::standard, Path::relevant, Path::relevant_simulated}) {
        out << stem << (reg == RegressorKind::lasso ? "l" : "") << path_suffix(p);
        for (const auto& c : columns) {
          const auto it = by_cell.find(Cell{similarity, c.method, reg, p, c.query});
          if (it == by_cell.end()) {
            out << ",NA";
            continue;
          }
          const auto& iv = it->second->interval;
          out << ',' << format_real(stem == "pred" ? iv.point : stem == "lo" ? iv.lo : iv.up);
        }
        out << '\n';
      }
    }
  }
}

void write_summary_csv(const SummaryTable& table, const std::filesystem::path& path,
                       const std::vector<std::string>& comments) {
  auto out = open_output(path, comments);
  out << "metric,General,Conformal,Split,Jackknife\n";
  for (std::size_t i = 0; i < table.labels.size(); ++i) {
    out << table.labels[i];
    for (const auto& v : table.values[i]) out << ',' << optional_real(v);
    out << '\n';
  }
}

void write_plot_data(const std::vector<IntervalRecord>& records, const std::filesystem::path& dir,
                     const std::vector<std::string>& comments) {
  std::map<std::pair<Similarity, std::string>, std::vector<const IntervalRecord*>> files;
  for (const auto& r : records) files[{r.cell.similarity, r.cell.query}].push_back(&r);
  for (const auto& [key, rows] : files) {
    auto out = open_output(dir / fmt::format("{}_{}.csv", to_string(key.first), key.second), comments);
    out << "method,regressor,path,y0,pred,lo,up,residual\n";
    for (const auto* r : rows) {
      const auto& iv = r->interval;
      out << fmt::format("{},{},{},{},{},{},{},{}\n", to_string(r->cell.method),
                         to_string(r->cell.regressor), to_string(r->cell.path),
                         r->y0 ? format_real(*r->y0) : "NA", format_real(iv.point),
                         format_real(iv.lo), format_real(iv.up),
                         r->y0 ? format_real(*r->y0 - iv.point) : "NA");
    }
  }
}

void write_reports(const std::vector<IntervalRecord>& records, const std::filesystem::path& dir,
                   const std::vector<std::string>& comments) {
  std::filesystem::create_directories(dir);
  const auto metrics = score_records(records);
  write_metrics_csv(metrics, dir / "metrics.csv", comments);
  std::set<Similarity> sims;
  for (const auto& r : records) sims.insert(r.cell.similarity);
  for (const auto s : sims) {
    write_raw_table(records, s, dir / fmt::format("raw_{}.csv", to_string(s)), comments);
    write_summary_csv(summary_table(metrics, s), dir / fmt::format("summary_{}.csv", to_string(s)),
                      comments);
  }
  write_plot_data(records, dir / "plot", comments);
}

}  // namespace icp
