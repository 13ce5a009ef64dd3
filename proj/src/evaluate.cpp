#include "icp/evaluate.hpp"

#include <fmt/format.h>

#include <map>

namespace icp {
namespace {

constexpr std::array kRegressors{RegressorKind::ols, RegressorKind::lasso, RegressorKind::kernel};
constexpr std::array kPaths{Path::standard, Path::relevant, Path::relevant_simulated};
constexpr std::array kMethods{ConformalMethod::full, ConformalMethod::split,
                              ConformalMethod::jackknife};

Cell project(const Cell& c, const GroupBy& by) {
  Cell k;
  if (by.similarity) k.similarity = c.similarity;
  if (by.method) k.method = c.method;
  if (by.regressor) k.regressor = c.regressor;
  if (by.path) k.path = c.path;
  if (by.query) k.query = c.query;
  return k;
}

struct Accumulator {
  double a = 0, b = 0, c = 0, d = 0, covered = 0;
  std::size_t n = 0, nb = 0, nd = 0;
};

std::optional<double> family_value(const MetricMeans& m, MetricFamily f) {
  switch (f) {
    case MetricFamily::diffpred: return m.a_dist;
    case MetricFamily::pctpred:
      if (m.b_pct) return 100.0 * *m.b_pct;
      return std::nullopt;
    case MetricFamily::interval: return m.c_len;
    case MetricFamily::ab: return m.d_norm;
  }
  return std::nullopt;
}

}  // namespace

MetricRow score(const PredictionInterval& interval, double y0, Cell cell) {
  MetricRow row;
  row.cell = std::move(cell);
  row.a_dist = std::abs(y0 - interval.point);
  if (y0 != 0.0) row.b_pct = row.a_dist / y0;
  row.c_len = interval.up - interval.lo;
  if (row.c_len > 0.0) row.d_norm = row.a_dist / row.c_len;
  row.covered = interval.lo <= y0 && y0 <= interval.up;
  return row;
}

std::vector<MetricMeans> aggregate(const std::vector<MetricRow>& rows, GroupBy by) {
  if (rows.empty()) throw DataError("no metric rows to aggregate");
  std::map<Cell, Accumulator> groups;
  for (const auto& r : rows) {
    auto& acc = groups[project(r.cell, by)];
    acc.a += r.a_dist;
    acc.c += r.c_len;
    acc.covered += r.covered ? 1.0 : 0.0;
    ++acc.n;
    if (r.b_pct) {
      acc.b += *r.b_pct;
      ++acc.nb;
    }
    if (r.d_norm) {
      acc.d += *r.d_norm;
      ++acc.nd;
    }
  }
  std::vector<MetricMeans> out;
  out.reserve(groups.size());
  for (const auto& [key, acc] : groups) {
    MetricMeans m;
    m.key = key;
    const auto n = static_cast<double>(acc.n);
    m.a_dist = acc.a / n;
    m.c_len = acc.c / n;
    m.coverage = acc.covered / n;
    m.count = acc.n;
    if (acc.nb > 0) m.b_pct = acc.b / static_cast<double>(acc.nb);
    if (acc.nd > 0) m.d_norm = acc.d / static_cast<double>(acc.nd);
    out.push_back(std::move(m));
  }
  return out;
}

std::string metric_label(MetricFamily f, RegressorKind r, Path p) {
  std::string label;
  switch (f) {
    case MetricFamily::diffpred: label = "diffpred"; break;
    case MetricFamily::pctpred: label = "%pred"; break;
    case MetricFamily::interval: label = "int"; break;
    case MetricFamily::ab: label = "ab"; break;
  }
  if (r == RegressorKind::lasso) label += 'l';
  if (r == RegressorKind::kernel) label += 'k';
  if (p == Path::relevant) label += 'r';
  if (p == Path::relevant_simulated) label += "rs";
  return label;
}

SummaryTable summary_table(const std::vector<MetricRow>& rows, Similarity similarity) {
  std::vector<MetricRow> selected;
  for (const auto& r : rows)
    if (r.cell.similarity == similarity) selected.push_back(r);

  std::map<Cell, MetricMeans> means;
  if (!selected.empty())
    for (auto& m : aggregate(selected)) means.emplace(m.key, std::move(m));

  SummaryTable table;
  table.similarity = similarity;
  for (const auto family : {MetricFamily::diffpred, MetricFamily::pctpred, MetricFamily::interval,
                            MetricFamily::ab}) {
    for (const auto reg : kRegressors) {
      for (const auto path : kPaths) {
        std::array<std::optional<double>, 4> row{};
        double sum = 0.0;
        int present = 0;
        for (std::size_t k = 0; k < kMethods.size(); ++k) {
          const Cell key{similarity, kMethods[k], reg, path, ""};
          const auto it = means.find(key);
          if (it == means.end()) continue;
          row[k + 1] = family_value(it->second, family);
          if (row[k + 1]) {
            sum += *row[k + 1];
            ++present;
          }
        }
        if (present > 0) row[0] = sum / present;
        table.labels.push_back(metric_label(family, reg, path));
        table.values.push_back(row);
      }
    }
  }
  return table;
}

}  // namespace icp
