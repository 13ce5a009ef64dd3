#pragma once

#include "icp/core.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace icp {

// Identifies one interval in the experiment grid.
struct Cell {
  Similarity similarity = Similarity::percentile;
  ConformalMethod method = ConformalMethod::split;
  RegressorKind regressor = RegressorKind::ols;
  Path path = Path::standard;
  std::string query;

  auto operator<=>(const Cell&) const = default;
};

// Forecast and interval quality of one interval against the true head.
struct MetricRow {
  double a_dist = 0.0;            // |y0 - point|
  std::optional<double> b_pct;    // a_dist / y0, undefined when y0 == 0
  double c_len = 0.0;             // up - lo
  std::optional<double> d_norm;   // a_dist / c_len, undefined when c_len == 0
  bool covered = false;           // lo <= y0 <= up
  Cell cell;
};

MetricRow score(const PredictionInterval& interval, double y0, Cell cell = {});

// Dimensions kept when aggregating; the others are averaged over.
struct GroupBy {
  bool similarity = true;
  bool method = true;
  bool regressor = true;
  bool path = true;
  bool query = false;
};

struct MetricMeans {
  Cell key;  // dropped dimensions are left at their defaults
  double a_dist = 0.0;
  std::optional<double> b_pct;
  double c_len = 0.0;
  std::optional<double> d_norm;
  double coverage = 0.0;
  std::size_t count = 0;
};

// Arithmetic means per group, ordered by group key. B and D average over
// the rows where they are defined. Throws DataError on empty input.
std::vector<MetricMeans> aggregate(const std::vector<MetricRow>& rows, GroupBy by = {});

// Row label of the summary tables, e.g. "diffpredlr" or "%predk".
enum class MetricFamily { diffpred, pctpred, interval, ab };
std::string metric_label(MetricFamily f, RegressorKind r, Path p);

// Method-by-metric summary for one similarity: 4 families x 3 regressors
// x 3 paths = 36 rows; columns General, Conformal, Split, Jackknife.
// "%pred" rows are reported in percent. General is the mean of the method
// columns that are present.
struct SummaryTable {
  Similarity similarity = Similarity::percentile;
  std::vector<std::string> labels;
  std::vector<std::array<std::optional<double>, 4>> values;
};

SummaryTable summary_table(const std::vector<MetricRow>& rows, Similarity similarity);

}  // namespace icp
