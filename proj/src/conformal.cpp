#include "icp/conformal.hpp"
#include "icp/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace icp {
namespace {

// ceil() with a small allowance so products such as 10 * 0.9 that land a
// rounding error above an integer are not bumped to the next rank.
Index ceil_rank(double v) { return static_cast<Index>(std::ceil(v - 1e-9)); }

// Cross-validation folds cannot exceed the rows available to a refit.
RegressorSpec clamp_folds(RegressorSpec reg, Index rows) {
  if (reg.kind == RegressorKind::lasso && !reg.fixed_lambda)
    reg.lasso.folds = static_cast<int>(std::min<Index>(reg.lasso.folds, rows));
  return reg;
}

FittedModel fit_rows(const Dataset& d, const RegressorSpec& reg) {
  return fit(d, clamp_folds(reg, d.rows()));
}

PredictionInterval centered(double point, double half_width, ConformalMethod method,
                            RegressorKind kind) {
  PredictionInterval out;
  out.point = point;
  out.lo = point - half_width;
  out.up = point + half_width;
  out.method = method;
  out.regressor = kind;
  return out;
}

}  // namespace

void ConformalSpec::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie strictly inside (0, 1)");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("rho must lie strictly inside (0, 1)");
  if (grid_points < 10) throw ConfigError("full conformal needs at least 10 grid points");
  if (!(grid_expansion >= 0.0)) throw ConfigError("grid_expansion must be non-negative");
}

GroupedSample GroupedSample::singletons(Dataset d) {
  GroupedSample s;
  const Index n = d.rows();
  s.data = std::move(d);
  s.group.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) s.group[static_cast<std::size_t>(i)] = i;
  s.anchor.assign(static_cast<std::size_t>(n), true);
  s.groups = n;
  return s;
}

std::vector<Index> GroupedSample::anchors() const {
  std::vector<Index> out(static_cast<std::size_t>(groups), -1);
  for (std::size_t i = 0; i < group.size(); ++i)
    if (anchor[i]) out[static_cast<std::size_t>(group[i])] = static_cast<Index>(i);
  return out;
}

std::vector<Index> GroupedSample::rows_in(const std::vector<bool>& keep) const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < group.size(); ++i)
    if (keep[static_cast<std::size_t>(group[i])]) out.push_back(static_cast<Index>(i));
  return out;
}

void GroupedSample::validate() const {
  const auto n = static_cast<std::size_t>(data.rows());
  if (group.size() != n || anchor.size() != n) throw DataError("grouping does not match row count");
  std::vector<int> anchors_seen(static_cast<std::size_t>(groups), 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (group[i] < 0 || group[i] >= groups) throw DataError("group id out of range");
    if (anchor[i]) ++anchors_seen[static_cast<std::size_t>(group[i])];
  }
  for (const int c : anchors_seen)
    if (c != 1) throw DataError("every group needs exactly one anchor row");
}

Index split_rank(Index m, double alpha) {
  return std::clamp<Index>(ceil_rank(static_cast<double>(m + 1) * (1.0 - alpha)), 1, m);
}

Index jackknife_rank(Index n, double alpha) {
  return std::clamp<Index>(ceil_rank(static_cast<double>(n) * (1.0 - alpha)), 1, n);
}

Index full_rank_cutoff(Index n, double alpha) {
  return std::clamp<Index>(ceil_rank(static_cast<double>(n + 1) * (1.0 - alpha)), 1, n + 1);
}

double kth_smallest(std::vector<double> values, Index k) {
  if (k < 1 || k > static_cast<Index>(values.size()))
    throw DataError(fmt::format("rank {} outside 1..{}", k, values.size()));
  const auto it = values.begin() + (k - 1);
  std::nth_element(values.begin(), it, values.end());
  return *it;
}

std::vector<bool> split_partition(Index groups, double rho, std::uint64_t seed) {
  const auto train = static_cast<Index>(std::floor(rho * static_cast<double>(groups)));
  if (train < 2 || train > groups - 2)
    throw DataError(fmt::format(
        "split conformal: {} observations cannot be split with rho={} into two parts of size >= 2",
        groups, rho));
  Rng rng(seed);
  const auto order = permutation(static_cast<std::size_t>(groups), rng);
  std::vector<bool> in_train(static_cast<std::size_t>(groups), false);
  for (Index i = 0; i < train; ++i) in_train[order[static_cast<std::size_t>(i)]] = true;
  return in_train;
}

Index minimum_sample_size(ConformalMethod method, double rho) {
  switch (method) {
    case ConformalMethod::full: return 2;
    case ConformalMethod::jackknife: return 3;
    case ConformalMethod::split:
      for (Index n = 4; n < 100000; ++n) {
        const auto train = static_cast<Index>(std::floor(rho * static_cast<double>(n)));
        if (train >= 2 && train <= n - 2) return n;
      }
      break;
  }
  throw ConfigError("no admissible sample size for this conformal configuration");
}

PredictionInterval split_conformal(const Dataset& d, const RegressorSpec& reg, const Vector& x0,
                                   const ConformalSpec& spec, std::uint64_t seed) {
  return split_conformal(GroupedSample::singletons(d), reg, x0, spec, seed);
}

PredictionInterval split_conformal(const GroupedSample& s, const RegressorSpec& reg,
                                   const Vector& x0, const ConformalSpec& spec,
                                   std::uint64_t seed) {
  spec.validate();
  s.validate();
  const auto in_train = split_partition(s.groups, spec.rho, seed);
  const FittedModel model = fit_rows(s.data.subset(s.rows_in(in_train)), reg);

  std::vector<double> scores;
  for (const Index a : s.anchors()) {
    if (in_train[static_cast<std::size_t>(s.group[static_cast<std::size_t>(a)])]) continue;
    scores.push_back(std::abs(s.data.y(a) - model.predict(Vector(s.data.x.row(a).transpose()))));
  }
  const Index k = split_rank(static_cast<Index>(scores.size()), spec.alpha);
  return centered(model.predict(x0), kth_smallest(std::move(scores), k), ConformalMethod::split,
                  reg.kind);
}

std::vector<double> full_conformal_grid(const Vector& y, int points, double expansion) {
  const double lo = y.minCoeff();
  const double hi = y.maxCoeff();
  double e = expansion * (hi - lo);
  // A constant response has no range to extend; fall back to its magnitude.
  if (hi == lo) e = expansion * std::max(1.0, std::abs(hi));
  const double start = lo - e;
  const double step = (hi + e - start) / static_cast<double>(points - 1);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) grid[static_cast<std::size_t>(k)] = start + step * k;
  grid.back() = hi + e;
  return grid;
}

PredictionInterval full_conformal(const Dataset& d, const RegressorSpec& reg, const Vector& x0,
                                  const ConformalSpec& spec, FullConformalTrace* trace) {
  return full_conformal(GroupedSample::singletons(d), reg, x0, Matrix(0, d.cols()), spec, trace);
}

PredictionInterval full_conformal(const GroupedSample& s, const RegressorSpec& reg,
                                  const Vector& x0, const Matrix& companions,
                                  const ConformalSpec& spec, FullConformalTrace* trace) {
  spec.validate();
  s.validate();
  if (s.groups < 2) throw DataError("full conformal needs at least two observations");
  if (x0.size() != s.data.cols() || (companions.rows() > 0 && companions.cols() != s.data.cols()))
    throw DataError("query dimension does not match the data");

  const FittedModel base = fit_rows(s.data, reg);
  const RegressorSpec pinned = pin_tuning(reg, base);
  const std::vector<double> grid = full_conformal_grid(s.data.y, spec.grid_points, spec.grid_expansion);

  const Index n = s.data.rows();
  const Index extra = 1 + companions.rows();
  Dataset augmented = s.data;
  augmented.x.conservativeResize(n + extra, Eigen::NoChange);
  augmented.y.conservativeResize(n + extra);
  augmented.x.row(n) = x0.transpose();
  if (companions.rows() > 0) augmented.x.bottomRows(companions.rows()) = companions;

  std::vector<Index> scored = s.anchors();
  scored.push_back(n);
  const Index cutoff = full_rank_cutoff(s.groups, spec.alpha);

  // Scores this close to the trial score are ties; refits leave roundoff
  // where exact arithmetic would tie.
  const double tie = 1e-12 * (1.0 + s.data.y.cwiseAbs().maxCoeff());

  std::vector<bool> accepted(grid.size(), false);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    augmented.y.tail(extra).setConstant(grid[g]);
    const FittedModel m = fit(augmented, pinned);
    const double test_score = std::abs(grid[g] - m.predict(x0));
    // Ties rank in the trial value's favour.
    Index rank = 1;
    for (const Index a : scored) {
      if (a == n) continue;
      const double score = std::abs(augmented.y(a) - m.predict(Vector(augmented.x.row(a).transpose())));
      if (score < test_score - tie) ++rank;
    }
    accepted[g] = rank <= cutoff;
  }

  PredictionInterval out;
  out.point = base.predict(x0);
  out.method = ConformalMethod::full;
  out.regressor = reg.kind;
  const auto first = std::find(accepted.begin(), accepted.end(), true);
  if (first == accepted.end()) {
    out.lo = out.up = out.point;
    out.degenerate = true;
  } else {
    const auto last = std::find(accepted.rbegin(), accepted.rend(), true);
    out.lo = grid[static_cast<std::size_t>(first - accepted.begin())];
    out.up = grid[grid.size() - 1 - static_cast<std::size_t>(last - accepted.rbegin())];
  }
  if (trace != nullptr) *trace = {grid, accepted};
  return out;
}

std::vector<double> jackknife_residuals(const GroupedSample& s, const RegressorSpec& reg) {
  s.validate();
  if (s.groups < 3) throw DataError("jackknife conformal needs at least three observations");
  const RegressorSpec pinned = pin_tuning(reg, fit_rows(s.data, reg));
  const auto anchors = s.anchors();
  std::vector<double> out(static_cast<std::size_t>(s.groups));
  std::vector<bool> keep(static_cast<std::size_t>(s.groups), true);
  for (Index g = 0; g < s.groups; ++g) {
    keep[static_cast<std::size_t>(g)] = false;
    const FittedModel m = fit(s.data.subset(s.rows_in(keep)), pinned);
    keep[static_cast<std::size_t>(g)] = true;
    const Index a = anchors[static_cast<std::size_t>(g)];
    out[static_cast<std::size_t>(g)] =
        std::abs(s.data.y(a) - m.predict(Vector(s.data.x.row(a).transpose())));
  }
  return out;
}

PredictionInterval jackknife_conformal(const Dataset& d, const RegressorSpec& reg,
                                       const Vector& x0, const ConformalSpec& spec) {
  return jackknife_conformal(GroupedSample::singletons(d), reg, x0, spec);
}

PredictionInterval jackknife_conformal(const GroupedSample& s, const RegressorSpec& reg,
                                       const Vector& x0, const ConformalSpec& spec) {
  spec.validate();
  if (s.groups < 3) throw DataError("jackknife conformal needs at least three observations");
  const double point = fit_rows(s.data, reg).predict(x0);
  const Index k = jackknife_rank(s.groups, spec.alpha);
  return centered(point, kth_smallest(jackknife_residuals(s, reg), k), ConformalMethod::jackknife,
                  reg.kind);
}

PredictionInterval conformal_interval(const GroupedSample& s, const RegressorSpec& reg,
                                      const Vector& x0, const Matrix& companions,
                                      const ConformalSpec& spec, std::uint64_t seed) {
  switch (spec.method) {
    case ConformalMethod::split: return split_conformal(s, reg, x0, spec, seed);
    case ConformalMethod::full: return full_conformal(s, reg, x0, companions, spec);
    case ConformalMethod::jackknife: return jackknife_conformal(s, reg, x0, spec);
  }
  throw ConfigError("unknown conformal method");
}

}  // namespace icp
