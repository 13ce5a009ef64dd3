#pragma once

#include "icp/core.hpp"
#include "icp/regress.hpp"

#include <cstdint>
#include <vector>

namespace icp {

struct ConformalSpec {
  ConformalMethod method = ConformalMethod::split;
  double alpha = 0.1;
  double rho = 0.5;         // split: fraction of groups in the proper training set
  int grid_points = 100;    // full
  double grid_expansion = 0.25;  // full

  void validate() const;
};

// Rows organized into exchangeable groups. Each group has exactly one
// anchor row, whose residual enters the conformal ranks; the other rows of a
// group (synthetic companions) only ever appear in training sets, and always
// together with their anchor's group. A plain dataset is the special case
// of one anchor per group.
struct GroupedSample {
  Dataset data;
  std::vector<Index> group;  // group id per row, in [0, groups)
  std::vector<bool> anchor;  // true for the scored row of each group
  Index groups = 0;

  static GroupedSample singletons(Dataset d);

  // Anchor row index of each group, ordered by group id.
  std::vector<Index> anchors() const;
  // All rows whose group is flagged in `keep`, in row order.
  std::vector<Index> rows_in(const std::vector<bool>& keep) const;

  // Throws DataError on inconsistent grouping.
  void validate() const;
};

// Rank of the conformal quantile among m scores for split conformal:
// ceil((m + 1)(1 - alpha)) clamped to m.
Index split_rank(Index m, double alpha);
// ceil(n (1 - alpha)) clamped to n.
Index jackknife_rank(Index n, double alpha);
// ceil((n + 1)(1 - alpha)) clamped to n + 1; the acceptance cutoff for a
// trial value whose score ranks among n + 1 scores.
Index full_rank_cutoff(Index n, double alpha);

// k-th smallest value (1-based).
double kth_smallest(std::vector<double> values, Index k);

// Partition used by split conformal: true marks proper-training groups.
std::vector<bool> split_partition(Index groups, double rho, std::uint64_t seed);

// Smallest sample size each method accepts.
Index minimum_sample_size(ConformalMethod method, double rho);

PredictionInterval split_conformal(const Dataset& d, const RegressorSpec& reg, const Vector& x0,
                                   const ConformalSpec& spec, std::uint64_t seed);
PredictionInterval split_conformal(const GroupedSample& s, const RegressorSpec& reg,
                                   const Vector& x0, const ConformalSpec& spec,
                                   std::uint64_t seed);

// Trial values and their acceptance flags, for inspection and testing.
struct FullConformalTrace {
  std::vector<double> grid;
  std::vector<bool> accepted;
};

// Evenly spaced trial heads over [min(y) - e, max(y) + e].
std::vector<double> full_conformal_grid(const Vector& y, int points, double expansion);

PredictionInterval full_conformal(const Dataset& d, const RegressorSpec& reg, const Vector& x0,
                                  const ConformalSpec& spec, FullConformalTrace* trace = nullptr);
// `companions` holds tails that join the trial row's group (one per row),
// each labeled with the trial head.
PredictionInterval full_conformal(const GroupedSample& s, const RegressorSpec& reg,
                                  const Vector& x0, const Matrix& companions,
                                  const ConformalSpec& spec, FullConformalTrace* trace = nullptr);

// Leave-one-group-out absolute residuals at each anchor, ordered by group.
std::vector<double> jackknife_residuals(const GroupedSample& s, const RegressorSpec& reg);

PredictionInterval jackknife_conformal(const Dataset& d, const RegressorSpec& reg,
                                       const Vector& x0, const ConformalSpec& spec);
PredictionInterval jackknife_conformal(const GroupedSample& s, const RegressorSpec& reg,
                                       const Vector& x0, const ConformalSpec& spec);

// Dispatches on spec.method. `seed` drives the split partition; companions
// are only used by full conformal.
PredictionInterval conformal_interval(const GroupedSample& s, const RegressorSpec& reg,
                                      const Vector& x0, const Matrix& companions,
                                      const ConformalSpec& spec, std::uint64_t seed);

}  // namespace icp
