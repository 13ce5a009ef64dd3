#include "icp/regress.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace icp {

double median_pairwise_distance(const Matrix& tails) {
  const Index n = tails.rows();
  const Matrix cols = tails.transpose();  // one contiguous column per row
  std::vector<double> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) dist.push_back((cols.col(i) - cols.col(j)).squaredNorm());
  if (dist.empty()) return 0.0;
  // Lower median, so the result is an actual pairwise distance. Squaring is
  // monotone, so the median is taken on squared distances.
  const auto mid = dist.begin() + static_cast<std::ptrdiff_t>((dist.size() - 1) / 2);
  std::nth_element(dist.begin(), mid, dist.end());
  return std::sqrt(*mid);
}

FittedModel fit_kernel(const Dataset& d, double bandwidth) {
  if (d.rows() < 2) throw DataError("kernel regression needs at least two rows");
  if (!(bandwidth > 0.0)) throw ConfigError("kernel bandwidth must be positive");
  FittedModel m;
  m.kind = RegressorKind::kernel;
  m.scaling = fit_standardization(d.x);
  m.train_tails = m.scaling.apply(d.x);
  m.train_heads = d.y;
  m.bandwidth = bandwidth;
  return m;
}

FittedModel fit_kernel(const Dataset& d) {
  if (d.rows() < 2) throw DataError("kernel regression needs at least two rows");
  const Matrix z = fit_standardization(d.x).apply(d.x);
  return fit_kernel(d, std::max(median_pairwise_distance(z), 1e-6));
}

namespace detail {

double kernel_predict(const FittedModel& m, const Vector& x0) {
  const Vector z = m.scaling.apply(x0);
  const Vector sq = (m.train_tails.rowwise() - z.transpose()).rowwise().squaredNorm();
  // Shift by the nearest distance so the largest weight is exactly 1 and
  // tiny bandwidths cannot underflow every weight to zero.
  const double nearest = sq.minCoeff();
  const double denom = 2.0 * m.bandwidth * m.bandwidth;
  double weight_sum = 0.0;
  double weighted = 0.0;
  for (Index i = 0; i < sq.size(); ++i) {
    const double w = std::exp(-(sq(i) - nearest) / denom);
    weight_sum += w;
    weighted += w * m.train_heads(i);
  }
  return weighted / weight_sum;
}

}  // namespace detail
}  // namespace icp
