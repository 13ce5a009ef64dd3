#include "icp/individualize.hpp"
#include "icp/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

namespace icp {
namespace {

constexpr double kSigmaFloor = 1e-8;

// The `count` best rows under `better`, returned in ascending index order.
template <typename Better>
std::vector<Index> top_rows(Index n, Index count, Better better) {
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), better);
  order.resize(static_cast<std::size_t>(count));
  std::sort(order.begin(), order.end());
  return order;
}

void check_query(const Dataset& d, const Vector& x0) {
  if (x0.size() != d.cols())
    throw DataError(fmt::format("query has {} features, data has {}", x0.size(), d.cols()));
  if (!x0.allFinite()) throw DataError("query tail contains non-finite values");
}

Vector column_sigma(const Matrix& x) {
  Vector sigma = Vector::Constant(x.cols(), kSigmaFloor);
  if (x.rows() < 2) return sigma;
  const Vector mean = x.colwise().mean().transpose();
  for (Index j = 0; j < x.cols(); ++j) {
    const double var =
        (x.col(j).array() - mean(j)).square().sum() / static_cast<double>(x.rows() - 1);
    sigma(j) = std::max(std::sqrt(var), kSigmaFloor);
  }
  return sigma;
}

}  // namespace

RelevanceSelection select_percentile(const Dataset& d, const Vector& x0, double alpha,
                                     Index min_relevant) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("percentile alpha must lie in (0, 1)");
  if (min_relevant < 1) throw ConfigError("min_relevant must be positive");
  const Index n = d.rows();
  if (n < min_relevant)
    throw DataError(fmt::format("{} rows, fewer than min_relevant = {}", n, min_relevant));
  check_query(d, x0);

  RelevanceSelection sel;
  sel.method = Similarity::percentile;
  if (n == 1) {
    sel.scores = Vector::Zero(1);
    sel.indices = {0};
    return sel;
  }
  const Standardization scaling = fit_standardization(d.x);
  const Vector z0 = scaling.apply(x0);
  sel.scores = (scaling.apply(d.x).rowwise() - z0.transpose()).rowwise().norm();

  // Nearest-rank quantile: the ceil(alpha * n)-th smallest distance.
  const auto k = std::max<Index>(1, static_cast<Index>(std::ceil(alpha * static_cast<double>(n) - 1e-9)));
  std::vector<double> sorted(sel.scores.data(), sel.scores.data() + n);
  std::nth_element(sorted.begin(), sorted.begin() + (k - 1), sorted.end());
  sel.threshold_used = sorted[static_cast<std::size_t>(k - 1)];

  for (Index i = 0; i < n; ++i)
    if (sel.scores(i) <= sel.threshold_used) sel.indices.push_back(i);
  if (static_cast<Index>(sel.indices.size()) < min_relevant) {
    sel.fallback = true;
    sel.indices = top_rows(n, min_relevant, [&](Index a, Index b) { return sel.scores(a) < sel.scores(b); });
  }
  return sel;
}

RelevanceSelection select_cosine(const Dataset& d, const Vector& x0, double gamma,
                                 Index min_relevant) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (min_relevant < 1) throw ConfigError("min_relevant must be positive");
  const Index n = d.rows();
  if (n < min_relevant)
    throw DataError(fmt::format("{} rows, fewer than min_relevant = {}", n, min_relevant));
  check_query(d, x0);
  const double query_norm = x0.norm();
  if (query_norm == 0.0) throw DataError("cosine similarity is undefined for a zero query tail");

  RelevanceSelection sel;
  sel.method = Similarity::cosine;
  sel.threshold_used = gamma;
  sel.scores.resize(n);
  for (Index i = 0; i < n; ++i) {
    const double row_norm = d.x.row(i).norm();
    sel.scores(i) = row_norm == 0.0 ? -std::numeric_limits<double>::infinity()
                                    : d.x.row(i).dot(x0) / (row_norm * query_norm);
  }
  for (Index i = 0; i < n; ++i)
    if (sel.scores(i) >= gamma) sel.indices.push_back(i);
  if (static_cast<Index>(sel.indices.size()) < min_relevant) {
    sel.fallback = true;
    sel.indices = top_rows(n, min_relevant, [&](Index a, Index b) { return sel.scores(a) > sel.scores(b); });
  }
  return sel;
}

std::string_view to_string(ControlOrigin o) {
  switch (o) {
    case ControlOrigin::relevant_original: return "relevant_original";
    case ControlOrigin::perturbed_clone: return "perturbed_clone";
    case ControlOrigin::gaussian_mimic: return "gaussian_mimic";
  }
  return "?";
}

ControlSet simulate_controls(const Dataset& d, const RelevanceSelection& rel, double noise_scale,
                             ControlMode mode, std::uint64_t seed) {
  if (rel.indices.empty()) throw DataError("cannot simulate controls from an empty selection");
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale))
    throw ConfigError("noise_scale must be positive");

  const Dataset relevant = d.subset(rel.indices);
  const Index nr = relevant.rows();
  const Index p = relevant.cols();

  ControlSet out;
  out.mode = mode;
  out.noise_scale_used = noise_scale;
  out.feature_sigma = column_sigma(relevant.x);
  out.dataset = relevant;
  out.dataset.x.conservativeResize(2 * nr, Eigen::NoChange);
  out.dataset.y.conservativeResize(2 * nr);
  out.origin.assign(static_cast<std::size_t>(nr), ControlOrigin::relevant_original);
  out.source = rel.indices;

  if (mode == ControlMode::perturb) {
    for (Index r = 0; r < nr; ++r) {
      // One stream per source row keeps each clone independent of the others.
      const Index row = rel.indices[static_cast<std::size_t>(r)];
      Rng rng(derive_seed(seed, "perturb", static_cast<std::uint64_t>(row)));
      for (Index j = 0; j < p; ++j)
        out.dataset.x(nr + r, j) = relevant.x(r, j) + rng.normal(0.0, noise_scale * out.feature_sigma(j));
      out.dataset.y(nr + r) = relevant.y(r);
      out.origin.push_back(ControlOrigin::perturbed_clone);
      out.source.push_back(row);
    }
    return out;
  }

  // Diagonal Gaussian fitted to the relevant tails; each draw takes the head
  // of its nearest relevant neighbour in standardized distance.
  const Vector mean = relevant.x.colwise().mean().transpose();
  Standardization scaling{Vector::Zero(p), Vector::Ones(p)};
  if (nr >= 2) scaling = fit_standardization(relevant.x);
  const Matrix z = scaling.apply(relevant.x);
  for (Index r = 0; r < nr; ++r) {
    Rng rng(derive_seed(seed, "mimic", static_cast<std::uint64_t>(r)));
    Vector tail(p);
    for (Index j = 0; j < p; ++j) tail(j) = rng.normal(mean(j), out.feature_sigma(j));
    Index nearest = 0;
    (z.rowwise() - scaling.apply(tail).transpose()).rowwise().squaredNorm().minCoeff(&nearest);
    out.dataset.x.row(nr + r) = tail.transpose();
    out.dataset.y(nr + r) = relevant.y(nearest);
    out.origin.push_back(ControlOrigin::gaussian_mimic);
    out.source.push_back(rel.indices[static_cast<std::size_t>(nearest)]);
  }
  return out;
}

GroupedSample ControlSet::grouped() const {
  GroupedSample s;
  s.data = dataset;
  std::map<Index, Index> group_of;
  for (std::size_t i = 0; i < origin.size(); ++i)
    if (origin[i] == ControlOrigin::relevant_original)
      group_of.emplace(source[i], static_cast<Index>(group_of.size()));
  s.groups = static_cast<Index>(group_of.size());
  for (std::size_t i = 0; i < origin.size(); ++i) {
    s.group.push_back(group_of.at(source[i]));
    s.anchor.push_back(origin[i] == ControlOrigin::relevant_original);
  }
  return s;
}

Matrix query_companions(const ControlSet& controls, const Vector& x0, std::uint64_t seed) {
  const Index p = x0.size();
  if (controls.mode != ControlMode::perturb) return Matrix(0, p);
  Rng rng(derive_seed(seed, "perturb-query"));
  Matrix out(1, p);
  for (Index j = 0; j < p; ++j)
    out(0, j) = x0(j) + rng.normal(0.0, controls.noise_scale_used * controls.feature_sigma(j));
  return out;
}

void save_controls_csv(const ControlSet& c, const std::filesystem::path& path,
                       std::span<const std::string> comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& line : comments) out << "# " << line << '\n';
  out << c.dataset.head_name;
  for (const auto& name : c.dataset.feature_names) out << ',' << name;
  out << ",origin\n";
  for (Index i = 0; i < c.dataset.rows(); ++i) {
    out << format_real(c.dataset.y(i));
    for (Index j = 0; j < c.dataset.cols(); ++j) out << ',' << format_real(c.dataset.x(i, j));
    out << ',' << to_string(c.origin[static_cast<std::size_t>(i)]) << '\n';
  }
}

}  // namespace icp
