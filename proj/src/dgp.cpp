#include "icp/dgp.hpp"
#include "icp/rng.hpp"

#include <fmt/format.h>

namespace icp {
namespace {

constexpr Index kSmallRows = 250;
constexpr Index kLongRows = 100;
constexpr Index kLongFeatures = 12;
constexpr Index kLongActive = 2;
constexpr Index kLongQueries = 5;

char letter(SmallSetting s) {
  switch (s) {
    case SmallSetting::A: return 'A';
    case SmallSetting::B: return 'B';
    case SmallSetting::C: return 'C';
  }
  return '?';
}

// R's rnorm(n, mean, sd) as a vector.
Vector rnorm(Rng& rng, Index n, double mean = 0.0, double sd = 1.0) {
  Vector v(n);
  for (Index i = 0; i < n; ++i) v(i) = rng.normal(mean, sd);
  return v;
}

// R's matrix(rnorm(n * p, mean), n, p): filled column by column.
Matrix rnorm_matrix(Rng& rng, Index n, Index p, double mean) {
  Matrix m(n, p);
  for (Index j = 0; j < p; ++j)
    for (Index i = 0; i < n; ++i) m(i, j) = rng.normal(mean, 1.0);
  return m;
}

Dataset empty_dataset(Index p) {
  Dataset d;
  d.x.resize(0, p);
  d.y.resize(0);
  for (Index j = 0; j < p; ++j) d.feature_names.push_back(fmt::format("x{}", j + 1));
  return d;
}

void append(Dataset& into, const Dataset& rows) {
  const Index n = into.rows();
  into.x.conservativeResize(n + rows.rows(), rows.cols());
  into.y.conservativeResize(n + rows.rows());
  into.x.bottomRows(rows.rows()) = rows.x;
  into.y.tail(rows.rows()) = rows.y;
}

// The suite query of a setting.
Query small_table_query(SmallSetting s, Rng& rng) {
  Query q;
  q.x0.resize(2);
  switch (s) {
    case SmallSetting::A:
      q.x0(0) = rng.normal(1.0, 1.0);
      q.x0(1) = rng.normal(2.0, 2.0);
      q.y0 = 0.5 * q.x0(0) + rng.normal();
      break;
    case SmallSetting::B:
      q.x0(0) = rng.normal(3.0, 1.0);
      q.x0(1) = rng.normal(2.0, 2.0);
      q.y0 = 0.5 * q.x0(0) + 0.33 * q.x0(1) + rng.normal();
      break;
    case SmallSetting::C:
      // Linear head, although the training head is quadratic.
      q.x0(0) = rng.normal(1.0, 1.0);
      q.x0(1) = rng.normal(3.0, 2.0);
      q.y0 = 0.5 * q.x0(0) + 0.33 * q.x0(1) + rng.normal() * q.x0(0) / 2.0;
      break;
  }
  return q;
}

}  // namespace

Dataset SuiteOutput::training_for(std::size_t query) const {
  if (pooled) return dataset;
  std::vector<Index> rows;
  for (std::size_t i = 0; i < setting_labels.size(); ++i)
    if (setting_labels[i] == query_labels.at(query)) rows.push_back(static_cast<Index>(i));
  return dataset.subset(rows);
}

Dataset sample_small_setting(SmallSetting s, Index n, std::uint64_t seed) {
  Rng rng(seed);
  Matrix x(n, 2);
  Vector y(n);
  switch (s) {
    case SmallSetting::A: {
      const Vector u = rnorm(rng, n);
      x.col(0) = rnorm(rng, n, 1.0, 1.0);
      x.col(1) = rnorm(rng, n, 2.0, 1.0);  // irrelevant
      y = 0.5 * x.col(0) + u;
      break;
    }
    case SmallSetting::B: {
      const Vector u = rnorm(rng, n);
      x.col(0) = rnorm(rng, n, 3.0, 1.0);
      x.col(1) = rnorm(rng, n, 2.0, 2.0);
      y = 0.5 * x.col(0) + 0.33 * x.col(1) + u;
      break;
    }
    case SmallSetting::C: {
      x.col(0) = rnorm(rng, n, 1.0, 1.0);
      const Vector u = rnorm(rng, n).cwiseProduct(x.col(0)) / 2.0;  // heteroskedastic
      x.col(1) = rnorm(rng, n, 3.0, 2.0);
      y = 0.5 * x.col(0).cwiseProduct(x.col(0)) + 0.33 * x.col(1) + u;
      break;
    }
  }
  return make_dataset(std::move(x), std::move(y));
}

double small_setting_mean(SmallSetting s, const Vector& x) {
  switch (s) {
    case SmallSetting::A: return 0.5 * x(0);
    case SmallSetting::B: return 0.5 * x(0) + 0.33 * x(1);
    case SmallSetting::C: return 0.5 * x(0) * x(0) + 0.33 * x(1);
  }
  return 0.0;
}

Query sample_small_exchangeable_query(SmallSetting s, std::uint64_t seed) {
  const Dataset row = sample_small_setting(s, 1, seed);
  return Query{row.x.row(0).transpose(), row.y(0)};
}

SuiteOutput gen_small(std::uint64_t seed) {
  SuiteOutput out;
  out.name = "small";
  out.seed = seed;
  out.pooled = true;
  out.dataset = empty_dataset(2);
  for (const SmallSetting s : {SmallSetting::A, SmallSetting::B, SmallSetting::C}) {
    const std::string label(1, letter(s));
    append(out.dataset, sample_small_setting(s, kSmallRows, derive_seed(seed, "small-train-" + label)));
    out.setting_labels.insert(out.setting_labels.end(), kSmallRows, label);
    Rng qrng(derive_seed(seed, "small-query-" + label));
    out.queries.push_back(small_table_query(s, qrng));
    out.query_labels.push_back(label);
  }
  validate(out.dataset);
  return out;
}

SuiteOutput gen_long(std::uint64_t seed) {
  SuiteOutput out;
  out.name = "long";
  out.seed = seed;
  out.pooled = false;
  out.dataset = empty_dataset(kLongFeatures);
  for (int k = 1; k <= 3; ++k) {
    const std::string label = fmt::format("DGP_{}", k);
    Rng rng(derive_seed(seed, "long-" + label));
    const double feature_mean = k == 2 ? 1.0 : 0.0;
    const double coef_mean = k == 3 ? 1.0 : 0.0;

    Dataset block;
    block.x = rnorm_matrix(rng, kLongRows, kLongFeatures, feature_mean);
    Vector beta = Vector::Zero(kLongFeatures);
    beta.head(kLongActive) = rnorm(rng, kLongActive, coef_mean, 1.0);
    block.y = block.x * beta + rnorm(rng, kLongRows);
    append(out.dataset, block);
    out.setting_labels.insert(out.setting_labels.end(), kLongRows, label);
    out.coefficients.push_back(beta);

    const Matrix x0 = rnorm_matrix(rng, kLongQueries, kLongFeatures, feature_mean);
    const Vector y0 = x0 * beta + rnorm(rng, kLongQueries);
    for (Index q = 0; q < kLongQueries; ++q) {
      out.queries.push_back(Query{x0.row(q).transpose(), y0(q)});
      out.query_labels.push_back(label);
    }
  }
  validate(out.dataset);
  return out;
}

SuiteOutput generate_suite(const std::string& name, std::uint64_t seed) {
  if (name == "small") return gen_small(seed);
  if (name == "long") return gen_long(seed);
  throw ConfigError(fmt::format("unknown suite '{}'", name));
}

}  // namespace icp
