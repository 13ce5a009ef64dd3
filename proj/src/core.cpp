#include "icp/core.hpp"

#include <fmt/format.h>

#include <array>
#include <cmath>
#include <utility>

namespace icp {

Dataset Dataset::subset(std::span<const Index> rows) const {
  Dataset out;
  out.x.resize(static_cast<Index>(rows.size()), x.cols());
  out.y.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= x.rows()) throw DataError(fmt::format("row index {} out of range", r));
    out.x.row(static_cast<Index>(i)) = x.row(r);
    out.y(static_cast<Index>(i)) = y(r);
  }
  out.feature_names = feature_names;
  out.head_name = head_name;
  return out;
}

Dataset make_dataset(Matrix x, Vector y) {
  Dataset d;
  d.feature_names.reserve(static_cast<std::size_t>(x.cols()));
  for (Index j = 0; j < x.cols(); ++j) d.feature_names.push_back(fmt::format("x{}", j + 1));
  d.x = std::move(x);
  d.y = std::move(y);
  validate(d);
  return d;
}

void validate(const Dataset& d) {
  if (d.rows() < 1) throw DataError("dataset has no rows");
  if (d.cols() < 1) throw DataError("dataset has no feature columns");
  if (d.y.size() != d.rows())
    throw DataError(fmt::format("head length {} does not match row count {}", d.y.size(), d.rows()));
  if (static_cast<Index>(d.feature_names.size()) != d.cols())
    throw DataError("feature name count does not match column count");
  for (Index i = 0; i < d.rows(); ++i) {
    if (!std::isfinite(d.y(i))) throw DataError(fmt::format("non-finite head at row {}", i + 1));
    for (Index j = 0; j < d.cols(); ++j)
      if (!std::isfinite(d.x(i, j)))
        throw DataError(fmt::format("non-finite value at row {}, column {}", i + 1,
                                    d.feature_names[static_cast<std::size_t>(j)]));
  }
}

namespace {

template <typename E, std::size_t N>
E parse_enum(std::string_view s, const std::array<E, N>& values, std::string_view what) {
  for (const E v : values)
    if (to_string(v) == s) return v;
  throw ConfigError(fmt::format("unknown {} '{}'", what, s));
}

}  // namespace

std::string_view to_string(Path p) {
  switch (p) {
    case Path::standard: return "standard";
    case Path::relevant: return "relevant";
    case Path::relevant_simulated: return "relevant_simulated";
  }
  return "?";
}

std::string_view to_string(ConformalMethod m) {
  switch (m) {
    case ConformalMethod::full: return "full";
    case ConformalMethod::split: return "split";
    case ConformalMethod::jackknife: return "jackknife";
  }
  return "?";
}

std::string_view to_string(RegressorKind r) {
  switch (r) {
    case RegressorKind::ols: return "ols";
    case RegressorKind::lasso: return "lasso";
    case RegressorKind::kernel: return "kernel";
  }
  return "?";
}

std::string_view to_string(Similarity s) {
  switch (s) {
    case Similarity::percentile: return "percentile";
    case Similarity::cosine: return "cosine";
  }
  return "?";
}

std::string_view to_string(ControlMode m) {
  switch (m) {
    case ControlMode::perturb: return "perturb";
    case ControlMode::gaussian_mimic: return "gaussian_mimic";
  }
  return "?";
}

Path parse_path(std::string_view s) {
  return parse_enum(s, std::array{Path::standard, Path::relevant, Path::relevant_simulated}, "path");
}
ConformalMethod parse_method(std::string_view s) {
  return parse_enum(
      s, std::array{ConformalMethod::full, ConformalMethod::split, ConformalMethod::jackknife},
      "conformal method");
}
RegressorKind parse_regressor(std::string_view s) {
  return parse_enum(s, std::array{RegressorKind::ols, RegressorKind::lasso, RegressorKind::kernel},
                    "regressor");
}
Similarity parse_similarity(std::string_view s) {
  return parse_enum(s, std::array{Similarity::percentile, Similarity::cosine}, "similarity");
}
ControlMode parse_control_mode(std::string_view s) {
  return parse_enum(s, std::array{ControlMode::perturb, ControlMode::gaussian_mimic},
                    "control mode");
}

void ExperimentConfig::validate() const {
  auto open_unit = [](double v, std::string_view name) {
    if (!(v > 0.0 && v < 1.0))
      throw ConfigError(fmt::format("{} must lie strictly inside (0, 1), got {}", name, v));
  };
  open_unit(alpha, "alpha");
  open_unit(gamma, "gamma");
  open_unit(rho, "rho");
  if (!(noise_scale > 0.0) || !std::isfinite(noise_scale))
    throw ConfigError(fmt::format("noise_scale must be positive, got {}", noise_scale));
  if (min_relevant < 2) throw ConfigError("min_relevant must be at least 2");
  if (grid_points < 10) throw ConfigError("grid_points must be at least 10");
  if (!(grid_expansion >= 0.0)) throw ConfigError("grid_expansion must be non-negative");
  if (lasso_folds < 2) throw ConfigError("lasso_folds must be at least 2");
}

Vector Standardization::apply(const Vector& tail) const {
  return (tail - centers).cwiseQuotient(scales);
}

Matrix Standardization::apply(const Matrix& tails) const {
  return (tails.rowwise() - centers.transpose()).array().rowwise() / scales.transpose().array();
}

Matrix Standardization::invert(const Matrix& standardized) const {
  return (standardized.array().rowwise() * scales.transpose().array()).matrix().rowwise() +
         centers.transpose();
}

Standardization fit_standardization(const Matrix& x) {
  const Index n = x.rows();
  if (n < 2) throw DataError("standardization needs at least two rows");
  Standardization s;
  s.centers = x.colwise().mean().transpose();
  s.scales.resize(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double ss = (x.col(j).array() - s.centers(j)).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    s.scales(j) = sd > 0.0 ? sd : 1.0;
  }
  return s;
}

StandardizedData standardize(const Dataset& d) {
  StandardizedData out{d, fit_standardization(d.x)};
  out.data.x = out.transform.apply(d.x);
  return out;
}

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace icp
