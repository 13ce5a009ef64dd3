#include "icp/regress.hpp"

#include <fmt/format.h>

namespace icp {
namespace detail {
double kernel_predict(const FittedModel& m, const Vector& x0);
}

Index FittedModel::dimension() const {
  return kind == RegressorKind::kernel ? train_tails.cols() : coefficients.size();
}

double FittedModel::predict(const Vector& x0) const {
  if (x0.size() != dimension())
    throw DataError(fmt::format("query has {} features, model expects {}", x0.size(), dimension()));
  if (kind == RegressorKind::kernel) return detail::kernel_predict(*this, x0);
  return intercept + coefficients.dot(x0);
}

Vector FittedModel::predict(const Matrix& tails) const {
  if (tails.cols() != dimension())
    throw DataError(fmt::format("tails have {} features, model expects {}", tails.cols(), dimension()));
  if (kind != RegressorKind::kernel) return (tails * coefficients).array() + intercept;
  Vector out(tails.rows());
  for (Index i = 0; i < tails.rows(); ++i) out(i) = detail::kernel_predict(*this, tails.row(i).transpose());
  return out;
}

double predict(const FittedModel& m, const Vector& x0) { return m.predict(x0); }

FittedModel fit(const Dataset& d, const RegressorSpec& spec) {
  switch (spec.kind) {
    case RegressorKind::ols:
      return fit_ols(d);
    case RegressorKind::lasso:
      if (spec.fixed_lambda) return fit_lasso_fixed(d, *spec.fixed_lambda, spec.lasso);
      return fit_lasso(d, spec.lasso);
    case RegressorKind::kernel:
      return fit_kernel(d);
  }
  throw ConfigError("unknown regressor");
}

RegressorSpec pin_tuning(const RegressorSpec& spec, const FittedModel& base) {
  RegressorSpec out = spec;
  if (spec.kind == RegressorKind::lasso) out.fixed_lambda = base.lambda;
  return out;
}

}  // namespace icp
