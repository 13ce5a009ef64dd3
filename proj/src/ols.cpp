#include "icp/regress.hpp"

namespace icp {

FittedModel fit_ols(const Dataset& d) {
  const Vector x_mean = d.x.colwise().mean().transpose();
  const double y_mean = d.y.mean();
  const Matrix xc = d.x.rowwise() - x_mean.transpose();
  const Vector yc = d.y.array() - y_mean;

  // Centering absorbs the intercept; the orthogonal decomposition returns the
  // minimum-norm least-squares slopes when xc is rank deficient.
  Eigen::CompleteOrthogonalDecomposition<Matrix> cod(xc);
  FittedModel m;
  m.kind = RegressorKind::ols;
  m.coefficients = cod.rank() == 0 ? Vector::Zero(d.cols()) : Vector(cod.solve(yc));
  m.intercept = y_mean - x_mean.dot(m.coefficients);
  return m;
}

}  // namespace icp
