#pragma once

#include "icp/core.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace icp {

// A fitted regression engine. Linear engines (ols, lasso) carry
// coefficients on the original feature scale; the kernel engine keeps a
// standardized copy of its training tails.
struct FittedModel {
  RegressorKind kind = RegressorKind::ols;
  Vector coefficients;
  double intercept = 0.0;
  double lambda = 0.0;  // lasso only

  // Kernel only.
  Matrix train_tails;  // standardized
  Vector train_heads;
  Standardization scaling;
  double bandwidth = 0.0;

  Index dimension() const;
  double predict(const Vector& x0) const;
  Vector predict(const Matrix& tails) const;
};

// Free-function form of FittedModel::predict; throws DataError on a
// dimension mismatch.
double predict(const FittedModel& m, const Vector& x0);

// Least squares with intercept. Rank-deficient designs (including p >= n)
// get the minimum-norm slope vector.
FittedModel fit_ols(const Dataset& d);

struct LassoOptions {
  int folds = 5;
  int grid_size = 50;
  double min_ratio = 1e-4;
  double tolerance = 1e-8;  // max coefficient change per sweep
  int max_sweeps = 100000;
  std::uint64_t seed = 0;  // cross-validation fold assignment
};

// LASSO with lambda chosen by K-fold cross-validation over a log grid from
// lambda_max down to min_ratio * lambda_max. Requires n >= folds >= 2.
FittedModel fit_lasso(const Dataset& d, const LassoOptions& opts = {});

// LASSO at a fixed penalty. Features are standardized internally and the
// objective is (1/2n)||y - b0 - Zb||^2 + lambda ||b||_1.
FittedModel fit_lasso_fixed(const Dataset& d, double lambda, const LassoOptions& opts = {});

// Cyclic coordinate descent on a design that is already centered, with a
// centered response. Minimizes (1/2n)||y - Xb||^2 + lambda ||b||_1.
struct LassoSolution {
  Vector beta;
  int sweeps = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // one entry per sweep when requested
};
LassoSolution lasso_coordinate_descent(const Matrix& x, const Vector& y, double lambda,
                                       const Vector& warm_start, double tolerance,
                                       int max_sweeps, bool record_objective = false);

double lasso_objective(const Matrix& x, const Vector& y, const Vector& beta, double lambda);

// Smallest lambda at which every coefficient is zero: max_j |x_j'y| / n.
double lasso_lambda_max(const Matrix& x, const Vector& y);

// Largest violation of the subgradient optimality conditions.
double lasso_kkt_residual(const Matrix& x, const Vector& y, const Vector& beta, double lambda);

// Log-spaced penalties from lambda_max down to min_ratio * lambda_max.
std::vector<double> lasso_lambda_grid(double lambda_max, int size, double min_ratio);

// Nadaraya-Watson with a Gaussian kernel on standardized tails. The
// bandwidth defaults to the median pairwise distance, floored at 1e-6.
FittedModel fit_kernel(const Dataset& d);
FittedModel fit_kernel(const Dataset& d, double bandwidth);

double median_pairwise_distance(const Matrix& tails);

// Regressor choice plus the knobs that conformal refits need to pin.
struct RegressorSpec {
  RegressorKind kind = RegressorKind::ols;
  LassoOptions lasso;
  std::optional<double> fixed_lambda;
};

FittedModel fit(const Dataset& d, const RegressorSpec& spec);

// Copy of `spec` with the tuning selected by `base` frozen, used so that
// conformal refits do not re-run cross-validation.
RegressorSpec pin_tuning(const RegressorSpec& spec, const FittedModel& base);

}  // namespace icp
