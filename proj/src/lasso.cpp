#include "icp/regress.hpp"
#include "icp/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace icp {
namespace {

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

// A LASSO problem on standardized features with a centered response, plus
// what is needed to map the solution back to the original scale.
struct StandardizedProblem {
  Matrix z;
  Vector yc;
  double y_mean = 0.0;
  Standardization scaling;
};

StandardizedProblem make_problem(const Dataset& d) {
  StandardizedProblem prob;
  prob.scaling = fit_standardization(d.x);
  prob.z = prob.scaling.apply(d.x);
  prob.y_mean = d.y.mean();
  prob.yc = d.y.array() - prob.y_mean;
  return prob;
}

FittedModel to_original_scale(const StandardizedProblem& prob, const Vector& beta, double lambda) {
  FittedModel m;
  m.kind = RegressorKind::lasso;
  m.lambda = lambda;
  m.coefficients = beta.cwiseQuotient(prob.scaling.scales);
  m.intercept = prob.y_mean - prob.scaling.centers.dot(m.coefficients);
  return m;
}

FittedModel constant_model(const Dataset& d, double lambda) {
  FittedModel m;
  m.kind = RegressorKind::lasso;
  m.lambda = lambda;
  m.coefficients = Vector::Zero(d.cols());
  m.intercept = d.y.mean();
  return m;
}

// Solves along `lambdas` (descending) with warm starts and returns the
// solution at every grid point.
std::vector<Vector> solve_path(const StandardizedProblem& prob, std::span<const double> lambdas,
                               const LassoOptions& opts) {
  std::vector<Vector> out;
  out.reserve(lambdas.size());
  Vector beta = Vector::Zero(prob.z.cols());
  for (const double lambda : lambdas) {
    beta = lasso_coordinate_descent(prob.z, prob.yc, lambda, beta, opts.tolerance, opts.max_sweeps)
               .beta;
    out.push_back(beta);
  }
  return out;
}

}  // namespace

LassoSolution lasso_coordinate_descent(const Matrix& x, const Vector& y, double lambda,
                                       const Vector& warm_start, double tolerance,
                                       int max_sweeps, bool record_objective) {
  const Index n = x.rows();
  const Index p = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const Vector col_sq = x.colwise().squaredNorm().transpose() * inv_n;

  LassoSolution sol;
  sol.beta = warm_start.size() == p ? warm_start : Vector::Zero(p);
  Vector residual = y - x * sol.beta;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_change = 0.0;
    for (Index j = 0; j < p; ++j) {
      if (col_sq(j) == 0.0) {
        sol.beta(j) = 0.0;
        continue;
      }
      const double old = sol.beta(j);
      const double rho = x.col(j).dot(residual) * inv_n + col_sq(j) * old;
      const double updated = soft_threshold(rho, lambda) / col_sq(j);
      const double delta = updated - old;
      if (delta != 0.0) {
        residual.noalias() -= delta * x.col(j);
        sol.beta(j) = updated;
        max_change = std::max(max_change, std::abs(delta));
      }
    }
    sol.sweeps = sweep + 1;
    if (record_objective) sol.objective_trace.push_back(lasso_objective(x, y, sol.beta, lambda));
    if (max_change < tolerance) {
      sol.converged = true;
      break;
    }
  }
  return sol;
}

double lasso_objective(const Matrix& x, const Vector& y, const Vector& beta, double lambda) {
  const double n = static_cast<double>(x.rows());
  return (y - x * beta).squaredNorm() / (2.0 * n) + lambda * beta.lpNorm<1>();
}

double lasso_lambda_max(const Matrix& x, const Vector& y) {
  return (x.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(x.rows());
}

double lasso_kkt_residual(const Matrix& x, const Vector& y, const Vector& beta, double lambda) {
  const Vector grad = x.transpose() * (y - x * beta) / static_cast<double>(x.rows());
  double worst = 0.0;
  for (Index j = 0; j < beta.size(); ++j) {
    const double v = beta(j) != 0.0 ? std::abs(grad(j) - lambda * (beta(j) > 0 ? 1.0 : -1.0))
                                    : std::max(0.0, std::abs(grad(j)) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

std::vector<double> lasso_lambda_grid(double lambda_max, int size, double min_ratio) {
  std::vector<double> grid(static_cast<std::size_t>(size));
  if (size == 1) {
    grid[0] = lambda_max;
    return grid;
  }
  const double step = std::log(min_ratio) / static_cast<double>(size - 1);
  for (int k = 0; k < size; ++k) grid[static_cast<std::size_t>(k)] = lambda_max * std::exp(step * k);
  return grid;
}

FittedModel fit_lasso_fixed(const Dataset& d, double lambda, const LassoOptions& opts) {
  if (!(lambda >= 0.0)) throw ConfigError("lasso penalty must be non-negative");
  if (d.rows() < 2) return constant_model(d, lambda);
  const StandardizedProblem prob = make_problem(d);
  const Vector beta = lasso_coordinate_descent(prob.z, prob.yc, lambda, Vector::Zero(d.cols()),
                                               opts.tolerance, opts.max_sweeps)
                          .beta;
  return to_original_scale(prob, beta, lambda);
}

FittedModel fit_lasso(const Dataset& d, const LassoOptions& opts) {
  const Index n = d.rows();
  const int k = opts.folds;
  if (k < 2) throw ConfigError("lasso cross-validation needs at least two folds");
  if (n < k) throw DataError(fmt::format("lasso cross-validation: {} rows for {} folds", n, k));

  const StandardizedProblem full = make_problem(d);
  const double lambda_max = lasso_lambda_max(full.z, full.yc);
  if (!(lambda_max > 0.0)) return constant_model(d, 0.0);
  const std::vector<double> grid = lasso_lambda_grid(lambda_max, opts.grid_size, opts.min_ratio);

  Rng rng(opts.seed);
  const auto order = permutation(static_cast<std::size_t>(n), rng);
  std::vector<int> fold(static_cast<std::size_t>(n));
  for (std::size_t i = 0; i < order.size(); ++i) fold[order[i]] = static_cast<int>(i % k);

  std::vector<double> sse(grid.size(), 0.0);
  for (int f = 0; f < k; ++f) {
    std::vector<Index> train, held;
    for (Index i = 0; i < n; ++i) (fold[static_cast<std::size_t>(i)] == f ? held : train).push_back(i);
    const Dataset part = d.subset(train);
    if (part.rows() < 2) {
      for (const Index i : held)
        for (auto& s : sse) s += std::pow(d.y(i) - part.y(0), 2);
      continue;
    }
    const StandardizedProblem prob = make_problem(part);
    const auto path = solve_path(prob, grid, opts);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const FittedModel m = to_original_scale(prob, path[g], grid[g]);
      for (const Index i : held) sse[g] += std::pow(d.y(i) - m.predict(Vector(d.x.row(i).transpose())), 2);
    }
  }

  // Strict improvement keeps the larger penalty on ties.
  std::size_t best = 0;
  for (std::size_t g = 1; g < grid.size(); ++g)
    if (sse[g] < sse[best]) best = g;

  const auto path = solve_path(full, std::span(grid).first(best + 1), opts);
  return to_original_scale(full, path.back(), grid[best]);
}

}  // namespace icp
