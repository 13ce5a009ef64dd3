#include "oracles.hpp"

#include <algorithm>
#include <cmath>

namespace icp::oracle {

using Eigen::MatrixXd;
using Eigen::VectorXd;

VectorXd ols_normal_equations(const MatrixXd& x, const VectorXd& y) {
  const auto n = x.rows();
  MatrixXd z(n, x.cols() + 1);
  z.col(0).setOnes();
  z.rightCols(x.cols()) = x;
  const MatrixXd gram = z.transpose() * z;
  return gram.inverse() * (z.transpose() * y);
}

namespace {

double ols_fit_at(const VectorXd& coef, const VectorXd& tail) {
  double v = coef(0);
  for (Eigen::Index j = 0; j < tail.size(); ++j) v += coef(j + 1) * tail(j);
  return v;
}

}  // namespace

std::vector<double> trial_grid(const VectorXd& y, int points, double expansion) {
  const double lo = y.minCoeff();
  const double hi = y.maxCoeff();
  const double e = expansion * (hi - lo);
  std::vector<double> grid;
  for (int k = 0; k < points; ++k)
    grid.push_back((lo - e) + (hi - lo + 2.0 * e) * static_cast<double>(k) / (points - 1));
  return grid;
}

std::vector<bool> full_conformal_ols(const MatrixXd& x, const VectorXd& y, const VectorXd& x0,
                                     double alpha, const std::vector<double>& grid) {
  const auto n = x.rows();
  std::vector<bool> accepted;
  for (const double trial : grid) {
    MatrixXd xa(n + 1, x.cols());
    VectorXd ya(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      xa.row(i) = x.row(i);
      ya(i) = y(i);
    }
    xa.row(n) = x0.transpose();
    ya(n) = trial;
    const VectorXd coef = ols_normal_equations(xa, ya);
    std::vector<double> r(static_cast<std::size_t>(n + 1));
    for (Eigen::Index i = 0; i <= n; ++i)
      r[static_cast<std::size_t>(i)] = std::abs(ya(i) - ols_fit_at(coef, xa.row(i).transpose()));
    const double test = r.back();
    const auto at_least = std::count_if(r.begin(), r.end(), [&](double v) { return v >= test; });
    accepted.push_back(static_cast<double>(at_least) / static_cast<double>(n + 1) > alpha);
  }
  return accepted;
}

std::vector<double> loo_residuals_ols(const MatrixXd& x, const VectorXd& y) {
  const auto n = x.rows();
  std::vector<double> out;
  for (Eigen::Index leave = 0; leave < n; ++leave) {
    MatrixXd xs(n - 1, x.cols());
    VectorXd ys(n - 1);
    Eigen::Index k = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (i == leave) continue;
      xs.row(k) = x.row(i);
      ys(k) = y(i);
      ++k;
    }
    const VectorXd coef = ols_normal_equations(xs, ys);
    out.push_back(std::abs(y(leave) - ols_fit_at(coef, x.row(leave).transpose())));
  }
  return out;
}

double nadaraya_watson(const MatrixXd& x, const VectorXd& y, const VectorXd& x0, double bandwidth) {
  const auto n = x.rows();
  const auto p = x.cols();
  double num = 0.0;
  double den = 0.0;
  std::vector<double> mean(static_cast<std::size_t>(p)), sd(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) s += x(i, j);
    const double m = s / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) ss += (x(i, j) - m) * (x(i, j) - m);
    mean[static_cast<std::size_t>(j)] = m;
    const double v = std::sqrt(ss / static_cast<double>(n - 1));
    sd[static_cast<std::size_t>(j)] = v > 0 ? v : 1.0;
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double d2 = 0.0;
    for (Eigen::Index j = 0; j < p; ++j) {
      const double a = (x(i, j) - mean[static_cast<std::size_t>(j)]) / sd[static_cast<std::size_t>(j)];
      const double b = (x0(j) - mean[static_cast<std::size_t>(j)]) / sd[static_cast<std::size_t>(j)];
      d2 += (a - b) * (a - b);
    }
    const double k = std::exp(-d2 / (2.0 * bandwidth * bandwidth));
    num += k * y(i);
    den += k;
  }
  return num / den;
}

VectorXd soft_threshold(const VectorXd& b, double t) {
  VectorXd out(b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    const double mag = std::max(std::abs(b(j)) - t, 0.0);
    out(j) = b(j) < 0 ? -mag : mag;
  }
  return out;
}

}  // namespace icp::oracle
