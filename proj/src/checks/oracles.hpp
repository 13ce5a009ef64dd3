#pragma once

// Reference computations that deliberately avoid the production code paths:
// explicit Gram-matrix inversion instead of orthogonal decompositions,
// p-value acceptance instead of rank cutoffs, hand-rolled standardization.
// Nothing in the icp library may call into this file.

#include <Eigen/Dense>

#include <vector>

namespace icp::oracle {

// [intercept, slopes...] from the normal equations (Z'Z)^{-1} Z'y with
// Z = [1 X], inverted explicitly.
Eigen::VectorXd ols_normal_equations(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// Grid for full conformal, recomputed from its definition.
std::vector<double> trial_grid(const Eigen::VectorXd& y, int points, double expansion);

// Full conformal acceptance by refitting OLS on every augmented dataset and
// testing the conformal p-value #{i : R_i >= R_test} / (n + 1) > alpha.
std::vector<bool> full_conformal_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& x0, double alpha,
                                     const std::vector<double>& grid);

// |y_i - yhat_{-i}(x_i)| by refitting OLS without row i, one row at a time.
std::vector<double> loo_residuals_ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

// sum_i K_h(x0 - x_i) y_i / sum_i K_h(x0 - x_i) with a Gaussian kernel, after
// standardizing tails by column mean and n - 1 standard deviation.
double nadaraya_watson(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const Eigen::VectorXd& x0, double bandwidth);

// sign(b) * max(|b| - t, 0), elementwise.
Eigen::VectorXd soft_threshold(const Eigen::VectorXd& b, double t);

}  // namespace icp::oracle
