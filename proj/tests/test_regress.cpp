#include "support.hpp"

#include "checks/oracles.hpp"
#include "icp/dgp.hpp"
#include "icp/regress.hpp"

#include <doctest.h>

#include <cmath>

using namespace icp;

namespace {

Dataset line(std::initializer_list<double> xs, std::initializer_list<double> ys) {
  Matrix x(static_cast<Index>(xs.size()), 1);
  Vector y(static_cast<Index>(ys.size()));
  Index i = 0;
  for (const double v : xs) x(i++, 0) = v;
  i = 0;
  for (const double v : ys) y(i++) = v;
  return make_dataset(x, y);
}

}  // namespace

TEST_CASE("ols recovers exact linear data") {
  const FittedModel m = fit_ols(line({1, 2, 3}, {2, 4, 6}));
  CHECK(std::abs(m.intercept) < 1e-10);
  CHECK(std::abs(m.coefficients(0) - 2.0) < 1e-10);
}

TEST_CASE("ols on a constant response") {
  Rng rng(1);
  Dataset d = icp::testing::gaussian_linear(rng, 15, 3);
  d.y.setConstant(4.25);
  const FittedModel m = fit_ols(d);
  CHECK(m.intercept == doctest::Approx(4.25));
  CHECK(m.coefficients.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("ols matches the normal-equations oracle") {
  Rng rng(2);
  for (int t = 0; t < 10; ++t) {
    const Dataset d = icp::testing::gaussian_linear(rng, 20, 3);
    const FittedModel m = fit_ols(d);
    const Vector ref = oracle::ols_normal_equations(d.x, d.y);
    CHECK(std::abs(m.intercept - ref(0)) < 1e-8);
    CHECK((m.coefficients - ref.tail(3)).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("ols residuals are orthogonal to the design") {
  Rng rng(3);
  const Dataset d = icp::testing::gaussian_linear(rng, 50, 4);
  const FittedModel m = fit_ols(d);
  const Vector r = d.y - m.predict(d.x);
  CHECK(std::abs(r.sum()) < 1e-9);
  CHECK((d.x.transpose() * r).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("ols handles more features than rows") {
  Rng rng(4);
  const Dataset d = icp::testing::gaussian_linear(rng, 5, 8);
  const FittedModel m = fit_ols(d);
  CHECK((m.predict(d.x) - d.y).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("linear prediction arithmetic") {
  FittedModel m;
  m.kind = RegressorKind::ols;
  m.intercept = 1.0;
  m.coefficients = Vector::LinSpaced(2, 2.0, 3.0);
  CHECK(m.predict(Vector(Vector::Ones(2))) == doctest::Approx(6.0));
  CHECK(predict(m, Vector(Vector::Ones(2))) == doctest::Approx(6.0));
  CHECK_THROWS_AS(m.predict(Vector(Vector::Ones(3))), DataError);
}

TEST_CASE("lasso soft-thresholds an orthonormal design") {
  Rng rng(5);
  const Index n = 60, p = 5;
  Matrix a(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) a(i, j) = rng.normal();
  a.rowwise() -= a.colwise().mean();
  const Matrix x = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(n, p) *
                   std::sqrt(static_cast<double>(n));
  Vector y = x * Vector::LinSpaced(p, -2.0, 2.0);
  for (Index i = 0; i < n; ++i) y(i) += rng.normal();
  y.array() -= y.mean();
  for (const double lambda : {0.05, 0.4, 1.1}) {
    const auto sol = lasso_coordinate_descent(x, y, lambda, Vector(), 1e-12, 10000);
    const Vector expected = oracle::soft_threshold(x.transpose() * y / static_cast<double>(n), lambda);
    CHECK((sol.beta - expected).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("lasso at lambda zero equals ols") {
  Rng rng(6);
  const Dataset d = icp::testing::gaussian_linear(rng, 80, 4);
  const FittedModel l = fit_lasso_fixed(d, 0.0);
  const FittedModel o = fit_ols(d);
  CHECK((l.coefficients - o.coefficients).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(std::abs(l.intercept - o.intercept) < 1e-6);
}

TEST_CASE("lasso at lambda_max zeroes every coefficient") {
  Rng rng(7);
  const Dataset d = icp::testing::gaussian_linear(rng, 40, 6);
  const StandardizedData s = standardize(d);
  const Vector yc = d.y.array() - d.y.mean();
  const double lmax = lasso_lambda_max(s.data.x, yc);
  CHECK(fit_lasso_fixed(d, lmax).coefficients.isZero());
  CHECK(!fit_lasso_fixed(d, 0.9 * lmax).coefficients.isZero());
}

TEST_CASE("coordinate descent never increases the objective") {
  Rng rng(8);
  const Dataset d = icp::testing::gaussian_linear(rng, 50, 10);
  const StandardizedData s = standardize(d);
  const Vector yc = d.y.array() - d.y.mean();
  const auto sol = lasso_coordinate_descent(s.data.x, yc, 0.05, Vector(), 1e-10, 10000, true);
  REQUIRE(sol.converged);
  REQUIRE(sol.objective_trace.size() >= 2);
  for (std::size_t i = 1; i < sol.objective_trace.size(); ++i)
    CHECK(sol.objective_trace[i] <= sol.objective_trace[i - 1] + 1e-12);
  CHECK(lasso_kkt_residual(s.data.x, yc, sol.beta, 0.05) < 1e-6);
}

TEST_CASE("lasso prediction is the linear form of its coefficients") {
  Rng rng(9);
  const Dataset d = icp::testing::gaussian_linear(rng, 60, 3);
  LassoOptions opts;
  opts.seed = 11;
  const FittedModel m = fit_lasso(d, opts);
  const Vector x0 = Vector::LinSpaced(3, -1.0, 2.0);
  CHECK(m.predict(x0) == doctest::Approx(m.intercept + m.coefficients.dot(x0)).epsilon(1e-12));
  CHECK(m.lambda > 0.0);
}

TEST_CASE("lambda grid is log spaced from lambda_max") {
  const auto grid = lasso_lambda_grid(2.0, 50, 1e-4);
  REQUIRE(grid.size() == 50);
  CHECK(grid.front() == doctest::Approx(2.0));
  CHECK(grid.back() == doctest::Approx(2e-4));
  CHECK(grid[1] / grid[0] == doctest::Approx(grid[2] / grid[1]));
}

TEST_CASE("lasso cross-validation is seeded") {
  Rng rng(10);
  const Dataset d = icp::testing::gaussian_linear(rng, 50, 4);
  LassoOptions opts;
  opts.seed = 99;
  CHECK(fit_lasso(d, opts).lambda == fit_lasso(d, opts).lambda);
  opts.folds = 60;
  CHECK_THROWS_AS(fit_lasso(d, opts), DataError);
}

TEST_CASE("lasso zeroes most null coefficients on sparse designs") {
  int good = 0;
  for (int rep = 0; rep < 100; ++rep) {
    const SuiteOutput s = gen_long(derive_seed(2024, "lasso-sparsity", rep));
    const Dataset d = s.training_for(0);
    LassoOptions opts;
    opts.seed = derive_seed(2024, "lasso-cv", rep);
    const FittedModel m = fit_lasso(d, opts);
    int zeros = 0;
    for (Index j = 0; j < m.coefficients.size(); ++j)
      if (s.coefficients[0](j) == 0.0 && m.coefficients(j) == 0.0) ++zeros;
    if (zeros >= 5) ++good;
  }
  CHECK(good >= 80);
}

TEST_CASE("kernel on a constant response") {
  Rng rng(12);
  Dataset d = icp::testing::gaussian_linear(rng, 25, 2);
  d.y.setConstant(-1.5);
  const FittedModel m = fit_kernel(d);
  CHECK(m.predict(Vector(Vector::Constant(2, 10.0))) == doctest::Approx(-1.5));
}

TEST_CASE("kernel interpolates at a training tail as the bandwidth vanishes") {
  const Dataset d = line({0, 1, 2, 3}, {5, -1, 7, 2});
  const FittedModel m = fit_kernel(d, 1e-6);
  for (Index i = 0; i < d.rows(); ++i)
    CHECK(std::abs(m.predict(Vector(Vector::Constant(1, d.x(i, 0)))) - d.y(i)) < 1e-6);
}

TEST_CASE("kernel at the midpoint of two symmetric rows") {
  const FittedModel m = fit_kernel(line({0, 2}, {0, 2}));
  CHECK(m.predict(Vector(Vector::Constant(1, 1.0))) == doctest::Approx(1.0));
}

TEST_CASE("kernel matches the direct Nadaraya-Watson formula") {
  Rng rng(13);
  const Dataset d = icp::testing::gaussian_linear(rng, 10, 1);
  const FittedModel m = fit_kernel(d);
  for (const double x0 : {-1.0, 0.0, 0.7, 2.5}) {
    const Vector q = Vector::Constant(1, x0);
    CHECK(m.predict(q) == doctest::Approx(oracle::nadaraya_watson(d.x, d.y, q, m.bandwidth)).epsilon(1e-12));
  }
}

TEST_CASE("kernel predictions are convex combinations of the heads") {
  Rng rng(14);
  const Dataset d = icp::testing::gaussian_linear(rng, 30, 3);
  const FittedModel m = fit_kernel(d);
  for (int t = 0; t < 20; ++t) {
    Vector q(3);
    for (Index j = 0; j < 3; ++j) q(j) = 3.0 * rng.normal();
    const double v = m.predict(q);
    CHECK(v >= d.y.minCoeff() - 1e-12);
    CHECK(v <= d.y.maxCoeff() + 1e-12);
  }
}

TEST_CASE("median pairwise distance is the lower median") {
  Matrix x(3, 1);
  x << 0, 1, 3;  // distances 1, 2, 3
  CHECK(median_pairwise_distance(x) == 2.0);
  Matrix y(4, 1);
  y << 0, 1, 3, 7;  // 1 2 3 4 6 7
  CHECK(median_pairwise_distance(y) == 3.0);
}

TEST_CASE("pinned tuning freezes the lasso penalty") {
  Rng rng(15);
  const Dataset d = icp::testing::gaussian_linear(rng, 40, 3);
  RegressorSpec spec{RegressorKind::lasso, {}, {}};
  const FittedModel base = fit(d, spec);
  const RegressorSpec pinned = pin_tuning(spec, base);
  REQUIRE(pinned.fixed_lambda);
  CHECK(*pinned.fixed_lambda == base.lambda);
  CHECK(fit(d, pinned).coefficients.isApprox(base.coefficients, 1e-6));
}
