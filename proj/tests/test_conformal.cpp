#include "support.hpp"

#include "checks/oracles.hpp"
#include "icp/conformal.hpp"

#include <doctest.h>

#include <numeric>

using namespace icp;

namespace {

const RegressorSpec kOls{RegressorKind::ols, {}, {}};

ConformalSpec spec_for(ConformalMethod m, double alpha = 0.1) {
  ConformalSpec s;
  s.method = m;
  s.alpha = alpha;
  return s;
}

Dataset exact_line(Index n) {
  Matrix x(n, 1);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    x(i, 0) = static_cast<double>(i) * 0.5;
    y(i) = 2.0 * x(i, 0);
  }
  return make_dataset(x, y);
}

}  // namespace

TEST_CASE("rank conventions") {
  CHECK(split_rank(9, 0.1) == 9);
  CHECK(split_rank(19, 0.1) == 18);
  CHECK(split_rank(3, 0.1) == 3);  // clamped
  CHECK(jackknife_rank(10, 0.2) == 8);
  CHECK(jackknife_rank(10, 0.1) == 9);
  CHECK(full_rank_cutoff(9, 0.1) == 9);
  CHECK(full_rank_cutoff(4, 0.01) == 5);
}

TEST_CASE("quantile of residuals 1..9 at alpha 0.1 is 9") {
  std::vector<double> r(9);
  std::iota(r.begin(), r.end(), 1.0);
  CHECK(kth_smallest(r, split_rank(9, 0.1)) == 9.0);
}

TEST_CASE("leave-one-out residuals 1..10 at alpha 0.2 give half-width 8") {
  std::vector<double> r(10);
  std::iota(r.rbegin(), r.rend(), 1.0);
  CHECK(kth_smallest(r, jackknife_rank(10, 0.2)) == 8.0);
  CHECK_THROWS_AS(kth_smallest(r, 11), DataError);
}

TEST_CASE("perfect fits collapse every method to the point") {
  const Dataset d = exact_line(20);
  const Vector x0 = Vector::Constant(1, 3.3);
  for (const auto m : {ConformalMethod::split, ConformalMethod::jackknife}) {
    const auto iv = conformal_interval(GroupedSample::singletons(d), kOls, x0, Matrix(0, 1), spec_for(m), 5);
    CHECK(iv.point == doctest::Approx(6.6));
    CHECK(iv.length() < 1e-9);
  }
}

TEST_CASE("full conformal on exact linear data accepts the true head") {
  // y spans [0, 11]; the 100-point grid has step 1/6 from -2.75, so 4.75 is
  // grid point 45 and equals 2 * x0.
  const Dataset d = exact_line(12);
  const Vector x0 = Vector::Constant(1, 2.375);
  for (const double alpha : {0.05, 0.2, 0.5}) {
    FullConformalTrace trace;
    const auto iv = full_conformal(d, kOls, x0, spec_for(ConformalMethod::full, alpha), &trace);
    CHECK(trace.grid[45] == doctest::Approx(4.75));
    CHECK(trace.accepted[45]);
    CHECK(!iv.degenerate);
    CHECK(iv.lo <= 4.75 + 1e-9);
    CHECK(iv.up >= 4.75 - 1e-9);
  }
}

TEST_CASE("full conformal matches the brute-force oracle") {
  Rng rng(21);
  for (int t = 0; t < 10; ++t) {
    const Dataset d = icp::testing::gaussian_linear(rng, 5, 1);
    const Vector x0 = Vector::Constant(1, rng.normal());
    ConformalSpec s = spec_for(ConformalMethod::full, 0.3);
    s.grid_points = 20;
    FullConformalTrace trace;
    full_conformal(d, kOls, x0, s, &trace);
    const auto grid = oracle::trial_grid(d.y, 20, s.grid_expansion);
    REQUIRE(grid.size() == trace.grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(grid[i] == doctest::Approx(trace.grid[i]));
    CHECK(trace.accepted == oracle::full_conformal_ols(d.x, d.y, x0, 0.3, grid));
  }
}

TEST_CASE("full conformal grid layout") {
  Vector y(3);
  y << 0.0, 2.0, 4.0;
  const auto grid = full_conformal_grid(y, 11, 0.25);
  REQUIRE(grid.size() == 11);
  CHECK(grid.front() == doctest::Approx(-1.0));
  CHECK(grid.back() == doctest::Approx(5.0));
  const auto flat = full_conformal_grid(Vector::Constant(4, 3.0), 10, 0.25);
  CHECK(flat.front() < 3.0);
  CHECK(flat.back() > 3.0);
}

TEST_CASE("full conformal intervals nest as alpha grows") {
  Rng rng(22);
  const Dataset d = icp::testing::gaussian_linear(rng, 30, 2);
  const Vector x0 = Vector::Constant(2, 0.3);
  const auto wide = full_conformal(d, kOls, x0, spec_for(ConformalMethod::full, 0.1));
  const auto narrow = full_conformal(d, kOls, x0, spec_for(ConformalMethod::full, 0.5));
  CHECK(narrow.lo >= wide.lo);
  CHECK(narrow.up <= wide.up);
}

TEST_CASE("widths are non-increasing in alpha") {
  Rng rng(23);
  const Dataset d = icp::testing::gaussian_linear(rng, 60, 2);
  const Vector x0 = Vector::Constant(2, -0.4);
  for (const auto m : {ConformalMethod::split, ConformalMethod::jackknife, ConformalMethod::full}) {
    double previous = std::numeric_limits<double>::infinity();
    for (const double a : {0.05, 0.1, 0.2, 0.5}) {
      const auto iv = conformal_interval(GroupedSample::singletons(d), kOls, x0, Matrix(0, 2), spec_for(m, a), 8);
      CHECK(iv.length() <= previous);
      CHECK(iv.lo <= iv.up);
      previous = iv.length();
    }
  }
}

TEST_CASE("jackknife residuals match the leave-one-out oracle") {
  Rng rng(24);
  const Dataset d = icp::testing::gaussian_linear(rng, 8, 2);
  const auto got = jackknife_residuals(GroupedSample::singletons(d), kOls);
  const auto want = oracle::loo_residuals_ols(d.x, d.y);
  REQUIRE(got.size() == want.size());
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got[i] - want[i]) < 1e-8);
}

TEST_CASE("intervals are translation equivariant in the head") {
  Rng rng(25);
  Dataset d = icp::testing::gaussian_linear(rng, 40, 2);
  const Vector x0 = Vector::Constant(2, 0.1);
  for (const auto m : {ConformalMethod::split, ConformalMethod::jackknife}) {
    const auto a = conformal_interval(GroupedSample::singletons(d), kOls, x0, Matrix(0, 2), spec_for(m), 3);
    Dataset shifted = d;
    shifted.y.array() += 10.0;
    const auto b = conformal_interval(GroupedSample::singletons(shifted), kOls, x0, Matrix(0, 2), spec_for(m), 3);
    CHECK(b.lo - a.lo == doctest::Approx(10.0));
    CHECK(b.up - a.up == doctest::Approx(10.0));
  }
}

TEST_CASE("split conformal is deterministic in its seed") {
  Rng rng(26);
  const Dataset d = icp::testing::gaussian_linear(rng, 50, 2);
  const Vector x0 = Vector::Zero(2);
  const auto a = split_conformal(d, kOls, x0, spec_for(ConformalMethod::split), 17);
  const auto b = split_conformal(d, kOls, x0, spec_for(ConformalMethod::split), 17);
  CHECK(a.lo == b.lo);
  CHECK(a.up == b.up);
}

TEST_CASE("split partition sizes") {
  const auto keep = split_partition(10, 0.5, 1);
  CHECK(std::count(keep.begin(), keep.end(), true) == 5);
  CHECK_THROWS_AS(split_partition(3, 0.5, 1), DataError);
  CHECK(minimum_sample_size(ConformalMethod::split, 0.5) == 4);
  CHECK(minimum_sample_size(ConformalMethod::jackknife, 0.5) == 3);
}

TEST_CASE("grouped jackknife leaves whole groups out") {
  // Two identical copies per group: singletons would leak the twin.
  Rng rng(27);
  const Dataset base = icp::testing::gaussian_linear(rng, 12, 1);
  GroupedSample s;
  s.data = base;
  s.data.x.conservativeResize(24, Eigen::NoChange);
  s.data.y.conservativeResize(24);
  s.data.x.bottomRows(12) = base.x;
  s.data.y.tail(12) = base.y;
  for (Index i = 0; i < 24; ++i) {
    s.group.push_back(i % 12);
    s.anchor.push_back(i < 12);
  }
  s.groups = 12;
  const auto grouped = jackknife_residuals(s, kOls);
  const auto plain = jackknife_residuals(GroupedSample::singletons(base), kOls);
  for (std::size_t i = 0; i < plain.size(); ++i) CHECK(grouped[i] == doctest::Approx(plain[i]).epsilon(1e-9));
}

TEST_CASE("spec validation") {
  ConformalSpec s;
  s.grid_points = 5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.rho = 1.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  const Dataset tiny = exact_line(2);
  CHECK_THROWS_AS(jackknife_conformal(tiny, kOls, Vector::Zero(1), spec_for(ConformalMethod::jackknife)), DataError);
}
