#include "support.hpp"

#include "icp/config.hpp"
#include "icp/dgp.hpp"
#include "icp/pipeline.hpp"
#include "icp/report.hpp"

#include <doctest.h>

#include <sstream>

using namespace icp;
using icp::testing::TempDir;

namespace {

std::vector<std::string> body_lines(const std::filesystem::path& p) {
  std::istringstream in(icp::testing::slurp(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

RunManifest small_manifest() {
  RunManifest m;
  m.suite = "small";
  m.config.seed = 7;
  m.regressors = {RegressorKind::ols, RegressorKind::lasso};
  return m;
}

}  // namespace

TEST_CASE("the three paths carry distinct tags and ordered bounds") {
  const SuiteOutput s = gen_small(1);
  ExperimentConfig cfg;
  for (const auto m : {ConformalMethod::split, ConformalMethod::jackknife, ConformalMethod::full}) {
    cfg.method = m;
    const auto res = individualized_intervals(s.dataset, s.queries[0], cfg);
    CHECK(res.standard->path == Path::standard);
    CHECK(res.relevant->path == Path::relevant);
    CHECK(res.relevant_simulated->path == Path::relevant_simulated);
    for (const auto* iv : {&*res.standard, &*res.relevant, &*res.relevant_simulated}) {
      CHECK(iv->lo <= iv->up);
      CHECK(iv->method == m);
    }
  }
}

TEST_CASE("masking paths leaves the others unchanged") {
  const SuiteOutput s = gen_small(2);
  ExperimentConfig cfg;
  cfg.regressor = RegressorKind::lasso;
  const auto all = individualized_intervals(s.dataset, s.queries[1], cfg);
  const auto only_sim = individualized_intervals(s.dataset, s.queries[1], cfg, {false, false, true});
  const auto only_std = individualized_intervals(s.dataset, s.queries[1], cfg, {true, false, false});
  CHECK(!only_sim.standard);
  CHECK(only_sim.relevant_simulated->lo == all.relevant_simulated->lo);
  CHECK(only_std.standard->up == all.standard->up);
}

TEST_CASE("the held-out head never influences the intervals") {
  const SuiteOutput s = gen_small(3);
  Query q = s.queries[2];
  const auto a = individualized_intervals(s.dataset, q, {});
  q.y0 = 1e6;
  const auto b = individualized_intervals(s.dataset, q, {});
  CHECK(a.relevant->lo == b.relevant->lo);
  CHECK(a.standard->up == b.standard->up);
}

TEST_CASE("a whole-data selection collapses the three paths") {
  Rng rng(51);
  Matrix x(50, 2);
  for (Index i = 0; i < 50; ++i) {
    x(i, 0) = 1.0 + rng.uniform();
    x(i, 1) = 1.0 + rng.uniform();
  }
  const Dataset d = make_dataset(x, x.col(0) - x.col(1) + Vector::Ones(50));
  ExperimentConfig cfg;
  cfg.similarity = Similarity::cosine;
  cfg.gamma = 1e-9;
  cfg.noise_scale = 1e-12;
  const auto res = individualized_intervals(d, Query{Vector::Constant(2, 1.5), std::nullopt}, cfg);
  CHECK(res.selection->indices.size() == 50);
  CHECK(std::abs(res.relevant->lo - res.standard->lo) < 1e-6);
  CHECK(std::abs(res.relevant_simulated->up - res.standard->up) < 1e-6);
}

TEST_CASE("too few rows is a data error") {
  const Dataset d = make_dataset(Matrix::Ones(2, 1), Vector::Ones(2));
  ExperimentConfig cfg;
  cfg.method = ConformalMethod::jackknife;
  CHECK_THROWS_AS(individualized_intervals(d, Query{Vector::Ones(1), std::nullopt}, cfg), DataError);
  CHECK_THROWS_AS(individualized_intervals(gen_small(1).dataset, Query{Vector::Ones(3), std::nullopt}, cfg), DataError);
}

TEST_CASE("the relevance floor follows the method minimum") {
  ExperimentConfig cfg;
  cfg.min_relevant = 1;
  cfg.method = ConformalMethod::split;
  CHECK(effective_min_relevant(cfg, 100) == minimum_sample_size(ConformalMethod::split, cfg.rho));
  cfg.min_relevant = 30;
  CHECK(effective_min_relevant(cfg, 12) == 12);
}

TEST_CASE("run_grid output does not depend on the thread count") {
  RunManifest m = small_manifest();
  m.methods = {ConformalMethod::split, ConformalMethod::jackknife};
  const auto jobs = suite_jobs(m);
  const auto one = run_grid(m, jobs);
  m.threads = 3;
  const auto three = run_grid(m, jobs);
  REQUIRE(one.size() == three.size());
  CHECK(one.size() == 3 * 2 * 2 * 2 * 3);
  for (std::size_t i = 0; i < one.size(); ++i) {
    CHECK(one[i].cell == three[i].cell);
    CHECK(one[i].interval.lo == three[i].interval.lo);
    CHECK(one[i].interval.up == three[i].interval.up);
  }
}

TEST_CASE("reports have the pinned row structure and are byte stable") {
  const RunManifest m = small_manifest();
  const auto jobs = suite_jobs(m);
  TempDir a("pipe"), b("pipe");
  for (const TempDir* dir : {&a, &b}) {
    const auto records = run_grid(m, jobs);
    const std::vector<std::string> comments{provenance_line(m.config.seed, m.config_hash())};
    write_intervals_csv(records, *dir / "intervals.csv", comments);
    write_reports(records, dir->path(), comments);
  }
  for (const std::string f : {"intervals.csv", "metrics.csv", "raw_percentile.csv", "raw_cosine.csv",
                              "summary_percentile.csv", "summary_cosine.csv", "plot/percentile_q1.csv"})
    CHECK_MESSAGE(icp::testing::slurp(a / f) == icp::testing::slurp(b / f), f);

  const auto raw = body_lines(a / "raw_percentile.csv");
  REQUIRE(raw.size() == 20);
  CHECK(raw[1].rfind("y0,", 0) == 0);
  CHECK(raw[2].rfind("pred,", 0) == 0);
  CHECK(raw[3].rfind("predr,", 0) == 0);
  CHECK(raw[7].rfind("predlrs,", 0) == 0);
  CHECK(raw[19].rfind("uplrs,", 0) == 0);
  CHECK(std::count(raw[0].begin(), raw[0].end(), ',') == 9);

  const auto summary = body_lines(a / "summary_cosine.csv");
  REQUIRE(summary.size() == 37);
  CHECK(summary[0] == "metric,General,Conformal,Split,Jackknife");
  CHECK(summary[1].rfind("diffpred,", 0) == 0);
  CHECK(summary[36].rfind("abkrs,", 0) == 0);

  const auto head = icp::testing::slurp(a / "raw_cosine.csv");
  CHECK(head.rfind("# icp ", 0) == 0);
  CHECK(head.find("seed=7") != std::string::npos);
}

TEST_CASE("interval tables round trip through score") {
  RunManifest m = small_manifest();
  m.methods = {ConformalMethod::split};
  const auto records = run_grid(m, suite_jobs(m));
  TempDir dir("pipe");
  const std::vector<std::string> comments{provenance_line(m.config.seed, m.config_hash())};
  write_intervals_csv(records, dir / "intervals.csv", comments);
  std::vector<std::string> read_comments;
  const auto back = read_intervals_csv(dir / "intervals.csv", &read_comments);
  REQUIRE(back.size() == records.size());
  CHECK(read_comments == comments);
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].cell == records[i].cell);
    CHECK(back[i].interval.lo == records[i].interval.lo);
    CHECK(back[i].y0 == records[i].y0);
  }
}

TEST_CASE("manifest settings") {
  RunManifest m;
  apply_setting(m, "alpha", "0.2");
  apply_setting(m, "method", "jackknife,split");
  apply_setting(m, "regressor", "all");
  CHECK(m.config.alpha == 0.2);
  CHECK(m.methods == std::vector<ConformalMethod>{ConformalMethod::split, ConformalMethod::jackknife});
  CHECK(m.regressors.size() == 3);
  CHECK_THROWS_AS(apply_setting(m, "alhpa", "0.2"), ConfigError);
  CHECK_THROWS_AS(apply_setting(m, "alpha", "abc"), ConfigError);
  const std::string hash = m.config_hash();
  CHECK(hash.size() == 16);
  apply_setting(m, "threads", "4");
  CHECK(m.config_hash() == hash);  // threads never change results
  apply_setting(m, "seed", "8");
  CHECK(m.config_hash() != hash);

  TempDir dir("pipe");
  icp::testing::spit(dir / "m.txt", "# comment\nalpha = 0.3\n\nsuite=long\n");
  RunManifest f;
  load_manifest_file(f, dir / "m.txt");
  CHECK(f.config.alpha == 0.3);
  CHECK(f.suite == "long");
}

TEST_CASE("csv suite reads queries by feature name") {
  TempDir dir("pipe");
  icp::testing::spit(dir / "train.csv", "y,a,b\n1,1,0\n2,2,1\n3,3,1\n4,4,2\n5,5,3\n6,6,3\n");
  icp::testing::spit(dir / "q.csv", "b,a\n1,2.5\n");
  RunManifest m;
  m.suite = "csv";
  m.train_csv = dir / "train.csv";
  m.queries_csv = dir / "q.csv";
  const auto jobs = suite_jobs(m);
  REQUIRE(jobs.size() == 1);
  CHECK(jobs[0].query.x0(0) == 2.5);
  CHECK(jobs[0].query.x0(1) == 1.0);
  CHECK(!jobs[0].query.y0);
  icp::testing::spit(dir / "bad.csv", "a\n1\n");
  m.queries_csv = dir / "bad.csv";
  CHECK_THROWS_AS(suite_jobs(m), DataError);
}
