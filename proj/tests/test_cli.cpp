#include "support.hpp"

#include "icp/core.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <cstdlib>
#include <sys/wait.h>

using icp::testing::TempDir;

namespace {

// Exit status of the CLI run with `args`, output discarded.
int icp_cli(const std::string& args) {
  const std::string cmd = fmt::format("'{}' {} >/dev/null 2>&1", ICP_CLI_PATH, args);
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("help and version succeed") {
  CHECK(icp_cli("--help") == 0);
  CHECK(icp_cli("run --help") == 0);
  CHECK(icp_cli("--version") == 0);
}

TEST_CASE("configuration errors exit with 1") {
  CHECK(icp_cli("") == 1);
  CHECK(icp_cli("frobnicate") == 1);
  CHECK(icp_cli("run --alpha 1.5") == 1);
  CHECK(icp_cli("run --method conformal") == 1);
  TempDir dir("cli");
  icp::testing::spit(dir / "m.txt", "alpah=0.1\n");
  CHECK(icp_cli(fmt::format("run --config '{}'", (dir / "m.txt").string())) == 1);
}

TEST_CASE("data errors exit with 2") {
  TempDir dir("cli");
  icp::testing::spit(dir / "train.csv", "y,x1\n1,2\n2,NaN\n");
  icp::testing::spit(dir / "q.csv", "x1\n1\n");
  CHECK(icp_cli(fmt::format("run --suite csv --train '{}' --queries '{}' --out '{}'",
                            (dir / "train.csv").string(), (dir / "q.csv").string(),
                            (dir / "out").string())) == 2);
  CHECK(icp_cli(fmt::format("score --in '{}' --out '{}'", (dir / "none.csv").string(),
                            (dir / "out").string())) == 2);
}

TEST_CASE("gen, run on the generated csv, and score") {
  TempDir dir("cli");
  REQUIRE(icp_cli(fmt::format("gen --suite small --seed 7 --out '{}'", dir.path().string())) == 0);
  const icp::Dataset train = icp::load_csv(dir / "small_train.csv", "y");
  CHECK(train.rows() == 750);
  CHECK(icp::testing::slurp(dir / "small_train.csv").rfind("# icp ", 0) == 0);
  CHECK(icp::testing::slurp(dir / "small_manifest.txt").find("seed=7") != std::string::npos);

  const std::string run = fmt::format(
      "run --suite csv --train '{}' --queries '{}' --method split --regressor ols,lasso --seed 5 --out '{}'",
      (dir / "small_train.csv").string(), (dir / "small_queries.csv").string(), (dir / "out").string());
  REQUIRE(icp_cli(run) == 0);
  for (const std::string f : {"intervals.csv", "metrics.csv", "raw_percentile.csv", "summary_cosine.csv",
                              "manifest.txt"})
    CHECK_MESSAGE(std::filesystem::exists(dir / "out" / f), f);

  REQUIRE(icp_cli(fmt::format("score --in '{}' --out '{}'", (dir / "out" / "intervals.csv").string(),
                              (dir / "rescored").string())) == 0);
  CHECK(icp::testing::slurp(dir / "out" / "metrics.csv") ==
        icp::testing::slurp(dir / "rescored" / "metrics.csv"));
  CHECK(icp::testing::slurp(dir / "out" / "summary_percentile.csv") ==
        icp::testing::slurp(dir / "rescored" / "summary_percentile.csv"));
}

TEST_CASE("selftest runs a chosen criterion") {
  CHECK(icp_cli("selftest --only 10") == 0);
  CHECK(icp_cli("selftest --only 11") == 1);
}
