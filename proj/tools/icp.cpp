#include "checks/acceptance.hpp"

#include "icp/config.hpp"
#include "icp/dgp.hpp"
#include "icp/pipeline.hpp"
#include "icp/report.hpp"

#include <CLI11.hpp>
#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitData = 2;
constexpr int kExitCriteria = 3;

void write_queries_csv(const icp::SuiteOutput& s, const fs::path& path,
                       const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw icp::DataError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& c : comments) out << "# " << c << '\n';
  out << s.dataset.head_name;
  for (const auto& name : s.dataset.feature_names) out << ',' << name;
  out << '\n';
  for (const auto& q : s.queries) {
    out << (q.y0 ? icp::format_real(*q.y0) : "");
    for (icp::Index j = 0; j < q.x0.size(); ++j) out << ',' << icp::format_real(q.x0(j));
    out << '\n';
  }
}

void write_labels_csv(const icp::SuiteOutput& s, const fs::path& path,
                      const std::vector<std::string>& comments) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw icp::DataError(fmt::format("cannot write '{}'", path.string()));
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "kind,index,setting\n";
  for (std::size_t i = 0; i < s.setting_labels.size(); ++i)
    out << "train," << i + 1 << ',' << s.setting_labels[i] << '\n';
  for (std::size_t i = 0; i < s.query_labels.size(); ++i)
    out << "query," << i + 1 << ',' << s.query_labels[i] << '\n';
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw icp::DataError(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

int cmd_gen(const std::string& suite, std::uint64_t seed, const fs::path& out) {
  const icp::SuiteOutput s = icp::generate_suite(suite, seed);
  fs::create_directories(out);
  icp::RunManifest m;
  m.suite = suite;
  m.config.seed = seed;
  const std::vector<std::string> comments{icp::provenance_line(seed, m.config_hash())};
  icp::save_csv(s.dataset, out / (suite + "_train.csv"), comments);
  write_queries_csv(s, out / (suite + "_queries.csv"), comments);
  write_labels_csv(s, out / (suite + "_labels.csv"), comments);
  write_text(out / (suite + "_manifest.txt"),
             fmt::format("suite={}\nseed={}\npooled={}\n", suite, seed, s.pooled ? "true" : "false"));
  fmt::print("wrote {} training rows and {} queries to {}\n", s.dataset.rows(), s.queries.size(),
             out.string());
  return kExitOk;
}

int cmd_run(icp::RunManifest m) {
  m.validate();
  const auto jobs = icp::suite_jobs(m);
  const auto records = icp::run_grid(m, jobs);
  fs::create_directories(m.output_dir);
  const std::vector<std::string> comments{icp::provenance_line(m.config.seed, m.config_hash())};
  icp::write_intervals_csv(records, m.output_dir / "intervals.csv", comments);
  icp::write_reports(records, m.output_dir, comments);
  // The timestamp lives only here so the CSV outputs stay byte-stable.
  write_text(m.output_dir / "manifest.txt",
             fmt::format("# {}\n# written {:%Y-%m-%dT%H:%M:%S}Z\n{}", comments.front(),
                         fmt::gmtime(std::chrono::system_clock::to_time_t(std::chrono::system_clock::now())),
                         m.canonical()));
  fmt::print("{} intervals for {} queries written to {}\n", records.size(), jobs.size(),
             m.output_dir.string());
  return kExitOk;
}

int cmd_score(const fs::path& in, const fs::path& out) {
  std::vector<std::string> comments;
  const auto records = icp::read_intervals_csv(in, &comments);
  fs::create_directories(out);
  icp::write_reports(records, out, comments);
  fmt::print("scored {} intervals into {}\n", records.size(), out.string());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Individualized conformal prediction intervals"};
  app.set_version_flag("--version", std::string("icp ") + ICP_VERSION);
  app.require_subcommand(1);

  // gen
  std::string gen_suite = "small";
  std::uint64_t gen_seed = icp::ExperimentConfig{}.seed;
  fs::path gen_out = "data";
  auto* gen = app.add_subcommand("gen", "Generate a synthetic suite as CSV files");
  gen->add_option("--suite", gen_suite, "small or long")
      ->check(CLI::IsMember({"small", "long"}))
      ->capture_default_str();
  gen->add_option("--seed", gen_seed, "Master seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output directory")->capture_default_str();

  // run
  icp::RunManifest manifest;
  const icp::ExperimentConfig defaults;
  std::optional<std::string> config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
  auto* run = app.add_subcommand("run", "Compute intervals for a suite and write reports");
  run->add_option("--config", config_file, "key=value manifest; flags override it");
  auto flag = [&](const std::string& name, const std::string& key, const std::string& help,
                  const std::string& default_value) {
    run->add_option_function<std::string>(
           "--" + name, [&overrides, key](const std::string& v) { overrides.emplace_back(key, v); },
           fmt::format("{} [default: {}]", help, default_value));
  };
  flag("alpha", "alpha", "Miscoverage level and percentile selection fraction",
       fmt::format("{}", defaults.alpha));
  flag("gamma", "gamma", "Cosine similarity threshold", fmt::format("{}", defaults.gamma));
  flag("rho", "rho", "Split conformal training fraction", fmt::format("{}", defaults.rho));
  flag("method", "method", "full, split, jackknife, comma list or all", "all");
  flag("regressor", "regressor", "ols, lasso, kernel, comma list or all", "all");
  flag("similarity", "similarity", "percentile, cosine, comma list or all", "all");
  flag("control-mode", "control_mode", "perturb or gaussian_mimic", "perturb");
  flag("noise-scale", "noise_scale", "Perturbation scale relative to feature sd",
       fmt::format("{}", defaults.noise_scale));
  flag("min-relevant", "min_relevant", "Smallest relevant set", fmt::format("{}", defaults.min_relevant));
  flag("grid-points", "grid_points", "Full conformal trial values", fmt::format("{}", defaults.grid_points));
  flag("lasso-folds", "lasso_folds", "LASSO cross-validation folds", fmt::format("{}", defaults.lasso_folds));
  flag("seed", "seed", "Master seed", fmt::format("{}", defaults.seed));
  flag("suite", "suite", "small, long or csv", "small");
  flag("train", "train", "Training CSV (suite csv)", "none");
  flag("queries", "queries", "Query CSV (suite csv)", "none");
  flag("head", "head", "Head column name (suite csv)", "y");
  flag("out", "out", "Output directory", "out");
  flag("threads", "threads", "Worker threads", "1");

  // score
  fs::path score_in;
  fs::path score_out = "out";
  auto* score = app.add_subcommand("score", "Recompute reports from an interval table");
  score->add_option("--in", score_in, "intervals.csv written by run")->required();
  score->add_option("--out", score_out, "Output directory")->capture_default_str();

  // selftest
  std::vector<int> criteria_ids;
  auto* selftest = app.add_subcommand("selftest", "Run the acceptance criteria");
  selftest->add_option("--only", criteria_ids, "Criterion ids to run (default all)")
      ->check(CLI::Range(1, 10));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(gen_suite, gen_seed, gen_out);
    if (*run) {
      if (config_file) icp::load_manifest_file(manifest, *config_file);
      for (const auto& [key, value] : overrides) icp::apply_setting(manifest, key, value);
      return cmd_run(manifest);
    }
    if (*score) return cmd_score(score_in, score_out);
    if (*selftest) return icp::acceptance::run_and_report(criteria_ids) == 0 ? kExitOk : kExitCriteria;
  } catch (const icp::ConfigError& e) {
    fmt::print(stderr, "configuration error: {}\n", e.what());
    return kExitConfig;
  } catch (const icp::DataError& e) {
    fmt::print(stderr, "data error: {}\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
