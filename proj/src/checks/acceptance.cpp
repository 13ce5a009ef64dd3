#include "acceptance.hpp"

#include "oracles.hpp"

#include "icp/conformal.hpp"
#include "icp/dgp.hpp"
#include "icp/evaluate.hpp"
#include "icp/individualize.hpp"
#include "icp/pipeline.hpp"
#include "icp/regress.hpp"
#include "icp/report.hpp"
#include "icp/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numeric>
#include <set>
#include <sstream>

namespace icp::acceptance {
namespace {

constexpr std::uint64_t kSeed = 20241019;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CriterionResult make(int id, std::string name, bool passed, std::string detail) {
  return CriterionResult{id, std::move(name), passed, std::move(detail), 0.0};
}

Dataset random_linear(Rng& rng, Index n, Index p, double noise) {
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  Vector beta(p);
  for (Index j = 0; j < p; ++j) beta(j) = rng.normal();
  Vector y = x * beta;
  for (Index i = 0; i < n; ++i) y(i) += 1.0 + noise * rng.normal();
  return make_dataset(std::move(x), std::move(y));
}

Vector random_tail(Rng& rng, Index p) {
  Vector v(p);
  for (Index j = 0; j < p; ++j) v(j) = rng.normal();
  return v;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> data_lines(const std::filesystem::path& p) {
  std::istringstream in(read_file(p));
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);)
    if (!line.empty() && line[0] != '#') out.push_back(line);
  return out;
}

std::string first_field(const std::string& line) { return line.substr(0, line.find(',')); }

}  // namespace

CriterionResult coverage_exchangeable() {
  constexpr int kReps = 500;
  constexpr double kAlpha = 0.1;
  constexpr double threshold = 0.86;  // 1 - alpha less three binomial standard errors
  const auto start = Clock::now();
  ConformalSpec spec;
  spec.method = ConformalMethod::split;
  spec.alpha = kAlpha;
  const RegressorSpec reg{RegressorKind::ols, {}, {}};
  int covered = 0;
  for (int r = 0; r < kReps; ++r) {
    const Dataset d = sample_small_setting(SmallSetting::A, 250, derive_seed(kSeed, "c1-train", r));
    const Query q = sample_small_exchangeable_query(SmallSetting::A, derive_seed(kSeed, "c1-query", r));
    const auto iv = split_conformal(d, reg, q.x0, spec, derive_seed(kSeed, "c1-split", r));
    if (iv.lo <= *q.y0 && *q.y0 <= iv.up) ++covered;
  }
  const double elapsed = seconds_since(start);
  const double coverage = static_cast<double>(covered) / kReps;
  return make(1, "coverage guarantee (Setting A, split, OLS, alpha=0.1)",
              coverage >= threshold && elapsed < 30.0,
              fmt::format("coverage {:.4f} (threshold {:.4f}), {:.2f}s (limit 30s)", coverage,
                          threshold, elapsed));
}

CriterionResult full_conformal_oracle() {
  Rng rng(derive_seed(kSeed, "c2"));
  int mismatches = 0;
  int accepted_total = 0;
  for (int t = 0; t < 25; ++t) {
    const Index n = 5 + static_cast<Index>(rng.below(11));  // 5..15
    const Index p = 1 + static_cast<Index>(rng.below(2));   // 1..2
    const Dataset d = random_linear(rng, n, p, 0.5);
    const Vector x0 = random_tail(rng, p);
    ConformalSpec spec;
    spec.method = ConformalMethod::full;
    spec.alpha = std::array{0.1, 0.2, 0.3, 0.5}[t % 4];
    spec.grid_points = 20;
    FullConformalTrace trace;
    full_conformal(d, RegressorSpec{RegressorKind::ols, {}, {}}, x0, spec, &trace);
    const auto grid = oracle::trial_grid(d.y, 20, spec.grid_expansion);
    const auto expected = oracle::full_conformal_ols(d.x, d.y, x0, spec.alpha, grid);
    if (expected != trace.accepted) ++mismatches;
    accepted_total += static_cast<int>(std::count(expected.begin(), expected.end(), true));
  }
  return make(2, "full-conformal oracle equivalence (25 datasets, 20-point grid)", mismatches == 0,
              fmt::format("{} mismatching datasets, {} accepted grid points in total", mismatches,
                          accepted_total));
}

CriterionResult jackknife_oracle() {
  Rng rng(derive_seed(kSeed, "c3"));
  double worst = 0.0;
  for (int t = 0; t < 25; ++t) {
    const Index n = 6 + static_cast<Index>(rng.below(25));  // 6..30
    const Index p = 1 + static_cast<Index>(rng.below(3));
    const Dataset d = random_linear(rng, n, p, 1.0);
    const auto got = jackknife_residuals(GroupedSample::singletons(d), RegressorSpec{RegressorKind::ols, {}, {}});
    const auto want = oracle::loo_residuals_ols(d.x, d.y);
    for (std::size_t i = 0; i < got.size(); ++i) worst = std::max(worst, std::abs(got[i] - want[i]));
  }
  return make(3, "jackknife LOO residual oracle (25 datasets, n <= 30)", worst <= 1e-8,
              fmt::format("max abs difference {:.3e} (tolerance 1e-8)", worst));
}

CriterionResult lasso_correctness() {
  Rng rng(derive_seed(kSeed, "c4"));
  double worst_soft = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Index n = 40 + static_cast<Index>(rng.below(40));
    const Index p = 2 + static_cast<Index>(rng.below(8));
    Matrix a(n, p);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < p; ++j) a(i, j) = rng.normal();
    a.rowwise() -= a.colwise().mean();
    const Matrix q = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(n, p);
    const Matrix x = q * std::sqrt(static_cast<double>(n));  // x'x = n I, centered columns
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = rng.normal();
    y.array() -= y.mean();
    y += x * random_tail(rng, p);
    const Vector ols = x.transpose() * y / static_cast<double>(n);
    const double lambda = rng.uniform() * lasso_lambda_max(x, y);
    const auto sol = lasso_coordinate_descent(x, y, lambda, Vector(), 1e-12, 100000);
    worst_soft = std::max(worst_soft, (sol.beta - oracle::soft_threshold(ols, lambda)).cwiseAbs().maxCoeff());
  }

  double worst_ols = 0.0;
  for (int t = 0; t < 20; ++t) {
    const Dataset d = random_linear(rng, 60, 1 + static_cast<Index>(rng.below(5)), 1.0);
    const FittedModel l = fit_lasso_fixed(d, 0.0);
    const FittedModel o = fit_ols(d);
    worst_ols = std::max({worst_ols, (l.coefficients - o.coefficients).cwiseAbs().maxCoeff(),
                          std::abs(l.intercept - o.intercept)});
  }

  double worst_kkt = 0.0;
  for (int t = 0; t < 50; ++t) {
    const Index n = 30 + static_cast<Index>(rng.below(70));
    const Index p = 2 + static_cast<Index>(rng.below(19));
    const Dataset d = random_linear(rng, n, p, 1.0);
    LassoOptions opts;
    opts.seed = derive_seed(kSeed, "c4-cv", t);
    const FittedModel m = fit_lasso(d, opts);
    const StandardizedData s = standardize(d);
    const Vector beta_std = m.coefficients.cwiseProduct(s.transform.scales);
    const Vector yc = d.y.array() - d.y.mean();
    worst_kkt = std::max(worst_kkt, lasso_kkt_residual(s.data.x, yc, beta_std, m.lambda));
  }
  const bool ok = worst_soft <= 1e-6 && worst_ols <= 1e-6 && worst_kkt <= 1e-6;
  return make(4, "LASSO correctness (soft-threshold, lambda=0, KKT)", ok,
              fmt::format("soft-threshold {:.3e}, vs OLS {:.3e}, KKT {:.3e} (tolerance 1e-6)",
                          worst_soft, worst_ols, worst_kkt));
}

CriterionResult adaptivity_heteroskedastic() {
  constexpr int kReps = 200;
  std::vector<double> diff;
  double len_c = 0.0, len_rel = 0.0;
  for (int r = 0; r < kReps; ++r) {
    const SuiteOutput suite = gen_small(derive_seed(kSeed, "c5-suite", r));
    std::vector<double> x1c;
    for (std::size_t i = 0; i < suite.setting_labels.size(); ++i)
      if (suite.setting_labels[i] == "C") x1c.push_back(suite.dataset.x(static_cast<Index>(i), 0));
    std::nth_element(x1c.begin(), x1c.begin() + x1c.size() / 2, x1c.end());
    const double median = x1c[x1c.size() / 2];

    // Setting C query law, restricted to the low-noise half.
    Rng rng(derive_seed(kSeed, "c5-query", r));
    Vector x0(2);
    do {
      x0(0) = rng.normal(1.0, 1.0);
      x0(1) = rng.normal(3.0, 2.0);
    } while (x0(0) >= median);

    ExperimentConfig cfg;
    cfg.method = ConformalMethod::split;
    cfg.regressor = RegressorKind::ols;
    cfg.similarity = Similarity::percentile;
    cfg.alpha = 0.1;
    cfg.seed = derive_seed(kSeed, "c5-run", r);
    const auto res = individualized_intervals(suite.dataset, Query{x0, std::nullopt}, cfg, {true, true, false});
    len_c += res.standard->length();
    len_rel += res.relevant->length();
    diff.push_back(res.standard->length() - res.relevant->length());
  }
  const double mean = std::accumulate(diff.begin(), diff.end(), 0.0) / kReps;
  double ss = 0.0;
  for (const double v : diff) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (kReps - 1)) / std::sqrt(static_cast<double>(kReps));
  len_c /= kReps;
  len_rel /= kReps;
  return make(5, "adaptivity (Setting C low-noise queries, len(C_rel) < len(C))",
              len_rel < len_c && mean > 2.0 * se,
              fmt::format("mean len C {:.4f}, C_rel {:.4f}, difference {:.4f} = {:.1f} SE", len_c,
                          len_rel, mean, mean / se));
}

CriterionResult containment_monotonicity() {
  int containment = 0, alpha_violations = 0, gamma_violations = 0;
  const std::array alphas{0.05, 0.1, 0.2, 0.5};
  const std::array gammas{0.5, 0.7, 0.9, 0.99};
  for (int t = 0; t < 100; ++t) {
    Rng rng(derive_seed(kSeed, "c6", t));
    const auto setting = std::array{SmallSetting::A, SmallSetting::B, SmallSetting::C}[t % 3];
    const Dataset d = sample_small_setting(setting, 60, derive_seed(kSeed, "c6-data", t));
    const Vector x0 = d.x.row(static_cast<Index>(rng.below(60))).transpose() + 0.3 * random_tail(rng, 2);

    // O_q is contained in the augmented set, in both control modes.
    const auto sel = select_percentile(d, x0, 0.2, 10);
    for (const auto mode : {ControlMode::perturb, ControlMode::gaussian_mimic}) {
      const auto controls = simulate_controls(d, sel, 0.1, mode, derive_seed(kSeed, "c6-ctl", t));
      for (const Index i : sel.indices) {
        int found = 0;
        for (Index r = 0; r < controls.dataset.rows(); ++r)
          if (controls.origin[static_cast<std::size_t>(r)] == ControlOrigin::relevant_original &&
              controls.source[static_cast<std::size_t>(r)] == i &&
              controls.dataset.x.row(r) == d.x.row(i) && controls.dataset.y(r) == d.y(i))
            ++found;
        if (found != 1) ++containment;
      }
    }

    // Interval widths are non-increasing in alpha.
    const auto reg = RegressorSpec{RegressorKind::ols, {}, {}};
    for (const auto method : {ConformalMethod::split, ConformalMethod::jackknife, ConformalMethod::full}) {
      double previous = std::numeric_limits<double>::infinity();
      PredictionInterval outer{};
      bool first = true;
      for (const double a : alphas) {
        ConformalSpec spec;
        spec.method = method;
        spec.alpha = a;
        const auto iv = conformal_interval(GroupedSample::singletons(d), reg, x0, Matrix(0, 2), spec,
                                           derive_seed(kSeed, "c6-split", t));
        if (iv.length() > previous) ++alpha_violations;
        // Full conformal over a fixed grid: accepted sets are nested.
        if (method == ConformalMethod::full && !first && !iv.degenerate &&
            (iv.lo < outer.lo || iv.up > outer.up))
          ++alpha_violations;
        previous = iv.length();
        outer = iv;
        first = false;
      }
    }

    // Cosine selection shrinks as gamma grows, down to the floor.
    Matrix xc = d.x;
    xc.rowwise() -= xc.colwise().mean();  // spread the angles
    const Dataset centered{xc, d.y, d.feature_names, d.head_name};
    const Vector q = random_tail(rng, 2);
    constexpr Index kFloor = 5;
    std::vector<Index> previous_sel;
    bool have_previous = false;
    for (const double g : gammas) {
      const auto s = select_cosine(centered, q, g, kFloor);
      if (s.fallback && static_cast<Index>(s.indices.size()) != kFloor) ++gamma_violations;
      if (have_previous) {
        if (s.indices.size() > previous_sel.size()) ++gamma_violations;
        if (!std::includes(previous_sel.begin(), previous_sel.end(), s.indices.begin(), s.indices.end()))
          ++gamma_violations;
      }
      previous_sel = s.indices;
      have_previous = true;
    }
  }
  const int total = containment + alpha_violations + gamma_violations;
  return make(6, "containment and monotonicity (100 trials)", total == 0,
              fmt::format("containment {}, alpha monotonicity {}, gamma monotonicity {} violations",
                          containment, alpha_violations, gamma_violations));
}

CriterionResult degenerate_collapse() {
  double worst = 0.0;
  int not_whole = 0;
  for (int t = 0; t < 10; ++t) {
    Rng rng(derive_seed(kSeed, "c7", t));
    const Index n = 40;
    Matrix x(n, 2);
    Vector y(n);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = 0.5 + rng.uniform() * 3.0;
      x(i, 1) = 0.5 + rng.uniform() * 3.0;
      y(i) = 1.0 + 0.7 * x(i, 0) - 0.4 * x(i, 1) + rng.normal();
    }
    const Dataset d = make_dataset(x, y);
    const Vector x0 = Vector::Constant(2, 2.0) + 0.5 * random_tail(rng, 2);
    for (const auto method : {ConformalMethod::split, ConformalMethod::jackknife, ConformalMethod::full}) {
      ExperimentConfig cfg;
      cfg.similarity = Similarity::cosine;
      cfg.gamma = 1e-9;
      cfg.noise_scale = 1e-12;
      cfg.method = method;
      cfg.regressor = RegressorKind::ols;
      cfg.seed = derive_seed(kSeed, "c7-run", t);
      const auto res = individualized_intervals(d, Query{x0, std::nullopt}, cfg);
      if (static_cast<Index>(res.selection->indices.size()) != n) ++not_whole;
      for (const auto* other : {&*res.relevant, &*res.relevant_simulated}) {
        worst = std::max({worst, std::abs(other->point - res.standard->point),
                          std::abs(other->lo - res.standard->lo),
                          std::abs(other->up - res.standard->up)});
      }
    }
  }
  return make(7, "degenerate collapse (gamma -> 0, noise 1e-12)", worst <= 1e-6 && not_whole == 0,
              fmt::format("max disagreement {:.3e} (tolerance 1e-6), {} partial selections", worst,
                          not_whole));
}

CriterionResult structural_golden() {
  const auto base = std::filesystem::temp_directory_path() /
                    fmt::format("icp-golden-{:x}", derive_seed(kSeed, "c8",
                        static_cast<std::uint64_t>(Clock::now().time_since_epoch().count())));
  RunManifest m;
  m.suite = "small";
  m.config.seed = 7;
  const auto jobs = suite_jobs(m);
  std::vector<std::string> problems;
  std::vector<std::filesystem::path> dirs{base / "a", base / "b"};
  for (std::size_t k = 0; k < dirs.size(); ++k) {
    m.threads = static_cast<int>(k + 1);
    const auto records = run_grid(m, jobs);
    const std::vector<std::string> comments{provenance_line(m.config.seed, m.config_hash())};
    write_intervals_csv(records, dirs[k] / "intervals.csv", comments);
    write_reports(records, dirs[k], comments);
  }

  // Byte stability across runs (and thread counts).
  std::set<std::string> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dirs[0]))
    if (entry.is_regular_file()) files.insert(std::filesystem::relative(entry.path(), dirs[0]).string());
  for (const auto& f : files)
    if (read_file(dirs[0] / f) != read_file(dirs[1] / f)) problems.push_back("differs: " + f);

  // Raw table: 19 labeled rows, 3 methods x 3 queries.
  for (const auto sim : {"percentile", "cosine"}) {
    const auto lines = data_lines(dirs[0] / fmt::format("raw_{}.csv", sim));
    const std::string header =
        "variable,full_q1,full_q2,full_q3,split_q1,split_q2,split_q3,jackknife_q1,jackknife_q2,jackknife_q3";
    if (lines.empty() || lines[0] != header) problems.push_back(fmt::format("raw_{} header", sim));
    std::vector<std::string> labels;
    for (std::size_t i = 1; i < lines.size(); ++i) labels.push_back(first_field(lines[i]));
    if (labels != raw_table_labels()) problems.push_back(fmt::format("raw_{} labels", sim));

    const auto summary = data_lines(dirs[0] / fmt::format("summary_{}.csv", sim));
    if (summary.empty() || summary[0] != "metric,General,Conformal,Split,Jackknife")
      problems.push_back(fmt::format("summary_{} header", sim));
    std::vector<std::string> rows;
    for (std::size_t i = 1; i < summary.size(); ++i) rows.push_back(first_field(summary[i]));
    std::vector<std::string> expected;
    for (const std::string family : {"diffpred", "%pred", "int", "ab"})
      for (const std::string reg : {"", "l", "k"})
        for (const std::string path : {"", "r", "rs"}) expected.push_back(family + reg + path);
    if (rows != expected) problems.push_back(fmt::format("summary_{} labels", sim));
  }
  std::filesystem::remove_all(base);
  return make(8, "structural golden files (small suite, byte-stable)", problems.empty(),
              problems.empty() ? fmt::format("{} files identical across runs, labels match", files.size())
                               : fmt::format("{} problems, first: {}", problems.size(), problems.front()));
}

CriterionResult cost_ordering() {
  const Dataset d = sample_small_setting(SmallSetting::A, 250, derive_seed(kSeed, "c9"));
  const Vector x0 = sample_small_exchangeable_query(SmallSetting::A, derive_seed(kSeed, "c9-q")).x0;
  const RegressorSpec reg{RegressorKind::ols, {}, {}};
  auto time_method = [&](ConformalMethod method) {
    ConformalSpec spec;
    spec.method = method;
    std::vector<double> samples;
    for (int rep = 0; rep < 7; ++rep) {
      const auto start = Clock::now();
      conformal_interval(GroupedSample::singletons(d), reg, x0, Matrix(0, 2), spec, 11);
      samples.push_back(seconds_since(start));
    }
    std::nth_element(samples.begin(), samples.begin() + 3, samples.end());
    return samples[3];
  };
  const double split = time_method(ConformalMethod::split);
  const double jack = time_method(ConformalMethod::jackknife);
  const double full = time_method(ConformalMethod::full);
  return make(9, "cost ordering split < jackknife < full (n=250, OLS)",
              split < jack && jack < full && full >= 2.0 * split,
              fmt::format("median seconds: split {:.2e}, jackknife {:.2e}, full {:.2e}; refits: split 1, "
                          "jackknife {}, full {}",
                          split, jack, full, d.rows() + 1, ConformalSpec{}.grid_points + 1));
}

CriterionResult metric_arithmetic() {
  PredictionInterval iv;
  iv.point = 2.59;
  iv.lo = 1.36;
  iv.up = 3.8;
  const MetricRow row = score(iv, 2.05);
  const bool ok = std::abs(row.a_dist - 0.54) <= 1e-10 && std::abs(row.c_len - 2.44) <= 1e-10 &&
                  row.d_norm && std::abs(*row.d_norm - 0.54 / 2.44) <= 1e-10 &&
                  std::abs(*row.d_norm - 0.2213) < 5e-5 && row.covered;
  return make(10, "metric arithmetic (conformal column, variable 2)", ok,
              fmt::format("A={:.10f} C={:.10f} D={:.10f} covered={}", row.a_dist, row.c_len,
                          row.d_norm.value_or(-1.0), row.covered));
}

std::vector<Criterion> criteria() {
  return {
      {1, "coverage", coverage_exchangeable},
      {2, "full-oracle", full_conformal_oracle},
      {3, "jackknife-oracle", jackknife_oracle},
      {4, "lasso", lasso_correctness},
      {5, "adaptivity", adaptivity_heteroskedastic},
      {6, "monotonicity", containment_monotonicity},
      {7, "collapse", degenerate_collapse},
      {8, "golden", structural_golden},
      {9, "cost", cost_ordering},
      {10, "metrics", metric_arithmetic},
  };
}

int run_and_report(const std::vector<int>& ids) {
  int failures = 0;
  for (const auto& c : criteria()) {
    if (!ids.empty() && std::find(ids.begin(), ids.end(), c.id) == ids.end()) continue;
    const auto start = Clock::now();
    CriterionResult r;
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = make(c.id, c.name, false, fmt::format("exception: {}", e.what()));
    }
    r.seconds = seconds_since(start);
    if (!r.passed) ++failures;
    fmt::print("[{}] criterion {:>2}: {} -- {} ({:.2f}s)\n", r.passed ? "PASS" : "FAIL", r.id,
               r.name, r.detail, r.seconds);
    std::fflush(stdout);
  }
  return failures;
}

}  // namespace icp::acceptance
