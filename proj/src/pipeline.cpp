#include "icp/pipeline.hpp"

#include "icp/dgp.hpp"
#include "icp/rng.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace icp {
namespace {

PredictionInterval tagged(PredictionInterval iv, Path path) {
  iv.path = path;
  return iv;
}

Query load_query_row(const CsvTable& table, std::size_t r, const Dataset& train,
                     const std::filesystem::path& path) {
  Query q;
  q.x0.resize(train.cols());
  for (Index j = 0; j < train.cols(); ++j) {
    const auto& name = train.feature_names[static_cast<std::size_t>(j)];
    const auto col = std::find(table.header.begin(), table.header.end(), name);
    if (col == table.header.end())
      throw DataError(fmt::format("'{}': missing feature column '{}'", path.string(), name));
    const auto& cell = table.rows[r][static_cast<std::size_t>(col - table.header.begin())];
    try {
      std::size_t used = 0;
      q.x0(j) = std::stod(cell, &used);
      if (used != cell.size() || !std::isfinite(q.x0(j))) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw DataError(fmt::format("'{}': invalid value '{}' at row {}, column '{}'", path.string(),
                                  cell, r + 1, name));
    }
  }
  const auto head = std::find(table.header.begin(), table.header.end(), train.head_name);
  if (head != table.header.end()) {
    const auto& cell = table.rows[r][static_cast<std::size_t>(head - table.header.begin())];
    if (!cell.empty()) {
      try {
        q.y0 = std::stod(cell);
      } catch (const std::exception&) {
        throw DataError(fmt::format("'{}': invalid head '{}' at row {}", path.string(), cell, r + 1));
      }
    }
  }
  return q;
}

}  // namespace

RegressorSpec regressor_spec(const ExperimentConfig& cfg) {
  RegressorSpec reg;
  reg.kind = cfg.regressor;
  reg.lasso.folds = cfg.lasso_folds;
  reg.lasso.seed = derive_seed(cfg.seed, "cv-folds");
  return reg;
}

ConformalSpec conformal_spec(const ExperimentConfig& cfg) {
  ConformalSpec spec;
  spec.method = cfg.method;
  spec.alpha = cfg.alpha;
  spec.rho = cfg.rho;
  spec.grid_points = cfg.grid_points;
  spec.grid_expansion = cfg.grid_expansion;
  return spec;
}

Index effective_min_relevant(const ExperimentConfig& cfg, Index rows) {
  const Index floor = std::max<Index>(cfg.min_relevant, minimum_sample_size(cfg.method, cfg.rho));
  return std::min(floor, rows);
}

RelevanceSelection select_relevant(const Dataset& d, const Vector& x0,
                                   const ExperimentConfig& cfg) {
  const Index floor = effective_min_relevant(cfg, d.rows());
  if (cfg.similarity == Similarity::percentile) return select_percentile(d, x0, cfg.alpha, floor);
  return select_cosine(d, x0, cfg.gamma, floor);
}

PathIntervals individualized_intervals(const Dataset& d, const Query& q, const ExperimentConfig& cfg,
                                PathMask mask) {
  cfg.validate();
  if (q.x0.size() != d.cols())
    throw DataError(fmt::format("query has {} features, data has {}", q.x0.size(), d.cols()));
  const Index needed = minimum_sample_size(cfg.method, cfg.rho);
  if (d.rows() < needed)
    throw DataError(fmt::format("{} conformal needs at least {} rows, dataset has {}",
                                to_string(cfg.method), needed, d.rows()));

  const RegressorSpec reg = regressor_spec(cfg);
  const ConformalSpec spec = conformal_spec(cfg);
  const std::uint64_t split_seed = derive_seed(cfg.seed, "split-partition");
  const Matrix no_companions(0, d.cols());

  PathIntervals out;
  if (mask.standard)
    out.standard = tagged(conformal_interval(GroupedSample::singletons(d), reg, q.x0,
                                             no_companions, spec, split_seed),
                          Path::standard);
  if (!mask.relevant && !mask.simulated) return out;

  // Paths 2 and 3 share one selection.
  out.selection = select_relevant(d, q.x0, cfg);
  if (mask.relevant)
    out.relevant = tagged(conformal_interval(GroupedSample::singletons(d.subset(out.selection->indices)),
                                             reg, q.x0, no_companions, spec, split_seed),
                          Path::relevant);
  if (mask.simulated) {
    const std::uint64_t control_seed = derive_seed(cfg.seed, "controls");
    out.controls = simulate_controls(d, *out.selection, cfg.noise_scale, cfg.control_mode, control_seed);
    out.relevant_simulated =
        tagged(conformal_interval(out.controls->grouped(), reg, q.x0,
                                  query_companions(*out.controls, q.x0, control_seed), spec,
                                  split_seed),
               Path::relevant_simulated);
  }
  return out;
}

std::vector<QueryJob> suite_jobs(const RunManifest& m) {
  std::vector<QueryJob> jobs;
  if (m.suite == "csv") {
    const Dataset train = load_csv(m.train_csv, m.head);
    const CsvTable table = read_csv_table(m.queries_csv);
    for (std::size_t r = 0; r < table.rows.size(); ++r)
      jobs.push_back({fmt::format("q{}", r + 1), train, load_query_row(table, r, train, m.queries_csv)});
    if (jobs.empty()) throw DataError(fmt::format("'{}' has no queries", m.queries_csv.string()));
    return jobs;
  }
  const SuiteOutput suite = generate_suite(m.suite, m.config.seed);
  for (std::size_t i = 0; i < suite.queries.size(); ++i)
    jobs.push_back({fmt::format("q{}", i + 1), suite.training_for(i), suite.queries[i]});
  return jobs;
}

std::vector<IntervalRecord> run_grid(const RunManifest& m, const std::vector<QueryJob>& jobs) {
  m.validate();
  struct Task {
    std::size_t job;
    ConformalMethod method;
    RegressorKind regressor;
  };
  std::vector<Task> tasks;
  for (std::size_t j = 0; j < jobs.size(); ++j)
    for (const auto method : m.methods)
      for (const auto reg : m.regressors) tasks.push_back({j, method, reg});

  // results[task][similarity] holds that cell's three paths.
  std::vector<std::vector<std::vector<IntervalRecord>>> results(tasks.size());

  auto run_task = [&](std::size_t t) {
    const Task& task = tasks[t];
    const QueryJob& job = jobs[task.job];
    ExperimentConfig cfg = m.config;
    cfg.seed = derive_seed(m.config.seed, "query", task.job);
    cfg.method = task.method;
    cfg.regressor = task.regressor;

    const auto standard = individualized_intervals(job.training, job.query, cfg, {true, false, false});
    auto& slot = results[t];
    for (const auto sim : m.similarities) {
      cfg.similarity = sim;
      const auto res = individualized_intervals(job.training, job.query, cfg, {false, true, true});
      const auto n_rel = static_cast<Index>(res.selection->indices.size());
      auto record = [&](const PredictionInterval& iv, Index rows, bool fallback) {
        return IntervalRecord{Cell{sim, task.method, task.regressor, iv.path, job.id},
                              job.query.y0, iv, rows, fallback};
      };
      slot.push_back({record(*standard.standard, job.training.rows(), false),
                      record(*res.relevant, n_rel, res.selection->fallback),
                      record(*res.relevant_simulated, n_rel, res.selection->fallback)});
    }
  };

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        run_task(t);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto n_threads = static_cast<std::size_t>(std::max(1, m.threads));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < std::min(n_threads, tasks.size()); ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  // Reassemble in a fixed order after the join, independent of scheduling.
  std::vector<IntervalRecord> out;
  for (std::size_t s = 0; s < m.similarities.size(); ++s)
    for (std::size_t t = 0; t < tasks.size(); ++t)
      for (const auto& r : results[t][s]) out.push_back(r);
  return out;
}

std::vector<MetricRow> score_records(const std::vector<IntervalRecord>& records) {
  std::vector<MetricRow> rows;
  for (const auto& r : records)
    if (r.y0) rows.push_back(score(r.interval, *r.y0, r.cell));
  return rows;
}

}  // namespace icp
