#pragma once

#include "icp/config.hpp"
#include "icp/conformal.hpp"
#include "icp/core.hpp"
#include "icp/evaluate.hpp"
#include "icp/individualize.hpp"

#include <optional>
#include <string>
#include <vector>

namespace icp {

// Which of the three paths to compute.
struct PathMask {
  bool standard = true;
  bool relevant = true;
  bool simulated = true;
};

struct PathIntervals {
  std::optional<PredictionInterval> standard;            // C
  std::optional<PredictionInterval> relevant;            // C_rel
  std::optional<PredictionInterval> relevant_simulated;  // C_sim
  std::optional<RelevanceSelection> selection;
  std::optional<ControlSet> controls;
};

// Regressor settings derived from a config; the lasso fold assignment is
// seeded from cfg.seed.
RegressorSpec regressor_spec(const ExperimentConfig& cfg);
ConformalSpec conformal_spec(const ExperimentConfig& cfg);

// Relevance floor actually applied: at least min_relevant and at least the
// conformal method's minimum sample size, capped at the dataset size.
Index effective_min_relevant(const ExperimentConfig& cfg, Index rows);

RelevanceSelection select_relevant(const Dataset& d, const Vector& x0,
                                   const ExperimentConfig& cfg);

// Standard, relevant and relevant-plus-controls intervals for one query.
// Each path draws from its own seeded streams, so masking paths out never
// changes the others. q.y0 is ignored.
PathIntervals individualized_intervals(const Dataset& d, const Query& q, const ExperimentConfig& cfg,
                                PathMask mask = {});

// One query of a run, with the rows it is answered against.
struct QueryJob {
  std::string id;
  Dataset training;
  Query query;
};

std::vector<QueryJob> suite_jobs(const RunManifest& m);

struct IntervalRecord {
  Cell cell;
  std::optional<double> y0;
  PredictionInterval interval;
  Index sample_rows = 0;  // rows the interval was calibrated on (originals only)
  bool fallback = false;  // relevance floor engaged
};

// Sweeps queries x methods x regressors x similarities x paths and returns
// records sorted by (similarity, query, method, regressor, path).
std::vector<IntervalRecord> run_grid(const RunManifest& m, const std::vector<QueryJob>& jobs);

std::vector<MetricRow> score_records(const std::vector<IntervalRecord>& records);

}  // namespace icp
