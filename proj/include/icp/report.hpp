#pragma once

#include "icp/evaluate.hpp"
#include "icp/pipeline.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace icp {

// "icp <version> seed=<seed> config_hash=<hash>", written as the first
// comment line of every output CSV.
std::string provenance_line(std::uint64_t seed, const std::string& config_hash);

// Long-format interval table, one line per record. read_intervals_csv is its
// inverse and returns the file's comment lines through `comments`.
void write_intervals_csv(const std::vector<IntervalRecord>& records,
                         const std::filesystem::path& path,
                         const std::vector<std::string>& comments);
std::vector<IntervalRecord> read_intervals_csv(const std::filesystem::path& path,
                                               std::vector<std::string>* comments = nullptr);

void write_metrics_csv(const std::vector<MetricRow>& rows, const std::filesystem::path& path,
                       const std::vector<std::string>& comments);

// The 19 row labels of the per-query raw table: y0, then pred/lo/up for the
// OLS and LASSO regressors on each path.
std::vector<std::string> raw_table_labels();

// Per-query raw table for one similarity: rows are raw_table_labels(),
// columns are <method>_<query>.
void write_raw_table(const std::vector<IntervalRecord>& records, Similarity similarity,
                     const std::filesystem::path& path, const std::vector<std::string>& comments);

void write_summary_csv(const SummaryTable& table, const std::filesystem::path& path,
                       const std::vector<std::string>& comments);

// One file per (similarity, query) under `dir` with the true value,
// prediction, bounds and residual of every interval.
void write_plot_data(const std::vector<IntervalRecord>& records, const std::filesystem::path& dir,
                     const std::vector<std::string>& comments);

// metrics.csv, raw_<similarity>.csv, summary_<similarity>.csv and plot/.
void write_reports(const std::vector<IntervalRecord>& records, const std::filesystem::path& dir,
                   const std::vector<std::string>& comments);

}  // namespace icp
