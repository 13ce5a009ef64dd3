#pragma once

#include "icp/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace icp {

// A generated suite: training rows, held-out queries with their true heads,
// and the setting that produced each row and query.
struct SuiteOutput {
  std::string name;  // "small" or "long"
  Dataset dataset;
  std::vector<Query> queries;
  std::vector<std::string> setting_labels;  // per training row
  std::vector<std::string> query_labels;    // per query
  // Queries are answered against the whole dataset (small suite) rather
  // than only the rows of their own setting (long suite).
  bool pooled = true;
  std::uint64_t seed = 0;
  // True coefficient vector per setting (long suite only).
  std::vector<Vector> coefficients;

  // Training rows a query is answered against.
  Dataset training_for(std::size_t query) const;
};

enum class SmallSetting { A, B, C };

// Training draws of one small-suite setting (n rows, p = 2), in a fixed
// draw order.
Dataset sample_small_setting(SmallSetting s, Index n, std::uint64_t seed);

// A query drawn from the training law of a setting (not the suite's query
// law), for exchangeability checks.
Query sample_small_exchangeable_query(SmallSetting s, std::uint64_t seed);

// E[y | x] under the training law of a setting.
double small_setting_mean(SmallSetting s, const Vector& x);

// Three settings of 250 rows each, concatenated (n = 750, p = 2), plus one
// query per setting.
SuiteOutput gen_small(std::uint64_t seed);

// Three DGPs of 100 rows with p = 12 and two active coefficients, five
// queries each.
SuiteOutput gen_long(std::uint64_t seed);

SuiteOutput generate_suite(const std::string& name, std::uint64_t seed);

}  // namespace icp
