#pragma once

#include "icp/conformal.hpp"
#include "icp/core.hpp"

#include <cstdint>
#include <filesystem>
#include <vector>

namespace icp {

// Rows of a dataset judged relevant to a query.
struct RelevanceSelection {
  std::vector<Index> indices;  // ascending row indices
  Vector scores;               // one per dataset row: distance (percentile) or cosine
  Similarity method = Similarity::percentile;
  double threshold_used = 0.0;
  // Too few rows passed the threshold; the min_relevant best rows were taken.
  bool fallback = false;
};

// Rows whose standardized Euclidean distance to x0 is at most the
// ceil(alpha * n)-th smallest distance. Ties at the threshold are kept.
RelevanceSelection select_percentile(const Dataset& d, const Vector& x0, double alpha,
                                     Index min_relevant);

// Rows whose raw-tail cosine with x0 is at least gamma. Zero-norm rows score
// -infinity; a zero-norm query is an error.
RelevanceSelection select_cosine(const Dataset& d, const Vector& x0, double gamma,
                                 Index min_relevant);

enum class ControlOrigin { relevant_original, perturbed_clone, gaussian_mimic };
std::string_view to_string(ControlOrigin o);

// The augmented relevant set: each relevant original plus one synthetic row.
struct ControlSet {
  Dataset dataset;
  std::vector<ControlOrigin> origin;
  // Dataset row each synthetic row derives from (its own row for originals).
  std::vector<Index> source;
  double noise_scale_used = 0.0;
  // Per-feature std of the relevant rows, floored at 1e-8.
  Vector feature_sigma;
  ControlMode mode = ControlMode::perturb;

  // Groups for conformal calibration: originals are anchors, synthetic rows
  // join the group of their source original.
  GroupedSample grouped() const;
};

ControlSet simulate_controls(const Dataset& d, const RelevanceSelection& rel, double noise_scale,
                             ControlMode mode, std::uint64_t seed);

// The synthetic companion a candidate row at x0 would receive: a perturbed
// copy in perturb mode, nothing in gaussian_mimic mode.
Matrix query_companions(const ControlSet& controls, const Vector& x0, std::uint64_t seed);

// Writes the control set in the Dataset CSV format with an extra `origin`
// column.
void save_controls_csv(const ControlSet& c, const std::filesystem::path& path,
                       std::span<const std::string> comments = {});

}  // namespace icp
