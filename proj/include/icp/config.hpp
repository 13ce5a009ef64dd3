#pragma once

#include "icp/core.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace icp {

// Everything a `run` needs: the shared parameters plus the lists of
// regressors, methods and similarities to sweep.
struct RunManifest {
  ExperimentConfig config;
  std::vector<RegressorKind> regressors{RegressorKind::ols, RegressorKind::lasso,
                                        RegressorKind::kernel};
  std::vector<ConformalMethod> methods{ConformalMethod::full, ConformalMethod::split,
                                       ConformalMethod::jackknife};
  std::vector<Similarity> similarities{Similarity::percentile, Similarity::cosine};
  std::string suite = "small";  // small | long | csv
  std::filesystem::path train_csv;
  std::filesystem::path queries_csv;
  std::string head = "y";
  std::filesystem::path output_dir = "out";
  int threads = 1;

  // key=value lines of every setting that affects results, sorted by key.
  std::string canonical() const;
  // FNV-1a of canonical(), as 16 hex digits.
  std::string config_hash() const;

  // Throws ConfigError naming the offending key.
  void validate() const;
};

// Sets one key. Unknown keys and malformed values throw ConfigError with the
// key name in the message.
void apply_setting(RunManifest& m, std::string_view key, std::string_view value);

// Flat key=value file; '#' starts a comment, blank lines are ignored.
void load_manifest_file(RunManifest& m, const std::filesystem::path& path);

// The recognized keys, for help output.
std::vector<std::string> manifest_keys();

}  // namespace icp
