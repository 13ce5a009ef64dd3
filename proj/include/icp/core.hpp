#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace icp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Malformed or inconsistent input data (CLI exit code 2).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or parameters (CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Labeled observations: tails in the rows of `x`, heads in `y`.
struct Dataset {
  Matrix x;
  Vector y;
  std::vector<std::string> feature_names;
  std::string head_name = "y";

  Index rows() const { return x.rows(); }
  Index cols() const { return x.cols(); }

  // Rows in the given order.
  Dataset subset(std::span<const Index> rows) const;
};

// Builds a Dataset with default feature names x1..xp and validates it.
Dataset make_dataset(Matrix x, Vector y);

// Throws DataError unless n >= 1, p >= 1, shapes agree, names match p and
// every entry is finite.
void validate(const Dataset& d);

// An unlabeled tail. `y0` is held out for evaluation and never read while
// constructing intervals.
struct Query {
  Vector x0;
  std::optional<double> y0;
};

enum class Path { standard, relevant, relevant_simulated };
enum class ConformalMethod { full, split, jackknife };
enum class RegressorKind { ols, lasso, kernel };
enum class Similarity { percentile, cosine };
enum class ControlMode { perturb, gaussian_mimic };

std::string_view to_string(Path p);
std::string_view to_string(ConformalMethod m);
std::string_view to_string(RegressorKind r);
std::string_view to_string(Similarity s);
std::string_view to_string(ControlMode m);

// Parsers accept exactly the names produced by to_string; throw ConfigError.
Path parse_path(std::string_view s);
ConformalMethod parse_method(std::string_view s);
RegressorKind parse_regressor(std::string_view s);
Similarity parse_similarity(std::string_view s);
ControlMode parse_control_mode(std::string_view s);

struct PredictionInterval {
  double point = 0.0;
  double lo = 0.0;
  double up = 0.0;
  Path path = Path::standard;
  ConformalMethod method = ConformalMethod::split;
  RegressorKind regressor = RegressorKind::ols;
  // Full conformal accepted no grid point; the interval collapsed to point.
  bool degenerate = false;

  double length() const { return up - lo; }
};

// One initialization of the pipeline: regressor, similarity, conformal
// method and their parameters.
struct ExperimentConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double rho = 0.5;
  RegressorKind regressor = RegressorKind::ols;
  Similarity similarity = Similarity::percentile;
  ConformalMethod method = ConformalMethod::split;
  ControlMode control_mode = ControlMode::perturb;
  double noise_scale = 0.1;
  int min_relevant = 30;
  int grid_points = 100;
  double grid_expansion = 0.25;
  int lasso_folds = 5;
  std::uint64_t seed = 20240101;

  // Throws ConfigError naming the offending parameter.
  void validate() const;
};

// Per-column affine map to zero mean and unit sample standard deviation.
struct Standardization {
  Vector centers;
  Vector scales;

  Vector apply(const Vector& tail) const;
  Matrix apply(const Matrix& tails) const;
  Matrix invert(const Matrix& standardized) const;
};

struct StandardizedData {
  Dataset data;
  Standardization transform;
};

// Standardizes the feature columns of `d` (sample std, n - 1 denominator).
// Zero-variance columns keep scale 1 and are only centered. Requires n >= 2.
StandardizedData standardize(const Dataset& d);

// Column means and n - 1 standard deviations, with zero deviations mapped
// to 1. Requires at least two rows.
Standardization fit_standardization(const Matrix& x);

// CSV ingestion. Lines starting with '#' before the header are skipped.
Dataset load_csv(const std::filesystem::path& path, std::string_view head_column);

// Parsed CSV body with every column kept, for files that are not Datasets.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;
};
CsvTable read_csv_table(const std::filesystem::path& path);

// Writes `d` with the head column first and 17 significant digits, so
// load_csv(save_csv(d)) reproduces d exactly. Each comment line is emitted
// with a leading "# ".
void save_csv(const Dataset& d, const std::filesystem::path& path,
              std::span<const std::string> comments = {});

// "%.17g"-style decimal; parses back to the identical double.
std::string format_real(double v);

}  // namespace icp
