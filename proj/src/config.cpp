#include "icp/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>

namespace icp {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty())
    throw ConfigError(fmt::format("invalid value '{}' for key '{}'", value, key));
  return out;
}

template <typename E, typename Parse>
std::vector<E> parse_list(std::string_view key, std::string_view value, Parse parse,
                          std::vector<E> all) {
  if (value == "all") return all;
  std::vector<E> out;
  std::size_t start = 0;
  while (start <= value.size()) {
    const auto comma = value.find(',', start);
    const auto item = trim(value.substr(start, comma - start));
    try {
      const E parsed = parse(item);
      if (std::find(out.begin(), out.end(), parsed) == out.end()) out.push_back(parsed);
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("key '{}': {}", key, e.what()));
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  // Sweep order is fixed so that outputs do not depend on how the list was written.
  std::vector<E> ordered;
  for (const E e : all)
    if (std::find(out.begin(), out.end(), e) != out.end()) ordered.push_back(e);
  return ordered;
}

template <typename E>
std::string join(const std::vector<E>& v) {
  std::string out;
  for (const E e : v) {
    if (!out.empty()) out += ',';
    out += to_string(e);
  }
  return out;
}

using Setter = std::function<void(RunManifest&, std::string_view, std::string_view)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table{
      {"alpha", [](RunManifest& m, auto k, auto v) { m.config.alpha = parse_number<double>(k, v); }},
      {"gamma", [](RunManifest& m, auto k, auto v) { m.config.gamma = parse_number<double>(k, v); }},
      {"rho", [](RunManifest& m, auto k, auto v) { m.config.rho = parse_number<double>(k, v); }},
      {"noise_scale",
       [](RunManifest& m, auto k, auto v) { m.config.noise_scale = parse_number<double>(k, v); }},
      {"min_relevant",
       [](RunManifest& m, auto k, auto v) { m.config.min_relevant = parse_number<int>(k, v); }},
      {"grid_points",
       [](RunManifest& m, auto k, auto v) { m.config.grid_points = parse_number<int>(k, v); }},
      {"grid_expansion",
       [](RunManifest& m, auto k, auto v) { m.config.grid_expansion = parse_number<double>(k, v); }},
      {"lasso_folds",
       [](RunManifest& m, auto k, auto v) { m.config.lasso_folds = parse_number<int>(k, v); }},
      {"seed",
       [](RunManifest& m, auto k, auto v) { m.config.seed = parse_number<std::uint64_t>(k, v); }},
      {"control_mode",
       [](RunManifest& m, auto k, auto v) {
         try {
           m.config.control_mode = parse_control_mode(v);
         } catch (const ConfigError& e) {
           throw ConfigError(fmt::format("key '{}': {}", k, e.what()));
         }
       }},
      {"regressor",
       [](RunManifest& m, auto k, auto v) {
         m.regressors = parse_list<RegressorKind>(
             k, v, parse_regressor,
             {RegressorKind::ols, RegressorKind::lasso, RegressorKind::kernel});
       }},
      {"method",
       [](RunManifest& m, auto k, auto v) {
         m.methods = parse_list<ConformalMethod>(
             k, v, parse_method,
             {ConformalMethod::full, ConformalMethod::split, ConformalMethod::jackknife});
       }},
      {"similarity",
       [](RunManifest& m, auto k, auto v) {
         m.similarities = parse_list<Similarity>(k, v, parse_similarity,
                                                 {Similarity::percentile, Similarity::cosine});
       }},
      {"suite", [](RunManifest& m, auto, auto v) { m.suite = std::string(v); }},
      {"train", [](RunManifest& m, auto, auto v) { m.train_csv = std::string(v); }},
      {"queries", [](RunManifest& m, auto, auto v) { m.queries_csv = std::string(v); }},
      {"head", [](RunManifest& m, auto, auto v) { m.head = std::string(v); }},
      {"out", [](RunManifest& m, auto, auto v) { m.output_dir = std::string(v); }},
      {"threads", [](RunManifest& m, auto k, auto v) { m.threads = parse_number<int>(k, v); }},
  };
  return table;
}

}  // namespace

void apply_setting(RunManifest& m, std::string_view key, std::string_view value) {
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError(fmt::format("unknown configuration key '{}'", key));
  it->second(m, key, trim(value));
}

void load_manifest_file(RunManifest& m, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config file '{}'", path.string()));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(fmt::format("'{}' line {}: expected key=value", path.string(), line_no));
    apply_setting(m, trim(view.substr(0, eq)), view.substr(eq + 1));
  }
}

std::vector<std::string> manifest_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : setters()) keys.push_back(k);
  return keys;
}

std::string RunManifest::canonical() const {
  std::map<std::string, std::string> kv{
      {"alpha", format_real(config.alpha)},
      {"gamma", format_real(config.gamma)},
      {"rho", format_real(config.rho)},
      {"noise_scale", format_real(config.noise_scale)},
      {"min_relevant", std::to_string(config.min_relevant)},
      {"grid_points", std::to_string(config.grid_points)},
      {"grid_expansion", format_real(config.grid_expansion)},
      {"lasso_folds", std::to_string(config.lasso_folds)},
      {"seed", std::to_string(config.seed)},
      {"control_mode", std::string(to_string(config.control_mode))},
      {"regressor", join(regressors)},
      {"method", join(methods)},
      {"similarity", join(similarities)},
      {"suite", suite},
      {"head", head},
  };
  if (suite == "csv") {
    kv["train"] = train_csv.filename().string();
    kv["queries"] = queries_csv.filename().string();
  }
  std::string out;
  for (const auto& [k, v] : kv) out += fmt::format("{}={}\n", k, v);
  return out;
}

std::string RunManifest::config_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const char c : canonical()) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", h);
}

void RunManifest::validate() const {
  config.validate();
  if (regressors.empty()) throw ConfigError("key 'regressor': empty list");
  if (methods.empty()) throw ConfigError("key 'method': empty list");
  if (similarities.empty()) throw ConfigError("key 'similarity': empty list");
  if (suite != "small" && suite != "long" && suite != "csv")
    throw ConfigError(fmt::format("key 'suite': unknown suite '{}'", suite));
  if (suite == "csv" && (train_csv.empty() || queries_csv.empty()))
    throw ConfigError("key 'suite': csv suite needs 'train' and 'queries' files");
  if (threads < 1) throw ConfigError("key 'threads': must be at least 1");
}

}  // namespace icp
