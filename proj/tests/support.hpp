#pragma once

#include "icp/core.hpp"
#include "icp/rng.hpp"

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

namespace icp::testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("icp-test-" + tag + "-" + std::to_string(derive_seed(reinterpret_cast<std::uintptr_t>(this), tag, counter++)));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline Dataset gaussian_linear(Rng& rng, Index n, Index p, double noise = 1.0) {
  Matrix x(n, p);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < p; ++j) x(i, j) = rng.normal();
  Vector y(n);
  for (Index i = 0; i < n; ++i) y(i) = 1.0 + x.row(i).sum() + noise * rng.normal();
  return make_dataset(std::move(x), std::move(y));
}

}  // namespace icp::testing
