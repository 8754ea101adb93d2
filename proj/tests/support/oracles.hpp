#pragma once

// Test-only reference implementations. They deliberately avoid the library's
// index and detector code paths so they can check them.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ioda/state_index.hpp"

namespace ioda::testing {

/// Linear scan in list order keeping the first minimizer.
NearestResult linear_scan_nearest(std::span<const State> points, const State& q, const StateMetric& metric);

/// Plain-loop L1 distance over the 4 coordinates (unweighted).
double l1(const State& a, const State& b);

/// Leave-one-out nearest distances by O(n^2) scan.
std::vector<double> brute_loo(std::span<const State> points, const StateMetric& metric);

/// Sorts a copy and indexes the ceil(q * n)-th smallest element.
double sorted_quantile(std::vector<double> values, double q);

/// Fresh empty directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

std::string read_file(const std::filesystem::path& p);

}  // namespace ioda::testing
