#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "replan/replanner.hpp"

namespace replan {

/// Times full replanning attempts (candidate selection plus on-the-fly
/// uncertainty, nothing read from cache) on synthetic maps of the given
/// sizes. One generated map per size; each repetition re-runs the complete
/// attempt. Single-threaded.
struct LatencyConfig {
  std::vector<int> sizes{1000, 4000, 16000};
  std::vector<Measure> measures{Measure::entropy, Measure::std_error, Measure::pairwise_kl};
  int repetitions = 7;
  SelectionCriterion criterion{SelectionKind::top_k_confidence, 8};
  std::uint64_t seed = 0;
};

struct LatencyRow {
  std::string measure;
  int n = 0;  // candidate count (or view count for the view-scaling probe)
  double median_us = 0.0;
  double p90_us = 0.0;
};

struct LatencyReport {
  std::vector<LatencyRow> rows;
  /// Least-squares slope of log(median) vs log(n) per measure.
  std::map<std::string, double> slopes;
};

LatencyReport measure_latency(const LatencyConfig& config);

/// Per-candidate pairwise-KL cost at `views` and `2 * views` views. The pair
/// loop is quadratic in the view count, so the expected ratio is about 4.
struct ViewScalingReport {
  int views = 0;
  double base_us = 0.0;
  double doubled_us = 0.0;
  double ratio = 0.0;
};

ViewScalingReport measure_pwkl_view_scaling(int views, int repetitions, std::uint64_t seed);

/// CSV with header measure,n,median_us,p90_us.
std::string latency_to_csv(const LatencyReport& report);

}  // namespace replan
