#include "replan/latency.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "replan/detail/format.hpp"
#include "replan/error.hpp"
#include "replan/rng.hpp"
#include "replan/synthetic.hpp"

namespace replan {

namespace {

using clock = std::chrono::steady_clock;

constexpr int kHarnessClasses = 40;
constexpr int kHarnessFeatureDim = 64;

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double p90_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t idx = static_cast<std::size_t>(std::ceil(0.9 * static_cast<double>(v.size())));
  if (idx > 0) --idx;
  return v[std::min(idx, v.size() - 1)];
}

// Near-diagonal confusion with full support so measure costs are realistic.
std::vector<std::vector<double>> soft_identity(int m, double peak) {
  std::vector<std::vector<double>> conf(m, std::vector<double>(m, (1.0 - peak) / (m - 1)));
  for (int i = 0; i < m; ++i) conf[i][i] = peak;
  return conf;
}

SemanticMap harness_map(int n, std::uint64_t seed) {
  const int grid_dim = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  SceneSpec scene;
  scene.n_candidates = n;
  scene.views_min = 3;
  scene.views_max = 5;
  scene.single_view_rate = 0.1;
  scene.kind = MapKind::grid;
  scene.room_size_m = 0.2 * static_cast<double>(grid_dim);
  scene.seed = seed;

  GroundingModelSpec model;
  model.confusion = soft_identity(kHarnessClasses, 0.8);
  model.view_noise = 0.05;
  model.feature_noise_sigma = 0.05;
  model.feature_dim = kHarnessFeatureDim;
  return generate_map(scene, model);
}

Strategy measure_strategy(Measure m) {
  switch (m) {
    case Measure::entropy: return Strategy::entropy;
    case Measure::std_error: return Strategy::std_error;
    case Measure::pairwise_kl: return Strategy::pairwise_kl;
  }
  throw DomainError("unknown measure");
}

// One replanning attempt, everything recomputed on the fly. Returns the
// chosen id so the work cannot be optimized away.
int timed_attempt(const SemanticMap& map, int cls, Measure measure,
                  const SelectionCriterion& criterion, const RetrievalTrace& trace) {
  ReplanConfig config;
  config.criterion = criterion;
  config.strategy.kind = measure_strategy(measure);
  config.attempts = 2;
  auto choice = replan(map, cls, config, trace);
  return choice ? choice->candidate_id : -1;
}

}  // namespace

LatencyReport measure_latency(const LatencyConfig& config) {
  if (config.repetitions < 1) throw ConfigError("repetitions must be positive");
  if (config.sizes.empty()) throw ConfigError("no sizes given");
  LatencyReport report;

  for (Measure measure : config.measures) {
    std::vector<std::pair<double, double>> loglog;
    for (int n : config.sizes) {
      SemanticMap map = harness_map(n, config.seed);
      std::vector<double> samples;
      int sink = 0;
      for (int rep = -1; rep < config.repetitions; ++rep) {
        int cls = (rep + 1) % kHarnessClasses;
        RetrievalTrace trace;
        trace.query_class = cls;
        trace.visited.push_back(first_attempt(map, cls));
        auto t0 = clock::now();
        sink ^= timed_attempt(map, cls, measure, config.criterion, trace);
        auto t1 = clock::now();
        if (rep < 0) continue;  // warm-up
        samples.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count());
      }
      if (sink == -12345) throw Error("unreachable");
      LatencyRow row{to_string(measure), n, median_of(samples), p90_of(samples)};
      report.rows.push_back(row);
      loglog.push_back({std::log(static_cast<double>(n)), std::log(row.median_us)});
    }
    if (loglog.size() >= 2) {
      double mx = 0.0, my = 0.0;
      for (auto [x, y] : loglog) {
        mx += x;
        my += y;
      }
      mx /= static_cast<double>(loglog.size());
      my /= static_cast<double>(loglog.size());
      double num = 0.0, den = 0.0;
      for (auto [x, y] : loglog) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
      }
      report.slopes[to_string(measure)] = num / den;
    }
  }
  return report;
}

ViewScalingReport measure_pwkl_view_scaling(int views, int repetitions, std::uint64_t seed) {
  if (views < 2) throw ConfigError("need at least 2 views");
  if (repetitions < 1) throw ConfigError("repetitions must be positive");
  const int m = 64;

  auto build = [&](int count, std::uint64_t tag) {
    Candidate c;
    c.id = 0;
    Rng rng = Rng::derive(seed, {tag});
    for (int v = 0; v < count; ++v) {
      ViewObservation view;
      view.feature = {0.0};
      view.dist.probs.resize(m);
      double sum = 0.0;
      for (double& p : view.dist.probs) {
        p = rng.next_double() + 1e-3;
        sum += p;
      }
      for (double& p : view.dist.probs) p /= sum;
      c.views.push_back(std::move(view));
    }
    return c;
  };

  Candidate base = build(views, 1);
  Candidate doubled = build(2 * views, 2);

  auto time_candidate = [&](const Candidate& c) {
    std::vector<double> samples;
    double sink = 0.0;
    constexpr int kBatch = 4;
    for (int rep = -1; rep < repetitions; ++rep) {
      auto t0 = clock::now();
      for (int b = 0; b < kBatch; ++b) sink += mean_pairwise_kl(c).value;
      auto t1 = clock::now();
      if (rep < 0) continue;
      samples.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count() / kBatch);
    }
    if (sink < 0.0) throw Error("unreachable");
    return median_of(samples);
  };

  ViewScalingReport report;
  report.views = views;
  report.base_us = time_candidate(base);
  report.doubled_us = time_candidate(doubled);
  report.ratio = report.doubled_us / report.base_us;
  return report;
}

std::string latency_to_csv(const LatencyReport& report) {
  std::string csv = "measure,n,median_us,p90_us\n";
  for (const auto& row : report.rows) {
    csv += row.measure;
    csv += ',';
    csv += std::to_string(row.n);
    csv += ',';
    csv += detail::format_double(row.median_us);
    csv += ',';
    csv += detail::format_double(row.p90_us);
    csv += '\n';
  }
  return csv;
}

}  // namespace replan
