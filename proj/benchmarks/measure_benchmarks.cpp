// Microbenchmarks for the per-candidate measures and the selection scan.
// Run with --benchmark_filter=... to narrow.

#include <benchmark/benchmark.h>

#include <cmath>

#include "replan/replanner.hpp"
#include "replan/rng.hpp"
#include "replan/synthetic.hpp"
#include "replan/uncertainty.hpp"

namespace {

replan::Candidate make_candidate(int views, int classes, int dim, std::uint64_t seed) {
  replan::Rng rng = replan::Rng::derive(seed, {static_cast<std::uint64_t>(views)});
  replan::Candidate c;
  for (int v = 0; v < views; ++v) {
    replan::ViewObservation view;
    view.weight = 0.5 + rng.next_double();
    view.feature.resize(dim);
    for (double& x : view.feature) x = rng.normal();
    view.dist.probs.resize(classes);
    double sum = 0.0;
    for (double& p : view.dist.probs) {
      p = rng.next_double() + 1e-3;
      sum += p;
    }
    for (double& p : view.dist.probs) p /= sum;
    c.views.push_back(std::move(view));
  }
  return c;
}

replan::SemanticMap make_map(int n, std::uint64_t seed) {
  replan::SceneSpec scene;
  scene.n_candidates = n;
  scene.kind = replan::MapKind::grid;
  scene.room_size_m = 0.2 * static_cast<double>(static_cast<int>(std::sqrt(n)) + 1);
  scene.seed = seed;
  replan::GroundingModelSpec model;
  int m = 40;
  model.confusion.assign(m, std::vector<double>(m, 0.2 / (m - 1)));
  for (int i = 0; i < m; ++i) model.confusion[i][i] = 0.8;
  model.view_noise = 0.05;
  model.feature_noise_sigma = 0.05;
  model.feature_dim = 64;
  return replan::generate_map(scene, model);
}

void BM_entropy(benchmark::State& state) {
  auto c = make_candidate(static_cast<int>(state.range(0)), 64, 32, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(replan::candidate_entropy(c));
  }
}
BENCHMARK(BM_entropy)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_stderr(benchmark::State& state) {
  auto c = make_candidate(static_cast<int>(state.range(0)), 64, 32, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(replan::stderr_channel_avg(c, false).value);
  }
}
BENCHMARK(BM_stderr)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_pairwise_kl(benchmark::State& state) {
  auto c = make_candidate(static_cast<int>(state.range(0)), 64, 32, 7);
  for (auto _ : state) {
    benchmark::DoNotOptimize(replan::mean_pairwise_kl(c).value);
  }
}
BENCHMARK(BM_pairwise_kl)->Arg(2)->Arg(4)->Arg(8)->Arg(16);

void BM_select_top_k(benchmark::State& state) {
  auto map = make_map(static_cast<int>(state.range(0)), 11);
  std::vector<int> excluded;
  for (auto _ : state) {
    benchmark::DoNotOptimize(replan::select_candidates(
        map, 3, {replan::SelectionKind::top_k_confidence, 8}, excluded));
  }
}
BENCHMARK(BM_select_top_k)->Arg(1000)->Arg(4000)->Arg(16000)->Unit(benchmark::kMicrosecond);

void BM_replan_attempt(benchmark::State& state) {
  auto map = make_map(static_cast<int>(state.range(0)), 11);
  replan::ReplanConfig config;
  config.criterion = {replan::SelectionKind::top_k_confidence, 8};
  config.strategy.kind = replan::Strategy::pairwise_kl;
  replan::RetrievalTrace trace;
  trace.query_class = 3;
  trace.visited.push_back(replan::first_attempt(map, 3));
  for (auto _ : state) {
    benchmark::DoNotOptimize(replan::replan(map, 3, config, trace));
  }
}
BENCHMARK(BM_replan_attempt)->Arg(1000)->Arg(5370)->Arg(16000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
