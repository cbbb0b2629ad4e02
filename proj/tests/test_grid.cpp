#include "doctest.h"

#include <algorithm>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "replan/error.hpp"
#include "replan/grid.hpp"

namespace {

replan::Candidate cand(int id, std::vector<std::vector<double>> dists,
                       std::vector<double> features, int gt) {
  replan::Candidate c;
  c.id = id;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    replan::ViewObservation v;
    v.feature = {features[i]};
    v.dist.probs = dists[i];
    c.views.push_back(std::move(v));
  }
  c.extent = replan::PointSet{{{static_cast<double>(id), 0.0, 0.0}}};
  c.gt_class = gt;
  return c;
}

// Small benchmark whose every cell can be worked out by hand. Extents are
// disjoint single points, so a query succeeds exactly when the chosen id is a
// ground-truth id. One float subtlety feeds the expected numbers below: id2's
// fused class-2 confidence is (0.1+0.1+0.1)/3, one ulp above id1's exact 0.1,
// so for class 2 the confidence order is id3 > id2 > id1 > id0 with no tie.
replan::BenchmarkInstance tiny_bench() {
  replan::BenchmarkInstance bench;
  auto& map = bench.map;
  map.kind = replan::MapKind::instance;
  map.feature_dim = 1;
  map.vocabulary.labels = {"a", "b", "c"};
  map.candidates.push_back(cand(0, {{0.9, 0.05, 0.05}, {0.3, 0.6, 0.1}}, {0.0, 2.0}, 1));
  map.candidates.push_back(cand(1, {{0.55, 0.35, 0.1}}, {1.0}, 0));
  map.candidates.push_back(
      cand(2, {{0.5, 0.4, 0.1}, {0.5, 0.4, 0.1}, {0.5, 0.4, 0.1}}, {1.0, 1.0, 1.0}, 2));
  map.candidates.push_back(cand(3, {{0.45, 0.275, 0.275}, {0.45, 0.275, 0.275}}, {0.0, 4.0}, 0));
  bench.queries.push_back({0, {1, 3}});
  bench.queries.push_back({1, {0}});
  bench.queries.push_back({2, {2}});
  return bench;
}

replan::GridSpec tiny_spec() {
  replan::GridSpec spec;
  spec.strategies = {
      {replan::Strategy::none, replan::Direction::standard},
      {replan::Strategy::oracle, replan::Direction::standard},
      {replan::Strategy::max_confidence, replan::Direction::standard},
      {replan::Strategy::entropy, replan::Direction::standard},
      {replan::Strategy::std_error, replan::Direction::standard},
      {replan::Strategy::pairwise_kl, replan::Direction::standard},
  };
  spec.ks = {2, 3};
  spec.success.kind = replan::SuccessCriterion::Kind::iou;
  return spec;
}

int successes_of(const replan::ResultsTable& table, const std::string& strategy,
                 const std::string& criterion, int k) {
  for (const auto& cell : table.cells) {
    if (cell.strategy == strategy && cell.criterion == criterion && cell.k == k) {
      return cell.successes;
    }
  }
  FAIL(("cell not found: " + strategy + "/" + criterion + "/" + std::to_string(k)));
  return -1;
}

}  // namespace

TEST_SUITE("benchmark") {

TEST_CASE("the tiny grid reproduces the hand-computed table") {
  auto bench = tiny_bench();
  auto table = replan::run_grid(bench, tiny_spec());
  CHECK(table.cells.size() == 18);  // 3 selection-free x 2 ks + 3 measures x 2 x 2

  CHECK(successes_of(table, "none", "-", 2) == 0);
  CHECK(successes_of(table, "none", "-", 3) == 0);
  CHECK(successes_of(table, "oracle", "-", 2) == 3);
  CHECK(successes_of(table, "oracle", "-", 3) == 3);
  // Query 0 (class a, gt {1,3}): first attempt id0 fails.
  // Query 1 (class b, gt {0}): first attempt id2 fails.
  // Query 2 (class c, gt {2}): first attempt id3 fails; id2 is next by
  // confidence, and the empty category-k=2 set falls back to it as well.
  CHECK(successes_of(table, "max_confidence", "-", 2) == 2);
  CHECK(successes_of(table, "max_confidence", "-", 3) == 2);

  CHECK(successes_of(table, "entropy", "confidence", 2) == 1);
  CHECK(successes_of(table, "entropy", "confidence", 3) == 2);
  CHECK(successes_of(table, "entropy", "category", 2) == 2);
  CHECK(successes_of(table, "entropy", "category", 3) == 2);

  CHECK(successes_of(table, "stderr", "confidence", 2) == 2);
  CHECK(successes_of(table, "stderr", "confidence", 3) == 2);
  CHECK(successes_of(table, "stderr", "category", 2) == 2);
  CHECK(successes_of(table, "stderr", "category", 3) == 2);

  CHECK(successes_of(table, "pwkl", "confidence", 2) == 2);
  CHECK(successes_of(table, "pwkl", "confidence", 3) == 1);
  CHECK(successes_of(table, "pwkl", "category", 2) == 1);
  CHECK(successes_of(table, "pwkl", "category", 3) == 1);

  for (const auto& cell : table.cells) {
    CHECK(cell.queries == 3);
    CHECK(cell.success_rate ==
          doctest::Approx(100.0 * cell.successes / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("a verified table has no violations") {
  auto bench = tiny_bench();
  auto table = replan::run_grid(bench, tiny_spec());
  CHECK(replan::verify_table(table, bench).empty());
}

TEST_CASE("verification catches corrupted tables") {
  auto bench = tiny_bench();
  auto table = replan::run_grid(bench, tiny_spec());

  auto broken = table;
  broken.cells[0].successes += 1;
  CHECK(!replan::verify_table(broken, bench).empty());

  broken = table;
  for (auto& cell : broken.cells) {
    if (cell.strategy == "max_confidence") {
      std::fill(cell.per_query.begin(), cell.per_query.end(), 1);
      cell.successes = cell.queries;
      cell.success_rate = 100.0;
    }
  }
  CHECK(!replan::verify_table(broken, bench).empty());
}

TEST_CASE("default rows cover the full strategy set") {
  auto rows = replan::default_strategy_rows(false);
  CHECK(rows.size() == 8);
  auto with_ablation = replan::default_strategy_rows(true);
  CHECK(with_ablation.size() == 11);
  int flipped = 0;
  for (const auto& r : with_ablation) {
    if (r.direction == replan::Direction::ablation) ++flipped;
  }
  CHECK(flipped == 3);
}

TEST_CASE("ablation rows are labeled") {
  auto bench = tiny_bench();
  auto spec = tiny_spec();
  spec.strategies = {
      {replan::Strategy::oracle, replan::Direction::standard},
      {replan::Strategy::max_confidence, replan::Direction::standard},
      {replan::Strategy::entropy, replan::Direction::ablation},
  };
  auto table = replan::run_grid(bench, spec);
  bool found = false;
  for (const auto& cell : table.cells) found |= cell.strategy == "entropy_ablation";
  CHECK(found);
}

TEST_CASE("grid results are identical across job counts") {
  auto bench = tiny_bench();
  auto spec = tiny_spec();
  spec.strategies.push_back({replan::Strategy::random, replan::Direction::standard});
  spec.strategies.push_back({replan::Strategy::random_top_k, replan::Direction::standard});
  spec.seed = 17;
  auto one = replan::run_grid(bench, spec);
  spec.jobs = 4;
  auto four = replan::run_grid(bench, spec);
  CHECK(replan::results_to_csv(one) == replan::results_to_csv(four));
  CHECK(one.scene_hash == four.scene_hash);
}

TEST_CASE("random strategies depend only on the grid seed") {
  auto bench = tiny_bench();
  auto spec = tiny_spec();
  spec.strategies = {
      {replan::Strategy::oracle, replan::Direction::standard},
      {replan::Strategy::max_confidence, replan::Direction::standard},
      {replan::Strategy::random, replan::Direction::standard},
  };
  spec.seed = 5;
  auto a = replan::run_grid(bench, spec);
  auto b = replan::run_grid(bench, spec);
  CHECK(replan::results_to_csv(a) == replan::results_to_csv(b));
}

TEST_CASE("csv output is well formed") {
  auto bench = tiny_bench();
  auto table = replan::run_grid(bench, tiny_spec());
  auto csv = replan::results_to_csv(table);
  CHECK(csv.rfind("strategy,criterion,k,successes,queries,success_rate\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 19);  // header + 18 cells
  CHECK(csv.find("oracle,-,2,3,3,100\n") != std::string::npos);
  CHECK(csv.find("entropy,confidence,3,2,3,") != std::string::npos);
}

TEST_CASE("rendered table marks criterion-free rows") {
  auto bench = tiny_bench();
  auto table = replan::run_grid(bench, tiny_spec());
  auto text = replan::render_results_table(table);
  CHECK(text.find("strategy") != std::string::npos);
  CHECK(text.find("k=2") != std::string::npos);
  CHECK(text.find("k=3") != std::string::npos);
  CHECK(text.find("max_confidence") != std::string::npos);
  CHECK(text.find("100.00") != std::string::npos);
}

TEST_CASE("empty grids are rejected") {
  auto bench = tiny_bench();
  auto spec = tiny_spec();
  spec.ks.clear();
  CHECK_THROWS_AS(replan::run_grid(bench, spec), replan::ConfigError);

  spec = tiny_spec();
  bench.queries.clear();
  CHECK_THROWS_AS(replan::run_grid(bench, spec), replan::ConfigError);
}

TEST_CASE("scene hash tracks the benchmark content") {
  auto bench = tiny_bench();
  auto table = replan::run_grid(bench, tiny_spec());
  auto other = tiny_bench();
  other.queries.pop_back();
  auto table2 = replan::run_grid(other, tiny_spec());
  CHECK(table.scene_hash != table2.scene_hash);
}

}
