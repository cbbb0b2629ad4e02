#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "replan/metrics.hpp"
#include "replan/replanner.hpp"
#include "replan/synthetic.hpp"

namespace replan {

/// One strategy row of the evaluation grid. Selection-free strategies
/// (none, oracle, max_confidence, random) ignore the criterion and are
/// reported with criterion "-".
struct StrategyRow {
  Strategy strategy = Strategy::none;
  Direction direction = Direction::standard;
};

struct GridSpec {
  std::vector<StrategyRow> strategies;  // empty -> default Table-style rows
  std::vector<SelectionKind> criteria{SelectionKind::top_k_confidence,
                                      SelectionKind::top_k_category};
  std::vector<int> ks{2, 4, 8, 16, 40};
  SuccessCriterion success;
  int attempts = 2;
  bool weighted_stderr = false;
  std::uint64_t seed = 0;  // drives the random strategies, per cell and query
  int jobs = 1;
};

/// Default strategy rows in display order; ablation rows appended on request.
std::vector<StrategyRow> default_strategy_rows(bool include_ablation);

struct ResultCell {
  std::string strategy;   // e.g. "entropy", "pwkl_ablation", "max_confidence"
  std::string criterion;  // "confidence", "category" or "-"
  int k = 0;
  int successes = 0;
  int queries = 0;
  double success_rate = 0.0;  // percent
  std::vector<std::uint8_t> per_query;
};

struct ResultsTable {
  std::vector<ResultCell> cells;
  std::uint64_t seed = 0;
  std::uint64_t scene_hash = 0;
  double wall_ms = 0.0;
  int attempts = 2;
  SuccessCriterion success;
};

/// Runs every (strategy x criterion x k) cell over all queries. A query
/// succeeds when any attempt matches ground truth under the success
/// criterion. Deterministic for a fixed spec regardless of `jobs`.
ResultsTable run_grid(const BenchmarkInstance& bench, const GridSpec& spec);

/// Structural checks: rates within [0, 100], the no-replan row constant in k,
/// oracle pointwise dominant per query, and the two-attempt max-confidence
/// cells equal to brute-force top-2 accuracy. Returns human-readable
/// violations; empty means the table is sound.
std::vector<std::string> verify_table(const ResultsTable& table, const BenchmarkInstance& bench);

/// CSV with header strategy,criterion,k,successes,queries,success_rate.
/// Full-precision rates; byte-stable for identical tables.
std::string results_to_csv(const ResultsTable& table);

/// Fixed-width text rendering with one row per strategy x criterion and one
/// column per k (rates in percent, two decimals).
std::string render_results_table(const ResultsTable& table);

}  // namespace replan
