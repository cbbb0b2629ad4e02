#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "replan/semantic_map.hpp"
#include "replan/uncertainty.hpp"

namespace replan {

enum class SelectionKind { top_k_confidence, top_k_category };

const char* to_string(SelectionKind kind);
std::optional<SelectionKind> selection_kind_from_string(std::string_view s);

struct SelectionCriterion {
  SelectionKind kind = SelectionKind::top_k_confidence;
  int k = 2;
};

enum class Strategy {
  entropy,
  std_error,
  pairwise_kl,
  max_confidence,
  random,
  random_top_k,
  oracle,
  none,
};

const char* to_string(Strategy s);
std::optional<Strategy> strategy_from_string(std::string_view s);

/// Uncertainty strategies pick the most uncertain candidate by entropy and the
/// most consistent one by std_error / pairwise_kl; `ablation` flips each.
enum class Direction { standard, ablation };

struct ReplanStrategy {
  Strategy kind = Strategy::none;
  Direction direction = Direction::standard;
  bool weighted_stderr = false;
  /// Required by the random strategies; never seeded from the clock.
  std::optional<std::uint64_t> seed;
};

struct ReplanConfig {
  SelectionCriterion criterion;
  ReplanStrategy strategy;
  int attempts = 2;  // total attempts including the first
};

/// One retrieval attempt, with diagnostics for traces and result tables.
struct AttemptRecord {
  int candidate_id = -1;
  double confidence = 0.0;
  /// Measure value that drove the choice; absent for confidence/random/oracle.
  std::optional<double> uncertainty;
  std::size_t candidate_set_size = 0;
};

struct RetrievalTrace {
  int query_class = -1;
  std::vector<int> visited;  // in visit order
  std::vector<AttemptRecord> attempts;
};

/// Highest fused confidence for `cls`, ties to the lowest id.
/// DomainError on an empty map or out-of-range class.
int first_attempt(const SemanticMap& map, int cls);

/// Candidate ids eligible for a replanning decision, most confident first
/// (ties to the lowest id). Excluded ids are filtered before the cut.
///  - top_k_confidence: the k highest-confidence remaining candidates.
///  - top_k_category: every remaining candidate whose fused distribution
///    ranks `cls` within its top k classes (rank ties to the lower class id).
std::vector<int> select_candidates(const SemanticMap& map, int cls,
                                   const SelectionCriterion& criterion,
                                   std::span<const int> excluded);

/// Outcome of one replanning decision; `replan` is pure, the caller appends
/// the record to its trace.
struct ReplanChoice {
  int candidate_id = -1;
  AttemptRecord record;
};

/// Picks the next candidate after a failed attempt. Never returns a visited
/// id; returns nullopt when no candidate remains (or strategy is `none`).
/// Within the selected set, ties break by confidence (desc) then id (asc);
/// an all-infinite set degrades to its highest-confidence member; an empty
/// top-k-category set falls back to max confidence over unvisited candidates.
std::optional<ReplanChoice> replan(const SemanticMap& map, int cls,
                                   const ReplanConfig& config,
                                   const RetrievalTrace& trace);

/// Runs first_attempt + replanning until `success` or attempts are spent.
/// `success` judges a chosen candidate against the caller's ground truth.
struct EpisodeResult {
  RetrievalTrace trace;
  bool success = false;
};

EpisodeResult run_episode(const SemanticMap& map, int cls, const ReplanConfig& config,
                          const std::function<bool(const Candidate&)>& success);

}  // namespace replan
