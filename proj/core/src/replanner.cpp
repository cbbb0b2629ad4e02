#include "replan/replanner.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "replan/error.hpp"
#include "replan/rng.hpp"

namespace replan {

const char* to_string(SelectionKind kind) {
  return kind == SelectionKind::top_k_confidence ? "confidence" : "category";
}

std::optional<SelectionKind> selection_kind_from_string(std::string_view s) {
  if (s == "confidence") return SelectionKind::top_k_confidence;
  if (s == "category") return SelectionKind::top_k_category;
  return std::nullopt;
}

const char* to_string(Strategy s) {
  switch (s) {
    case Strategy::entropy: return "entropy";
    case Strategy::std_error: return "stderr";
    case Strategy::pairwise_kl: return "pwkl";
    case Strategy::max_confidence: return "max_confidence";
    case Strategy::random: return "random";
    case Strategy::random_top_k: return "random_top_k";
    case Strategy::oracle: return "oracle";
    case Strategy::none: return "none";
  }
  return "?";
}

std::optional<Strategy> strategy_from_string(std::string_view s) {
  if (s == "entropy") return Strategy::entropy;
  if (s == "stderr") return Strategy::std_error;
  if (s == "pwkl") return Strategy::pairwise_kl;
  if (s == "max_confidence") return Strategy::max_confidence;
  if (s == "random") return Strategy::random;
  if (s == "random_top_k") return Strategy::random_top_k;
  if (s == "oracle") return Strategy::oracle;
  if (s == "none") return Strategy::none;
  return std::nullopt;
}

namespace {

struct Scored {
  int id;
  double confidence;
};

bool more_confident(const Scored& a, const Scored& b) {
  if (a.confidence != b.confidence) return a.confidence > b.confidence;
  return a.id < b.id;
}

/// Rank of `cls` in the fused distribution under descending probability with
/// ties broken toward the lower class index. Rank 0 is the top class.
int category_rank(const ClassDistribution& fused, int cls) {
  const double p = fused.probs[cls];
  int rank = 0;
  for (int j = 0; j < fused.size(); ++j) {
    if (fused.probs[j] > p || (fused.probs[j] == p && j < cls)) ++rank;
  }
  return rank;
}

std::vector<int> unvisited_ids(const SemanticMap& map, std::span<const int> visited) {
  std::unordered_set<int> seen(visited.begin(), visited.end());
  std::vector<int> out;
  out.reserve(map.candidates.size());
  for (const auto& c : map.candidates) {
    if (!seen.count(c.id)) out.push_back(c.id);
  }
  return out;
}

std::optional<Scored> best_confidence(const SemanticMap& map, int cls,
                                      const std::vector<int>& ids) {
  std::optional<Scored> best;
  for (int id : ids) {
    Scored s{id, confidence(*map.find(id), cls)};
    if (!best || more_confident(s, *best)) best = s;
  }
  return best;
}

void check_config(const ReplanConfig& config) {
  if (config.attempts < 1) throw ConfigError("attempts must be at least 1");
  if (config.criterion.k < 1) throw ConfigError("selection k must be at least 1");
}

}  // namespace

int first_attempt(const SemanticMap& map, int cls) {
  if (map.candidates.empty()) throw DomainError("first_attempt: map has no candidates");
  if (cls < 0 || cls >= map.class_count()) {
    throw DomainError("first_attempt: class index out of range");
  }
  std::optional<Scored> best;
  for (const auto& c : map.candidates) {
    Scored s{c.id, confidence(c, cls)};
    if (!best || more_confident(s, *best)) best = s;
  }
  return best->id;
}

std::vector<int> select_candidates(const SemanticMap& map, int cls,
                                   const SelectionCriterion& criterion,
                                   std::span<const int> excluded) {
  if (cls < 0 || cls >= map.class_count()) {
    throw DomainError("select_candidates: class index out of range");
  }
  if (criterion.k < 1) throw ConfigError("selection k must be at least 1");
  std::unordered_set<int> skip(excluded.begin(), excluded.end());

  std::vector<Scored> scored;
  scored.reserve(map.candidates.size());
  for (const auto& c : map.candidates) {
    if (skip.count(c.id)) continue;
    ClassDistribution fused = fused_distribution(c);
    if (cls >= fused.size()) throw DomainError("select_candidates: class index out of range");
    if (criterion.kind == SelectionKind::top_k_category &&
        category_rank(fused, cls) >= criterion.k) {
      continue;
    }
    scored.push_back({c.id, fused.probs[cls]});
  }
  std::sort(scored.begin(), scored.end(), more_confident);
  if (criterion.kind == SelectionKind::top_k_confidence &&
      scored.size() > static_cast<std::size_t>(criterion.k)) {
    scored.resize(static_cast<std::size_t>(criterion.k));
  }
  std::vector<int> out;
  out.reserve(scored.size());
  for (const auto& s : scored) out.push_back(s.id);
  return out;
}

std::optional<ReplanChoice> replan(const SemanticMap& map, int cls, const ReplanConfig& config,
                                   const RetrievalTrace& trace) {
  check_config(config);
  if (cls < 0 || cls >= map.class_count()) throw DomainError("replan: class index out of range");
  const Strategy strategy = config.strategy.kind;
  if (strategy == Strategy::none) return std::nullopt;

  std::vector<int> unvisited = unvisited_ids(map, trace.visited);
  if (unvisited.empty()) return std::nullopt;

  auto finish = [&](int id, std::optional<double> uncertainty, std::size_t set_size) {
    ReplanChoice choice;
    choice.candidate_id = id;
    choice.record = {id, confidence(*map.find(id), cls), uncertainty, set_size};
    return choice;
  };

  switch (strategy) {
    case Strategy::oracle: {
      bool any_labeled = false;
      for (const auto& c : map.candidates) any_labeled |= c.gt_class.has_value();
      if (!any_labeled) throw ConfigError("oracle strategy requires a map with gt labels");
      std::vector<int> matches;
      for (int id : unvisited) {
        const Candidate* c = map.find(id);
        if (c->gt_class && *c->gt_class == cls) matches.push_back(id);
      }
      if (matches.empty()) return std::nullopt;
      auto best = best_confidence(map, cls, matches);
      return finish(best->id, std::nullopt, unvisited.size());
    }
    case Strategy::max_confidence: {
      auto best = best_confidence(map, cls, unvisited);
      return finish(best->id, std::nullopt, unvisited.size());
    }
    case Strategy::random: {
      if (!config.strategy.seed) throw ConfigError("random strategy requires a seed");
      Rng rng = Rng::derive(*config.strategy.seed,
                            {static_cast<std::uint64_t>(cls), trace.visited.size()});
      int id = unvisited[rng.pick_index(unvisited.size())];
      return finish(id, std::nullopt, unvisited.size());
    }
    default: break;
  }

  // Set-based strategies share the candidate-selection step.
  std::vector<int> selected = select_candidates(map, cls, config.criterion, trace.visited);
  if (selected.empty()) {
    // Nothing qualifies (possible under top_k_category); degrade gracefully.
    auto best = best_confidence(map, cls, unvisited);
    return finish(best->id, std::nullopt, 0);
  }

  if (strategy == Strategy::random_top_k) {
    if (!config.strategy.seed) throw ConfigError("random_top_k strategy requires a seed");
    Rng rng = Rng::derive(*config.strategy.seed,
                          {static_cast<std::uint64_t>(cls), trace.visited.size()});
    int id = selected[rng.pick_index(selected.size())];
    return finish(id, std::nullopt, selected.size());
  }

  Measure measure;
  bool pick_max = false;
  switch (strategy) {
    case Strategy::entropy:
      measure = Measure::entropy;
      pick_max = true;
      break;
    case Strategy::std_error:
      measure = Measure::std_error;
      break;
    case Strategy::pairwise_kl:
      measure = Measure::pairwise_kl;
      break;
    default:
      throw ConfigError("replan: unsupported strategy");
  }
  if (config.strategy.direction == Direction::ablation) pick_max = !pick_max;

  struct Measured {
    int id;
    double value;
    double confidence;
  };
  std::optional<Measured> best;
  for (int id : selected) {
    const Candidate* c = map.find(id);
    Measured cur{id, measure_candidate(*c, measure, config.strategy.weighted_stderr).value,
                 confidence(*c, cls)};
    if (!best) {
      best = cur;
      continue;
    }
    bool better;
    if (cur.value != best->value) {
      better = pick_max ? cur.value > best->value : cur.value < best->value;
    } else if (cur.confidence != best->confidence) {
      better = cur.confidence > best->confidence;
    } else {
      better = cur.id < best->id;
    }
    if (better) best = cur;
  }
  return finish(best->id, best->value, selected.size());
}

EpisodeResult run_episode(const SemanticMap& map, int cls, const ReplanConfig& config,
                          const std::function<bool(const Candidate&)>& success) {
  check_config(config);
  EpisodeResult result;
  result.trace.query_class = cls;

  int first = first_attempt(map, cls);
  const Candidate* chosen = map.find(first);
  result.trace.visited.push_back(first);
  result.trace.attempts.push_back(
      {first, confidence(*chosen, cls), std::nullopt, map.candidates.size()});
  result.success = success(*chosen);

  int made = 1;
  while (!result.success && made < config.attempts) {
    auto choice = replan(map, cls, config, result.trace);
    if (!choice) break;
    result.trace.visited.push_back(choice->candidate_id);
    result.trace.attempts.push_back(choice->record);
    result.success = success(*map.find(choice->candidate_id));
    ++made;
  }
  return result;
}

}  // namespace replan
