#include "replan/grid.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <thread>
#include <unordered_map>

#include "replan/detail/format.hpp"
#include "replan/error.hpp"
#include "replan/map_io.hpp"
#include "replan/rng.hpp"

namespace replan {

namespace {

bool uses_selection(Strategy s) {
  return s == Strategy::entropy || s == Strategy::std_error || s == Strategy::pairwise_kl ||
         s == Strategy::random_top_k;
}

bool uses_seed(Strategy s) { return s == Strategy::random || s == Strategy::random_top_k; }

std::string row_name(const StrategyRow& row) {
  std::string name = to_string(row.strategy);
  if (row.direction == Direction::ablation) name += "_ablation";
  return name;
}

struct CellPlan {
  StrategyRow row;
  SelectionKind kind = SelectionKind::top_k_confidence;
  std::string criterion_label;
  int k = 0;
};

std::uint64_t query_seed(std::uint64_t base, const CellPlan& plan, std::size_t qi) {
  std::string tag = row_name(plan.row) + "|" + plan.criterion_label + "|" +
                    std::to_string(plan.k) + "|" + std::to_string(qi);
  return mix64(base ^ detail::fnv1a64(tag));
}

}  // namespace

std::vector<StrategyRow> default_strategy_rows(bool include_ablation) {
  std::vector<StrategyRow> rows{
      {Strategy::none, Direction::standard},
      {Strategy::oracle, Direction::standard},
      {Strategy::max_confidence, Direction::standard},
      {Strategy::random, Direction::standard},
      {Strategy::random_top_k, Direction::standard},
      {Strategy::entropy, Direction::standard},
      {Strategy::std_error, Direction::standard},
      {Strategy::pairwise_kl, Direction::standard},
  };
  if (include_ablation) {
    rows.push_back({Strategy::entropy, Direction::ablation});
    rows.push_back({Strategy::std_error, Direction::ablation});
    rows.push_back({Strategy::pairwise_kl, Direction::ablation});
  }
  return rows;
}

ResultsTable run_grid(const BenchmarkInstance& bench, const GridSpec& spec) {
  if (bench.queries.empty()) throw ConfigError("run_grid: benchmark has no queries");
  if (spec.ks.empty()) throw ConfigError("run_grid: no k values");
  if (spec.criteria.empty()) throw ConfigError("run_grid: no selection criteria");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<StrategyRow> rows =
      spec.strategies.empty() ? default_strategy_rows(false) : spec.strategies;

  std::vector<CellPlan> plans;
  for (const auto& row : rows) {
    if (uses_selection(row.strategy)) {
      for (SelectionKind kind : spec.criteria) {
        for (int k : spec.ks) plans.push_back({row, kind, to_string(kind), k});
      }
    } else {
      for (int k : spec.ks) {
        plans.push_back({row, SelectionKind::top_k_confidence, "-", k});
      }
    }
  }

  // Ground-truth candidate pointers per query, resolved once.
  std::unordered_map<int, const Candidate*> by_id;
  for (const auto& c : bench.map.candidates) by_id[c.id] = &c;
  std::vector<std::vector<const Candidate*>> gt(bench.queries.size());
  for (std::size_t qi = 0; qi < bench.queries.size(); ++qi) {
    for (int id : bench.queries[qi].gt_ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw ConfigError("run_grid: gt id " + std::to_string(id) + " not in map");
      }
      gt[qi].push_back(it->second);
    }
  }

  ResultsTable table;
  table.seed = spec.seed;
  table.attempts = spec.attempts;
  table.success = spec.success;
  table.cells.resize(plans.size());

  auto run_cell = [&](std::size_t ci) {
    const CellPlan& plan = plans[ci];
    ResultCell cell;
    cell.strategy = row_name(plan.row);
    cell.criterion = plan.criterion_label;
    cell.k = plan.k;
    cell.queries = static_cast<int>(bench.queries.size());
    cell.per_query.resize(bench.queries.size(), 0);

    for (std::size_t qi = 0; qi < bench.queries.size(); ++qi) {
      const Query& query = bench.queries[qi];
      ReplanConfig config;
      config.criterion = {plan.kind, plan.k};
      config.strategy.kind = plan.row.strategy;
      config.strategy.direction = plan.row.direction;
      config.strategy.weighted_stderr = spec.weighted_stderr;
      if (uses_seed(plan.row.strategy)) {
        config.strategy.seed = query_seed(spec.seed, plan, qi);
      }
      config.attempts = spec.attempts;

      std::span<const Candidate* const> gt_span(gt[qi]);
      auto episode = run_episode(bench.map, query.class_id, config, [&](const Candidate& c) {
        return is_success(c, gt_span, spec.success);
      });
      if (episode.success) {
        cell.per_query[qi] = 1;
        ++cell.successes;
      }
    }
    cell.success_rate = 100.0 * static_cast<double>(cell.successes) /
                        static_cast<double>(cell.queries);
    table.cells[ci] = std::move(cell);
  };

  const int jobs = std::max(1, spec.jobs);
  if (jobs == 1) {
    for (std::size_t ci = 0; ci < plans.size(); ++ci) run_cell(ci);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int count = static_cast<int>(
        std::min(static_cast<std::size_t>(jobs), plans.size()));
    for (int t = 0; t < count; ++t) {
      workers.emplace_back([&] {
        for (;;) {
          std::size_t ci = next.fetch_add(1);
          if (ci >= plans.size()) return;
          run_cell(ci);
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  {
    std::string hash_src = map_to_string(bench.map);
    for (const auto& q : bench.queries) {
      hash_src += "|" + std::to_string(q.class_id);
      for (int id : q.gt_ids) hash_src += "," + std::to_string(id);
    }
    table.scene_hash = detail::fnv1a64(hash_src);
  }
  table.wall_ms = std::chrono::duration<double, std::milli>(
                      std::chrono::steady_clock::now() - t0).count();

  auto violations = verify_table(table, bench);
  if (!violations.empty()) {
    std::string msg = "results table failed structural checks:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw Error(msg);
  }
  return table;
}

std::vector<std::string> verify_table(const ResultsTable& table, const BenchmarkInstance& bench) {
  std::vector<std::string> violations;

  auto cell_name = [](const ResultCell& c) {
    return c.strategy + "/" + c.criterion + "/k=" + std::to_string(c.k);
  };

  for (const auto& cell : table.cells) {
    if (!(cell.success_rate >= 0.0 && cell.success_rate <= 100.0)) {
      violations.push_back(cell_name(cell) + ": rate outside [0, 100]");
    }
    int counted = 0;
    for (auto v : cell.per_query) counted += v ? 1 : 0;
    if (counted != cell.successes ||
        cell.queries != static_cast<int>(cell.per_query.size())) {
      violations.push_back(cell_name(cell) + ": counts inconsistent");
    }
  }

  const ResultCell* none_first = nullptr;
  for (const auto& cell : table.cells) {
    if (cell.strategy != "none") continue;
    if (!none_first) {
      none_first = &cell;
    } else if (cell.per_query != none_first->per_query) {
      violations.push_back("no-replan row varies with k");
    }
  }

  const ResultCell* oracle_cell = nullptr;
  for (const auto& cell : table.cells) {
    if (cell.strategy == "oracle") {
      oracle_cell = &cell;
      break;
    }
  }
  if (oracle_cell) {
    for (const auto& cell : table.cells) {
      for (std::size_t qi = 0; qi < cell.per_query.size(); ++qi) {
        if (cell.per_query[qi] > oracle_cell->per_query[qi]) {
          violations.push_back("oracle not dominant over " + cell_name(cell) + " at query " +
                               std::to_string(qi));
          break;
        }
      }
    }
  }

  // Two attempts with max-confidence replanning must coincide with plain
  // top-2 confidence accuracy.
  if (table.attempts == 2) {
    std::unordered_map<int, const Candidate*> by_id;
    for (const auto& c : bench.map.candidates) by_id[c.id] = &c;
    std::vector<std::uint8_t> top2(bench.queries.size(), 0);
    for (std::size_t qi = 0; qi < bench.queries.size(); ++qi) {
      const Query& query = bench.queries[qi];
      std::vector<std::pair<double, int>> ranked;
      for (const auto& c : bench.map.candidates) {
        ranked.push_back({confidence(c, query.class_id), c.id});
      }
      std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
      });
      std::vector<const Candidate*> gt;
      for (int id : query.gt_ids) gt.push_back(by_id.at(id));
      std::span<const Candidate* const> gt_span(gt);
      bool ok = false;
      for (std::size_t r = 0; r < ranked.size() && r < 2; ++r) {
        if (is_success(*by_id.at(ranked[r].second), gt_span, table.success)) {
          ok = true;
          break;
        }
      }
      top2[qi] = ok ? 1 : 0;
    }
    for (const auto& cell : table.cells) {
      if (cell.strategy != "max_confidence") continue;
      if (cell.per_query != top2) {
        violations.push_back(cell_name(cell) + ": differs from brute-force top-2 accuracy");
      }
    }
  }

  return violations;
}

std::string results_to_csv(const ResultsTable& table) {
  std::string csv = "strategy,criterion,k,successes,queries,success_rate\n";
  for (const auto& cell : table.cells) {
    csv += cell.strategy;
    csv += ',';
    csv += cell.criterion;
    csv += ',';
    csv += std::to_string(cell.k);
    csv += ',';
    csv += std::to_string(cell.successes);
    csv += ',';
    csv += std::to_string(cell.queries);
    csv += ',';
    csv += detail::format_double(cell.success_rate);
    csv += '\n';
  }
  return csv;
}

std::string render_results_table(const ResultsTable& table) {
  std::vector<int> ks;
  for (const auto& cell : table.cells) {
    if (std::find(ks.begin(), ks.end(), cell.k) == ks.end()) ks.push_back(cell.k);
  }
  std::sort(ks.begin(), ks.end());

  struct RowKey {
    std::string strategy;
    std::string criterion;
  };
  std::vector<RowKey> order;
  std::unordered_map<std::string, std::unordered_map<int, double>> values;
  for (const auto& cell : table.cells) {
    std::string key = cell.strategy + "|" + cell.criterion;
    if (!values.count(key)) order.push_back({cell.strategy, cell.criterion});
    values[key][cell.k] = cell.success_rate;
  }

  std::size_t name_w = 8;
  for (const auto& row : order) {
    name_w = std::max(name_w, row.strategy.size());
  }
  std::size_t crit_w = 10;

  std::string out;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%-*s  %-*s", static_cast<int>(name_w), "strategy",
                static_cast<int>(crit_w), "criterion");
  out += buf;
  for (int k : ks) {
    std::snprintf(buf, sizeof(buf), "  %8s", ("k=" + std::to_string(k)).c_str());
    out += buf;
  }
  out += '\n';
  out += std::string(name_w + 2 + crit_w + ks.size() * 10, '-');
  out += '\n';
  for (const auto& row : order) {
    std::snprintf(buf, sizeof(buf), "%-*s  %-*s", static_cast<int>(name_w),
                  row.strategy.c_str(), static_cast<int>(crit_w), row.criterion.c_str());
    out += buf;
    const auto& by_k = values[row.strategy + "|" + row.criterion];
    for (int k : ks) {
      auto it = by_k.find(k);
      if (it == by_k.end()) {
        std::snprintf(buf, sizeof(buf), "  %8s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), "  %8.2f", it->second);
      }
      out += buf;
    }
    out += '\n';
  }
  return out;
}

}  // namespace replan
