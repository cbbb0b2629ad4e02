// Command-line front end: synthesize maps, run single retrievals, and run
// benchmark grids. stdout carries stable key=value lines; diagnostics go to
// stderr. Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "replan/detail/format.hpp"
#include "replan/error.hpp"
#include "replan/grid.hpp"
#include "replan/latency.hpp"
#include "replan/manifest.hpp"
#include "replan/map_io.hpp"
#include "replan/metrics.hpp"
#include "replan/replanner.hpp"
#include "replan/synthetic.hpp"
#include "replan/version.hpp"

namespace fs = std::filesystem;
using replan::detail::format_double;

namespace {

constexpr const char* kOutDirEnv = "REPLAN_OUT_DIR";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const std::string& flag) {
  std::vector<int> out;
  for (const auto& tok : split_csv(s)) {
    try {
      std::size_t pos = 0;
      int v = std::stoi(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": cannot parse integer \"" + tok + "\"");
    }
  }
  if (out.empty()) throw UsageError(flag + ": empty list");
  return out;
}

std::string utc_now() {
  std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string default_out_dir() {
  const char* dir = std::getenv(kOutDirEnv);
  return dir ? std::string(dir) : std::string();
}

fs::path sibling(const fs::path& base, const std::string& suffix) {
  fs::path p = base;
  p.replace_extension();
  return fs::path(p.string() + suffix);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw replan::Error("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw replan::Error("write failed: " + path.string());
}

replan::StrategyRow parse_strategy_row(std::string name) {
  replan::Direction direction = replan::Direction::standard;
  const std::string suffix = "_ablation";
  if (name.size() > suffix.size() &&
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    direction = replan::Direction::ablation;
    name.resize(name.size() - suffix.size());
  }
  auto strategy = replan::strategy_from_string(name);
  if (!strategy) throw UsageError("unknown strategy \"" + name + "\"");
  return {*strategy, direction};
}

// ---------------------------------------------------------------------------
// generate

struct GenerateArgs {
  std::string out;
  int classes = 0;
  int candidates = 0;
  std::uint64_t seed = 0;
  std::string kind = "instance";
  int views_min = 2;
  int views_max = 5;
  double single_view_rate = 0.1;
  double view_noise = 0.0;
  double feature_noise = 0.0;
  int feature_dim = 8;
  int max_views = 5;
  std::string weight_model = "uniform";
  double room_size = 10.0;
  int points_per_instance = 16;
  std::string class_counts;
  std::string bias_pairs;
  double bias_rate = 0.6;
  int queries_per_class = 1;
  bool cache = false;
};

int cmd_generate(const GenerateArgs& args, const std::vector<std::string>& argv) {
  auto t0 = std::chrono::steady_clock::now();

  fs::path out_path;
  if (!args.out.empty()) {
    out_path = args.out;
  } else {
    std::string dir = default_out_dir();
    if (dir.empty()) {
      throw UsageError("--out is required (or set " + std::string(kOutDirEnv) + ")");
    }
    out_path = fs::path(dir) / "map.json";
  }

  replan::SceneSpec scene;
  scene.n_candidates = args.candidates;
  scene.views_min = args.views_min;
  scene.views_max = args.views_max;
  scene.single_view_rate = args.single_view_rate;
  scene.room_size_m = args.room_size;
  scene.points_per_instance = args.points_per_instance;
  scene.seed = args.seed;
  auto kind = replan::map_kind_from_string(args.kind);
  if (!kind) throw UsageError("--kind must be instance or grid");
  scene.kind = *kind;
  if (!args.class_counts.empty()) {
    scene.class_counts = parse_int_list(args.class_counts, "--class-counts");
  }

  replan::GroundingModelSpec model;
  model.view_noise = args.view_noise;
  model.feature_noise_sigma = args.feature_noise;
  model.feature_dim = args.feature_dim;
  model.max_views = args.max_views;
  auto weight_model = replan::weight_model_from_string(args.weight_model);
  if (!weight_model) throw UsageError("--weight-model must be uniform or distance_decay");
  model.weight_model = *weight_model;

  if (args.bias_pairs.empty()) {
    model.confusion = replan::identity_confusion(args.classes);
  } else {
    std::vector<replan::BiasPair> pairs;
    for (const auto& tok : split_csv(args.bias_pairs)) {
      auto colon = tok.find(':');
      if (colon == std::string::npos) {
        throw UsageError("--bias-pairs entries must look like SRC:DST");
      }
      try {
        pairs.push_back({std::stoi(tok.substr(0, colon)), std::stoi(tok.substr(colon + 1))});
      } catch (const std::exception&) {
        throw UsageError("--bias-pairs: cannot parse \"" + tok + "\"");
      }
    }
    model.confusion = replan::make_biased_confusion(args.classes, pairs, args.bias_rate);
  }

  replan::BenchmarkInstance bench =
      replan::make_benchmark(scene, model, args.queries_per_class);

  fs::path bench_path = sibling(out_path, ".bench.json");
  fs::path manifest_path = sibling(out_path, ".manifest.json");
  if (out_path.has_parent_path()) fs::create_directories(out_path.parent_path());
  replan::save_benchmark(bench, out_path, bench_path, args.cache);

  replan::RunManifest manifest;
  manifest.subcommand = "generate";
  manifest.argv = argv;
  manifest.outputs = {out_path.string(), bench_path.string()};
  manifest.seed = args.seed;
  manifest.wall_clock_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0).count();
  manifest.created_utc = utc_now();
  replan::save_manifest(manifest, manifest_path);

  std::cout << "map=" << out_path.string() << "\n";
  std::cout << "benchmark=" << bench_path.string() << "\n";
  std::cout << "manifest=" << manifest_path.string() << "\n";
  std::cout << "candidates=" << bench.map.candidates.size() << "\n";
  std::cout << "queries=" << bench.queries.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// retrieve

struct RetrieveArgs {
  std::string map;
  std::string cls;
  std::string strategy = "none";
  std::string criterion = "confidence";
  int k = 2;
  int attempts = 2;
  std::optional<std::uint64_t> seed;
  bool weighted_stderr = false;
};

int cmd_retrieve(const RetrieveArgs& args) {
  replan::SemanticMap map = replan::load_map(args.map);

  auto cls = map.vocabulary.index_of(args.cls);
  if (!cls) {
    std::string labels;
    for (const auto& l : map.vocabulary.labels) {
      if (!labels.empty()) labels += ", ";
      labels += l;
    }
    throw replan::DomainError("unknown class label \"" + args.cls +
                              "\"; vocabulary: " + labels);
  }

  replan::ReplanConfig config;
  auto row = parse_strategy_row(args.strategy);
  config.strategy.kind = row.strategy;
  config.strategy.direction = row.direction;
  config.strategy.weighted_stderr = args.weighted_stderr;
  config.strategy.seed = args.seed;
  auto criterion = replan::selection_kind_from_string(args.criterion);
  if (!criterion) throw UsageError("--criterion must be confidence or category");
  config.criterion = {*criterion, args.k};
  config.attempts = args.attempts;
  if ((row.strategy == replan::Strategy::random ||
       row.strategy == replan::Strategy::random_top_k) &&
      !args.seed) {
    throw UsageError("--seed is required for random strategies");
  }

  bool labeled = false;
  for (const auto& c : map.candidates) labeled |= c.gt_class.has_value();

  // With labels an attempt succeeds when it hits the queried class; without
  // them there is no failure signal, so every configured attempt runs.
  auto success = [&](const replan::Candidate& c) {
    return labeled && c.gt_class && *c.gt_class == *cls;
  };
  replan::EpisodeResult episode = replan::run_episode(map, *cls, config, success);

  std::cout << "map=" << args.map << " class=" << args.cls << " class_id=" << *cls
            << " strategy=" << args.strategy << " criterion=" << args.criterion
            << " k=" << args.k << " attempts=" << args.attempts << "\n";
  for (std::size_t i = 0; i < episode.trace.attempts.size(); ++i) {
    const auto& a = episode.trace.attempts[i];
    std::cout << "attempt=" << (i + 1) << " id=" << a.candidate_id
              << " confidence=" << format_double(a.confidence) << " uncertainty="
              << (a.uncertainty ? format_double(*a.uncertainty) : std::string("n/a"))
              << " set_size=" << a.candidate_set_size << " success=";
    if (!labeled) {
      std::cout << "n/a";
    } else {
      const replan::Candidate* c = map.find(a.candidate_id);
      std::cout << ((c->gt_class && *c->gt_class == *cls) ? "yes" : "no");
    }
    std::cout << "\n";
  }
  std::cout << "result=" << (!labeled ? "unknown" : (episode.success ? "success" : "failure"))
            << " attempts_used=" << episode.trace.attempts.size() << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// bench

struct BenchArgs {
  std::string manifest;
  std::string out_dir;
  std::string ks = "2,4,8,16,40";
  std::string criteria = "confidence,category";
  std::string strategies;
  bool include_ablation = false;
  int attempts = 2;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool weighted_stderr = false;
  std::string success_kind;
  double iou_threshold = 0.25;
  double distance_threshold = 1.0;

  bool latency = false;
  std::string sizes = "1000,4000,16000";
  std::string measures = "entropy,stderr,pwkl";
  int reps = 7;
  int k = 8;
  int view_scaling_views = 8;
};

fs::path resolve_out_dir(const std::string& flag_value) {
  std::string dir = flag_value.empty() ? default_out_dir() : flag_value;
  if (dir.empty()) {
    throw UsageError("--out-dir is required (or set " + std::string(kOutDirEnv) + ")");
  }
  fs::create_directories(dir);
  return dir;
}

int cmd_bench_latency(const BenchArgs& args, const std::vector<std::string>& argv) {
  auto t0 = std::chrono::steady_clock::now();
  fs::path out_dir = resolve_out_dir(args.out_dir);

  replan::LatencyConfig config;
  config.sizes = parse_int_list(args.sizes, "--sizes");
  config.measures.clear();
  for (const auto& name : split_csv(args.measures)) {
    auto m = replan::measure_from_string(name);
    if (!m) throw UsageError("unknown measure \"" + name + "\"");
    config.measures.push_back(*m);
  }
  config.repetitions = args.reps;
  config.criterion.k = args.k;
  config.seed = args.seed.value_or(0);

  replan::LatencyReport report = replan::measure_latency(config);
  replan::ViewScalingReport scaling =
      replan::measure_pwkl_view_scaling(args.view_scaling_views, args.reps, config.seed);
  report.rows.push_back({"pwkl_per_candidate_views", scaling.views, scaling.base_us, 0.0});
  report.rows.push_back(
      {"pwkl_per_candidate_views", 2 * scaling.views, scaling.doubled_us, 0.0});

  fs::path csv_path = out_dir / "timing.csv";
  write_text(csv_path, replan::latency_to_csv(report));

  replan::RunManifest manifest;
  manifest.subcommand = "bench";
  manifest.argv = argv;
  manifest.outputs = {csv_path.string()};
  manifest.seed = config.seed;
  manifest.wall_clock_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0).count();
  manifest.created_utc = utc_now();
  replan::save_manifest(manifest, out_dir / "timing.manifest.json");

  std::cout << "timing=" << csv_path.string() << "\n";
  for (const auto& [measure, slope] : report.slopes) {
    std::cout << "slope_" << measure << "=" << format_double(slope) << "\n";
  }
  std::cout << "view_scaling_ratio=" << format_double(scaling.ratio) << "\n";
  return 0;
}

int cmd_bench(const BenchArgs& args, const std::vector<std::string>& argv) {
  if (args.latency) return cmd_bench_latency(args, argv);
  if (args.manifest.empty()) {
    throw UsageError("--manifest is required unless --latency is given");
  }
  auto t0 = std::chrono::steady_clock::now();
  fs::path out_dir = resolve_out_dir(args.out_dir);

  replan::BenchmarkInstance bench = replan::load_benchmark(args.manifest);

  replan::GridSpec spec;
  spec.ks = parse_int_list(args.ks, "--ks");
  spec.criteria.clear();
  for (const auto& name : split_csv(args.criteria)) {
    auto kind = replan::selection_kind_from_string(name);
    if (!kind) throw UsageError("unknown criterion \"" + name + "\"");
    spec.criteria.push_back(*kind);
  }
  if (args.strategies.empty()) {
    spec.strategies = replan::default_strategy_rows(args.include_ablation);
  } else {
    for (const auto& name : split_csv(args.strategies)) {
      spec.strategies.push_back(parse_strategy_row(name));
    }
    if (args.include_ablation) {
      for (const auto& base : std::vector<std::string>{"entropy", "stderr", "pwkl"}) {
        spec.strategies.push_back(parse_strategy_row(base + "_ablation"));
      }
    }
  }

  bool any_random = false;
  for (const auto& row : spec.strategies) {
    any_random |= row.strategy == replan::Strategy::random ||
                  row.strategy == replan::Strategy::random_top_k;
  }
  if (any_random && !args.seed) {
    throw UsageError("--seed is required when the grid includes random strategies");
  }
  spec.seed = args.seed.value_or(0);
  spec.attempts = args.attempts;
  spec.weighted_stderr = args.weighted_stderr;
  spec.jobs = args.jobs;

  if (args.success_kind.empty()) {
    spec.success.kind = bench.map.kind == replan::MapKind::instance
                            ? replan::SuccessCriterion::Kind::iou
                            : replan::SuccessCriterion::Kind::distance;
  } else {
    auto kind = replan::success_kind_from_string(args.success_kind);
    if (!kind) throw UsageError("--success must be iou or distance");
    spec.success.kind = *kind;
  }
  spec.success.iou_threshold = args.iou_threshold;
  spec.success.distance_threshold_m = args.distance_threshold;

  replan::ResultsTable table = replan::run_grid(bench, spec);

  fs::path csv_path = out_dir / "results.csv";
  fs::path table_path = out_dir / "results.txt";
  write_text(csv_path, replan::results_to_csv(table));
  write_text(table_path, replan::render_results_table(table));

  replan::RunManifest manifest;
  manifest.subcommand = "bench";
  manifest.argv = argv;
  manifest.inputs = {args.manifest};
  manifest.outputs = {csv_path.string(), table_path.string()};
  if (args.seed) manifest.seed = *args.seed;
  manifest.wall_clock_ms = std::chrono::duration<double, std::milli>(
                               std::chrono::steady_clock::now() - t0).count();
  manifest.created_utc = utc_now();
  replan::save_manifest(manifest, out_dir / "results.manifest.json");

  std::cout << "results=" << csv_path.string() << "\n";
  std::cout << "table=" << table_path.string() << "\n";
  std::cout << "cells=" << table.cells.size() << "\n";
  std::cout << "invariants=ok\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"uncertainty-aware retrieval and replanning over semantic maps"};
  app.set_version_flag("--version,-V", replan::kToolVersion);
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "synthesize a map and benchmark manifest");
  gen_cmd->add_option("--out", gen.out, "map output path (default: $REPLAN_OUT_DIR/map.json)");
  gen_cmd->add_option("--classes", gen.classes, "vocabulary size")->required();
  gen_cmd->add_option("--candidates", gen.candidates, "number of candidates")->required();
  gen_cmd->add_option("--seed", gen.seed, "generation seed")->required();
  gen_cmd->add_option("--kind", gen.kind, "map kind: instance or grid");
  gen_cmd->add_option("--views-min", gen.views_min, "minimum views per candidate");
  gen_cmd->add_option("--views-max", gen.views_max, "maximum views per candidate");
  gen_cmd->add_option("--single-view-rate", gen.single_view_rate,
                      "fraction of candidates forced to one view");
  gen_cmd->add_option("--view-noise", gen.view_noise, "per-view distribution noise");
  gen_cmd->add_option("--feature-noise", gen.feature_noise, "per-view feature noise sigma");
  gen_cmd->add_option("--feature-dim", gen.feature_dim, "feature dimensionality");
  gen_cmd->add_option("--max-views", gen.max_views, "hard cap on views per candidate");
  gen_cmd->add_option("--weight-model", gen.weight_model, "uniform or distance_decay");
  gen_cmd->add_option("--room-size", gen.room_size, "room side length in meters");
  gen_cmd->add_option("--points-per-instance", gen.points_per_instance,
                      "points per instance extent");
  gen_cmd->add_option("--class-counts", gen.class_counts,
                      "comma-separated candidates per class");
  gen_cmd->add_option("--bias-pairs", gen.bias_pairs,
                      "comma-separated SRC:DST confusion pairs");
  gen_cmd->add_option("--bias-rate", gen.bias_rate, "confusion rate for --bias-pairs");
  gen_cmd->add_option("--queries-per-class", gen.queries_per_class,
                      "benchmark queries per class");
  gen_cmd->add_flag("--cache", gen.cache, "embed uncertainty cache in the map file");

  RetrieveArgs ret;
  auto* ret_cmd = app.add_subcommand("retrieve", "run one retrieval episode on a map");
  ret_cmd->add_option("--map", ret.map, "map file")->required();
  ret_cmd->add_option("--class", ret.cls, "query class label")->required();
  ret_cmd->add_option("--strategy", ret.strategy,
                      "none|oracle|max_confidence|random|random_top_k|entropy|stderr|pwkl"
                      " (append _ablation to flip an uncertainty strategy)");
  ret_cmd->add_option("--criterion", ret.criterion, "confidence or category");
  ret_cmd->add_option("--k", ret.k, "selection size");
  ret_cmd->add_option("--attempts", ret.attempts, "total attempts including the first");
  ret_cmd->add_option("--seed", ret.seed, "seed for random strategies");
  ret_cmd->add_flag("--weighted-stderr", ret.weighted_stderr,
                    "use view weights in the stderr measure");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "run a benchmark grid or latency harness");
  bench_cmd->add_option("--manifest", bench.manifest, "benchmark manifest file");
  bench_cmd->add_option("--out-dir", bench.out_dir,
                        "output directory (default: $REPLAN_OUT_DIR)");
  bench_cmd->add_option("--ks", bench.ks, "comma-separated k values");
  bench_cmd->add_option("--criteria", bench.criteria, "comma-separated selection criteria");
  bench_cmd->add_option("--strategies", bench.strategies, "comma-separated strategy rows");
  bench_cmd->add_flag("--include-ablation", bench.include_ablation,
                      "add flipped-direction uncertainty rows");
  bench_cmd->add_option("--attempts", bench.attempts, "attempts per query");
  bench_cmd->add_option("--seed", bench.seed, "seed for random strategies");
  bench_cmd->add_option("--jobs", bench.jobs, "parallel workers for grid cells");
  bench_cmd->add_flag("--weighted-stderr", bench.weighted_stderr,
                      "use view weights in the stderr measure");
  bench_cmd->add_option("--success", bench.success_kind,
                        "success rule: iou or distance (default: by map kind)");
  bench_cmd->add_option("--iou-threshold", bench.iou_threshold, "IoU strict threshold");
  bench_cmd->add_option("--distance-threshold", bench.distance_threshold,
                        "distance threshold in meters");
  bench_cmd->add_flag("--latency", bench.latency, "run the latency harness instead");
  bench_cmd->add_option("--sizes", bench.sizes, "latency: candidate counts");
  bench_cmd->add_option("--measures", bench.measures, "latency: measures to time");
  bench_cmd->add_option("--reps", bench.reps, "latency: repetitions per point");
  bench_cmd->add_option("--k", bench.k, "latency: selection size");
  bench_cmd->add_option("--view-scaling-views", bench.view_scaling_views,
                        "latency: base view count for the pairwise probe");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::vector<std::string> raw_argv(argv + 1, argv + argc);
  try {
    if (gen_cmd->parsed()) return cmd_generate(gen, raw_argv);
    if (ret_cmd->parsed()) return cmd_retrieve(ret);
    if (bench_cmd->parsed()) return cmd_bench(bench, raw_argv);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
