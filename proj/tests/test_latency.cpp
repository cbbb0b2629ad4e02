#include "doctest.h"

#include <cmath>

#include "replan/error.hpp"
#include "replan/latency.hpp"

TEST_SUITE("latency") {

TEST_CASE("the harness reports one row per measure and size") {
  replan::LatencyConfig config;
  config.sizes = {200, 400};
  config.measures = {replan::Measure::entropy, replan::Measure::pairwise_kl};
  config.repetitions = 3;
  config.seed = 1;
  auto report = replan::measure_latency(config);
  REQUIRE(report.rows.size() == 4);
  for (const auto& row : report.rows) {
    CHECK(row.median_us > 0.0);
    CHECK(row.p90_us >= row.median_us);
  }
  REQUIRE(report.slopes.count("entropy") == 1);
  REQUIRE(report.slopes.count("pwkl") == 1);
  CHECK(std::isfinite(report.slopes.at("entropy")));
}

TEST_CASE("the view scaling probe grows superlinearly") {
  auto scaling = replan::measure_pwkl_view_scaling(6, 3, 2);
  CHECK(scaling.views == 6);
  CHECK(scaling.base_us > 0.0);
  CHECK(scaling.doubled_us > scaling.base_us);
  // Doubling the views quadruples the pair count; leave slack for timer noise.
  CHECK(scaling.ratio > 1.5);
}

TEST_CASE("csv output carries the header and all rows") {
  replan::LatencyConfig config;
  config.sizes = {200};
  config.measures = {replan::Measure::std_error};
  config.repetitions = 2;
  auto report = replan::measure_latency(config);
  auto csv = replan::latency_to_csv(report);
  CHECK(csv.rfind("measure,n,median_us,p90_us\n", 0) == 0);
  CHECK(csv.find("stderr,200,") != std::string::npos);
}

TEST_CASE("bad configurations are rejected") {
  replan::LatencyConfig config;
  config.repetitions = 0;
  CHECK_THROWS_AS(replan::measure_latency(config), replan::ConfigError);
  config.repetitions = 3;
  config.sizes.clear();
  CHECK_THROWS_AS(replan::measure_latency(config), replan::ConfigError);
  CHECK_THROWS_AS(replan::measure_pwkl_view_scaling(1, 3, 0), replan::ConfigError);
  CHECK_THROWS_AS(replan::measure_pwkl_view_scaling(4, 0, 0), replan::ConfigError);
}

}
