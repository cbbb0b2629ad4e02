#include "doctest.h"

#include <vector>

#include "oracles.hpp"
#include "replan/error.hpp"
#include "replan/semantic_map.hpp"

namespace {

replan::SemanticMap tiny_map() {
  replan::SemanticMap map;
  map.kind = replan::MapKind::instance;
  map.feature_dim = 2;
  map.vocabulary.labels = {"chair", "table", "sofa"};
  replan::Candidate c;
  c.id = 4;
  c.views.push_back({1.0, {0.0, 0.0}, {{0.7, 0.2, 0.1}}});
  c.views.push_back({1.0, {1.0, 1.0}, {{0.1, 0.8, 0.1}}});
  c.extent = replan::PointSet{{{0, 0, 0}, {1, 0, 0}}};
  c.gt_class = 1;
  map.candidates.push_back(c);
  return map;
}

}  // namespace

TEST_SUITE("semantic_map") {

TEST_CASE("vocabulary lookup") {
  replan::ClassVocabulary v;
  v.labels = {"chair", "table"};
  CHECK(v.size() == 2);
  CHECK(v.index_of("table") == 1);
  CHECK(!v.index_of("lamp").has_value());
}

TEST_CASE("fused distribution is the weight-normalized view average") {
  auto map = tiny_map();
  auto f = replan::fused_distribution(map.candidates[0]);
  CHECK(f.probs[0] == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(f.probs[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(f.probs[2] == doctest::Approx(0.1).epsilon(1e-15));

  auto ref = oracle::fused(map.candidates[0]);
  for (std::size_t i = 0; i < ref.size(); ++i) {
    CHECK(f.probs[i] == doctest::Approx(ref[i]).epsilon(1e-14));
  }
}

TEST_CASE("fused distribution respects view weights") {
  auto map = tiny_map();
  map.candidates[0].views[0].weight = 3.0;
  auto f = replan::fused_distribution(map.candidates[0]);
  CHECK(f.probs[0] == doctest::Approx((3.0 * 0.7 + 0.1) / 4.0).epsilon(1e-15));
  CHECK(replan::confidence(map.candidates[0], 0) == doctest::Approx(f.probs[0]));
}

TEST_CASE("validate accepts a well-formed map") {
  auto map = tiny_map();
  CHECK_NOTHROW(map.validate());
}

TEST_CASE("validate rejects distributions that do not sum to one") {
  auto map = tiny_map();
  map.candidates[0].views[0].dist.probs = {0.5, 0.2, 0.2};
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validate rejects negative probabilities") {
  auto map = tiny_map();
  map.candidates[0].views[0].dist.probs = {1.1, -0.05, -0.05};
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validate rejects wrong feature length") {
  auto map = tiny_map();
  map.candidates[0].views[0].feature = {1.0};
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validate rejects non-positive view weights") {
  auto map = tiny_map();
  map.candidates[0].views[1].weight = 0.0;
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validate rejects duplicate candidate ids") {
  auto map = tiny_map();
  map.candidates.push_back(map.candidates[0]);
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validate rejects duplicate points in an extent") {
  auto map = tiny_map();
  map.candidates[0].extent = replan::PointSet{{{0, 0, 0}, {0, 0, 0}}};
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validate rejects a grid cell on an instance map") {
  auto map = tiny_map();
  map.candidates[0].extent = replan::GridCell{0, 0, {0.5, 0.5}};
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validate rejects out-of-range ground truth class") {
  auto map = tiny_map();
  map.candidates[0].gt_class = 3;
  CHECK_THROWS_AS(map.validate(), replan::ParseError);
}

TEST_CASE("validation errors name the offending candidate") {
  auto map = tiny_map();
  map.candidates[0].views[0].weight = -1.0;
  try {
    map.validate();
    FAIL("expected a validation error");
  } catch (const replan::Error& e) {
    CHECK(std::string(e.what()).find("candidate 4") != std::string::npos);
  }
}

TEST_CASE("find returns candidates by id") {
  auto map = tiny_map();
  CHECK(map.find(4) != nullptr);
  CHECK(map.find(4)->id == 4);
  CHECK(map.find(5) == nullptr);
}

TEST_CASE("confidence rejects out-of-range class index") {
  auto map = tiny_map();
  CHECK_THROWS_AS(replan::confidence(map.candidates[0], 3), replan::DomainError);
  CHECK_THROWS_AS(replan::confidence(map.candidates[0], -1), replan::DomainError);
}

}
