#include "doctest.h"

#include <cmath>
#include <limits>
#include <string_view>
#include <vector>

#include "oracles.hpp"
#include "replan/semantic_map.hpp"
#include "replan/error.hpp"
#include "replan/uncertainty.hpp"

namespace {

replan::ClassDistribution dist(std::vector<double> p) {
  replan::ClassDistribution d;
  d.probs = std::move(p);
  return d;
}

replan::Candidate from_views(const std::vector<std::vector<double>>& dists,
                             const std::vector<std::vector<double>>& feats,
                             const std::vector<double>& weights = {}) {
  replan::Candidate c;
  for (std::size_t i = 0; i < dists.size(); ++i) {
    replan::ViewObservation v;
    v.weight = weights.empty() ? 1.0 : weights[i];
    v.feature = feats.empty() ? std::vector<double>{0.0} : feats[i];
    v.dist.probs = dists[i];
    c.views.push_back(v);
  }
  return c;
}

}  // namespace

TEST_SUITE("uncertainty") {

TEST_CASE("entropy of uniform distributions is log m") {
  for (std::size_t m : {2u, 4u, 10u}) {
    std::vector<double> p(m, 1.0 / static_cast<double>(m));
    CHECK(std::abs(replan::entropy(dist(p)) - std::log(static_cast<double>(m))) < 1e-12);
  }
}

TEST_CASE("entropy of a one-hot distribution is zero") {
  CHECK(replan::entropy(dist({0.0, 1.0, 0.0})) == 0.0);
}

TEST_CASE("entropy frozen value") {
  // -(0.5 ln 0.5 + 2 * 0.25 ln 0.25) = 1.5 ln 2
  CHECK(replan::entropy(dist({0.5, 0.25, 0.25})) ==
        doctest::Approx(1.0397207708399179).epsilon(1e-15));
}

TEST_CASE("entropy matches the direct sum on random distributions") {
  oracle::Random rng(101);
  for (int i = 0; i < 50; ++i) {
    auto p = rng.simplex(6);
    CHECK(replan::entropy(dist(p)) == doctest::Approx(oracle::entropy(p)).epsilon(1e-14));
  }
}

TEST_CASE("kl of a distribution with itself is zero") {
  auto p = dist({0.3, 0.45, 0.25});
  CHECK(std::abs(replan::kl_divergence(p, p)) < 1e-12);
}

TEST_CASE("kl is non-negative on random pairs") {
  oracle::Random rng(103);
  for (int i = 0; i < 100; ++i) {
    auto p = rng.simplex(5);
    auto q = rng.simplex(5);
    CHECK(replan::kl_divergence(dist(p), dist(q)) >= -1e-15);
  }
}

TEST_CASE("kl matches the smoothed oracle") {
  oracle::Random rng(105);
  for (int i = 0; i < 50; ++i) {
    auto p = rng.simplex(7);
    auto q = rng.simplex(7);
    CHECK(replan::kl_divergence(dist(p), dist(q)) ==
          doctest::Approx(oracle::kl_smoothed(p, q)).epsilon(1e-12));
  }
}

TEST_CASE("kl with zeros stays finite via smoothing") {
  double d = replan::kl_divergence(dist({1.0, 0.0}), dist({0.0, 1.0}));
  CHECK(std::isfinite(d));
  CHECK(d > 0.0);
}

TEST_CASE("kl rejects mismatched sizes") {
  CHECK_THROWS_AS(replan::kl_divergence(dist({1.0}), dist({0.5, 0.5})),
                  replan::DomainError);
}

TEST_CASE("pairwise kl frozen value for a mirrored pair") {
  // Symmetrized KL of [0.9,0.1] vs [0.1,0.9] is 0.8 ln 9; smoothing shifts it
  // by well under 1e-8.
  auto c = from_views({{0.9, 0.1}, {0.1, 0.9}}, {});
  double expect = 0.8 * std::log(9.0);
  CHECK(std::abs(replan::mean_pairwise_kl(c).value - expect) < 1e-8);
  CHECK(std::abs(oracle::kl_raw({0.9, 0.1}, {0.1, 0.9}) +
                 oracle::kl_raw({0.1, 0.9}, {0.9, 0.1}) - 2.0 * expect) < 1e-9);
}

TEST_CASE("pairwise kl of identical views is zero") {
  auto c = from_views({{0.6, 0.4}, {0.6, 0.4}, {0.6, 0.4}}, {});
  CHECK(std::abs(replan::mean_pairwise_kl(c).value) < 1e-12);
}

TEST_CASE("pairwise kl matches the double-loop oracle") {
  oracle::Random rng(107);
  for (int i = 0; i < 30; ++i) {
    auto c = oracle::random_candidate(rng, i, 5, 6, 3);
    if (c.views.size() < 2) continue;
    CHECK(replan::mean_pairwise_kl(c).value ==
          doctest::Approx(oracle::mean_pairwise_kl(c)).epsilon(1e-11));
  }
}

TEST_CASE("pairwise kl is permutation invariant") {
  oracle::Random rng(109);
  auto c = oracle::random_candidate(rng, 0, 4, 5, 2);
  while (c.views.size() < 3) c = oracle::random_candidate(rng, 0, 4, 5, 2);
  auto shuffled = c;
  std::swap(shuffled.views[0], shuffled.views.back());
  CHECK(replan::mean_pairwise_kl(c).value ==
        doctest::Approx(replan::mean_pairwise_kl(shuffled).value).epsilon(1e-12));
}

TEST_CASE("stderr frozen value for collinear features") {
  auto c = from_views({{1.0}, {1.0}, {1.0}},
                      {{0.0, 0.0}, {2.0, 0.0}, {4.0, 0.0}});
  // Channel 0 population sigma is sqrt(8/3), channel 1 is 0; averaged over
  // d=2 channels and divided by sqrt(3): sqrt(2)/3.
  double expect = std::sqrt(2.0) / 3.0;
  CHECK(replan::stderr_channel_avg(c, false).value ==
        doctest::Approx(expect).epsilon(1e-15));
  CHECK(oracle::stderr_channel_avg(c, false) == doctest::Approx(expect).epsilon(1e-15));
}

TEST_CASE("stderr matches the two-pass oracle in both modes") {
  oracle::Random rng(111);
  for (int i = 0; i < 40; ++i) {
    auto c = oracle::random_candidate(rng, i, 5, 4, 6);
    if (c.views.size() < 2) continue;
    CHECK(replan::stderr_channel_avg(c, false).value ==
          doctest::Approx(oracle::stderr_channel_avg(c, false)).epsilon(1e-12));
    CHECK(replan::stderr_channel_avg(c, true).value ==
          doctest::Approx(oracle::stderr_channel_avg(c, true)).epsilon(1e-12));
  }
}

TEST_CASE("weighted stderr with equal weights equals unweighted") {
  oracle::Random rng(113);
  auto c = oracle::random_candidate(rng, 0, 5, 4, 6);
  while (c.views.size() < 2) c = oracle::random_candidate(rng, 0, 5, 4, 6);
  for (auto& v : c.views) v.weight = 0.37;
  CHECK(replan::stderr_channel_avg(c, true).value ==
        doctest::Approx(replan::stderr_channel_avg(c, false).value).epsilon(1e-9));
}

TEST_CASE("weighted stderr is invariant to weight scaling") {
  oracle::Random rng(115);
  auto c = oracle::random_candidate(rng, 0, 5, 4, 6);
  while (c.views.size() < 2) c = oracle::random_candidate(rng, 0, 5, 4, 6);
  auto scaled = c;
  for (auto& v : scaled.views) v.weight *= 17.0;
  CHECK(replan::stderr_channel_avg(c, true).value ==
        doctest::Approx(replan::stderr_channel_avg(scaled, true).value).epsilon(1e-12));
}

TEST_CASE("duplicating all views strictly lowers a positive stderr") {
  auto c = from_views({{1.0}, {1.0}}, {{0.0, 1.0}, {2.0, 3.0}});
  auto doubled = c;
  doubled.views.insert(doubled.views.end(), c.views.begin(), c.views.end());
  double one = replan::stderr_channel_avg(c, false).value;
  double two = replan::stderr_channel_avg(doubled, false).value;
  CHECK(one > 0.0);
  CHECK(two < one);
  CHECK(two == doctest::Approx(one / std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("single view yields infinite stderr and pairwise kl") {
  auto c = from_views({{0.5, 0.5}}, {{1.0, 2.0}});
  auto se = replan::stderr_channel_avg(c, false);
  auto kl = replan::mean_pairwise_kl(c);
  CHECK(se.is_infinite());
  CHECK(std::isinf(se.value));
  CHECK(kl.is_infinite());
  CHECK(std::isinf(kl.value));
}

TEST_CASE("candidate entropy uses the fused distribution") {
  auto c = from_views({{0.9, 0.1}, {0.1, 0.9}}, {});
  // Fused is uniform, so entropy is ln 2 even though each view is peaked.
  CHECK(replan::candidate_entropy(c) == doctest::Approx(std::log(2.0)).epsilon(1e-14));
}

TEST_CASE("measure dispatch matches the direct calls") {
  oracle::Random rng(117);
  auto c = oracle::random_candidate(rng, 0, 5, 4, 3);
  while (c.views.size() < 2) c = oracle::random_candidate(rng, 0, 5, 4, 3);
  CHECK(replan::measure_candidate(c, replan::Measure::entropy, false).value ==
        replan::candidate_entropy(c));
  CHECK(replan::measure_candidate(c, replan::Measure::std_error, true).value ==
        replan::stderr_channel_avg(c, true).value);
  CHECK(replan::measure_candidate(c, replan::Measure::pairwise_kl, false).value ==
        replan::mean_pairwise_kl(c).value);
}

TEST_CASE("measure names round-trip") {
  using replan::Measure;
  for (Measure m : {Measure::entropy, Measure::std_error, Measure::pairwise_kl}) {
    auto back = replan::measure_from_string(replan::to_string(m));
    REQUIRE(back.has_value());
    CHECK(*back == m);
  }
  CHECK(std::string_view(replan::to_string(Measure::std_error)) == "stderr");
  CHECK(std::string_view(replan::to_string(Measure::pairwise_kl)) == "pwkl");
  CHECK(!replan::measure_from_string("variance").has_value());
}

}
