#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

namespace replan {

/// Deterministic 64-bit generator (splitmix64). Chosen over <random> engines so
/// that streams are reproducible byte-for-byte across standard libraries; the
/// distribution helpers below consume a fixed number of raw draws per call.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  /// Derives an independent stream from a base seed and a path of indices.
  static Rng derive(std::uint64_t seed, std::initializer_list<std::uint64_t> path);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 random bits.
  double next_double();

  /// Uniform in [0, n). n must be positive.
  std::size_t pick_index(std::size_t n);

  /// Standard normal via Box-Muller (two raw draws per call).
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang; accepts any shape >= 0 (shape 0 -> 0).
  double gamma(double shape);

  /// Dirichlet draw; zero alphas stay exactly zero. A degenerate draw (all
  /// components underflow) falls back to the normalized alpha vector.
  std::vector<double> dirichlet(const std::vector<double>& alpha);

 private:
  std::uint64_t state_;
};

/// splitmix64 finalizer, also used for seed path mixing.
std::uint64_t mix64(std::uint64_t x);

}  // namespace replan
