#pragma once

#include <optional>
#include <string_view>

#include "replan/semantic_map.hpp"

namespace replan {

enum class Measure { entropy, std_error, pairwise_kl };

const char* to_string(Measure m);
std::optional<Measure> measure_from_string(std::string_view s);

/// Additive smoothing applied to both arguments of every KL evaluation; each
/// entry gets the epsilon and the vector is renormalized.
inline constexpr double kKlSmoothingEpsilon = 1e-10;

/// A measure result. Single-view candidates get +infinity for the multi-view
/// measures; IEEE +inf already orders above every finite value.
struct UncertaintyValue {
  double value = 0.0;
  Measure measure = Measure::entropy;

  bool is_infinite() const;
};

/// Shannon entropy in nats: -sum_k p_k ln p_k, with 0 ln 0 = 0.
/// Natural log throughout; selection by argmax/argmin is base-invariant.
double entropy(const ClassDistribution& p);

/// KL(p || q) in nats over the smoothed, renormalized vectors. Non-negative;
/// exactly zero when p equals q. Sizes must match (DomainError otherwise).
double kl_divergence(const ClassDistribution& p, const ClassDistribution& q);

/// Channel-averaged standard error of the per-view features:
///   SE = (1/d) sum_k sigma_k / sqrt(m)
/// with population sigma (divide by the view count m). In weighted mode sigma
/// is the frequency-weighted population form and m is replaced by the
/// effective sample size (sum w)^2 / sum w^2; invariant under rescaling all
/// weights. One view yields +infinity.
UncertaintyValue stderr_channel_avg(const Candidate& c, bool weighted);

/// Mean symmetrized KL over unordered view pairs:
///   2 / (m (m-1)) * sum_{j<l} (KL(P_j||P_l) + KL(P_l||P_j)) / 2.
/// One view yields +infinity.
UncertaintyValue mean_pairwise_kl(const Candidate& c);

/// Entropy of the candidate's fused distribution.
double candidate_entropy(const Candidate& c);

/// Dispatch helper used by the replanner and the latency harness.
UncertaintyValue measure_candidate(const Candidate& c, Measure m, bool weighted_stderr);

}  // namespace replan
