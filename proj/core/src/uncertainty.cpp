#include "replan/uncertainty.hpp"

#include <cmath>
#include <limits>

#include "replan/error.hpp"

namespace replan {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

const char* to_string(Measure m) {
  switch (m) {
    case Measure::entropy: return "entropy";
    case Measure::std_error: return "stderr";
    case Measure::pairwise_kl: return "pwkl";
  }
  return "?";
}

std::optional<Measure> measure_from_string(std::string_view s) {
  if (s == "entropy") return Measure::entropy;
  if (s == "stderr") return Measure::std_error;
  if (s == "pwkl") return Measure::pairwise_kl;
  return std::nullopt;
}

bool UncertaintyValue::is_infinite() const { return value == kInf; }

double entropy(const ClassDistribution& p) {
  double h = 0.0;
  for (double x : p.probs) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

double kl_divergence(const ClassDistribution& p, const ClassDistribution& q) {
  if (p.size() != q.size()) throw DomainError("kl_divergence: size mismatch");
  const std::size_t m = p.probs.size();
  const double norm = 1.0 + static_cast<double>(m) * kKlSmoothingEpsilon;
  double kl = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double ps = (p.probs[k] + kKlSmoothingEpsilon) / norm;
    double qs = (q.probs[k] + kKlSmoothingEpsilon) / norm;
    kl += ps * std::log(ps / qs);
  }
  return kl;
}

UncertaintyValue stderr_channel_avg(const Candidate& c, bool weighted) {
  const int m = c.view_count();
  if (m < 2) return {kInf, Measure::std_error};
  const std::size_t d = c.views.front().feature.size();
  if (d == 0) throw DomainError("stderr_channel_avg: zero-dimensional features");

  double wsum = 0.0;
  double w2sum = 0.0;
  for (const auto& v : c.views) {
    double w = weighted ? v.weight : 1.0;
    wsum += w;
    w2sum += w * w;
  }
  const double m_eff = wsum * wsum / w2sum;  // equals m when unweighted

  double sigma_sum = 0.0;
  for (std::size_t k = 0; k < d; ++k) {
    double mean = 0.0;
    for (const auto& v : c.views) {
      double w = weighted ? v.weight : 1.0;
      mean += w * v.feature[k];
    }
    mean /= wsum;
    double var = 0.0;
    for (const auto& v : c.views) {
      double w = weighted ? v.weight : 1.0;
      double dx = v.feature[k] - mean;
      var += w * dx * dx;
    }
    var /= wsum;  // population form
    sigma_sum += std::sqrt(var);
  }
  double se = sigma_sum / (static_cast<double>(d) * std::sqrt(m_eff));
  return {se, Measure::std_error};
}

UncertaintyValue mean_pairwise_kl(const Candidate& c) {
  const int m = c.view_count();
  if (m < 2) return {kInf, Measure::pairwise_kl};
  double sum = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int l = j + 1; l < m; ++l) {
      double forward = kl_divergence(c.views[j].dist, c.views[l].dist);
      double backward = kl_divergence(c.views[l].dist, c.views[j].dist);
      sum += 0.5 * (forward + backward);
    }
  }
  double pairs = 0.5 * static_cast<double>(m) * static_cast<double>(m - 1);
  return {sum / pairs, Measure::pairwise_kl};
}

double candidate_entropy(const Candidate& c) { return entropy(fused_distribution(c)); }

UncertaintyValue measure_candidate(const Candidate& c, Measure m, bool weighted_stderr) {
  switch (m) {
    case Measure::entropy: return {candidate_entropy(c), Measure::entropy};
    case Measure::std_error: return stderr_channel_avg(c, weighted_stderr);
    case Measure::pairwise_kl: return mean_pairwise_kl(c);
  }
  throw DomainError("measure_candidate: unknown measure");
}

}  // namespace replan
