#include "rttcp/score.hpp"

#include <algorithm>
#include <cmath>

namespace rttcp {

void MatchConfig::validate() const {
  if (window_w < 0) throw ValidationError("window_w must be >= 0");
  if (rho < 1) throw ValidationError("rho must be >= 1");
}

MatchConfig MatchConfig::from_minutes(double window_min, double rho_min, double interval_s) {
  if (!(interval_s > 0.0)) throw ValidationError("sampling interval must be positive");
  MatchConfig cfg;
  cfg.window_w = static_cast<Index>(std::llround(window_min * 60.0 / interval_s));
  cfg.rho = std::max<Index>(1, static_cast<Index>(std::llround(rho_min * 60.0 / interval_s)));
  cfg.validate();
  return cfg;
}

Index MatchSet::total_shift() const {
  Index s = 0;
  for (const auto& [t, d] : pairs) s += std::abs(t - d);
  return s;
}

MatchSet optimal_match(const GroundTruth& truth, const ChangepointSet& detections, const MatchConfig& cfg) {
  cfg.validate();
  const std::vector<std::int64_t> left(truth.positions.begin(), truth.positions.end());
  const std::vector<std::int64_t> right(detections.positions.begin(), detections.positions.end());
  const Matching m = min_cost_max_matching(left, right, cfg.window_w);
  MatchSet out;
  for (const auto& p : m.pairs) out.pairs.emplace_back(truth.positions[p.left], detections.positions[p.right]);
  for (const auto i : m.unmatched_left) out.unmatched_truth.push_back(truth.positions[i]);
  for (const auto j : m.unmatched_right) out.unmatched_detections.push_back(detections.positions[j]);
  return out;
}

OmegaWeights omega_weights(const Series& mapped_values, const GroundTruth& truth, const MatchConfig& cfg) {
  cfg.validate();
  const Index n = mapped_values.size();
  const Index k = truth.size();
  validate_positions(truth.positions, n);
  OmegaWeights out;
  out.omega.resize(static_cast<std::size_t>(k), 0.0);
  out.ignored.resize(static_cast<std::size_t>(k), false);
  for (Index i = 1; i <= k; ++i) {
    const auto ui = static_cast<std::size_t>(i - 1);
    const Index following = (i == k ? n : truth.positions[ui + 1]) - truth.positions[ui];
    if (following < cfg.rho) {
      out.ignored[ui] = true;
      continue;
    }
    const double length_factor =
        std::max(std::log2(static_cast<double>(following) / static_cast<double>(cfg.rho)), 0.0);
    const auto lv = level_and_volatility_diff(mapped_values, truth.positions, i);
    out.omega[ui] = length_factor * (lv.level + lv.volatility);
  }
  return out;
}

OmegaWeights omega_weights(const RttTrace& trace, const GroundTruth& truth, const MatchConfig& cfg) {
  return omega_weights(trace.mapped(), truth, cfg);
}

double f2_score(double precision, double recall) {
  const double denom = 4.0 * precision + recall;
  if (denom <= 0.0) return 0.0;
  return 5.0 * precision * recall / denom;
}

ScoreReport score(const GroundTruth& truth, const ChangepointSet& detections, const Series& mapped_values,
                  const MatchConfig& cfg) {
  validate_positions(detections.positions, mapped_values.size());
  ScoreReport r;
  r.matches = optimal_match(truth, detections, cfg);
  const OmegaWeights w = omega_weights(mapped_values, truth, cfg);
  r.omega = w.omega;

  std::vector<bool> matched(truth.positions.size(), false);
  for (const auto& [t, d] : r.matches.pairs) {
    const auto it = std::lower_bound(truth.positions.begin(), truth.positions.end(), t);
    matched[static_cast<std::size_t>(it - truth.positions.begin())] = true;
  }

  r.tp = static_cast<Index>(r.matches.pairs.size());
  r.fp = detections.size() - r.tp;
  double weight_total = 0.0;
  double weight_hit = 0.0;
  for (std::size_t i = 0; i < truth.positions.size(); ++i) {
    if (w.ignored[i]) {
      ++r.ignored_truths;
      continue;
    }
    weight_total += w.omega[i];
    if (matched[i]) {
      ++r.tp_truth;
      weight_hit += w.omega[i];
    } else {
      ++r.fn;
    }
  }

  r.precision = detections.size() == 0 ? 1.0 : static_cast<double>(r.tp) / static_cast<double>(detections.size());
  const Index counted = r.tp_truth + r.fn;
  r.recall = counted == 0 ? 1.0 : static_cast<double>(r.tp_truth) / static_cast<double>(counted);
  // With no weight at stake the weighted recall falls back to the plain one.
  r.recall_w = weight_total > 0.0 ? weight_hit / weight_total : r.recall;
  r.f2 = f2_score(r.precision, r.recall);
  r.f2_w = f2_score(r.precision, r.recall_w);
  return r;
}

ScoreReport score(const GroundTruth& truth, const ChangepointSet& detections, const RttTrace& trace,
                  const MatchConfig& cfg) {
  return score(truth, detections, trace.mapped(), cfg);
}

}  // namespace rttcp
