#pragma once

#include "rttcp/match.hpp"
#include "rttcp/model.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace rttcp {

/// Tolerances in samples. The defaults are 8 minutes at a 4-minute cadence.
struct MatchConfig {
  Index window_w = 2;
  Index rho = 2;

  void validate() const;

  /// Converts minute tolerances to samples using the trace cadence.
  static MatchConfig from_minutes(double window_min, double rho_min, double interval_s);
};

struct MatchSet {
  std::vector<std::pair<Index, Index>> pairs;  ///< (truth position, detection position)
  std::vector<Index> unmatched_truth;
  std::vector<Index> unmatched_detections;

  Index total_shift() const;
};

MatchSet optimal_match(const GroundTruth& truth, const ChangepointSet& detections, const MatchConfig& cfg);

/// Importance weight of every truth point plus whether it is ignored because
/// the segment following it is shorter than rho.
struct OmegaWeights {
  std::vector<double> omega;
  std::vector<bool> ignored;
};

OmegaWeights omega_weights(const RttTrace& trace, const GroundTruth& truth, const MatchConfig& cfg);
OmegaWeights omega_weights(const Series& mapped_values, const GroundTruth& truth, const MatchConfig& cfg);

struct ScoreReport {
  Index tp = 0;        ///< matched detections
  Index fp = 0;        ///< unmatched detections
  Index fn = 0;        ///< unmatched non-ignored truths
  Index tp_truth = 0;  ///< matched non-ignored truths
  Index ignored_truths = 0;
  double precision = 1.0;
  double recall = 1.0;
  double recall_w = 1.0;
  double f2 = 0.0;
  double f2_w = 0.0;
  std::vector<double> omega;
  MatchSet matches;
};

/// F-beta with beta = 2; zero when both inputs are zero.
double f2_score(double precision, double recall);

ScoreReport score(const GroundTruth& truth, const ChangepointSet& detections, const RttTrace& trace,
                  const MatchConfig& cfg);
ScoreReport score(const GroundTruth& truth, const ChangepointSet& detections, const Series& mapped_values,
                  const MatchConfig& cfg);

}  // namespace rttcp
