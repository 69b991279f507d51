#pragma once

#include "rttcp/model.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rttcp {

enum class CostKind { normal, poisson, exponential, empirical };

struct CostFamily {
  CostKind kind = CostKind::normal;
  int quantile_count = 10;  // empirical only

  static CostFamily normal() { return {CostKind::normal, 10}; }
  static CostFamily poisson() { return {CostKind::poisson, 10}; }
  static CostFamily exponential() { return {CostKind::exponential, 10}; }
  static CostFamily empirical(int quantiles = 10) { return {CostKind::empirical, quantiles}; }

  /// Number of free parameters per segment.
  int theta_dim() const;
};

enum class PenaltyKind { AIC, BIC, HannanQuinn, MBIC };

struct PenaltyCriterion {
  PenaltyKind kind = PenaltyKind::MBIC;
};

enum class PresetName { cpt_normal, cpt_poisson, cpt_poisson_naive, cpt_exp, cpt_np };

struct DetectorPreset {
  PresetName name = PresetName::cpt_poisson;
  CostFamily family;
  bool baseline_removed = false;
  PenaltyCriterion penalty;

  int theta_dim() const { return family.theta_dim(); }

  static DetectorPreset make(PresetName name, PenaltyKind penalty = PenaltyKind::MBIC);
};

std::string_view to_string(PresetName name);
std::string_view to_string(PenaltyKind kind);
std::string_view to_string(CostKind kind);
std::optional<PresetName> parse_preset(std::string_view s);
std::optional<PenaltyKind> parse_penalty(std::string_view s);

inline constexpr Index kMinSegmentLength = 2;
inline constexpr double kNormalVarianceFloor = 1e-8;
inline constexpr double kExponentialFloorMs = 0.01;

struct BaselineResult {
  RttTrace trace;
  double baseline = 0.0;
  bool all_timeout = false;  ///< every sample was a timeout; output is all zero
};

/// Maps timeouts to kTimeoutRttMs and subtracts the minimum. The output has
/// no timeout markers and its minimum is exactly 0.
BaselineResult baseline_transform(const RttTrace& trace);
Series baseline_transform(const Series& mapped_values);

/// Round half up to the nearest non-negative integer.
Series quantize_for_poisson(const Series& values);

/// Quantile levels used by the empirical cost, computed on a full series.
Series empirical_quantile_levels(const Series& values, int quantile_count);

/// Negative maximized log-likelihood of one segment. For the empirical
/// family the levels and the full-series length come from the series the
/// segment belongs to; the two-argument form treats the segment as the
/// whole series.
double segment_cost(std::span<const double> values, const CostFamily& family);
double segment_cost(std::span<const double> values, const CostFamily& family,
                    const Series& empirical_levels, Index full_length);

/// Total penalty for a segmentation of n samples into segment_lengths.size()
/// segments. Segment lengths are only consulted by MBIC.
double penalty_value(PenaltyKind criterion, Index n, int theta_dim,
                     std::span<const Index> segment_lengths);
double penalty_value(PenaltyKind criterion, Index n, int theta_dim, Index changepoint_count);

/// O(1) segment cost queries over one series via prefix sums.
class SegmentCostModel {
 public:
  SegmentCostModel(const Series& values, const CostFamily& family);

  /// Cost of samples [begin, end).
  double operator()(Index begin, Index end) const;

  Index size() const { return n_; }
  const CostFamily& family() const { return family_; }

 private:
  CostFamily family_;
  Index n_ = 0;
  double centre_ = 0.0;
  Series sum_;
  Series sum_sq_;
  Eigen::MatrixXd below_;  // (n+1) x K cumulative half-counts
  double empirical_weight_ = 0.0;
};

/// Exact penalized segmentation by pruned dynamic programming.
///
/// Ties are resolved toward fewer changepoints, then toward the earliest last
/// changepoint. Two objective values within kTieTolerance (relative) count
/// as tied.
ChangepointSet optimal_segmentation(const Series& values, const CostFamily& family,
                                    PenaltyKind criterion);

inline constexpr double kTieTolerance = 1e-10;

/// Full pipeline: timeout mapping, optional baseline removal, Poisson
/// quantization or exponential floor, then optimal_segmentation.
ChangepointSet detect(const RttTrace& trace, const DetectorPreset& preset);

/// Values handed to the segmentation for this preset.
Series prepare_values(const RttTrace& trace, const DetectorPreset& preset);

}  // namespace rttcp
