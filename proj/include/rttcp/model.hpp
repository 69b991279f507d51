#pragma once

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace rttcp {

using Index = Eigen::Index;
using Epoch = std::int64_t;
using Series = Eigen::VectorXd;

/// Thrown whenever an input violates a documented precondition.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Storage marker for a lost probe. Timeouts stay distinguishable in a trace
/// and are only replaced by kTimeoutRttMs when statistics are computed.
inline constexpr double kTimeout = std::numeric_limits<double>::quiet_NaN();
inline constexpr double kTimeoutRttMs = 1000.0;

inline bool is_timeout(double rtt) { return std::isnan(rtt); }

/// A timestamped RTT sample sequence.
///
/// Epochs are strictly increasing seconds; every RTT is either finite and
/// positive or the timeout marker.
class RttTrace {
 public:
  RttTrace() = default;
  RttTrace(std::vector<Epoch> epochs, Series rtt, double interval_hint = 240.0);

  /// A derived series (for example baseline-removed) where zero values are
  /// legal. Values must still be finite and non-negative.
  static RttTrace derived(std::vector<Epoch> epochs, Series values, double interval_hint);

  Index size() const { return rtt_.size(); }
  bool empty() const { return rtt_.size() == 0; }

  const std::vector<Epoch>& epochs() const { return epochs_; }
  const Series& rtt() const { return rtt_; }
  double interval_hint() const { return interval_hint_; }

  Index timeout_count() const;

  /// RTT values with every timeout replaced by kTimeoutRttMs.
  Series mapped() const;

 private:
  RttTrace(std::vector<Epoch> epochs, Series rtt, double interval_hint, bool allow_zero);

  std::vector<Epoch> epochs_;
  Series rtt_;
  double interval_hint_ = 240.0;
};

/// Ordered changepoint positions. Position i is the last sample of the left
/// segment, equivalently the 0-based index of the first sample on the right.
struct ChangepointSet {
  std::vector<Index> positions;
  std::string method_tag;
  std::vector<std::string> warnings;

  Index size() const { return static_cast<Index>(positions.size()); }
};

enum class TruthSource { human, synthetic };

struct GroundTruth {
  std::vector<Index> positions;
  TruthSource source = TruthSource::human;

  Index size() const { return static_cast<Index>(positions.size()); }
};

struct SegmentStats {
  double median = 0.0;
  double std = 0.0;
  Index length = 0;
};

/// Throws unless positions are strictly increasing and within 1..n-1.
void validate_positions(const std::vector<Index>& positions, Index n);

// Statistics on dense expressions. All take at least one element.

template <typename Derived>
typename Derived::Scalar median(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> v(static_cast<std::size_t>(values.size()));
  for (Index i = 0; i < values.size(); ++i) v[static_cast<std::size_t>(i)] = values.derived().coeff(i);
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const Scalar upper = *mid;
  const Scalar lower = *std::max_element(v.begin(), mid);
  return (lower + upper) / Scalar(2);
}

/// Population standard deviation (divides by the length).
template <typename Derived>
typename Derived::Scalar population_std(const Eigen::DenseBase<Derived>& values) {
  using Scalar = typename Derived::Scalar;
  const Scalar mean = values.mean();
  const Scalar ss = (values.derived().array() - mean).square().sum();
  return std::sqrt(ss / Scalar(values.size()));
}

template <typename Derived>
SegmentStats segment_stats(const Eigen::DenseBase<Derived>& values) {
  return {static_cast<double>(median(values)), static_cast<double>(population_std(values)),
          values.size()};
}

/// Per-segment statistics of the timeout-mapped trace, in order.
std::vector<SegmentStats> segments(const RttTrace& trace, const ChangepointSet& cps);
std::vector<SegmentStats> segments(const Series& values, const std::vector<Index>& positions);

struct LevelVolatility {
  double level = 0.0;       ///< |difference of medians|
  double volatility = 0.0;  ///< |difference of standard deviations|
};

/// Level and volatility difference across the i-th truth point (1-based).
LevelVolatility level_and_volatility_diff(const RttTrace& trace, const GroundTruth& truth, Index i);
LevelVolatility level_and_volatility_diff(const Series& values, const std::vector<Index>& positions,
                                          Index i);

}  // namespace rttcp
