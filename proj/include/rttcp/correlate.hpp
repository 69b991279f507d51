#pragma once

#include "rttcp/pathscan.hpp"

#include <map>
#include <optional>
#include <vector>

namespace rttcp {

inline constexpr Epoch kDefaultCorrelationWindowS = 1800;

struct KindPrecision {
  Index path_changes = 0;
  Index matched = 0;
  /// matched / path_changes; empty when there are no changes of this kind.
  std::optional<double> precision;
};

struct CorrelationReport {
  struct Pair {
    Epoch rtt_change;
    std::size_t path_change;  ///< index into the input path changes
    Epoch shift;
  };
  std::vector<Pair> pairs;
  std::map<PathChangeKind, KindPrecision> per_kind;
  KindPrecision overall;
  Index unmatched_rtt_count = 0;
  Index unmatched_path_count = 0;
};

/// One-to-one matching of RTT change epochs to path changes of any kind
/// within `window` seconds, maximizing the number of pairs and then
/// minimizing the total time shift.
CorrelationReport correlate(const std::vector<Epoch>& rtt_changes, const std::vector<PathChange>& path_changes,
                            Epoch window = kDefaultCorrelationWindowS);

/// Epochs of the first sample after each changepoint.
std::vector<Epoch> changepoint_epochs(const RttTrace& trace, const ChangepointSet& cps);

}  // namespace rttcp
