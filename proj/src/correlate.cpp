#include "rttcp/correlate.hpp"

#include "rttcp/match.hpp"

#include <algorithm>

namespace rttcp {

namespace {

void finish(KindPrecision& k) {
  if (k.path_changes > 0) k.precision = static_cast<double>(k.matched) / static_cast<double>(k.path_changes);
}

}  // namespace

CorrelationReport correlate(const std::vector<Epoch>& rtt_changes, const std::vector<PathChange>& path_changes,
                            Epoch window) {
  std::vector<Epoch> path_epochs;
  path_epochs.reserve(path_changes.size());
  for (const auto& c : path_changes) path_epochs.push_back(c.epoch);

  const Matching m = min_cost_max_matching(rtt_changes, path_epochs, window);

  CorrelationReport r;
  std::vector<char> matched(path_changes.size(), 0);
  for (const auto& p : m.pairs) {
    r.pairs.push_back({rtt_changes[p.left], p.right, p.shift});
    matched[p.right] = 1;
  }
  for (const auto kind : {PathChangeKind::AS, PathChangeKind::IXP, PathChangeKind::IFP}) r.per_kind[kind];
  for (std::size_t i = 0; i < path_changes.size(); ++i) {
    auto& k = r.per_kind[path_changes[i].kind];
    ++k.path_changes;
    ++r.overall.path_changes;
    if (matched[i]) {
      ++k.matched;
      ++r.overall.matched;
    }
  }
  for (auto& [kind, k] : r.per_kind) finish(k);
  finish(r.overall);
  r.unmatched_rtt_count = static_cast<Index>(m.unmatched_left.size());
  r.unmatched_path_count = static_cast<Index>(m.unmatched_right.size());
  return r;
}

std::vector<Epoch> changepoint_epochs(const RttTrace& trace, const ChangepointSet& cps) {
  validate_positions(cps.positions, trace.size());
  std::vector<Epoch> out;
  out.reserve(cps.positions.size());
  for (const Index p : cps.positions) out.push_back(trace.epochs()[static_cast<std::size_t>(p)]);
  return out;
}

}  // namespace rttcp
