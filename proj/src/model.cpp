#include "rttcp/model.hpp"

#include <string>

namespace rttcp {

RttTrace::RttTrace(std::vector<Epoch> epochs, Series rtt, double interval_hint)
    : RttTrace(std::move(epochs), std::move(rtt), interval_hint, false) {}

RttTrace RttTrace::derived(std::vector<Epoch> epochs, Series values, double interval_hint) {
  return RttTrace(std::move(epochs), std::move(values), interval_hint, true);
}

RttTrace::RttTrace(std::vector<Epoch> epochs, Series rtt, double interval_hint, bool allow_zero)
    : epochs_(std::move(epochs)), rtt_(std::move(rtt)), interval_hint_(interval_hint) {
  if (static_cast<Index>(epochs_.size()) != rtt_.size())
    throw ValidationError("trace: epoch and rtt lengths differ");
  if (!(interval_hint_ > 0.0)) throw ValidationError("trace: interval hint must be positive");
  for (std::size_t i = 1; i < epochs_.size(); ++i) {
    if (epochs_[i] <= epochs_[i - 1])
      throw ValidationError("trace: epochs not strictly increasing at sample " + std::to_string(i));
  }
  for (Index i = 0; i < rtt_.size(); ++i) {
    const double v = rtt_[i];
    const bool ok = allow_zero ? std::isfinite(v) && v >= 0.0 : is_timeout(v) || (std::isfinite(v) && v > 0.0);
    if (!ok)
      throw ValidationError("trace: rtt at sample " + std::to_string(i) + " is neither positive nor a timeout");
  }
}

Index RttTrace::timeout_count() const {
  return rtt_.unaryExpr([](double v) { return is_timeout(v) ? 1.0 : 0.0; }).sum();
}

Series RttTrace::mapped() const {
  return rtt_.unaryExpr([](double v) { return is_timeout(v) ? kTimeoutRttMs : v; });
}

void validate_positions(const std::vector<Index>& positions, Index n) {
  Index prev = 0;
  for (const Index p : positions) {
    if (p < 1 || p > n - 1)
      throw ValidationError("changepoint " + std::to_string(p) + " outside 1.." + std::to_string(n - 1));
    if (p <= prev) throw ValidationError("changepoints not strictly increasing");
    prev = p;
  }
}

std::vector<SegmentStats> segments(const Series& values, const std::vector<Index>& positions) {
  const Index n = values.size();
  validate_positions(positions, n);
  std::vector<SegmentStats> out;
  out.reserve(positions.size() + 1);
  Index begin = 0;
  for (std::size_t i = 0; i <= positions.size(); ++i) {
    const Index end = i < positions.size() ? positions[i] : n;
    out.push_back(segment_stats(values.segment(begin, end - begin)));
    begin = end;
  }
  return out;
}

std::vector<SegmentStats> segments(const RttTrace& trace, const ChangepointSet& cps) {
  return segments(trace.mapped(), cps.positions);
}

LevelVolatility level_and_volatility_diff(const Series& values, const std::vector<Index>& positions,
                                          Index i) {
  const Index k = static_cast<Index>(positions.size());
  if (i < 1 || i > k) throw ValidationError("truth index out of range");
  validate_positions(positions, values.size());
  // Sentinels: the first segment starts at sample 0, the last ends at n.
  const Index left_begin = i == 1 ? 0 : positions[i - 2];
  const Index split = positions[i - 1];
  const Index right_end = i == k ? values.size() : positions[i];
  const auto left = segment_stats(values.segment(left_begin, split - left_begin));
  const auto right = segment_stats(values.segment(split, right_end - split));
  return {std::abs(left.median - right.median), std::abs(left.std - right.std)};
}

LevelVolatility level_and_volatility_diff(const RttTrace& trace, const GroundTruth& truth, Index i) {
  return level_and_volatility_diff(trace.mapped(), truth.positions, i);
}

}  // namespace rttcp
