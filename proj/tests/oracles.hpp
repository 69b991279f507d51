#pragma once

// Test-only reference implementations. They share no code with the library
// paths they check: costs are accumulated from raw samples, and matchings
// are found by exhaustive search.

#include "rttcp/detect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

namespace oracle {

using rttcp::CostKind;
using rttcp::Index;
using rttcp::PenaltyKind;

inline double sorted_median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

inline double pop_std(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

/// Quantile levels for the empirical cost, written from the published
/// recipe: p_k = 1 / (1 + (2n-1)^{-(-1 + (2k-1)/K)}), level = x_(floor((n-1) p_k)).
inline std::vector<double> quantile_levels(const std::vector<double>& x, int K) {
  std::vector<double> s = x;
  std::sort(s.begin(), s.end());
  const double n = static_cast<double>(x.size());
  std::vector<double> out;
  for (int k = 1; k <= K; ++k) {
    const double y = -1.0 + (2.0 * k - 1.0) / K;
    const double p = 1.0 / (1.0 + std::pow(2.0 * n - 1.0, -y));
    out.push_back(s[static_cast<std::size_t>(std::floor((n - 1.0) * p + 1e-9))]);
  }
  return out;
}

/// Segment costs for every (start, end) pair, accumulated start by start.
class CostTable {
 public:
  CostTable(const std::vector<double>& x, rttcp::CostFamily family) : n_(x.size()), cost_(n_ * (n_ + 1), 0.0) {
    std::vector<double> levels;
    if (family.kind == CostKind::empirical) levels = quantile_levels(x, family.quantile_count);
    const double weight = std::log(2.0 * static_cast<double>(n_) - 1.0) / family.quantile_count;
    for (std::size_t s = 0; s < n_; ++s) {
      long double sum = 0.0;
      std::vector<double> seg;
      std::vector<double> below(levels.size(), 0.0);
      for (std::size_t t = s + 1; t <= n_; ++t) {
        const double v = x[t - 1];
        sum += v;
        seg.push_back(v);
        for (std::size_t k = 0; k < levels.size(); ++k) below[k] += v < levels[k] ? 1.0 : (v == levels[k] ? 0.5 : 0.0);
        const double len = static_cast<double>(t - s);
        double c = 0.0;
        switch (family.kind) {
          case CostKind::normal: {
            const double mean = static_cast<double>(sum) / len;
            double ss = 0.0;
            for (double y : seg) ss += (y - mean) * (y - mean);
            const double var = std::max(ss / len, rttcp::kNormalVarianceFloor);
            c = len / 2.0 * (std::log(2.0 * std::numbers::pi) + std::log(var) + 1.0);
            break;
          }
          case CostKind::poisson: {
            const double lambda = static_cast<double>(sum) / len;
            if (lambda > 0) {
              for (double y : seg) c += lambda - y * std::log(lambda);
            }
            break;
          }
          case CostKind::exponential: {
            const double mean = static_cast<double>(sum) / len;
            for (double y : seg) c += std::log(mean) + y / mean;
            break;
          }
          case CostKind::empirical: {
            double acc = 0.0;
            for (double b : below) {
              const double f = b / len;
              if (f > 0.0 && f < 1.0) acc += len * (f * std::log(f) + (1.0 - f) * std::log(1.0 - f));
            }
            c = -weight * acc;
            break;
          }
        }
        cost_[s * (n_ + 1) + t] = c;
      }
    }
  }

  double operator()(std::size_t s, std::size_t t) const { return cost_[s * (n_ + 1) + t]; }

 private:
  std::size_t n_;
  std::vector<double> cost_;
};

inline double total_penalty(PenaltyKind kind, std::size_t n, int theta, const std::vector<std::size_t>& lengths) {
  const double dn = static_cast<double>(n);
  const double m = static_cast<double>(lengths.size() - 1);
  const double f = m + (m + 1.0) * theta;
  switch (kind) {
    case PenaltyKind::AIC: return 2.0 * f;
    case PenaltyKind::BIC: return std::log(dn) * f;
    case PenaltyKind::HannanQuinn: return 2.0 * std::log(std::log(dn)) * f;
    case PenaltyKind::MBIC: {
      double acc = 1.5 * m * std::log(dn);
      for (auto l : lengths) acc += 0.5 * std::log(static_cast<double>(l) / dn);
      return acc;
    }
  }
  return 0.0;
}

/// Optimal partitioning without pruning: for every end point, every start.
/// Same tie rule as the library (near-minimal values within the tolerance,
/// then fewer changepoints, then the earliest start).
inline std::vector<Index> exhaustive_segmentation(const std::vector<double>& x, rttcp::CostFamily family,
                                                  PenaltyKind kind) {
  const std::size_t n = x.size();
  constexpr std::size_t L = 2;
  if (n < 2 * L) return {};
  const CostTable cost(x, family);
  const double dn = static_cast<double>(n);
  const int theta = family.theta_dim();
  double beta = 0.0;
  switch (kind) {
    case PenaltyKind::AIC: beta = 2.0 * (1 + theta); break;
    case PenaltyKind::BIC: beta = std::log(dn) * (1 + theta); break;
    case PenaltyKind::HannanQuinn: beta = 2.0 * std::log(std::log(dn)) * (1 + theta); break;
    case PenaltyKind::MBIC: beta = 1.5 * std::log(dn); break;
  }
  const double tol = rttcp::kTieTolerance * (1.0 + std::abs(cost(0, n)) + dn);
  std::vector<double> F(n + 1, std::numeric_limits<double>::infinity());
  std::vector<std::size_t> last(n + 1, 0), count(n + 1, 0);
  F[0] = -beta;
  for (std::size_t t = L; t <= n; ++t) {
    std::vector<std::pair<std::size_t, double>> cand;
    double lo = std::numeric_limits<double>::infinity();
    for (std::size_t s = 0; s + L <= t; ++s) {
      if (s != 0 && s < L) continue;
      double c = cost(s, t);
      if (kind == PenaltyKind::MBIC) c += 0.5 * std::log(static_cast<double>(t - s) / dn);
      const double v = F[s] + c + beta;
      cand.emplace_back(s, v);
      lo = std::min(lo, v);
    }
    std::size_t best_cnt = std::numeric_limits<std::size_t>::max();
    for (const auto& [s, v] : cand) {
      if (v > lo + tol) continue;
      const std::size_t cnt = count[s] + (s > 0 ? 1 : 0);
      if (cnt < best_cnt) {
        best_cnt = cnt;
        F[t] = v;
        last[t] = s;
      }
    }
    count[t] = best_cnt;
  }
  std::vector<Index> out;
  for (std::size_t t = n; last[t] > 0; t = last[t]) out.push_back(static_cast<Index>(last[t]));
  std::reverse(out.begin(), out.end());
  return out;
}

/// Objective of a given segmentation (segment costs plus total penalty).
inline double objective(const std::vector<double>& x, rttcp::CostFamily family, PenaltyKind kind,
                        const std::vector<Index>& cps) {
  const CostTable cost(x, family);
  std::vector<std::size_t> lengths;
  double acc = 0.0;
  std::size_t prev = 0;
  for (std::size_t i = 0; i <= cps.size(); ++i) {
    const std::size_t end = i < cps.size() ? static_cast<std::size_t>(cps[i]) : x.size();
    acc += cost(prev, end);
    lengths.push_back(end - prev);
    prev = end;
  }
  return acc + total_penalty(kind, x.size(), family.theta_dim(), lengths);
}

/// Enumerates every segmentation with segments of length >= 2 (n small).
inline double best_objective_by_enumeration(const std::vector<double>& x, rttcp::CostFamily family,
                                            PenaltyKind kind) {
  const std::size_t n = x.size();
  double best = std::numeric_limits<double>::infinity();
  const std::size_t inner = n - 1;  // candidate positions 1..n-1
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << inner); ++mask) {
    std::vector<Index> cps;
    for (std::size_t b = 0; b < inner; ++b)
      if (mask >> b & 1) cps.push_back(static_cast<Index>(b + 1));
    bool ok = true;
    Index prev = 0;
    for (std::size_t i = 0; i <= cps.size() && ok; ++i) {
      const Index end = i < cps.size() ? cps[i] : static_cast<Index>(n);
      ok = end - prev >= 2;
      prev = end;
    }
    if (ok) best = std::min(best, objective(x, family, kind, cps));
  }
  return best;
}

struct MatchSummary {
  std::size_t cardinality = 0;
  std::int64_t shift = 0;
};

/// Exhaustive search over which detections each truth takes (bitmask over
/// detections); returns the maximum cardinality and its minimum shift.
inline MatchSummary brute_force_match(const std::vector<std::int64_t>& truth, const std::vector<std::int64_t>& det,
                                      std::int64_t w) {
  const std::size_t m = det.size();
  struct Best {
    std::size_t card;
    std::int64_t shift;
  };
  auto better = [](Best a, Best b) { return a.card != b.card ? a.card > b.card : a.shift < b.shift; };
  std::vector<std::vector<Best>> memo(truth.size() + 1, std::vector<Best>(std::size_t{1} << m, {0, -1}));
  std::vector<std::vector<char>> done(truth.size() + 1, std::vector<char>(std::size_t{1} << m, 0));
  auto rec = [&](auto&& self, std::size_t i, std::size_t used) -> Best {
    if (i == truth.size()) return {0, 0};
    if (done[i][used]) return memo[i][used];
    Best best = self(self, i + 1, used);
    for (std::size_t j = 0; j < m; ++j) {
      if (used >> j & 1) continue;
      const std::int64_t d = truth[i] > det[j] ? truth[i] - det[j] : det[j] - truth[i];
      if (d > w) continue;
      Best sub = self(self, i + 1, used | (std::size_t{1} << j));
      sub.card += 1;
      sub.shift += d;
      if (better(sub, best)) best = sub;
    }
    done[i][used] = 1;
    memo[i][used] = best;
    return best;
  };
  const Best b = rec(rec, 0, 0);
  return {b.card, b.shift};
}

}  // namespace oracle
