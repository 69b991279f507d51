#include "rttcp/detect.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

namespace rttcp {

int CostFamily::theta_dim() const {
  switch (kind) {
    case CostKind::normal: return 2;
    case CostKind::poisson:
    case CostKind::exponential: return 1;
    case CostKind::empirical: return quantile_count;
  }
  return 1;
}

DetectorPreset DetectorPreset::make(PresetName name, PenaltyKind penalty) {
  DetectorPreset p;
  p.name = name;
  p.penalty = {penalty};
  switch (name) {
    case PresetName::cpt_normal: p.family = CostFamily::normal(); break;
    case PresetName::cpt_poisson:
      p.family = CostFamily::poisson();
      p.baseline_removed = true;
      break;
    case PresetName::cpt_poisson_naive: p.family = CostFamily::poisson(); break;
    case PresetName::cpt_exp:
      p.family = CostFamily::exponential();
      p.baseline_removed = true;
      break;
    case PresetName::cpt_np: p.family = CostFamily::empirical(10); break;
  }
  return p;
}

std::string_view to_string(PresetName name) {
  switch (name) {
    case PresetName::cpt_normal: return "cpt_normal";
    case PresetName::cpt_poisson: return "cpt_poisson";
    case PresetName::cpt_poisson_naive: return "cpt_poisson_naive";
    case PresetName::cpt_exp: return "cpt_exp";
    case PresetName::cpt_np: return "cpt_np";
  }
  return "?";
}

std::string_view to_string(PenaltyKind kind) {
  switch (kind) {
    case PenaltyKind::AIC: return "AIC";
    case PenaltyKind::BIC: return "BIC";
    case PenaltyKind::HannanQuinn: return "HQ";
    case PenaltyKind::MBIC: return "MBIC";
  }
  return "?";
}

std::string_view to_string(CostKind kind) {
  switch (kind) {
    case CostKind::normal: return "normal";
    case CostKind::poisson: return "poisson";
    case CostKind::exponential: return "exponential";
    case CostKind::empirical: return "empirical";
  }
  return "?";
}

std::optional<PresetName> parse_preset(std::string_view s) {
  for (auto p : {PresetName::cpt_normal, PresetName::cpt_poisson, PresetName::cpt_poisson_naive,
                 PresetName::cpt_exp, PresetName::cpt_np}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

std::optional<PenaltyKind> parse_penalty(std::string_view s) {
  if (s == "AIC") return PenaltyKind::AIC;
  if (s == "BIC" || s == "SIC") return PenaltyKind::BIC;
  if (s == "HQ" || s == "HannanQuinn") return PenaltyKind::HannanQuinn;
  if (s == "MBIC") return PenaltyKind::MBIC;
  return std::nullopt;
}

// --- transforms -----------------------------------------------------------

Series baseline_transform(const Series& mapped_values) {
  if (mapped_values.size() == 0) throw ValidationError("baseline_transform: empty series");
  return mapped_values.array() - mapped_values.minCoeff();
}

BaselineResult baseline_transform(const RttTrace& trace) {
  if (trace.empty()) throw ValidationError("baseline_transform: empty trace");
  BaselineResult out;
  const Series mapped = trace.mapped();
  out.baseline = mapped.minCoeff();
  out.all_timeout = trace.timeout_count() == trace.size();
  out.trace = RttTrace::derived(trace.epochs(), mapped.array() - out.baseline, trace.interval_hint());
  return out;
}

Series quantize_for_poisson(const Series& values) {
  for (Index i = 0; i < values.size(); ++i) {
    if (!(values[i] >= 0.0)) throw ValidationError("quantize_for_poisson: negative or undefined value");
  }
  return values.unaryExpr([](double v) { return std::floor(v + 0.5); });
}

// --- costs ----------------------------------------------------------------

namespace {

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double normal_cost(double len, double variance) {
  const double v = std::max(variance, kNormalVarianceFloor);
  return 0.5 * len * (std::log(2.0 * std::numbers::pi) + std::log(v) + 1.0);
}

double poisson_cost(double len, double sum) {
  if (sum <= 0.0) return 0.0;
  const double lambda = sum / len;
  return len * lambda - sum * std::log(lambda);
}

double exponential_cost(double len, double sum) {
  const double mean = sum / len;
  if (!(mean > 0.0)) throw ValidationError("exponential cost needs strictly positive values");
  return len * (std::log(mean) + 1.0);
}

// The reference formulation is twice the negative log-likelihood; halved here
// so that it shares its scale with the parametric costs and the penalties.
double empirical_weight(Index full_length, int quantile_count) {
  return std::log(2.0 * static_cast<double>(full_length) - 1.0) / quantile_count;
}

// Binary entropy sum scaled by the segment length.
double empirical_cost(double len, const Eigen::Ref<const Eigen::RowVectorXd>& half_counts, double weight) {
  double acc = 0.0;
  for (Index k = 0; k < half_counts.size(); ++k) {
    const double f = half_counts[k] / len;
    acc += len * (xlogx(f) + xlogx(1.0 - f));
  }
  return -weight * acc;
}

}  // namespace

Series empirical_quantile_levels(const Series& values, int quantile_count) {
  if (quantile_count < 2) throw ValidationError("empirical cost needs at least 2 quantiles");
  const Index n = values.size();
  if (n == 0) throw ValidationError("empirical cost on empty series");
  std::vector<double> sorted(values.data(), values.data() + n);
  std::sort(sorted.begin(), sorted.end());
  const double c = -std::log(2.0 * static_cast<double>(n) - 1.0);
  Series levels(quantile_count);
  for (int k = 1; k <= quantile_count; ++k) {
    const double y = -1.0 + (2.0 * k - 1.0) / quantile_count;
    const double p = 1.0 / (1.0 + std::exp(c * y));
    // (n-1)p is often an exact integer (e.g. n = 41); absorb rounding below it.
    const auto j = static_cast<Index>(std::floor(static_cast<double>(n - 1) * p + 1e-9));
    levels[k - 1] = sorted[static_cast<std::size_t>(std::clamp<Index>(j, 0, n - 1))];
  }
  return levels;
}

double segment_cost(std::span<const double> values, const CostFamily& family,
                    const Series& empirical_levels, Index full_length) {
  if (values.empty()) throw ValidationError("segment_cost: empty segment");
  const double len = static_cast<double>(values.size());
  const Eigen::Map<const Series> v(values.data(), static_cast<Index>(values.size()));
  switch (family.kind) {
    case CostKind::normal: {
      const double mean = v.mean();
      return normal_cost(len, (v.array() - mean).square().sum() / len);
    }
    case CostKind::poisson: return poisson_cost(len, v.sum());
    case CostKind::exponential: return exponential_cost(len, v.sum());
    case CostKind::empirical: {
      Eigen::RowVectorXd counts(empirical_levels.size());
      for (Index k = 0; k < empirical_levels.size(); ++k) {
        const double q = empirical_levels[k];
        counts[k] = (v.array() < q).cast<double>().sum() + 0.5 * (v.array() == q).cast<double>().sum();
      }
      return empirical_cost(len, counts, empirical_weight(full_length, family.quantile_count));
    }
  }
  return 0.0;
}

double segment_cost(std::span<const double> values, const CostFamily& family) {
  if (values.empty()) throw ValidationError("segment_cost: empty segment");
  Series levels;
  if (family.kind == CostKind::empirical) {
    const Eigen::Map<const Series> v(values.data(), static_cast<Index>(values.size()));
    levels = empirical_quantile_levels(v, family.quantile_count);
  }
  return segment_cost(values, family, levels, static_cast<Index>(values.size()));
}

SegmentCostModel::SegmentCostModel(const Series& values, const CostFamily& family)
    : family_(family), n_(values.size()) {
  if (n_ == 0) throw ValidationError("segment cost model on empty series");
  switch (family.kind) {
    case CostKind::normal: {
      centre_ = values.mean();
      sum_.resize(n_ + 1);
      sum_sq_.resize(n_ + 1);
      sum_[0] = sum_sq_[0] = 0.0;
      for (Index i = 0; i < n_; ++i) {
        const double d = values[i] - centre_;
        sum_[i + 1] = sum_[i] + d;
        sum_sq_[i + 1] = sum_sq_[i] + d * d;
      }
      break;
    }
    case CostKind::poisson:
    case CostKind::exponential: {
      if (family.kind == CostKind::poisson && (values.array() < 0.0).any())
        throw ValidationError("poisson cost needs non-negative values");
      if (family.kind == CostKind::exponential && !(values.array() > 0.0).all())
        throw ValidationError("exponential cost needs strictly positive values");
      sum_.resize(n_ + 1);
      sum_[0] = 0.0;
      for (Index i = 0; i < n_; ++i) sum_[i + 1] = sum_[i] + values[i];
      break;
    }
    case CostKind::empirical: {
      const Series levels = empirical_quantile_levels(values, family.quantile_count);
      const Index k = levels.size();
      below_.setZero(n_ + 1, k);
      for (Index i = 0; i < n_; ++i) {
        for (Index j = 0; j < k; ++j) {
          const double x = values[i];
          below_(i + 1, j) = below_(i, j) + (x < levels[j] ? 1.0 : (x == levels[j] ? 0.5 : 0.0));
        }
      }
      empirical_weight_ = empirical_weight(n_, family.quantile_count);
      break;
    }
  }
}

double SegmentCostModel::operator()(Index begin, Index end) const {
  const double len = static_cast<double>(end - begin);
  switch (family_.kind) {
    case CostKind::normal: {
      const double s = sum_[end] - sum_[begin];
      const double ss = sum_sq_[end] - sum_sq_[begin];
      return normal_cost(len, (ss - s * s / len) / len);
    }
    case CostKind::poisson: return poisson_cost(len, sum_[end] - sum_[begin]);
    case CostKind::exponential: return exponential_cost(len, sum_[end] - sum_[begin]);
    case CostKind::empirical:
      return empirical_cost(len, below_.row(end) - below_.row(begin), empirical_weight_);
  }
  return 0.0;
}

// --- penalties ------------------------------------------------------------

namespace {

double criterion_beta(PenaltyKind criterion, Index n) {
  const double dn = static_cast<double>(n);
  switch (criterion) {
    case PenaltyKind::AIC: return 2.0;
    case PenaltyKind::BIC: return std::log(dn);
    case PenaltyKind::HannanQuinn:
      if (n < 3) throw ValidationError("Hannan-Quinn penalty needs n >= 3");
      return 2.0 * std::log(std::log(dn));
    case PenaltyKind::MBIC: return 1.5 * std::log(dn);
  }
  return 0.0;
}

}  // namespace

double penalty_value(PenaltyKind criterion, Index n, int theta_dim, Index changepoint_count) {
  if (n < 2) throw ValidationError("penalty needs n >= 2");
  if (criterion == PenaltyKind::MBIC)
    throw ValidationError("MBIC penalty depends on segment lengths");
  const double m = static_cast<double>(changepoint_count);
  return criterion_beta(criterion, n) * (m + (m + 1.0) * theta_dim);
}

double penalty_value(PenaltyKind criterion, Index n, int theta_dim,
                     std::span<const Index> segment_lengths) {
  if (segment_lengths.empty()) throw ValidationError("penalty needs at least one segment");
  const Index m = static_cast<Index>(segment_lengths.size()) - 1;
  if (criterion != PenaltyKind::MBIC) return penalty_value(criterion, n, theta_dim, m);
  if (n < 2) throw ValidationError("penalty needs n >= 2");
  const Index total = std::accumulate(segment_lengths.begin(), segment_lengths.end(), Index{0});
  if (total != n) throw ValidationError("segment lengths do not sum to n");
  const double dn = static_cast<double>(n);
  double acc = criterion_beta(criterion, n) * static_cast<double>(m);
  for (const Index len : segment_lengths) {
    if (len < 1) throw ValidationError("segment length must be positive");
    acc += 0.5 * std::log(static_cast<double>(len) / dn);
  }
  return acc;
}

// --- segmentation ---------------------------------------------------------

ChangepointSet optimal_segmentation(const Series& values, const CostFamily& family,
                                    PenaltyKind criterion) {
  ChangepointSet out;
  const Index n = values.size();
  if (n < 2 * kMinSegmentLength) {
    out.warnings.push_back("series of " + std::to_string(n) + " samples too short to segment");
    return out;
  }
  const SegmentCostModel cost(values, family);
  const bool mbic = criterion == PenaltyKind::MBIC;
  const double beta = criterion_beta(criterion, n);
  // Per-segment penalty; the changepoint count is segments - 1 so F(0) = -P.
  const double per_segment = mbic ? beta : beta * (1.0 + family.theta_dim());
  const double dn = static_cast<double>(n);
  auto seg_cost = [&](Index s, Index t) {
    double c = cost(s, t);
    if (mbic) c += 0.5 * std::log(static_cast<double>(t - s) / dn);
    return c;
  };

  const double tol = kTieTolerance * (1.0 + std::abs(cost(0, n)) + dn);
  const double margin = 10.0 * tol;

  std::vector<double> best(static_cast<std::size_t>(n + 1), 0.0);
  std::vector<Index> last(static_cast<std::size_t>(n + 1), 0);
  std::vector<Index> count(static_cast<std::size_t>(n + 1), 0);
  best[0] = -per_segment;

  struct Candidate {
    Index start;
    Index expires;  // removed from the candidate set once t reaches this
  };
  std::vector<Candidate> candidates;
  std::vector<double> values_at;
  constexpr Index kNever = std::numeric_limits<Index>::max();

  for (Index t = kMinSegmentLength; t <= n; ++t) {
    // A start s becomes admissible once the segment (s, t] is long enough.
    const Index newly = t - kMinSegmentLength;
    if (newly == 0 || newly >= kMinSegmentLength) candidates.push_back({newly, kNever});
    std::erase_if(candidates, [t](const Candidate& c) { return c.expires <= t; });

    values_at.resize(candidates.size());
    double min_value = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      const Index s = candidates[c].start;
      values_at[c] = best[static_cast<std::size_t>(s)] + seg_cost(s, t) + per_segment;
      min_value = std::min(min_value, values_at[c]);
    }
    // Among near-minimal candidates take the fewest changepoints, then the
    // earliest start (candidates are kept in increasing start order).
    std::size_t chosen = candidates.size();
    Index chosen_count = kNever;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (values_at[c] > min_value + tol) continue;
      const Index s = candidates[c].start;
      const Index cnt = count[static_cast<std::size_t>(s)] + (s > 0 ? 1 : 0);
      if (cnt < chosen_count) {
        chosen = c;
        chosen_count = cnt;
      }
    }
    const auto ut = static_cast<std::size_t>(t);
    best[ut] = values_at[chosen];
    last[ut] = candidates[chosen].start;
    count[ut] = chosen_count;

    // PELT pruning, delayed until t itself is an admissible start.
    for (std::size_t c = 0; c < candidates.size(); ++c) {
      if (values_at[c] - per_segment > best[ut] + margin)
        candidates[c].expires = std::min(candidates[c].expires, t + kMinSegmentLength);
    }
  }

  for (Index t = n; last[static_cast<std::size_t>(t)] > 0; t = last[static_cast<std::size_t>(t)])
    out.positions.push_back(last[static_cast<std::size_t>(t)]);
  std::reverse(out.positions.begin(), out.positions.end());
  return out;
}

Series prepare_values(const RttTrace& trace, const DetectorPreset& preset) {
  Series values = trace.mapped();
  if (preset.baseline_removed && values.size() > 0) values = baseline_transform(values);
  if (preset.family.kind == CostKind::poisson) values = quantize_for_poisson(values);
  if (preset.family.kind == CostKind::exponential) values = values.cwiseMax(kExponentialFloorMs);
  return values;
}

ChangepointSet detect(const RttTrace& trace, const DetectorPreset& preset) {
  ChangepointSet out;
  if (!trace.empty() && trace.timeout_count() == trace.size() && preset.baseline_removed)
    out.warnings.push_back("all samples are timeouts; baseline removal yields a zero series");
  ChangepointSet cps = optimal_segmentation(prepare_values(trace, preset), preset.family,
                                            preset.penalty.kind);
  out.positions = std::move(cps.positions);
  out.warnings.insert(out.warnings.end(), cps.warnings.begin(), cps.warnings.end());
  out.method_tag = std::string(to_string(preset.name)) + "+" + std::string(to_string(preset.penalty.kind));
  return out;
}

}  // namespace rttcp
