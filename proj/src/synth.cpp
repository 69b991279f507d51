#include "rttcp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace rttcp {

namespace {

void check_range(const std::pair<double, double>& r, const char* name, bool allow_zero) {
  const bool ok = r.first <= r.second && (allow_zero ? r.first >= 0.0 : r.first > 0.0);
  if (!ok) throw ValidationError(std::string("synth: invalid range ") + name);
}

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ValidationError(std::string("synth: probability out of [0,1]: ") + name);
}

class Draw {
 public:
  explicit Draw(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) {
    if (lo == hi) return lo;
    return std::uniform_real_distribution<double>(lo, hi)(rng_);
  }
  double uniform(const std::pair<double, double>& r) { return uniform(r.first, r.second); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  Index index(Index lo, Index hi) { return std::uniform_int_distribution<Index>(lo, hi)(rng_); }
  bool chance(double p) { return p > 0.0 && std::bernoulli_distribution(p)(rng_); }
  double gaussian(double stddev) {
    return stddev > 0.0 ? std::normal_distribution<double>(0.0, stddev)(rng_) : 0.0;
  }

 private:
  std::mt19937_64 rng_;
};

struct Stage {
  Index begin = 0;
  double level = 0.0;
  double noise_std = 0.0;
  double enter_prob = 0.0;
  double exit_prob = 0.0;
};

}  // namespace

void SynthConfig::validate() const {
  if (n_samples < 2) throw ValidationError("synth: need at least 2 samples");
  if (stage_count_range.first < 1 || stage_count_range.first > stage_count_range.second)
    throw ValidationError("synth: invalid stage count range");
  check_range(base_level_range, "base_level_range", false);
  check_range(stage_shift_range, "stage_shift_range", false);
  check_range(congestion_amp_range, "congestion_amp_range", false);
  check_range(noise_std_range, "noise_std_range", true);
  check_prob(congestion_enter_prob, "congestion_enter_prob");
  check_prob(congestion_exit_prob, "congestion_exit_prob");
  check_prob(timeout_prob, "timeout_prob");
  if (!(interval_s > 0.0)) throw ValidationError("synth: interval must be positive");
  if (min_stage_length < 1) throw ValidationError("synth: min stage length must be positive");
}

LabelledTrace generate(const SynthConfig& cfg) {
  cfg.validate();
  Draw draw(cfg.seed);
  const Index n = cfg.n_samples;

  // Stage boundaries: uniform placement of the slack left after reserving the
  // minimum length for every stage.
  Index stage_count = draw.integer(cfg.stage_count_range.first, cfg.stage_count_range.second);
  stage_count = std::clamp<Index>(stage_count, 1, std::max<Index>(1, n / cfg.min_stage_length));
  const Index slack = n - stage_count * cfg.min_stage_length;
  std::vector<Index> offsets;
  for (Index s = 1; s < stage_count; ++s) offsets.push_back(draw.index(0, std::max<Index>(0, slack)));
  std::sort(offsets.begin(), offsets.end());

  std::vector<Stage> stages(static_cast<std::size_t>(stage_count));
  for (Index s = 0; s < stage_count; ++s) {
    auto& st = stages[static_cast<std::size_t>(s)];
    st.begin = s == 0 ? 0 : s * cfg.min_stage_length + offsets[static_cast<std::size_t>(s - 1)];
    if (s == 0) {
      st.level = draw.uniform(cfg.base_level_range);
    } else {
      const double prev = stages[static_cast<std::size_t>(s - 1)].level;
      const double shift = draw.uniform(cfg.stage_shift_range);
      const bool up = draw.chance(0.5);
      const double lo = cfg.base_level_range.first;
      const double hi = cfg.base_level_range.second;
      if (prev - shift < lo) st.level = prev + shift;
      else if (prev + shift > hi) st.level = prev - shift;
      else st.level = up ? prev + shift : prev - shift;
    }
    st.noise_std = draw.uniform(cfg.noise_std_range);
    // Each path runs its own congestion chain around the configured rates.
    st.enter_prob = std::min(1.0, cfg.congestion_enter_prob * draw.uniform(0.5, 1.5));
    st.exit_prob = std::min(1.0, cfg.congestion_exit_prob * draw.uniform(0.5, 1.5));
  }

  std::vector<Epoch> epochs(static_cast<std::size_t>(n));
  Series rtt(n);
  Series clean(n);
  GroundTruth truth;
  truth.source = TruthSource::synthetic;

  std::size_t stage_idx = 0;
  bool congested = false;
  double amplitude = 0.0;
  for (Index i = 0; i < n; ++i) {
    bool changed = false;
    if (stage_idx + 1 < stages.size() && stages[stage_idx + 1].begin == i) {
      ++stage_idx;
      changed = true;
      congested = false;
    }
    const Stage& st = stages[stage_idx];
    if (i > 0 && !(changed && i == st.begin)) {
      if (!congested && draw.chance(st.enter_prob)) {
        congested = true;
        amplitude = draw.uniform(cfg.congestion_amp_range);
        changed = true;
      } else if (congested && draw.chance(st.exit_prob)) {
        congested = false;
        changed = true;
      }
    }
    if (changed && i > 0) truth.positions.push_back(i);

    const double offset = congested ? amplitude : 0.0;
    // Queueing adds volatility on top of the level shift while congested.
    const double noise = st.noise_std + (congested ? 0.1 * amplitude : 0.0);
    clean[i] = st.level + offset;
    double value = std::max(1.0, clean[i] + draw.gaussian(noise));
    if (draw.chance(cfg.timeout_prob)) value = kTimeout;
    rtt[i] = value;
    epochs[static_cast<std::size_t>(i)] =
        cfg.start_epoch + static_cast<Epoch>(std::llround(static_cast<double>(i) * cfg.interval_s));
  }

  return {RttTrace(std::move(epochs), std::move(rtt), cfg.interval_s), std::move(truth), std::move(clean), cfg};
}

}  // namespace rttcp
