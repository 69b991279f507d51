#pragma once

#include "rttcp/model.hpp"

#include <cstdint>
#include <utility>

namespace rttcp {

/// Synthetic trace parameters. The defaults are calibrated to a change
/// density of roughly one change every ten hours at a 4-minute cadence and
/// are not normative.
struct SynthConfig {
  Index n_samples = 6480;
  std::pair<int, int> stage_count_range{3, 8};
  std::pair<double, double> base_level_range{20.0, 300.0};
  std::pair<double, double> stage_shift_range{10.0, 150.0};
  double congestion_enter_prob = 0.0035;
  double congestion_exit_prob = 0.05;
  std::pair<double, double> congestion_amp_range{10.0, 200.0};
  std::pair<double, double> noise_std_range{0.5, 5.0};
  double timeout_prob = 0.0005;
  std::uint64_t seed = 1;
  Epoch start_epoch = 1'500'000'000;
  double interval_s = 240.0;
  Index min_stage_length = 50;

  void validate() const;
};

struct LabelledTrace {
  RttTrace trace;
  GroundTruth truth;
  Series clean;  ///< noiseless level per sample (stage level plus congestion offset)
  SynthConfig provenance;
};

/// Deterministic in the config (including seed).
LabelledTrace generate(const SynthConfig& cfg);

}  // namespace rttcp
