#include <doctest.h>

#include "rttcp/synth.hpp"

#include <cmath>

using namespace rttcp;

TEST_CASE("noiseless two-stage construction") {
  SynthConfig cfg;
  cfg.n_samples = 100;
  cfg.stage_count_range = {2, 2};
  cfg.base_level_range = {10, 10};
  cfg.stage_shift_range = {50, 50};
  cfg.noise_std_range = {0, 0};
  cfg.congestion_enter_prob = 0;
  cfg.timeout_prob = 0;
  cfg.min_stage_length = 50;
  const auto t = generate(cfg);
  CHECK(t.truth.positions == std::vector<Index>{50});
  for (Index i = 0; i < 100; ++i) CHECK(t.trace.rtt()[i] == (i < 50 ? 10.0 : 60.0));
}

TEST_CASE("same seed gives identical output") {
  SynthConfig cfg;
  cfg.seed = 99;
  const auto a = generate(cfg);
  const auto b = generate(cfg);
  CHECK(a.truth.positions == b.truth.positions);
  CHECK(a.trace.epochs() == b.trace.epochs());
  for (Index i = 0; i < a.trace.size(); ++i) {
    const double x = a.trace.rtt()[i];
    const double y = b.trace.rtt()[i];
    CHECK((x == y || (std::isnan(x) && std::isnan(y))));
  }
  cfg.seed = 100;
  CHECK(generate(cfg).truth.positions != a.truth.positions);
}

TEST_CASE("default change density over twenty traces") {
  Index total = 0;
  double hours = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    const auto t = generate(cfg);
    total += t.truth.size();
    hours += static_cast<double>(cfg.n_samples) * cfg.interval_s / 3600.0;
  }
  CHECK(total >= 400);
  CHECK(total <= 2000);
  const double density = static_cast<double>(total) / hours;
  MESSAGE("changes: " << total << " over " << hours << " h");
  CHECK(density >= 0.108 * 0.5);
  CHECK(density <= 0.108 * 1.5);
}

TEST_CASE("property: truth completeness and plausibility") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.n_samples = 3000;
    cfg.congestion_enter_prob = 0.01;
    cfg.timeout_prob = 0.01;
    const auto t = generate(cfg);
    const auto& p = t.truth.positions;
    Index prev = 0;
    for (std::size_t k = 0; k <= p.size(); ++k) {
      const Index end = k < p.size() ? p[k] : t.trace.size();
      for (Index i = prev + 1; i < end; ++i) CHECK(t.clean[i] == t.clean[prev]);
      if (k < p.size()) CHECK(t.clean[end] != t.clean[end - 1]);
      prev = end;
    }
    for (Index i = 0; i < t.trace.size(); ++i) {
      const double v = t.trace.rtt()[i];
      CHECK((is_timeout(v) || v >= 1.0));
    }
  }
}

TEST_CASE("configuration validation") {
  SynthConfig cfg;
  cfg.congestion_exit_prob = 1.5;
  CHECK_THROWS_AS(generate(cfg), ValidationError);
  cfg = {};
  cfg.base_level_range = {50, 10};
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = {};
  cfg.n_samples = 1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
}
