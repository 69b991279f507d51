#pragma once

// Paris traceroute fixtures shared by the unit tests and the acceptance run.

#include "rttcp/pathscan.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixture {

using rttcp::Epoch;
using rttcp::Index;
using rttcp::ParisMeasurement;

inline constexpr Epoch kTracerouteStep = 1800;

/// One single-hop measurement per (id, label) pair, 30 minutes apart.
inline std::vector<ParisMeasurement> measurements(const std::vector<int>& ids, const std::vector<std::string>& labels,
                                                  Epoch start = 0) {
  std::vector<ParisMeasurement> out;
  for (std::size_t i = 0; i < ids.size(); ++i)
    out.push_back({start + static_cast<Epoch>(i) * kTracerouteStep, ids[i], {labels[i]}});
  return out;
}

/// IDs 0..15, 0, 1, 2, 3 with paths A B B A A .. C A B E E. Forward inclusion
/// puts the boundary before the second Paris-ID-2 measurement (index 18).
inline std::vector<ParisMeasurement> forward_golden() {
  std::vector<int> ids;
  std::vector<std::string> labels;
  const char* first[] = {"A", "B", "B", "A", "A"};
  for (int id = 0; id < 16; ++id) {
    ids.push_back(id);
    labels.push_back(id < 5 ? first[id] : "C");
  }
  const char* tail[] = {"A", "B", "E", "E"};
  for (int id = 0; id < 4; ++id) {
    ids.push_back(id);
    labels.push_back(tail[id]);
  }
  return measurements(ids, labels);
}

/// A leading series (indices 0..17), a series whose first two measurements
/// (IDs 2 and 3, indices 18 and 19) deviate from the popular pattern, then a
/// long run of the popular pattern with IDs 2 and 3 on path E. Forward
/// inclusion puts the last boundary at index 34 (second appearance of ID 2);
/// backward extension moves it to index 20 (first appearance of ID 4).
inline std::vector<ParisMeasurement> backward_golden() {
  auto popular = [](int id) -> std::string {
    if (id == 0 || id == 4) return "A";
    if (id == 1) return "B";
    if (id == 2 || id == 3) return "E";
    return "C";
  };
  std::vector<int> ids;
  std::vector<std::string> labels;
  for (int i = 0; i < 18; ++i) {
    const int id = i % 16;
    ids.push_back(id);
    labels.push_back(id == 2 ? "Z" : id == 3 ? "A" : popular(id));
  }
  for (int i = 0; i < 16; ++i) {
    const int id = (2 + i) % 16;
    ids.push_back(id);
    labels.push_back(id == 2 ? "B" : id == 3 ? "A" : popular(id));
  }
  for (int i = 0; i < 40; ++i) {
    const int id = (2 + i) % 16;
    ids.push_back(id);
    labels.push_back(popular(id));
  }
  return measurements(ids, labels);
}

/// A dominant forwarding pattern interrupted by short deviations. During a
/// deviation every measurement takes an alternative path for its Paris ID;
/// the true change instants are the first deviating measurement and the
/// first measurement after the deviation.
struct RoutingScenario {
  std::vector<ParisMeasurement> measurements;
  std::vector<Epoch> injected;
};

inline RoutingScenario routing_scenario(std::mt19937_64& rng) {
  RoutingScenario sc;
  const int deviations = std::uniform_int_distribution<int>(3, 6)(rng);
  int id = std::uniform_int_distribution<int>(0, 15)(rng);
  Index index = 0;
  auto push = [&](const std::string& label) {
    sc.measurements.push_back({index * kTracerouteStep, id, {label + std::to_string(id)}});
    id = (id + 1) % 16;
    ++index;
  };
  auto dominant_run = [&] {
    const int len = std::uniform_int_distribution<int>(40, 80)(rng);
    for (int i = 0; i < len; ++i) push("d");
  };
  dominant_run();
  for (int k = 0; k < deviations; ++k) {
    const int len = std::uniform_int_distribution<int>(2, 6)(rng);
    sc.injected.push_back(index * kTracerouteStep);
    for (int i = 0; i < len; ++i) push("x");
    sc.injected.push_back(index * kTracerouteStep);
    dominant_run();
  }
  return sc;
}

}  // namespace fixture
