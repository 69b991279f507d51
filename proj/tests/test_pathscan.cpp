#include <doctest.h>

#include "fixtures.hpp"
#include "rttcp/pathscan.hpp"

#include <algorithm>
#include <random>
#include <sstream>

using namespace rttcp;

namespace {

std::vector<Index> starts(const std::vector<IfpSeries>& series) {
  std::vector<Index> out;
  for (const auto& s : series) out.push_back(s.start_index);
  return out;
}

std::vector<ParisMeasurement> random_paris(std::mt19937_64& rng, std::size_t n, int labels) {
  std::vector<ParisMeasurement> out;
  int id = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = std::uniform_int_distribution<int>(0, labels - 1)(rng);
    out.push_back({static_cast<Epoch>(i) * 1800, id, {std::string(1, static_cast<char>('A' + label))}});
    id = std::bernoulli_distribution(0.8)(rng) ? (id + 1) % 16 : std::uniform_int_distribution<int>(0, 15)(rng);
  }
  return out;
}

AsPath as(std::initializer_list<std::uint32_t> asns) {
  AsPath p;
  for (auto a : asns) p.push_back(a == 0 ? AsHop::noresponse() : AsHop::public_asn(a));
  return p;
}

PrefixTable table_from(const std::string& text) {
  PrefixTable t;
  std::istringstream in(text);
  t.load(in);
  return t;
}

}  // namespace

TEST_CASE("forward inclusion: golden example") {
  const auto m = fixture::forward_golden();
  const auto s = forward_inclusion(m);
  CHECK(starts(s) == std::vector<Index>{0, 18});
  CHECK(m[18].paris_id == 2);
  CHECK(valid_partition(s, m));
  const auto changes = ifp_changes(s, m);
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].epoch == m[18].epoch);
  CHECK(changes[0].before == "2=B|3=A");
  CHECK(changes[0].after == "2=E|3=E");
}

TEST_CASE("backward extension: golden example") {
  const auto m = fixture::backward_golden();
  const auto fwd = forward_inclusion(m);
  CHECK(starts(fwd) == std::vector<Index>{0, 18, 34});
  const auto bwd = backward_extension(fwd, m);
  CHECK(starts(bwd) == std::vector<Index>{0, 18, 20});
  CHECK(m[20].paris_id == 4);
  CHECK(bwd.back().detected_index == 34);
  CHECK(valid_partition(bwd, m));
}

TEST_CASE("forward inclusion: trivial partitions") {
  std::vector<int> ids;
  std::vector<std::string> same, alt;
  for (int i = 0; i < 40; ++i) {
    ids.push_back(i % 16);
    same.push_back("A");
  }
  CHECK(forward_inclusion(fixture::measurements(ids, same)).size() == 1);

  std::vector<int> zeros(10, 0);
  for (int i = 0; i < 10; ++i) alt.push_back(i % 2 ? "Y" : "X");
  CHECK(forward_inclusion(fixture::measurements(zeros, alt)).size() == 10);
  CHECK(forward_inclusion({}).empty());
}

TEST_CASE("backward extension: guard clause leaves boundaries alone") {
  // The later series is shorter than the earlier one.
  const auto m = fixture::forward_golden();
  const auto fwd = forward_inclusion(m);
  CHECK(starts(backward_extension(fwd, m)) == starts(fwd));

  // Longer but not covering every Paris ID twice.
  std::vector<int> ids;
  std::vector<std::string> labels;
  for (int i = 0; i < 16; ++i) {
    ids.push_back(i);
    labels.push_back("A");
  }
  for (int i = 0; i < 20; ++i) {
    ids.push_back(i % 8);
    labels.push_back("B");
  }
  const auto m2 = fixture::measurements(ids, labels);
  const auto f2 = forward_inclusion(m2);
  CHECK(starts(backward_extension(f2, m2)) == starts(f2));
}

TEST_CASE("backward extension lands on the brute-force earliest consistent start") {
  std::mt19937_64 rng(43);
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto sc = fixture::routing_scenario(rng);
    const auto& m = sc.measurements;
    const auto fwd = forward_inclusion(m);
    const auto bwd = backward_extension(fwd, m);
    const auto bstarts = starts(bwd);
    for (std::size_t i = 1; i < fwd.size(); ++i) {
      const auto& prev = fwd[i - 1];
      const auto& next = fwd[i];
      std::array<int, 16> seen{};
      for (Index j = next.start_index; j < next.end_index; ++j) ++seen[static_cast<std::size_t>(m[static_cast<std::size_t>(j)].paris_id)];
      const bool eligible = next.length() > prev.length() && *std::min_element(seen.begin(), seen.end()) >= 2;
      if (!eligible) continue;
      // Earliest p such that every measurement in [p, boundary) agrees with the later series.
      Index best = next.start_index;
      for (Index p = next.start_index; p >= prev.start_index; --p) {
        bool ok = true;
        for (Index j = p; j < next.start_index && ok; ++j) ok = !conflicts(next, m[static_cast<std::size_t>(j)]);
        if (ok) best = p;
      }
      if (best > prev.start_index) {
        CHECK(std::find(bstarts.begin(), bstarts.end(), best) != bstarts.end());
        ++checked;
      }
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("property: partitions stay valid and extension never adds series") {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 300; ++trial) {
    const auto m = random_paris(rng, std::uniform_int_distribution<std::size_t>(1, 200)(rng),
                                std::uniform_int_distribution<int>(1, 3)(rng));
    const auto fwd = forward_inclusion(m);
    const auto bwd = backward_extension(fwd, m);
    CHECK(valid_partition(fwd, m));
    CHECK(valid_partition(bwd, m));
    CHECK(bwd.size() <= fwd.size());
  }
  for (int trial = 0; trial < 100; ++trial) {
    const auto sc = fixture::routing_scenario(rng);
    const auto fwd = forward_inclusion(sc.measurements);
    const auto bwd = backward_extension(fwd, sc.measurements);
    CHECK(valid_partition(bwd, sc.measurements));
    CHECK(bwd.size() <= fwd.size());
  }
}

TEST_CASE("invalid Paris IDs are rejected") {
  std::vector<ParisMeasurement> m{{0, 16, {"A"}}};
  CHECK_THROWS_AS(forward_inclusion(m), ValidationError);
}

TEST_CASE("prefix table lookups") {
  const auto t = table_from("10.0.0.0/8\t100\n10.1.0.0/16\t200\n2001:db8::/32\t300\n# comment\n\nbogus\n");
  CHECK(t.size() == 3);
  CHECK(t.lookup("10.2.3.4") == "100");
  CHECK(t.lookup("10.1.3.4") == "200");
  CHECK(t.lookup("2001:db8::1") == "300");
  CHECK(!t.lookup("192.0.2.1"));
  CHECK(!t.lookup("not-an-address"));
  std::istringstream bad("10.0.0.0/40\t1\nnope\n");
  PrefixTable u;
  CHECK(u.load(bad) == 2);
}

TEST_CASE("map_as_path fixtures") {
  const auto prefixes = table_from("10.0.0.0/8\t100\n20.0.0.0/8\t200\n30.0.0.0/8\t64512\n");
  const auto ixps = table_from("20.5.0.0/16\tNETIX\n");

  CHECK(map_as_path({"10.0.0.1", "10.0.0.2", "10.9.9.9"}, prefixes, ixps) == AsPath{AsHop::public_asn(100)});

  const auto with_ixp = map_as_path({"10.0.0.1", "20.5.0.1", "20.1.0.1"}, prefixes, ixps);
  CHECK(with_ixp == AsPath{AsHop::public_asn(100), AsHop::exchange("NETIX"), AsHop::public_asn(200)});
  CHECK(format_as_path(with_ixp) == "AS100 IXP:NETIX AS200");

  const auto mixed = map_as_path({"10.0.0.1", std::nullopt, "20.1.0.1", "30.0.0.1", "8.8.8.8"}, prefixes, ixps);
  CHECK(format_as_path(mixed) == "AS100 * AS200 ?");

  MapWarnings w;
  const auto bad = map_as_path({"10.0.0.1", "999.1.1.1"}, prefixes, ixps, &w);
  CHECK(w.malformed_addresses == 1);
  CHECK(bad.back().kind == AsHop::Kind::unmapped);

  const auto nr = map_as_path({std::nullopt, std::nullopt}, prefixes, ixps);
  CHECK(nr.size() == 2);
}

TEST_CASE("property: table load order does not change lookups") {
  std::vector<std::string> lines{"10.0.0.0/8\t100", "10.1.0.0/16\t200", "10.1.2.0/24\t300",
                                 "10.1.2.0/24\t301", "20.0.0.0/8\t400",  "2001:db8::/32\t500",
                                 "2001:db8:1::/48\t600"};
  const std::vector<std::string> probes{"10.0.0.1", "10.1.0.1", "10.1.2.3", "20.1.1.1", "2001:db8::5", "2001:db8:1::5",
                                        "1.1.1.1"};
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  const auto reference = table_from(joined);
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 50; ++trial) {
    std::shuffle(lines.begin(), lines.end(), rng);
    std::string text;
    for (const auto& l : lines) text += l + "\n";
    const auto t = table_from(text);
    for (const auto& p : probes) CHECK(t.lookup(p) == reference.lookup(p));
  }
  CHECK(reference.lookup("10.1.2.3") == "300");
}

TEST_CASE("AS change classification") {
  CHECK(!classify_as_change(as({1, 2, 3}), as({1, 2, 3})));
  CHECK(classify_as_change(as({1, 2, 3}), as({1, 4, 3})) == PathChangeKind::AS);
  // An unresponsive hop standing in for AS2 is not a change.
  CHECK(!classify_as_change(as({1, 0, 3}), as({1, 2, 3})));
  CHECK(!classify_as_change(as({1, 2, 3}), as({1, 0, 3})));
  CHECK(!classify_as_change(as({1, 0, 0, 3}), as({1, 3})));
  // Differences after deleting unresponsive hops are still changes.
  CHECK(classify_as_change(as({1, 0, 3}), as({1, 4, 5})) == PathChangeKind::AS);
  // Prefix of the other path: no event.
  CHECK(!classify_as_change(as({1, 2}), as({1, 2, 3})));

  AsPath ixp_before{AsHop::public_asn(1), AsHop::exchange("X"), AsHop::public_asn(3)};
  AsPath ixp_after{AsHop::public_asn(1), AsHop::public_asn(2), AsHop::public_asn(3)};
  CHECK(classify_as_change(ixp_before, ixp_after) == PathChangeKind::IXP);
  AsPath unmapped{AsHop::public_asn(1), AsHop::unmapped(), AsHop::public_asn(3)};
  CHECK(!classify_as_change(unmapped, ixp_after));
}

TEST_CASE("as_path_changes stamps the later measurement") {
  std::vector<TimedAsPath> paths{{0, as({1, 2, 3}), 0}, {1800, as({1, 2, 3}), 1}, {3600, as({1, 4, 3}), 2},
                                 {5400, as({1, 0, 3}), 3}};
  const auto c = as_path_changes(paths);
  REQUIRE(c.size() == 1);
  CHECK(c[0].epoch == 3600);
  CHECK(c[0].kind == PathChangeKind::AS);
  CHECK(c[0].before == "AS1 AS2 AS3");
  CHECK(c[0].after == "AS1 AS4 AS3");
}

TEST_CASE("scan_paths suppresses IFP changes overlapping AS changes") {
  const auto prefixes = table_from("10.0.0.0/8\t100\n20.0.0.0/8\t200\n30.0.0.0/8\t300\n");
  const PrefixTable ixps;
  std::vector<ParisMeasurement> m;
  for (int i = 0; i < 40; ++i) {
    const bool after = i >= 20;
    m.push_back({i * 1800, i % 16, {"10.0.0.1", after ? "30.0.0.1" : "20.0.0.1"}});
  }
  const auto r = scan_paths(m, prefixes, ixps, IfpMode::forward);
  REQUIRE(r.changes.size() == 1);
  CHECK(r.changes[0].kind == PathChangeKind::AS);
  CHECK(r.changes[0].epoch == 20 * 1800);
  CHECK(r.suppressed_ifp == 1);

  // Same AS-level path, different router: an IFP change survives.
  for (int i = 20; i < 40; ++i) m[static_cast<std::size_t>(i)].ip_path[1] = "20.0.0.2";
  const auto r2 = scan_paths(m, prefixes, ixps, IfpMode::backward);
  REQUIRE(r2.changes.size() == 1);
  CHECK(r2.changes[0].kind == PathChangeKind::IFP);
  CHECK(r2.suppressed_ifp == 0);
}

TEST_CASE("path change kind names") {
  for (auto k : {PathChangeKind::AS, PathChangeKind::IXP, PathChangeKind::IFP})
    CHECK(parse_path_change_kind(to_string(k)) == k);
  CHECK(!parse_path_change_kind("BGP"));
}
