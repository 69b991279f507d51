#include "rttcp/pathscan.hpp"

#include <arpa/inet.h>

#include <algorithm>
#include <charconv>
#include <cstring>
#include <sstream>

namespace rttcp {

std::string_view to_string(PathChangeKind kind) {
  switch (kind) {
    case PathChangeKind::AS: return "AS";
    case PathChangeKind::IXP: return "IXP";
    case PathChangeKind::IFP: return "IFP";
  }
  return "?";
}

std::optional<PathChangeKind> parse_path_change_kind(std::string_view s) {
  if (s == "AS") return PathChangeKind::AS;
  if (s == "IXP") return PathChangeKind::IXP;
  if (s == "IFP") return PathChangeKind::IFP;
  return std::nullopt;
}

// --- IFP series -------------------------------------------------------------

bool conflicts(const IfpSeries& series, const ParisMeasurement& m) {
  const auto it = series.mapping.find(m.paris_id);
  return it != series.mapping.end() && it->second != m.ip_path;
}

namespace {

void validate_measurements(const std::vector<ParisMeasurement>& ms) {
  for (std::size_t i = 0; i < ms.size(); ++i) {
    if (ms[i].paris_id < 0 || ms[i].paris_id >= kParisIdCount)
      throw ValidationError("paris id out of 0..15 at measurement " + std::to_string(i));
    if (i > 0 && ms[i].epoch < ms[i - 1].epoch) throw ValidationError("measurements not time-ordered");
  }
}

IfpSeries build_series(const std::vector<ParisMeasurement>& ms, Index begin, Index end, Index detected) {
  IfpSeries s;
  s.start_index = begin;
  s.end_index = end;
  s.detected_index = detected;
  for (Index i = begin; i < end; ++i) {
    const auto& m = ms[static_cast<std::size_t>(i)];
    s.mapping.emplace(m.paris_id, m.ip_path);
  }
  return s;
}

bool mappings_conflict(const std::map<int, IpPath>& a, const std::map<int, IpPath>& b) {
  for (const auto& [id, path] : a) {
    const auto it = b.find(id);
    if (it != b.end() && it->second != path) return true;
  }
  return false;
}

bool covers_every_id_twice(const std::vector<ParisMeasurement>& ms, const IfpSeries& s) {
  std::array<int, kParisIdCount> seen{};
  for (Index i = s.start_index; i < s.end_index; ++i) ++seen[static_cast<std::size_t>(ms[static_cast<std::size_t>(i)].paris_id)];
  return std::all_of(seen.begin(), seen.end(), [](int c) { return c >= 2; });
}

std::string format_ip_path(const IpPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += '>';
    out += path[i] ? *path[i] : "*";
  }
  return out;
}

}  // namespace

std::vector<IfpSeries> forward_inclusion(const std::vector<ParisMeasurement>& measurements) {
  validate_measurements(measurements);
  std::vector<IfpSeries> out;
  if (measurements.empty()) return out;
  IfpSeries current;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    const auto& m = measurements[i];
    if (i > 0 && conflicts(current, m)) {
      current.end_index = static_cast<Index>(i);
      out.push_back(std::move(current));
      current = IfpSeries{};
      current.start_index = current.detected_index = static_cast<Index>(i);
    }
    current.mapping.emplace(m.paris_id, m.ip_path);
  }
  current.end_index = static_cast<Index>(measurements.size());
  out.push_back(std::move(current));
  return out;
}

std::vector<IfpSeries> backward_extension(const std::vector<IfpSeries>& series,
                                          const std::vector<ParisMeasurement>& measurements) {
  validate_measurements(measurements);
  if (series.size() < 2) return series;

  // Every decision is taken on the incoming partition; moves only shorten a
  // series from its end and never reach past the preceding series.
  std::vector<Index> starts;
  std::vector<Index> detected;
  for (const auto& s : series) {
    starts.push_back(s.start_index);
    detected.push_back(s.detected_index);
  }
  for (std::size_t i = 1; i < series.size(); ++i) {
    const IfpSeries& prev = series[i - 1];
    const IfpSeries& next = series[i];
    if (next.length() <= prev.length() || !covers_every_id_twice(measurements, next)) continue;
    Index boundary = next.start_index;
    while (boundary > prev.start_index &&
           !conflicts(next, measurements[static_cast<std::size_t>(boundary - 1)]))
      --boundary;
    starts[i] = boundary;
  }

  std::vector<IfpSeries> moved;
  const auto end = static_cast<Index>(measurements.size());
  for (std::size_t i = 0; i < series.size(); ++i) {
    const Index b = starts[i];
    const Index e = i + 1 < series.size() ? starts[i + 1] : series.back().end_index;
    if (e <= b) continue;  // emptied by the move
    moved.push_back(build_series(measurements, b, std::min(e, end), detected[i]));
  }

  // Re-validate: neighbours that no longer conflict become one series.
  std::vector<IfpSeries> out;
  for (auto& s : moved) {
    if (!out.empty() && !mappings_conflict(out.back().mapping, s.mapping)) {
      out.back().end_index = s.end_index;
      out.back().mapping.merge(s.mapping);
      continue;
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<PathChange> ifp_changes(const std::vector<IfpSeries>& series,
                                    const std::vector<ParisMeasurement>& measurements) {
  std::vector<PathChange> out;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const auto& prev = series[i - 1];
    const auto& next = series[i];
    PathChange c;
    c.kind = PathChangeKind::IFP;
    c.measurement_index = next.start_index;
    c.epoch = measurements[static_cast<std::size_t>(next.start_index)].epoch;
    for (const auto& [id, path] : prev.mapping) {
      const auto it = next.mapping.find(id);
      if (it == next.mapping.end() || it->second == path) continue;
      if (!c.before.empty()) {
        c.before += '|';
        c.after += '|';
      }
      c.before += std::to_string(id) + "=" + format_ip_path(path);
      c.after += std::to_string(id) + "=" + format_ip_path(it->second);
    }
    out.push_back(std::move(c));
  }
  return out;
}

bool valid_partition(const std::vector<IfpSeries>& series, const std::vector<ParisMeasurement>& measurements) {
  Index expected = 0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    if (s.start_index != expected || s.end_index <= s.start_index) return false;
    const IfpSeries rebuilt = build_series(measurements, s.start_index, s.end_index, s.start_index);
    for (Index j = s.start_index; j < s.end_index; ++j)
      if (conflicts(rebuilt, measurements[static_cast<std::size_t>(j)])) return false;
    if (i > 0) {
      const auto& p = series[i - 1];
      if (!mappings_conflict(build_series(measurements, p.start_index, p.end_index, 0).mapping, rebuilt.mapping))
        return false;
    }
    expected = s.end_index;
  }
  return expected == static_cast<Index>(measurements.size());
}

// --- prefix tables ----------------------------------------------------------

std::optional<std::pair<int, std::array<std::uint8_t, 16>>> parse_address(const std::string& address) {
  std::array<std::uint8_t, 16> key{};
  if (address.find(':') == std::string::npos) {
    in_addr v4{};
    if (inet_pton(AF_INET, address.c_str(), &v4) != 1) return std::nullopt;
    std::memcpy(key.data(), &v4, 4);
    return std::make_pair(0, key);
  }
  in6_addr v6{};
  if (inet_pton(AF_INET6, address.c_str(), &v6) != 1) return std::nullopt;
  std::memcpy(key.data(), &v6, 16);
  return std::make_pair(1, key);
}

namespace {

std::array<std::uint8_t, 16> mask(std::array<std::uint8_t, 16> key, int bits) {
  for (int byte = 0; byte < 16; ++byte) {
    const int keep = std::clamp(bits - byte * 8, 0, 8);
    key[static_cast<std::size_t>(byte)] &= static_cast<std::uint8_t>(keep == 0 ? 0 : (0xFF << (8 - keep)) & 0xFF);
  }
  return key;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::size_t PrefixTable::KeyHash::operator()(const Key& k) const {
  std::size_t h = 1469598103934665603ull;
  for (const auto b : k) h = (h ^ b) * 1099511628211ull;
  return h;
}

void PrefixTable::add(const std::string& cidr, std::string value) {
  const auto slash = cidr.find('/');
  if (slash == std::string::npos) throw ValidationError("prefix without length: " + cidr);
  const auto parsed = parse_address(cidr.substr(0, slash));
  if (!parsed) throw ValidationError("malformed prefix: " + cidr);
  int len = -1;
  const auto* first = cidr.data() + slash + 1;
  const auto* last = cidr.data() + cidr.size();
  const auto [ptr, ec] = std::from_chars(first, last, len);
  const int max_len = parsed->first == 0 ? 32 : 128;
  if (ec != std::errc{} || ptr != last || len < 0 || len > max_len)
    throw ValidationError("malformed prefix length: " + cidr);
  auto& table = tables_[static_cast<std::size_t>(parsed->first)][static_cast<std::size_t>(len)];
  const auto key = mask(parsed->second, len);
  const auto it = table.find(key);
  if (it == table.end()) {
    table.emplace(key, std::move(value));
    ++count_;
  } else if (value < it->second) {
    it->second = std::move(value);
  }
}

std::size_t PrefixTable::load(std::istream& in) {
  std::size_t rejected = 0;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto sep = line.find_first_of("\t ");
    if (sep == std::string::npos) {
      ++rejected;
      continue;
    }
    try {
      add(trim(line.substr(0, sep)), trim(line.substr(sep + 1)));
    } catch (const ValidationError&) {
      ++rejected;
    }
  }
  return rejected;
}

std::optional<std::string> PrefixTable::lookup(const std::string& address) const {
  const auto parsed = parse_address(address);
  if (!parsed) return std::nullopt;
  const auto& family = tables_[static_cast<std::size_t>(parsed->first)];
  for (int len = static_cast<int>(family.size()) - 1; len >= 0; --len) {
    const auto& table = family[static_cast<std::size_t>(len)];
    if (table.empty()) continue;
    const auto it = table.find(mask(parsed->second, len));
    if (it != table.end()) return it->second;
  }
  return std::nullopt;
}

// --- AS paths ---------------------------------------------------------------

bool is_public_asn(std::uint32_t asn) {
  if (asn == 0 || asn == 23456 || asn == 65535 || asn == 4294967295u) return false;
  if (asn >= 64496 && asn <= 65551) return false;  // documentation, private, reserved
  if (asn >= 4200000000u) return false;            // 32-bit private
  return true;
}

std::string format_as_path(const AsPath& path) {
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out += ' ';
    const auto& h = path[i];
    switch (h.kind) {
      case AsHop::Kind::asn: out += "AS" + std::to_string(h.asn); break;
      case AsHop::Kind::ixp: out += "IXP:" + h.ixp; break;
      case AsHop::Kind::noresponse: out += '*'; break;
      case AsHop::Kind::unmapped: out += '?'; break;
    }
  }
  return out;
}

AsPath map_as_path(const IpPath& ip_path, const PrefixTable& prefix_table, const PrefixTable& ixp_table,
                   MapWarnings* warnings) {
  AsPath out;
  for (const auto& hop : ip_path) {
    AsHop label = AsHop::unmapped();
    if (!hop) {
      label = AsHop::noresponse();
    } else if (!parse_address(*hop)) {
      if (warnings) ++warnings->malformed_addresses;
    } else if (auto ixp = ixp_table.lookup(*hop)) {
      label = AsHop::exchange(*ixp);
    } else if (auto asn_text = prefix_table.lookup(*hop)) {
      std::string_view text = *asn_text;
      if (text.starts_with("AS") || text.starts_with("as")) text.remove_prefix(2);
      std::uint32_t asn = 0;
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), asn);
      if (ec == std::errc{} && ptr == text.data() + text.size() && is_public_asn(asn)) label = AsHop::public_asn(asn);
    }
    if (!out.empty() && label.kind != AsHop::Kind::noresponse && out.back() == label) continue;
    out.push_back(std::move(label));
  }
  return out;
}

bool noresponse_compatible(const AsPath& a, const AsPath& b) {
  const std::size_t na = a.size();
  const std::size_t nb = b.size();
  // ok[i][j]: suffixes a[i..] and b[j..] can be reconciled.
  std::vector<std::vector<char>> ok(na + 1, std::vector<char>(nb + 1, 0));
  ok[na][nb] = 1;
  for (std::size_t ii = na + 1; ii-- > 0;) {
    for (std::size_t jj = nb + 1; jj-- > 0;) {
      if (ii == na && jj == nb) continue;
      const bool a_wild = ii < na && a[ii].kind == AsHop::Kind::noresponse;
      const bool b_wild = jj < nb && b[jj].kind == AsHop::Kind::noresponse;
      bool r = false;
      if (a_wild) r = ok[ii + 1][jj] || (jj < nb && ok[ii][jj + 1]);
      if (!r && b_wild) r = ok[ii][jj + 1] || (ii < na && ok[ii + 1][jj]);
      if (!r && ii < na && jj < nb && a[ii] == b[jj]) r = ok[ii + 1][jj + 1];
      ok[ii][jj] = r;
    }
  }
  return ok[0][0];
}

std::optional<PathChangeKind> classify_as_change(const AsPath& before, const AsPath& after) {
  if (noresponse_compatible(before, after)) return std::nullopt;
  AsPath a;
  AsPath b;
  for (const auto& h : before)
    if (h.kind != AsHop::Kind::noresponse) a.push_back(h);
  for (const auto& h : after)
    if (h.kind != AsHop::Kind::noresponse) b.push_back(h);
  const std::size_t common = std::min(a.size(), b.size());
  std::size_t p = 0;
  while (p < common && a[p] == b[p]) ++p;
  if (p == common) return std::nullopt;  // one path is a prefix of the other
  const auto& x = a[p];
  const auto& y = b[p];
  if (x.kind == AsHop::Kind::ixp || y.kind == AsHop::Kind::ixp) return PathChangeKind::IXP;
  if (x.kind == AsHop::Kind::asn && y.kind == AsHop::Kind::asn) return PathChangeKind::AS;
  return std::nullopt;
}

std::vector<PathChange> as_path_changes(const std::vector<TimedAsPath>& as_paths) {
  std::vector<PathChange> out;
  for (std::size_t i = 1; i < as_paths.size(); ++i) {
    const auto kind = classify_as_change(as_paths[i - 1].path, as_paths[i].path);
    if (!kind) continue;
    out.push_back({as_paths[i].epoch, *kind, format_as_path(as_paths[i - 1].path),
                   format_as_path(as_paths[i].path), as_paths[i].measurement_index});
  }
  return out;
}

PathScanResult scan_paths(const std::vector<ParisMeasurement>& measurements, const PrefixTable& prefix_table,
                          const PrefixTable& ixp_table, IfpMode mode) {
  PathScanResult r;
  r.series = forward_inclusion(measurements);
  if (mode == IfpMode::backward) r.series = backward_extension(r.series, measurements);

  MapWarnings warnings;
  std::vector<TimedAsPath> as_paths;
  as_paths.reserve(measurements.size());
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    as_paths.push_back({measurements[i].epoch, map_as_path(measurements[i].ip_path, prefix_table, ixp_table, &warnings),
                        static_cast<Index>(i)});
  }
  r.malformed_addresses = warnings.malformed_addresses;
  r.changes = as_path_changes(as_paths);
  const std::size_t routing_changes = r.changes.size();

  const auto ifp = ifp_changes(r.series, measurements);
  for (std::size_t i = 0; i < ifp.size(); ++i) {
    const IfpSeries& s = r.series[i + 1];
    const Epoch from = measurements[static_cast<std::size_t>(std::min(s.start_index, s.detected_index))].epoch;
    const Epoch to = measurements[static_cast<std::size_t>(std::max(s.start_index, s.detected_index))].epoch;
    const bool overlapped = std::any_of(r.changes.begin(), r.changes.begin() + static_cast<std::ptrdiff_t>(routing_changes),
                                        [&](const PathChange& c) { return c.epoch >= from && c.epoch <= to; });
    if (overlapped) {
      ++r.suppressed_ifp;
      continue;
    }
    r.changes.push_back(ifp[i]);
  }
  std::stable_sort(r.changes.begin(), r.changes.end(),
                   [](const PathChange& a, const PathChange& b) { return a.epoch < b.epoch; });
  return r;
}

}  // namespace rttcp
