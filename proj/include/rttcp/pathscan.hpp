#pragma once

#include "rttcp/model.hpp"

#include <array>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace rttcp {

inline constexpr int kParisIdCount = 16;

/// Hop address; std::nullopt is an unresponsive hop.
using Hop = std::optional<std::string>;
using IpPath = std::vector<Hop>;

struct ParisMeasurement {
  Epoch epoch = 0;
  int paris_id = 0;
  IpPath ip_path;
};

/// Half-open run [start_index, end_index) of measurements whose Paris IDs
/// map to at most one IP path each.
struct IfpSeries {
  Index start_index = 0;
  Index end_index = 0;
  std::map<int, IpPath> mapping;
  /// Measurement at which forward inclusion first saw the conflict that
  /// opened this series; equals start_index unless the boundary was moved.
  Index detected_index = 0;

  Index length() const { return end_index - start_index; }
};

enum class PathChangeKind { AS, IXP, IFP };

struct PathChange {
  Epoch epoch = 0;
  PathChangeKind kind = PathChangeKind::IFP;
  std::string before;
  std::string after;
  Index measurement_index = 0;
};

std::string_view to_string(PathChangeKind kind);
std::optional<PathChangeKind> parse_path_change_kind(std::string_view s);

bool conflicts(const IfpSeries& series, const ParisMeasurement& m);

std::vector<IfpSeries> forward_inclusion(const std::vector<ParisMeasurement>& measurements);

/// Moves each forward-inclusion boundary back over the tail of the preceding
/// series when the following series is longer than it and has seen every
/// Paris ID at least twice. The tail taken is the longest one whose
/// measurements agree with the following series. Neighbours left without a
/// conflict are merged afterwards.
std::vector<IfpSeries> backward_extension(const std::vector<IfpSeries>& series,
                                          const std::vector<ParisMeasurement>& measurements);

/// One IFP change per series boundary, stamped at the first measurement of
/// the later series.
std::vector<PathChange> ifp_changes(const std::vector<IfpSeries>& series,
                                    const std::vector<ParisMeasurement>& measurements);

/// Checks the partition: contiguous cover, conflict-free series, and a
/// conflict between every pair of neighbours.
bool valid_partition(const std::vector<IfpSeries>& series, const std::vector<ParisMeasurement>& measurements);

// --- AS-level paths --------------------------------------------------------

struct AsHop {
  enum class Kind { asn, ixp, noresponse, unmapped };
  Kind kind = Kind::unmapped;
  std::uint32_t asn = 0;
  std::string ixp;

  bool operator==(const AsHop&) const = default;

  static AsHop public_asn(std::uint32_t a) { return {Kind::asn, a, {}}; }
  static AsHop exchange(std::string name) { return {Kind::ixp, 0, std::move(name)}; }
  static AsHop noresponse() { return {Kind::noresponse, 0, {}}; }
  static AsHop unmapped() { return {Kind::unmapped, 0, {}}; }
};

using AsPath = std::vector<AsHop>;

std::string format_as_path(const AsPath& path);

bool is_public_asn(std::uint32_t asn);

/// Longest-prefix-match table over IPv4 and IPv6 CIDR prefixes.
class PrefixTable {
 public:
  /// Adds a prefix. When the same prefix is added twice with different
  /// values the lexicographically smaller value is kept, so lookups do not
  /// depend on load order.
  void add(const std::string& cidr, std::string value);

  /// Reads `prefix/len<TAB>value` lines; blank lines and `#` comments are
  /// skipped. Returns the number of rejected lines.
  std::size_t load(std::istream& in);

  std::optional<std::string> lookup(const std::string& address) const;

  std::size_t size() const { return count_; }

 private:
  using Key = std::array<std::uint8_t, 16>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const;
  };
  // Per family (0 = IPv4, 1 = IPv6), per prefix length.
  std::array<std::vector<std::unordered_map<Key, std::string, KeyHash>>, 2> tables_{
      std::vector<std::unordered_map<Key, std::string, KeyHash>>(33),
      std::vector<std::unordered_map<Key, std::string, KeyHash>>(129)};
  std::size_t count_ = 0;
};

/// Parses an address into (family, 16-byte key). IPv4 keys use the first
/// four bytes.
std::optional<std::pair<int, std::array<std::uint8_t, 16>>> parse_address(const std::string& address);

struct MapWarnings {
  std::size_t malformed_addresses = 0;
};

/// Labels every hop: IXP prefixes first, then the ASN table; unresponsive
/// hops are kept; anything else is unmapped. Runs of identical labels
/// collapse to one (unresponsive hops never collapse).
AsPath map_as_path(const IpPath& ip_path, const PrefixTable& prefix_table, const PrefixTable& ixp_table,
                   MapWarnings* warnings = nullptr);

/// True when the two paths can be made equal by letting each unresponsive
/// hop stand for any run (possibly empty) of hops on the other side.
bool noresponse_compatible(const AsPath& a, const AsPath& b);

/// Classifies the change between two consecutive AS paths, if any.
std::optional<PathChangeKind> classify_as_change(const AsPath& before, const AsPath& after);

struct TimedAsPath {
  Epoch epoch = 0;
  AsPath path;
  Index measurement_index = 0;
};

std::vector<PathChange> as_path_changes(const std::vector<TimedAsPath>& as_paths);

enum class IfpMode { forward, backward };

struct PathScanResult {
  std::vector<PathChange> changes;  ///< AS, IXP and non-overlapping IFP changes by epoch
  std::vector<IfpSeries> series;
  std::size_t malformed_addresses = 0;
  std::size_t suppressed_ifp = 0;
};

/// Full path-change pipeline for one probe. An IFP change is dropped when an
/// AS or IXP change falls between its reported epoch and the epoch at which
/// forward inclusion first detected it.
PathScanResult scan_paths(const std::vector<ParisMeasurement>& measurements, const PrefixTable& prefix_table,
                          const PrefixTable& ixp_table, IfpMode mode = IfpMode::backward);

}  // namespace rttcp
