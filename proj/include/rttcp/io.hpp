#pragma once

#include "rttcp/correlate.hpp"
#include "rttcp/pathscan.hpp"
#include "rttcp/score.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace rttcp::io {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

// Trace CSV: header `epoch,rtt`, a timeout is the literal -1.
RttTrace read_trace_csv(std::istream& in, double interval_hint = 240.0);
void write_trace_csv(std::ostream& out, const RttTrace& trace);

// Label / changepoint CSV: header `index`, one position per row.
std::vector<Index> read_index_csv(std::istream& in);
void write_index_csv(std::ostream& out, const std::vector<Index>& positions);

template <typename T>
struct Ingested {
  T value;
  std::size_t skipped = 0;  ///< malformed or duplicate lines
};

/// JSON-lines ping results. Each line carries `epoch` (or `timestamp`) and
/// one of: `rtts` (array of numbers), `result` (array of objects with
/// `rtt`), or `min`. The sample is the minimum successful RTT; a line with
/// no successful reply is a timeout. Output is sorted by epoch.
Ingested<RttTrace> ingest_ping(std::istream& in, double interval_hint = 240.0);

/// JSON-lines traceroutes with `epoch`, `paris_id` and `hops`; a null hop is
/// unresponsive. RIPE Atlas style objects (`timestamp`, `paris_id`,
/// `result[].result[].from`) are accepted as well.
Ingested<std::vector<ParisMeasurement>> ingest_traceroute(std::istream& in);
void write_traceroute_jsonl(std::ostream& out, const std::vector<ParisMeasurement>& measurements);

// Path change CSV: `epoch,kind,before,after`.
void write_path_changes_csv(std::ostream& out, const std::vector<PathChange>& changes);
std::vector<PathChange> read_path_changes_csv(std::istream& in);

std::string score_report_json(const ScoreReport& report, const std::string& name);
std::string score_csv_header();
std::string score_csv_row(const ScoreReport& report, const std::string& name);

std::string correlation_json(const CorrelationReport& report, const std::string& probe);
std::string correlation_csv_header();
/// One row per path-change kind plus an `all` row.
std::string correlation_csv_rows(const CorrelationReport& report, const std::string& probe);

}  // namespace rttcp::io
