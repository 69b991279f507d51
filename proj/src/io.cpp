#include "rttcp/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

namespace rttcp::io {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return {buf, ptr};
}

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& text, std::size_t line_no) {
  T v{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ValidationError("line " + std::to_string(line_no) + ": not a number: '" + text + "'");
  return v;
}

void expect_header(std::istream& in, const std::string& header) {
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line != header) throw ValidationError("expected header '" + header + "', got '" + line + "'");
    return;
  }
  throw ValidationError("missing header '" + header + "'");
}

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(field);
  return out;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

RttTrace read_trace_csv(std::istream& in, double interval_hint) {
  expect_header(in, "epoch,rtt");
  std::vector<Epoch> epochs;
  std::vector<double> rtt;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw ValidationError("line " + std::to_string(line_no) + ": expected 2 fields");
    epochs.push_back(parse_number<Epoch>(fields[0], line_no));
    const double v = parse_number<double>(fields[1], line_no);
    rtt.push_back(v == -1.0 ? kTimeout : v);
  }
  return RttTrace(std::move(epochs), Eigen::Map<const Series>(rtt.data(), static_cast<Index>(rtt.size())),
                  interval_hint);
}

void write_trace_csv(std::ostream& out, const RttTrace& trace) {
  out << "epoch,rtt\n";
  for (Index i = 0; i < trace.size(); ++i) {
    const double v = trace.rtt()[i];
    out << trace.epochs()[static_cast<std::size_t>(i)] << ',' << (is_timeout(v) ? "-1" : format_double(v)) << '\n';
  }
}

std::vector<Index> read_index_csv(std::istream& in) {
  expect_header(in, "index");
  std::vector<Index> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    out.push_back(parse_number<Index>(line, line_no));
  }
  return out;
}

void write_index_csv(std::ostream& out, const std::vector<Index>& positions) {
  out << "index\n";
  for (const Index p : positions) out << p << '\n';
}

Ingested<RttTrace> ingest_ping(std::istream& in, double interval_hint) {
  std::vector<std::pair<Epoch, double>> samples;
  std::size_t skipped = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      Epoch epoch = 0;
      if (j.contains("epoch")) epoch = j.at("epoch").get<Epoch>();
      else epoch = j.at("timestamp").get<Epoch>();
      double best = std::numeric_limits<double>::infinity();
      bool have_field = false;
      auto consider = [&](const json& v) {
        if (v.is_number() && v.get<double>() > 0.0) best = std::min(best, v.get<double>());
      };
      if (j.contains("rtts")) {
        have_field = true;
        for (const auto& v : j.at("rtts")) consider(v);
      } else if (j.contains("result") && j.at("result").is_array()) {
        have_field = true;
        for (const auto& r : j.at("result"))
          if (r.is_object() && r.contains("rtt")) consider(r.at("rtt"));
      } else if (j.contains("min")) {
        have_field = true;
        consider(j.at("min"));
      }
      if (!have_field) {
        ++skipped;
        continue;
      }
      samples.emplace_back(epoch, std::isfinite(best) ? best : kTimeout);
    } catch (const json::exception&) {
      ++skipped;
    }
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<Epoch> epochs;
  std::vector<double> rtt;
  for (const auto& [e, v] : samples) {
    if (!epochs.empty() && epochs.back() == e) {
      ++skipped;
      continue;
    }
    epochs.push_back(e);
    rtt.push_back(v);
  }
  return {RttTrace(std::move(epochs), Eigen::Map<const Series>(rtt.data(), static_cast<Index>(rtt.size())),
                   interval_hint),
          skipped};
}

Ingested<std::vector<ParisMeasurement>> ingest_traceroute(std::istream& in) {
  Ingested<std::vector<ParisMeasurement>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      ParisMeasurement m;
      m.epoch = j.contains("epoch") ? j.at("epoch").get<Epoch>() : j.at("timestamp").get<Epoch>();
      m.paris_id = j.at("paris_id").get<int>();
      if (m.paris_id < 0 || m.paris_id >= kParisIdCount) {
        ++out.skipped;
        continue;
      }
      if (j.contains("hops")) {
        for (const auto& h : j.at("hops")) m.ip_path.push_back(h.is_string() ? Hop(h.get<std::string>()) : Hop());
      } else {
        for (const auto& hop : j.at("result")) {
          Hop address;
          if (hop.contains("result")) {
            for (const auto& reply : hop.at("result")) {
              if (reply.contains("from") && reply.at("from").is_string()) {
                address = reply.at("from").get<std::string>();
                break;
              }
            }
          }
          m.ip_path.push_back(address);
        }
      }
      out.value.push_back(std::move(m));
    } catch (const json::exception&) {
      ++out.skipped;
    }
  }
  std::stable_sort(out.value.begin(), out.value.end(),
                   [](const ParisMeasurement& a, const ParisMeasurement& b) { return a.epoch < b.epoch; });
  return out;
}

void write_traceroute_jsonl(std::ostream& out, const std::vector<ParisMeasurement>& measurements) {
  for (const auto& m : measurements) {
    json hops = json::array();
    for (const auto& h : m.ip_path) hops.push_back(h ? json(*h) : json(nullptr));
    out << json{{"epoch", m.epoch}, {"paris_id", m.paris_id}, {"hops", hops}}.dump() << '\n';
  }
}

void write_path_changes_csv(std::ostream& out, const std::vector<PathChange>& changes) {
  out << "epoch,kind,before,after\n";
  for (const auto& c : changes)
    out << c.epoch << ',' << to_string(c.kind) << ',' << csv_quote(c.before) << ',' << csv_quote(c.after) << '\n';
}

std::vector<PathChange> read_path_changes_csv(std::istream& in) {
  expect_header(in, "epoch,kind,before,after");
  std::vector<PathChange> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_csv(line);
    if (fields.size() != 4) throw ValidationError("line " + std::to_string(line_no) + ": expected 4 fields");
    PathChange c;
    c.epoch = parse_number<Epoch>(trim(fields[0]), line_no);
    const auto kind = parse_path_change_kind(trim(fields[1]));
    if (!kind) throw ValidationError("line " + std::to_string(line_no) + ": unknown kind '" + fields[1] + "'");
    c.kind = *kind;
    c.before = fields[2];
    c.after = fields[3];
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [](const PathChange& a, const PathChange& b) { return a.epoch < b.epoch; });
  return out;
}

std::string score_report_json(const ScoreReport& r, const std::string& name) {
  json pairs = json::array();
  for (const auto& [t, d] : r.matches.pairs) pairs.push_back({t, d});
  const json j{{"name", name},
               {"tp", r.tp},
               {"fp", r.fp},
               {"fn", r.fn},
               {"tp_truth", r.tp_truth},
               {"ignored_truths", r.ignored_truths},
               {"precision", r.precision},
               {"recall", r.recall},
               {"recall_w", r.recall_w},
               {"f2", r.f2},
               {"f2_w", r.f2_w},
               {"omega", r.omega},
               {"pairs", pairs},
               {"unmatched_truth", r.matches.unmatched_truth},
               {"unmatched_detections", r.matches.unmatched_detections}};
  return j.dump(2);
}

std::string score_csv_header() { return "name,tp,fp,fn,precision,recall,recall_w,f2,f2_w\n"; }

std::string score_csv_row(const ScoreReport& r, const std::string& name) {
  std::ostringstream ss;
  ss << csv_quote(name) << ',' << r.tp << ',' << r.fp << ',' << r.fn << ',' << format_double(r.precision) << ','
     << format_double(r.recall) << ',' << format_double(r.recall_w) << ',' << format_double(r.f2) << ','
     << format_double(r.f2_w) << '\n';
  return ss.str();
}

std::string correlation_json(const CorrelationReport& r, const std::string& probe) {
  json pairs = json::array();
  for (const auto& p : r.pairs)
    pairs.push_back({{"rtt_change", p.rtt_change}, {"path_change", p.path_change}, {"shift", p.shift}});
  json kinds = json::object();
  for (const auto& [kind, k] : r.per_kind)
    kinds[std::string(to_string(kind))] = {
        {"path_changes", k.path_changes}, {"matched", k.matched}, {"precision", optional_number(k.precision)}};
  const json j{{"probe", probe},
               {"pairs", pairs},
               {"per_kind", kinds},
               {"overall",
                {{"path_changes", r.overall.path_changes},
                 {"matched", r.overall.matched},
                 {"precision", optional_number(r.overall.precision)}}},
               {"unmatched_rtt_count", r.unmatched_rtt_count},
               {"unmatched_path_count", r.unmatched_path_count}};
  return j.dump(2);
}

std::string correlation_csv_header() { return "probe,kind,n_path_changes,n_matched,precision\n"; }

std::string correlation_csv_rows(const CorrelationReport& r, const std::string& probe) {
  std::ostringstream ss;
  auto row = [&](std::string_view kind, const KindPrecision& k) {
    ss << csv_quote(probe) << ',' << kind << ',' << k.path_changes << ',' << k.matched << ','
       << (k.precision ? format_double(*k.precision) : std::string()) << '\n';
  };
  for (const auto& [kind, k] : r.per_kind) row(to_string(kind), k);
  row("all", r.overall);
  return ss.str();
}

}  // namespace rttcp::io
