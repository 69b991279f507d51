// rttcp: RTT changepoint detection, scoring, path-change scanning and
// correlation from the command line.

#include "rttcp/correlate.hpp"
#include "rttcp/detect.hpp"
#include "rttcp/io.hpp"
#include "rttcp/pathscan.hpp"
#include "rttcp/score.hpp"
#include "rttcp/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace rttcp;

namespace {

// Raised for bad arguments that CLI11 cannot see (missing files and such).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  return in;
}

// Writes to the file, or to stdout when the path is empty or "-".
template <typename F>
void with_output(const std::string& path, F&& write) {
  if (path.empty() || path == "-") {
    write(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write '" + path + "'");
  write(out);
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// A trace is either the CSV format or JSON-lines ping results.
RttTrace load_trace(const std::string& path, std::size_t* skipped = nullptr) {
  auto in = open_in(path);
  if (ends_with(path, ".jsonl") || ends_with(path, ".json")) {
    auto r = io::ingest_ping(in);
    if (r.skipped > 0) std::cerr << "warning: skipped " << r.skipped << " malformed ping lines in " << path << '\n';
    if (skipped) *skipped = r.skipped;
    return std::move(r.value);
  }
  return io::read_trace_csv(in);
}

PrefixTable load_table(const std::string& flag_value, const char* env_name) {
  std::string path = flag_value;
  if (path.empty()) {
    if (const char* env = std::getenv(env_name)) path = env;
  }
  PrefixTable table;
  if (path.empty()) return table;
  auto in = open_in(path);
  const auto rejected = table.load(in);
  if (rejected > 0) std::cerr << "warning: " << rejected << " malformed lines in " << path << '\n';
  return table;
}

PresetName preset_arg(const std::string& s) {
  const auto p = parse_preset(s);
  if (!p) throw UsageError("unknown preset '" + s + "'");
  return *p;
}

PenaltyKind penalty_arg(const std::string& s) {
  const auto p = parse_penalty(s);
  if (!p) throw UsageError("unknown penalty '" + s + "'");
  return *p;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string out_dir = ".";
  std::uint64_t seed = 1;
  int count = 1;
  SynthConfig cfg;
};

void run_generate(const GenerateArgs& a) {
  fs::create_directories(a.out_dir);
  for (int i = 0; i < a.count; ++i) {
    SynthConfig cfg = a.cfg;
    cfg.seed = a.seed + static_cast<std::uint64_t>(i);
    const auto lt = generate(cfg);
    const std::string stem = (fs::path(a.out_dir) / ("synth_" + std::to_string(cfg.seed))).string();
    with_output(stem + ".trace.csv", [&](std::ostream& o) { io::write_trace_csv(o, lt.trace); });
    with_output(stem + ".truth.csv", [&](std::ostream& o) { io::write_index_csv(o, lt.truth.positions); });
    std::cout << stem << ".trace.csv " << lt.trace.size() << " samples, " << lt.truth.size() << " changes\n";
  }
}

// --- detect -----------------------------------------------------------------

struct DetectArgs {
  std::string trace;
  std::string preset = "cpt_poisson";
  std::string penalty = "MBIC";
  std::string out;
};

void run_detect(const DetectArgs& a) {
  const auto trace = load_trace(a.trace);
  const auto cps = detect(trace, DetectorPreset::make(preset_arg(a.preset), penalty_arg(a.penalty)));
  for (const auto& w : cps.warnings) std::cerr << "warning: " << w << '\n';
  with_output(a.out, [&](std::ostream& o) { io::write_index_csv(o, cps.positions); });
}

// --- score ------------------------------------------------------------------

struct ScoreArgs {
  std::vector<std::string> traces, truths, detected, names;
  double window_min = 8.0;
  double rho_min = 8.0;
  std::string format = "json";
  std::string out;
};

void run_score(const ScoreArgs& a) {
  if (a.traces.size() != a.truths.size() || a.traces.size() != a.detected.size())
    throw UsageError("--trace, --truth and --detected must be given the same number of times");
  if (!a.names.empty() && a.names.size() != a.traces.size())
    throw UsageError("--name must be given once per trace or not at all");
  std::vector<std::string> rendered;
  json all = json::array();
  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    const auto trace = load_trace(a.traces[i]);
    GroundTruth truth;
    ChangepointSet cps;
    {
      auto in = open_in(a.truths[i]);
      truth.positions = io::read_index_csv(in);
    }
    {
      auto in = open_in(a.detected[i]);
      cps.positions = io::read_index_csv(in);
    }
    const auto cfg = MatchConfig::from_minutes(a.window_min, a.rho_min, trace.interval_hint());
    const auto report = score(truth, cps, trace, cfg);
    const std::string name = a.names.empty() ? fs::path(a.traces[i]).filename().string() : a.names[i];
    if (a.format == "csv") rendered.push_back(io::score_csv_row(report, name));
    else all.push_back(json::parse(io::score_report_json(report, name)));
  }
  with_output(a.out, [&](std::ostream& o) {
    if (a.format == "csv") {
      o << io::score_csv_header();
      for (const auto& r : rendered) o << r;
    } else {
      o << (all.size() == 1 ? all[0] : all).dump(2) << '\n';
    }
  });
}

// --- pathscan ---------------------------------------------------------------

struct PathscanArgs {
  std::string traceroutes;
  std::string prefix_table;
  std::string ixp_table;
  std::string ifp_mode = "backward";
  std::string out;
};

IfpMode mode_arg(const std::string& s) {
  if (s == "forward") return IfpMode::forward;
  if (s == "backward") return IfpMode::backward;
  throw UsageError("--ifp-mode must be forward or backward");
}

void run_pathscan(const PathscanArgs& a) {
  auto in = open_in(a.traceroutes);
  const auto ingested = io::ingest_traceroute(in);
  if (ingested.skipped > 0) std::cerr << "warning: skipped " << ingested.skipped << " malformed traceroute lines\n";
  const auto prefixes = load_table(a.prefix_table, "RTTCP_PREFIX_TABLE");
  const auto ixps = load_table(a.ixp_table, "RTTCP_IXP_TABLE");
  const auto r = scan_paths(ingested.value, prefixes, ixps, mode_arg(a.ifp_mode));
  if (r.malformed_addresses > 0) std::cerr << "warning: " << r.malformed_addresses << " malformed hop addresses\n";
  with_output(a.out, [&](std::ostream& o) { io::write_path_changes_csv(o, r.changes); });
}

// --- correlate --------------------------------------------------------------

struct CorrelateArgs {
  std::string trace;
  std::string detected;
  std::string path_changes;
  Epoch window = kDefaultCorrelationWindowS;
  std::string probe;
  std::string format = "json";
  std::string out;
};

void run_correlate(const CorrelateArgs& a) {
  const auto trace = load_trace(a.trace);
  ChangepointSet cps;
  {
    auto in = open_in(a.detected);
    cps.positions = io::read_index_csv(in);
  }
  std::vector<PathChange> changes;
  {
    auto in = open_in(a.path_changes);
    changes = io::read_path_changes_csv(in);
  }
  if (a.window < 0) throw UsageError("--window must be non-negative");
  const auto report = correlate(changepoint_epochs(trace, cps), changes, a.window);
  const std::string probe = a.probe.empty() ? fs::path(a.trace).stem().string() : a.probe;
  with_output(a.out, [&](std::ostream& o) {
    if (a.format == "csv") o << io::correlation_csv_header() << io::correlation_csv_rows(report, probe);
    else o << io::correlation_json(report, probe) << '\n';
  });
}

// --- report -----------------------------------------------------------------

struct ReportArgs {
  std::string input_dir;
  std::string out_dir = "report";
  std::vector<std::string> presets{"cpt_poisson", "cpt_np"};
  std::string penalty = "MBIC";
  std::string ifp_mode = "backward";
  std::string prefix_table;
  std::string ixp_table;
  Index min_samples = 30000;
  Epoch window = kDefaultCorrelationWindowS;
  unsigned jobs = 0;
};

struct ProbeResult {
  std::string probe;
  Index samples = 0;
  bool skipped = false;
  std::string skip_reason;
  std::string error;
  std::size_t path_changes = 0;
  std::map<std::string, CorrelationReport> by_preset;
  std::ostringstream changepoint_rows;
};

void analyse_probe(const ReportArgs& a, const std::string& probe, const fs::path& ping, const fs::path& traceroute,
                   const PrefixTable& prefixes, const PrefixTable& ixps, IfpMode mode, PenaltyKind penalty,
                   ProbeResult& out) {
  out.probe = probe;
  const auto trace = load_trace(ping.string());
  out.samples = trace.size();
  if (trace.size() < a.min_samples) {
    out.skipped = true;
    out.skip_reason = "fewer than " + std::to_string(a.min_samples) + " samples";
    return;
  }
  std::vector<PathChange> changes;
  if (fs::exists(traceroute)) {
    auto in = open_in(traceroute.string());
    changes = scan_paths(io::ingest_traceroute(in).value, prefixes, ixps, mode).changes;
  }
  out.path_changes = changes.size();
  const Series mapped = trace.mapped();
  for (const auto& name : a.presets) {
    const auto cps = detect(trace, DetectorPreset::make(preset_arg(name), penalty));
    const auto epochs = changepoint_epochs(trace, cps);
    const auto report = correlate(epochs, changes, a.window);
    std::map<Epoch, PathChangeKind> matched;
    for (const auto& p : report.pairs) matched[p.rtt_change] = changes[p.path_change].kind;
    for (std::size_t k = 0; k < cps.positions.size(); ++k) {
      const auto lv = level_and_volatility_diff(mapped, cps.positions, static_cast<Index>(k + 1));
      const auto it = matched.find(epochs[k]);
      out.changepoint_rows << probe << ',' << name << ',' << epochs[k] << ',' << io::format_double(lv.level) << ','
                           << io::format_double(lv.volatility) << ','
                           << (it == matched.end() ? std::string("none") : std::string(to_string(it->second)))
                           << '\n';
    }
    out.by_preset.emplace(name, report);
  }
}

void run_report(const ReportArgs& a) {
  if (!fs::is_directory(a.input_dir)) throw UsageError("input directory '" + a.input_dir + "' not found");
  for (const auto& p : a.presets) preset_arg(p);
  const PenaltyKind penalty = penalty_arg(a.penalty);
  const IfpMode mode = mode_arg(a.ifp_mode);
  const auto prefixes = load_table(a.prefix_table, "RTTCP_PREFIX_TABLE");
  const auto ixps = load_table(a.ixp_table, "RTTCP_IXP_TABLE");

  // Probes are named by their ping file: <probe>.ping.jsonl (or .ping.csv),
  // with an optional <probe>.traceroute.jsonl next to it.
  std::vector<std::pair<std::string, fs::path>> probes;
  for (const auto& entry : fs::directory_iterator(a.input_dir)) {
    const std::string file = entry.path().filename().string();
    for (const std::string suffix : {".ping.jsonl", ".ping.csv"}) {
      if (ends_with(file, suffix)) probes.emplace_back(file.substr(0, file.size() - suffix.size()), entry.path());
    }
  }
  std::sort(probes.begin(), probes.end());

  std::vector<ProbeResult> results(probes.size());
  const unsigned workers =
      std::max(1u, std::min<unsigned>(a.jobs ? a.jobs : std::thread::hardware_concurrency(),
                                      static_cast<unsigned>(std::max<std::size_t>(probes.size(), 1))));
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < probes.size(); i = next++) {
      const auto& [probe, ping] = probes[i];
      const fs::path traceroute = fs::path(a.input_dir) / (probe + ".traceroute.jsonl");
      try {
        analyse_probe(a, probe, ping, traceroute, prefixes, ixps, mode, penalty, results[i]);
      } catch (const std::exception& e) {
        results[i].probe = probe;
        results[i].error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  fs::create_directories(a.out_dir);
  json summary;
  summary["probes"] = json::array();
  std::map<std::string, std::map<std::string, std::pair<Index, Index>>> totals;  // preset -> kind -> (n, matched)
  std::ofstream corr(fs::path(a.out_dir) / "correlation.csv");
  std::ofstream cp(fs::path(a.out_dir) / "changepoints.csv");
  if (!corr || !cp) throw UsageError("cannot write into '" + a.out_dir + "'");
  corr << "preset," << io::correlation_csv_header();
  cp << "probe,preset,epoch,level_diff,volatility_diff,matched_kind\n";
  for (const auto& r : results) {
    json entry{{"probe", r.probe}, {"samples", r.samples}};
    if (!r.error.empty()) {
      entry["error"] = r.error;
    } else if (r.skipped) {
      entry["skipped"] = r.skip_reason;
    } else {
      entry["path_changes"] = r.path_changes;
      json per_preset = json::object();
      for (const auto& [name, rep] : r.by_preset) {
        std::istringstream rows(io::correlation_csv_rows(rep, r.probe));
        for (std::string line; std::getline(rows, line);) corr << name << ',' << line << '\n';
        for (const auto& [kind, k] : rep.per_kind) {
          auto& t = totals[name][std::string(to_string(kind))];
          t.first += k.path_changes;
          t.second += k.matched;
        }
        per_preset[name] = {{"rtt_changes", static_cast<Index>(rep.pairs.size()) + rep.unmatched_rtt_count},
                            {"matched_pairs", rep.pairs.size()}};
      }
      entry["presets"] = per_preset;
      cp << r.changepoint_rows.str();
    }
    summary["probes"].push_back(entry);
  }
  json agg = json::object();
  for (const auto& [name, kinds] : totals) {
    for (const auto& [kind, t] : kinds) {
      agg[name][kind] = {{"path_changes", t.first},
                         {"matched", t.second},
                         {"precision", t.first > 0 ? json(static_cast<double>(t.second) / static_cast<double>(t.first))
                                                   : json(nullptr)}};
    }
  }
  summary["aggregate"] = agg;
  summary["settings"] = {{"penalty", a.penalty},     {"ifp_mode", a.ifp_mode}, {"min_samples", a.min_samples},
                         {"window_s", a.window},     {"presets", a.presets}};
  std::ofstream(fs::path(a.out_dir) / "summary.json") << summary.dump(2) << '\n';
  std::cout << "analysed " << results.size() << " probes into " << a.out_dir << '\n';
}

int fail(const std::string& kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << '\n';
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RTT changepoint detection and path-change correlation"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "write synthetic labelled traces");
  g->add_option("--out-dir", gen.out_dir, "output directory");
  g->add_option("--seed", gen.seed, "first seed");
  g->add_option("--count", gen.count, "number of traces")->check(CLI::PositiveNumber);
  g->add_option("--samples", gen.cfg.n_samples, "samples per trace");
  g->add_option("--interval", gen.cfg.interval_s, "seconds between samples");
  g->add_option("--timeout-prob", gen.cfg.timeout_prob, "per-sample timeout probability");
  g->add_option("--congestion-enter", gen.cfg.congestion_enter_prob, "per-sample congestion onset probability");
  g->add_option("--congestion-exit", gen.cfg.congestion_exit_prob, "per-sample congestion end probability");
  g->callback([&] { run_generate(gen); });

  DetectArgs det;
  auto* d = app.add_subcommand("detect", "detect RTT changepoints");
  d->add_option("--trace", det.trace, "trace CSV or ping JSON-lines")->required();
  d->add_option("--preset", det.preset, "cpt_poisson|cpt_np|cpt_normal|cpt_exp|cpt_poisson_naive");
  d->add_option("--penalty", det.penalty, "MBIC|BIC|AIC|HQ");
  d->add_option("-o,--out", det.out, "changepoint CSV (default stdout)");
  d->callback([&] { run_detect(det); });

  ScoreArgs sc;
  auto* s = app.add_subcommand("score", "score detections against labels");
  s->add_option("--trace", sc.traces, "trace CSV or ping JSON-lines (repeatable)")->required();
  s->add_option("--truth", sc.truths, "label CSV (repeatable)")->required();
  s->add_option("--detected", sc.detected, "changepoint CSV (repeatable)")->required();
  s->add_option("--name", sc.names, "row name (repeatable)");
  s->add_option("--window-min", sc.window_min, "shift tolerance in minutes");
  s->add_option("--rho-min", sc.rho_min, "shortest weighted segment in minutes");
  s->add_option("--format", sc.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  s->add_option("-o,--out", sc.out, "output file (default stdout)");
  s->callback([&] { run_score(sc); });

  PathscanArgs ps;
  auto* p = app.add_subcommand("pathscan", "detect AS, IXP and IFP path changes");
  p->add_option("--traceroutes", ps.traceroutes, "traceroute JSON-lines")->required();
  p->add_option("--prefix-table", ps.prefix_table, "prefix/len<TAB>ASN table (or RTTCP_PREFIX_TABLE)");
  p->add_option("--ixp-table", ps.ixp_table, "prefix/len<TAB>name table (or RTTCP_IXP_TABLE)");
  p->add_option("--ifp-mode", ps.ifp_mode, "forward|backward")->check(CLI::IsMember({"forward", "backward"}));
  p->add_option("-o,--out", ps.out, "path change CSV (default stdout)");
  p->callback([&] { run_pathscan(ps); });

  CorrelateArgs co;
  auto* c = app.add_subcommand("correlate", "match RTT changes to path changes");
  c->add_option("--trace", co.trace, "trace CSV or ping JSON-lines")->required();
  c->add_option("--detected", co.detected, "changepoint CSV")->required();
  c->add_option("--path-changes", co.path_changes, "path change CSV")->required();
  c->add_option("--window", co.window, "tolerance in seconds");
  c->add_option("--probe", co.probe, "probe name");
  c->add_option("--format", co.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
  c->add_option("-o,--out", co.out, "output file (default stdout)");
  c->callback([&] { run_correlate(co); });

  ReportArgs rep;
  auto* r = app.add_subcommand("report", "run detection and correlation over a directory of probes");
  r->add_option("--input-dir", rep.input_dir, "directory of <probe>.ping.jsonl and <probe>.traceroute.jsonl")
      ->required();
  r->add_option("--out-dir", rep.out_dir, "output directory");
  r->add_option("--preset", rep.presets, "presets to run (repeatable)");
  r->add_option("--penalty", rep.penalty, "MBIC|BIC|AIC|HQ");
  r->add_option("--ifp-mode", rep.ifp_mode, "forward|backward")->check(CLI::IsMember({"forward", "backward"}));
  r->add_option("--prefix-table", rep.prefix_table, "prefix/len<TAB>ASN table (or RTTCP_PREFIX_TABLE)");
  r->add_option("--ixp-table", rep.ixp_table, "prefix/len<TAB>name table (or RTTCP_IXP_TABLE)");
  r->add_option("--min-samples", rep.min_samples, "skip probes with fewer ping samples");
  r->add_option("--window", rep.window, "correlation tolerance in seconds");
  r->add_option("--jobs", rep.jobs, "worker threads (0 = all cores)");
  r->callback([&] { run_report(rep); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  } catch (const UsageError& e) {
    return fail("usage", e.what(), 2);
  } catch (const ValidationError& e) {
    return fail("validation", e.what(), 1);
  } catch (const std::exception& e) {
    return fail("runtime", e.what(), 1);
  }
  return 0;
}
