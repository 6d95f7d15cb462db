#include "agetrack/report.hpp"

#include "agetrack/digest.hpp"
#include "agetrack/errors.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/log.hpp"
#include "json_fields.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#ifndef AGETRACK_VERSION
#define AGETRACK_VERSION "0.0.0"
#endif

namespace agetrack {

namespace fs = std::filesystem;
using detail::get;

const char* tool_version() { return AGETRACK_VERSION; }

std::string config_digest(const RunConfig& config) { return sha256_hex(config.to_json().dump()); }

Json RunManifest::to_json() const {
  return {{"command", command},
          {"package_digest", package_digest},
          {"config_digest", config_digest},
          {"tool_version", tool_version},
          {"wall_clock_s", wall_clock_s},
          {"status", status}};
}

RunManifest RunManifest::from_json(const Json& j) {
  const std::string ctx = "manifest";
  RunManifest m;
  m.command = get<std::string>(j, "command", ctx);
  m.package_digest = get<std::string>(j, "package_digest", ctx);
  m.config_digest = get<std::string>(j, "config_digest", ctx);
  m.tool_version = get<std::string>(j, "tool_version", ctx);
  m.wall_clock_s = get<double>(j, "wall_clock_s", ctx);
  m.status = get<std::string>(j, "status", ctx);
  return m;
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << content;
  if (!out) throw ConfigError("write failed for " + path.string());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Json> read_trace_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::vector<Json> out;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty()) continue;
    try {
      out.push_back(Json::parse(line));
    } catch (const Json::parse_error& e) {
      throw ParseError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

Json run_summary(const RunResult& result, const RunMetrics& metrics) {
  Json events = Json::array();
  Json controller = Json::array();
  std::size_t warnings = 0;
  for (const auto& s : result.sessions) {
    for (const auto& e : s.events) {
      events.push_back({{"session", s.session}, {"event", e.event.describe()}, {"source", e.source},
                        {"applied", e.applied}, {"note", e.note}});
    }
    for (const auto& c : s.controller) {
      controller.push_back({{"session", s.session}, {"action", to_string(c.action)}, {"mode", to_string(c.mode)}});
    }
    warnings += s.warnings.size();
  }
  return {{"schema_version", kTraceSchemaVersion},
          {"run_id", result.run_id},
          {"scenario_id", result.scenario_id},
          {"package_digest", result.package_digest},
          {"config_digest", config_digest(result.config)},
          {"n_sessions", result.n_sessions},
          {"sessions_recorded", result.sessions.size()},
          {"complete", result.complete},
          {"error", result.error},
          {"config", result.config.to_json()},
          {"events", events},
          {"controller", controller},
          {"warnings", warnings},
          {"metrics", metrics.to_json()}};
}

bool run_dir_occupied(const fs::path& dir) {
  for (const char* name : {"trace.jsonl", "summary.json", "metrics.csv", "manifest.json"}) {
    if (fs::exists(dir / name)) return true;
  }
  return false;
}

RunOutcome run_to_dir(const RunPackage& package, const RunConfig& config, const fs::path& dir,
                      const std::string& command) {
  check_run(package, config);
  fs::create_directories(dir);
  write_text_file(dir / "package.json", serialize_package(package));
  const auto trace_path = dir / "trace.jsonl";
  const auto started = std::chrono::steady_clock::now();
  RunOutcome out;
  {
    std::ofstream trace(trace_path, std::ios::binary | std::ios::trunc);
    if (!trace) throw ConfigError("cannot write " + trace_path.string());
    try {
      out.result = run(package, config, [&](const Json& j) {
        trace << j.dump() << '\n';
        trace.flush();
      });
    } catch (const ConfigError&) {
      trace.close();
      fs::remove(trace_path);
      throw;
    }
  }
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  out.metrics = compute_run_metrics(out.result, package);
  write_text_file(dir / "metrics.csv", out.metrics.to_csv(out.result.run_id));
  write_text_file(dir / "summary.json", run_summary(out.result, out.metrics).dump(2) + "\n");
  out.manifest.command = command;
  out.manifest.package_digest = out.result.package_digest;
  out.manifest.config_digest = config_digest(config);
  out.manifest.tool_version = tool_version();
  out.manifest.wall_clock_s = wall;
  out.manifest.status = out.result.complete ? "complete" : "aborted";
  write_text_file(dir / "manifest.json", out.manifest.to_json().dump(2) + "\n");
  return out;
}

LoadedRun load_run_dir(const fs::path& dir) {
  LoadedRun r;
  r.package = load_package_file((dir / "package.json").string());
  r.result = RunResult::from_trace(read_trace_file(dir / "trace.jsonl"));
  if (r.result.run_id.empty()) throw ParseError(dir.string() + ": trace has no run_start record");
  if (r.result.package_digest != package_digest(r.package)) {
    throw ParseError(dir.string() + ": trace and package.json digests differ");
  }
  r.metrics = compute_run_metrics(r.result, r.package);
  return r;
}

std::map<std::string, std::optional<double>> sweep_scalars(const RunMetrics& metrics) {
  std::map<std::string, std::optional<double>> out;
  for (const char* name : {"keyword_m", "recall_rate", "probe_accuracy", "summarization_fidelity",
                           "constraint_precision", "accumulator_error", "dep_recall"}) {
    auto it = metrics.stats.find(name);
    std::optional<double> fin;
    std::optional<double> mean;
    std::optional<double> hl;
    if (it != metrics.stats.end()) {
      fin = it->second.final_value;
      mean = it->second.mean;
      if (std::isfinite(it->second.half_life)) hl = it->second.half_life;
    }
    out[std::string(name) + ".final"] = fin;
    out[std::string(name) + ".mean"] = mean;
    out[std::string(name) + ".half_life"] = hl;
  }
  out["interference_resistance"] = metrics.interference_resistance;
  out["forget_accuracy"] = metrics.forget_accuracy;
  out["accumulator.mean_error"] =
      metrics.accumulator ? std::optional<double>(metrics.accumulator->mean_error) : std::nullopt;
  auto share = [&](const std::optional<Fraction> AttributionProfile::*f) -> std::optional<double> {
    if (!metrics.attribution || !(metrics.attribution.value().*f)) return std::nullopt;
    return (metrics.attribution.value().*f)->to_double();
  };
  out["attribution.util_err"] = share(&AttributionProfile::util_err);
  out["attribution.write_err"] = share(&AttributionProfile::write_err);
  out["attribution.read_err"] = share(&AttributionProfile::read_err);
  out["attribution.joint_err"] = share(&AttributionProfile::joint_err);
  return out;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd m;
  m.n = static_cast<int>(values.size());
  if (values.empty()) return m;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  m.mean = mean;
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    m.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

SweepAxis SweepAxis::parse(std::string_view spec) {
  const auto eq = spec.find('=');
  if (eq == std::string_view::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ConfigError("sweep axis '" + std::string(spec) + "' must look like dial=v1,v2,...");
  }
  SweepAxis a;
  a.dial = std::string(spec.substr(0, eq));
  std::string rest(spec.substr(eq + 1));
  std::stringstream ss(rest);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      a.values.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("sweep axis " + a.dial + ": '" + item + "' is not a number");
    }
  }
  if (a.values.empty()) throw ConfigError("sweep axis " + a.dial + " has no values");
  PressureConfig probe;
  set_dial(probe, a.dial, a.values.front());
  return a;
}

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::floor(v) == v && std::fabs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<SweepCell> sweep_cells(const SweepPlan& plan) {
  std::vector<std::map<std::string, double>> combos{{}};
  for (const auto& axis : plan.axes) {
    std::vector<std::map<std::string, double>> next;
    for (const auto& c : combos) {
      for (double v : axis.values) {
        auto d = c;
        d[axis.dial] = v;
        next.push_back(std::move(d));
      }
    }
    combos = std::move(next);
  }
  std::vector<SweepCell> cells;
  for (const auto& dials : combos) {
    std::string name;
    for (const auto& axis : plan.axes) {
      if (!name.empty()) name += ",";
      name += axis.dial + "=" + format_number(dials.at(axis.dial));
    }
    if (name.empty()) name = "base";
    for (auto seed : plan.seeds) {
      SweepCell c;
      c.dials = dials;
      c.seed = seed;
      c.dir = "cells/" + name + "/seed=" + std::to_string(seed);
      cells.push_back(std::move(c));
    }
  }
  return cells;
}

namespace {

PressureConfig cell_pressure(const SweepPlan& plan, const SweepCell& cell) {
  PressureConfig p = plan.base;
  for (const auto& [dial, v] : cell.dials) set_dial(p, dial, v);
  p.validate();
  return p;
}

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

void SweepPlan::validate() const {
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
  if (n_sessions < 1) throw ConfigError("sweep needs n_sessions >= 1");
  if (jobs < 0) throw ConfigError("sweep jobs must be >= 0");
  std::set<std::string> seen;
  for (const auto& a : axes) {
    if (!seen.insert(a.dial).second) throw ConfigError("sweep axis " + a.dial + " given twice");
  }
  std::set<std::uint64_t> unique_seeds(seeds.begin(), seeds.end());
  if (unique_seeds.size() != seeds.size()) throw ConfigError("sweep seeds must be distinct");
  config.validate();
  for (const auto& cell : sweep_cells(*this)) cell_pressure(*this, cell);
  const auto& ids = scenario_ids();
  if (std::find(ids.begin(), ids.end(), scenario_id) == ids.end()) {
    throw ConfigError("unknown scenario '" + scenario_id + "'");
  }
}

bool SweepResult::complete() const {
  return std::all_of(cells.begin(), cells.end(), [](const SweepCell& c) { return c.ok; });
}

Json aggregate_sweep(const std::vector<SweepCell>& cells, const std::vector<SweepAxis>& axes) {
  std::vector<std::map<std::string, double>> order;
  for (const auto& c : cells) {
    if (std::find(order.begin(), order.end(), c.dials) == order.end()) order.push_back(c.dials);
  }
  Json rows = Json::array();
  for (const auto& dials : order) {
    Json dj = Json::object();
    for (const auto& axis : axes) dj[axis.dial] = dials.at(axis.dial);
    int n_cells = 0;
    int n_ok = 0;
    Json failed = Json::array();
    std::map<std::string, std::vector<double>> values;
    std::set<std::string> names;
    for (const auto& c : cells) {
      if (c.dials != dials) continue;
      ++n_cells;
      if (!c.ok) {
        failed.push_back({{"dir", c.dir}, {"seed", c.seed}, {"error", c.error}});
        continue;
      }
      ++n_ok;
      for (const auto& [name, v] : c.scalars) {
        names.insert(name);
        if (v) values[name].push_back(*v);
      }
    }
    Json metrics = Json::object();
    for (const auto& name : names) {
      const auto ms = mean_std(values[name]);
      metrics[name] = {{"mean", optional_json(ms.mean)}, {"std", optional_json(ms.std)}, {"n", ms.n}};
    }
    rows.push_back({{"dials", dj}, {"n_cells", n_cells}, {"n_ok", n_ok}, {"failed", failed}, {"metrics", metrics}});
  }
  return rows;
}

namespace {

std::string aggregate_csv(const Json& aggregate) {
  std::vector<std::string> dials;
  std::set<std::string> names;
  for (const auto& row : aggregate) {
    for (const auto& [k, v] : row["dials"].items()) {
      if (std::find(dials.begin(), dials.end(), k) == dials.end()) dials.push_back(k);
    }
    for (const auto& [k, v] : row["metrics"].items()) names.insert(k);
  }
  std::ostringstream out;
  for (const auto& d : dials) out << d << ',';
  out << "n_cells,n_ok";
  for (const auto& n : names) out << ',' << n << "_mean," << n << "_std";
  out << '\n';
  auto cell = [](const Json& v) { return v.is_null() ? std::string() : v.dump(); };
  for (const auto& row : aggregate) {
    for (const auto& d : dials) out << (row["dials"].contains(d) ? format_number(row["dials"][d].get<double>()) : "") << ',';
    out << row["n_cells"].get<int>() << ',' << row["n_ok"].get<int>();
    for (const auto& n : names) {
      if (row["metrics"].contains(n)) {
        out << ',' << cell(row["metrics"][n]["mean"]) << ',' << cell(row["metrics"][n]["std"]);
      } else {
        out << ",,";
      }
    }
    out << '\n';
  }
  return out.str();
}

Json cell_json(const SweepCell& c) {
  Json scalars = Json::object();
  for (const auto& [k, v] : c.scalars) scalars[k] = optional_json(v);
  return {{"dials", c.dials}, {"seed", c.seed}, {"dir", c.dir}, {"ok", c.ok}, {"error", c.error},
          {"scalars", scalars}};
}

}  // namespace

SweepResult run_sweep(const SweepPlan& plan, const fs::path& dir, const std::string& command) {
  plan.validate();
  SweepResult out;
  out.cells = sweep_cells(plan);
  fs::create_directories(dir);
  const int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  const int jobs = std::min<int>(plan.jobs == 0 ? hw : plan.jobs, static_cast<int>(out.cells.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < out.cells.size(); i = next.fetch_add(1)) {
      auto& cell = out.cells[i];
      try {
        const auto pkg = generate(plan.scenario_id, cell.seed, plan.n_sessions, cell_pressure(plan, cell));
        RunConfig cfg = plan.config;
        cfg.run_seed = cell.seed;
        const auto outcome = run_to_dir(pkg, cfg, dir / cell.dir, command);
        cell.ok = outcome.result.complete;
        cell.error = outcome.result.error;
        if (cell.ok) cell.scalars = sweep_scalars(outcome.metrics);
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.error = e.what();
      }
      if (!cell.ok) log::warn("sweep cell " + cell.dir + " failed: " + cell.error);
    }
  };
  std::vector<std::thread> pool;
  for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();

  out.aggregate = aggregate_sweep(out.cells, plan.axes);
  Json axes = Json::array();
  for (const auto& a : plan.axes) axes.push_back({{"dial", a.dial}, {"values", a.values}});
  Json cells = Json::array();
  for (const auto& c : out.cells) cells.push_back(cell_json(c));
  Json seeds = plan.seeds;
  const Json sweep{{"schema_version", kTraceSchemaVersion},
                   {"scenario_id", plan.scenario_id},
                   {"n_sessions", plan.n_sessions},
                   {"base_pressure", plan.base.to_json()},
                   {"axes", axes},
                   {"seeds", seeds},
                   {"config", plan.config.to_json()},
                   {"complete", out.complete()},
                   {"cells", cells}};
  write_text_file(dir / "sweep.json", sweep.dump(2) + "\n");
  write_text_file(dir / "aggregate.json", out.aggregate.dump(2) + "\n");
  write_text_file(dir / "aggregate.csv", aggregate_csv(out.aggregate));
  return out;
}

void write_curve_files(const fs::path& dir, const RunMetrics& metrics) {
  for (const auto& c : metrics.curves) {
    std::ostringstream out;
    out << "session,value\n";
    for (std::size_t t = 0; t < c.values.size(); ++t) {
      out << t << ',' << (c.values[t] ? Json(*c.values[t]).dump() : "") << '\n';
    }
    write_text_file(dir / "curves" / (c.metric + ".csv"), out.str());
  }
}

namespace {

std::string fixed(double v, int digits = 4) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string fixed(const std::optional<double>& v) { return v ? fixed(*v) : ""; }

std::string fixed(const std::optional<Fraction>& v) { return v ? fixed(v->to_double()) : ""; }

std::string render_table(const std::vector<std::string>& headers, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) width[i] = headers[i].size();
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  }
  std::ostringstream out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string& c = i < cells.size() ? cells[i] : std::string();
      if (i > 0) out << "  ";
      if (i == 0) {
        out << c << std::string(width[i] - c.size(), ' ');
      } else {
        out << std::string(width[i] - c.size(), ' ') << c;
      }
    }
    out << '\n';
  };
  line(headers);
  std::vector<std::string> rule;
  for (auto w : width) rule.push_back(std::string(w, '-'));
  line(rule);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::string attribution_status(const AttributionProfile& p) {
  if (p.anomaly) return "anomaly";
  if (p.abstained) return "abstained";
  return "ok";
}

std::vector<std::string> attribution_cells(const std::string& label, const std::optional<AttributionProfile>& p) {
  if (!p) return {label, "", "", "", "", "", "", "", "no data"};
  return {label,
          fixed(p->acc_p1.to_double()),
          p->abstained ? "" : fixed(p->acc_p2.to_double()),
          fixed(p->acc_p3.to_double()),
          fixed(p->util_err),
          fixed(p->write_err),
          fixed(p->read_err),
          fixed(p->joint_err),
          attribution_status(*p)};
}

const std::vector<std::string> kAttributionHeaders = {"cell",     "acc_p1",    "acc_p2",    "acc_p3", "util_err",
                                                      "write_err", "read_err", "joint_err", "status"};

}  // namespace

std::string curve_stats_table(const RunMetrics& metrics) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& c : metrics.curves) {
    auto it = metrics.stats.find(c.metric);
    if (it == metrics.stats.end()) {
      rows.push_back({c.metric, "", "", "", "", "", ""});
      continue;
    }
    const auto& s = it->second;
    rows.push_back({c.metric, fixed(s.half_life), fixed(s.slope), fixed(s.hazard), fixed(s.final_value),
                    fixed(s.mean), fixed(s.tau)});
  }
  return render_table({"metric", "half_life", "slope", "hazard", "final", "mean", "tau"}, rows);
}

std::string curve_stats_csv(const RunMetrics& metrics) {
  std::ostringstream out;
  out << "metric,half_life,slope,hazard,final,mean,tau\n";
  for (const auto& [name, s] : metrics.stats) {
    out << name << ',' << (std::isinf(s.half_life) ? std::string("inf") : Json(s.half_life).dump()) << ','
        << (s.slope ? Json(*s.slope).dump() : "") << ',' << Json(s.hazard).dump() << ','
        << Json(s.final_value).dump() << ',' << Json(s.mean).dump() << ',' << Json(s.tau).dump() << '\n';
  }
  return out.str();
}

std::string attribution_table(const std::vector<std::pair<std::string, std::optional<AttributionProfile>>>& rows) {
  std::vector<std::vector<std::string>> cells;
  for (const auto& [label, p] : rows) cells.push_back(attribution_cells(label, p));
  return render_table(kAttributionHeaders, cells);
}

std::string attribution_csv(const std::vector<std::pair<std::string, std::optional<AttributionProfile>>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < kAttributionHeaders.size(); ++i) out << (i ? "," : "") << kAttributionHeaders[i];
  out << '\n';
  for (const auto& [label, p] : rows) {
    const auto cells = attribution_cells(label, p);
    for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
    out << '\n';
  }
  return out.str();
}

std::vector<std::pair<std::string, std::optional<AttributionProfile>>> attribution_rows(const RunResult& result) {
  std::vector<std::pair<std::string, std::optional<AttributionProfile>>> rows;
  rows.emplace_back("all", run_attribution(result));
  for (const auto& s : result.sessions) {
    RunResult one;
    one.sessions = {s};
    auto p = run_attribution(one);
    if (p) rows.emplace_back("session " + std::to_string(s.session), p);
  }
  return rows;
}

std::string shock_table(const ShockReport& r) {
  return render_table({"event", "metric", "window", "paired_delta", "window_delta", "window_delta_raw",
                       "maintenance_share"},
                      {{r.event.describe(), r.metric, std::to_string(r.window), fixed(r.paired_delta),
                        fixed(r.window_delta), fixed(r.window_delta_raw), fixed(r.maintenance_share)}});
}

std::string aggregate_table(const Json& aggregate) {
  std::vector<std::string> dials;
  for (const auto& row : aggregate) {
    for (const auto& [k, v] : row["dials"].items()) {
      if (std::find(dials.begin(), dials.end(), k) == dials.end()) dials.push_back(k);
    }
  }
  const std::vector<std::string> shown = {"keyword_m.final", "recall_rate.mean", "probe_accuracy.mean",
                                          "summarization_fidelity.mean", "interference_resistance",
                                          "accumulator.mean_error"};
  std::vector<std::string> headers = dials;
  if (headers.empty()) headers.push_back("cell");
  headers.push_back("ok");
  for (const auto& s : shown) headers.push_back(s);
  std::vector<std::vector<std::string>> rows;
  for (const auto& row : aggregate) {
    std::vector<std::string> r;
    for (const auto& d : dials) r.push_back(format_number(row["dials"][d].get<double>()));
    if (dials.empty()) r.push_back("base");
    r.push_back(std::to_string(row["n_ok"].get<int>()) + "/" + std::to_string(row["n_cells"].get<int>()));
    for (const auto& s : shown) {
      if (!row["metrics"].contains(s) || row["metrics"][s]["mean"].is_null()) {
        r.push_back("");
        continue;
      }
      const auto& m = row["metrics"][s];
      std::string cell = fixed(m["mean"].get<double>());
      if (!m["std"].is_null()) cell += " +/- " + fixed(m["std"].get<double>());
      r.push_back(cell);
    }
    rows.push_back(std::move(r));
  }
  return render_table(headers, rows);
}

}  // namespace agetrack
