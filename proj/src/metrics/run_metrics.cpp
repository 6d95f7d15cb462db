#include "agetrack/errors.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/metrics.hpp"
#include "agetrack/scoring.hpp"
#include "agetrack/text.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace agetrack {

namespace {

const SessionRecord* session_at(const RunResult& r, int t) {
  for (const auto& s : r.sessions) {
    if (s.session == t) return &s;
  }
  return nullptr;
}

// The run recorded a write for this session.
bool session_complete(const RunResult& r, const SessionRecord& s) {
  return r.complete || &s != &r.sessions.back();
}

const ProbeSpec* probe_spec(const RunPackage& pkg, int t, const std::string& id) {
  if (t < 0 || t >= static_cast<int>(pkg.scripts.size())) return nullptr;
  for (const auto& p : pkg.scripts[static_cast<std::size_t>(t)].probes) {
    if (p.probe_id == id) return &p;
  }
  return nullptr;
}

std::optional<double> mean_of(const std::vector<double>& v) {
  if (v.empty()) return std::nullopt;
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

std::set<std::string> distractor_lineages(const FactGraph& graph) {
  std::set<std::string> out;
  for (const auto& p : graph.pairs()) {
    if (graph.has_fact(p.fact_b)) out.insert(graph.fact(p.fact_b).lineage_id);
  }
  return out;
}

}  // namespace

std::vector<const Fact*> cohort_facts(const FactGraph& graph, int t) {
  const auto distractors = distractor_lineages(graph);
  std::vector<const Fact*> out;
  for (const auto& f : graph.facts()) {
    if (f.session_introduced > t) continue;
    if (f.superseded_at && *f.superseded_at <= t) continue;
    if (f.invalidated_at && *f.invalidated_at <= t) continue;
    if (distractors.count(f.lineage_id)) continue;
    out.push_back(&f);
  }
  return out;
}

double keyword_m(const RunResult& result, const FactGraph& graph, int t) {
  std::set<std::string> keywords;
  for (const Fact* f : cohort_facts(graph, t)) {
    for (const auto& k : f->keywords) keywords.insert(text::to_lower(k));
  }
  if (keywords.empty()) return 1.0;
  std::string eval_text;
  if (const auto* s = session_at(result, t)) {
    for (const auto& p : s->probes) eval_text += text::to_lower(p.response) + "\n";
  }
  const auto hit = std::count_if(keywords.begin(), keywords.end(),
                                 [&](const std::string& k) { return text::contains_lowered(eval_text, k); });
  return static_cast<double>(hit) / static_cast<double>(keywords.size());
}

std::optional<double> constraint_precision(const RunResult& result, int t) {
  const auto* s = session_at(result, t);
  if (s == nullptr || s->probes.empty()) return std::nullopt;
  const auto hit = std::count_if(s->probes.begin(), s->probes.end(), [](const ProbeRecord& p) { return p.carries_value; });
  return static_cast<double>(hit) / static_cast<double>(s->probes.size());
}

double summarization_fidelity(const MemoryState& snapshot, const FactGraph& graph, int t) {
  const auto cohort = cohort_facts(graph, t);
  if (cohort.empty()) return 1.0;
  const std::string store = text::to_lower(snapshot.serialize_text());
  const auto kept = std::count_if(cohort.begin(), cohort.end(), [&](const Fact* f) {
    return std::any_of(f->keywords.begin(), f->keywords.end(),
                       [&](const std::string& k) { return text::contains_lowered(store, k); });
  });
  return static_cast<double>(kept) / static_cast<double>(cohort.size());
}

namespace {

// Session the probed fact came from; falls back to the earliest required fact.
std::optional<int> probe_source(const ProbeRecord& p, const ProbeSpec* spec, const FactGraph& graph) {
  if (p.source_session) return p.source_session;
  if (spec == nullptr || spec->required_fact_ids.empty()) return std::nullopt;
  int s = std::numeric_limits<int>::max();
  for (const auto& id : spec->required_fact_ids) {
    if (graph.has_fact(id)) s = std::min(s, graph.fact(id).session_introduced);
  }
  return s == std::numeric_limits<int>::max() ? std::nullopt : std::optional<int>(s);
}

}  // namespace

double recall_rate(const RunResult& result, const RunPackage& package, int t) {
  const auto* s = session_at(result, t);
  if (s == nullptr) return 1.0;
  int total = 0;
  int recalled = 0;
  for (const auto& p : s->probes) {
    if (p.kind != ProbeKind::recall && p.kind != ProbeKind::lag) continue;
    const auto src = probe_source(p, probe_spec(package, t, p.probe_id), package.graph);
    if (!src || *src >= t) continue;
    ++total;
    if (p.recalled) ++recalled;
  }
  return total == 0 ? 1.0 : static_cast<double>(recalled) / total;
}

std::optional<double> interference_resistance(const RunResult& result) {
  int total = 0;
  int correct = 0;
  for (const auto& s : result.sessions) {
    for (const auto& p : s.probes) {
      if (!p.interference_correct) continue;
      ++total;
      if (*p.interference_correct) ++correct;
    }
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(correct) / total;
}

std::optional<double> forget_accuracy(const RunResult& result, const FactGraph& graph) {
  std::vector<const Fact*> retracted;
  for (const auto& f : graph.facts()) {
    if (f.invalidated_at) retracted.push_back(&f);
  }
  if (retracted.empty()) return std::nullopt;
  int total = 0;
  int clean = 0;
  for (const auto& s : result.sessions) {
    std::vector<std::string> cited;
    for (const Fact* f : retracted) {
      if (*f->invalidated_at < s.session) cited.insert(cited.end(), f->keywords.begin(), f->keywords.end());
    }
    if (cited.empty()) continue;
    ++total;
    bool ok = true;
    for (const auto& p : s.probes) ok = ok && !contains_any(p.response, cited);
    for (const auto& task : s.tasks) ok = ok && !contains_any(task.response, cited);
    if (ok) ++clean;
  }
  if (total == 0) return std::nullopt;
  return static_cast<double>(clean) / total;
}

std::optional<ChainRecall> chain_recall(const RunResult& result, const RunPackage& package) {
  const FactGraph& graph = package.graph;
  std::map<std::string, const DependencyProbe*> by_id;
  for (const auto& dp : graph.probes()) by_id[dp.probe_id] = &dp;

  ChainRecall out;
  std::map<int, std::pair<int, int>> depth_counts;
  std::map<int, std::pair<int, int>> span_counts;
  bool any = false;
  for (const auto& s : result.sessions) {
    for (const auto& p : s.probes) {
      if (p.kind != ProbeKind::dependency) continue;
      const ProbeSpec* spec = probe_spec(package, s.session, p.probe_id);
      DependencyProbe local;
      const DependencyProbe* dp = nullptr;
      if (auto it = by_id.find(p.probe_id); it != by_id.end()) {
        dp = it->second;
      } else if (spec != nullptr) {
        local.probe_id = p.probe_id;
        local.required_fact_ids = spec->required_fact_ids;
        local.schedule_session = s.session;
        dp = &local;
      } else {
        continue;
      }
      any = true;
      const bool correct = p.score >= 1.0 - 1e-12;
      auto& d = depth_counts[graph.probe_version_depth(*dp)];
      auto& sp = span_counts[graph.probe_session_span(*dp)];
      ++d.second;
      ++sp.second;
      if (correct) {
        ++d.first;
        ++sp.first;
      }
      HopAnalysis hop;
      hop.probe_id = p.probe_id;
      hop.session = s.session;
      for (const auto& id : dp->required_fact_ids) {
        if (!graph.has_fact(id)) continue;
        const Fact& f = graph.fact_as_of(graph.fact(id).lineage_id, s.session);
        const bool hit = contains_any(p.response, f.keywords);
        hop.fact_ids.push_back(id);
        hop.hits.push_back(hit);
        if (!hit && !hop.first_failing_fact) hop.first_failing_fact = id;
      }
      out.per_hop.push_back(std::move(hop));
    }
  }
  if (!any) return std::nullopt;
  for (const auto& [k, c] : depth_counts) out.by_depth[k] = static_cast<double>(c.first) / c.second;
  for (const auto& [k, c] : span_counts) out.by_span[k] = static_cast<double>(c.first) / c.second;
  return out;
}

bool compounding(const std::vector<double>& errors) {
  std::size_t run = 1;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    run = errors[i] >= errors[i - 1] ? run + 1 : 1;
    if (run >= 3 && errors[i] > 0.0) return true;
  }
  return false;
}

std::optional<AccumulatorMetrics> accumulator_metrics(const RunResult& result) {
  AccumulatorMetrics m;
  std::vector<double> per_session;
  double sum = 0.0;
  for (const auto& s : result.sessions) {
    std::vector<double> errs;
    for (const auto& p : s.probes) {
      if (!p.accumulator_error) continue;
      m.errors.push_back({s.session, p.probe_id, *p.accumulator_error, p.number_missing});
      errs.push_back(*p.accumulator_error);
      sum += *p.accumulator_error;
    }
    if (auto mean = mean_of(errs)) per_session.push_back(*mean);
  }
  if (m.errors.empty()) return std::nullopt;
  m.mean_error = sum / static_cast<double>(m.errors.size());
  m.compounding_detected = compounding(per_session);
  return m;
}

ShockReport shock_report(const RunResult& shock, const RunResult& control, const RunPackage& package,
                         const LifecycleEvent& event, const std::string& metric, int window) {
  if (shock.package_digest != control.package_digest) {
    throw ConfigError("shock report: runs use different packages");
  }
  if (shock.package_digest != package_digest(package)) {
    throw ConfigError("shock report: runs were not produced from the given package");
  }
  if (shock.config.run_seed != control.config.run_seed) throw ConfigError("shock report: run seeds differ");
  auto stripped = [](const RunConfig& c) {
    Json j = c.to_json();
    j.erase("events");
    j.erase("package_events");
    return j;
  };
  if (stripped(shock.config) != stripped(control.config)) {
    throw ConfigError("shock report: runs differ in settings other than their events");
  }

  const auto ms = compute_run_metrics(shock, package);
  const auto mc = compute_run_metrics(control, package);
  const Curve& cs = ms.curve(metric);
  const Curve& cc = mc.curve(metric);

  ShockReport r;
  r.event = event;
  r.metric = metric;
  r.window = window;
  r.paired_delta = curve_stats(cs).final_value - curve_stats(cc).final_value;
  r.window_delta_raw = window_delta(cs, event.session, window);
  const auto control_change = window_delta(cc, event.session, window);
  if (r.window_delta_raw && control_change) r.window_delta = *r.window_delta_raw - *control_change;

  // Write error per session from the attribution ladder.
  std::map<int, double> write_err;
  for (const auto& s : shock.sessions) {
    std::vector<double> w;
    for (const auto& p : s.probes) {
      auto p2 = p.condition_scores.find("P2");
      auto p3 = p.condition_scores.find("P3");
      if (p2 != p.condition_scores.end() && p3 != p.condition_scores.end()) w.push_back(p3->second - p2->second);
    }
    if (auto m = mean_of(w)) write_err[s.session] = *m;
  }
  std::optional<double> pre;
  std::optional<double> post;
  for (const auto& [t, w] : write_err) {
    if (t < event.session) pre = w;
    if (t >= event.session && !post) post = w;
  }
  if (pre && post) r.maintenance_share = *post - *pre;
  return r;
}

Json ShockReport::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  return {{"event", event.describe()},
          {"event_kind", to_string(event.kind)},
          {"event_session", event.session},
          {"metric", metric},
          {"window", window},
          {"paired_delta", paired_delta},
          {"window_delta", opt(window_delta)},
          {"window_delta_raw", opt(window_delta_raw)},
          {"maintenance_share", opt(maintenance_share)}};
}

const Curve& RunMetrics::curve(const std::string& metric) const {
  for (const auto& c : curves) {
    if (c.metric == metric) return c.values;
  }
  throw LookupError("unknown metric '" + metric + "'");
}

RunMetrics compute_run_metrics(const RunResult& result, const RunPackage& package) {
  const FactGraph& graph = package.graph;
  const int n = result.n_sessions;
  const std::vector<std::string> names = {"keyword_m",      "recall_rate",       "constraint_precision",
                                          "summarization_fidelity", "probe_accuracy", "accumulator_error",
                                          "dep_recall",     "memory_words"};
  RunMetrics m;
  for (const auto& name : names) m.curves.push_back({name, Curve(static_cast<std::size_t>(n))});
  auto set = [&](std::size_t idx, int t, std::optional<double> v) { m.curves[idx].values[static_cast<std::size_t>(t)] = v; };

  std::map<std::string, std::pair<int, int>> lag_counts;
  for (const auto& s : result.sessions) {
    const int t = s.session;
    if (t < 0 || t >= n) continue;
    set(0, t, keyword_m(result, graph, t));
    set(1, t, recall_rate(result, package, t));
    set(2, t, constraint_precision(result, t));
    std::vector<double> scores;
    std::vector<double> acc;
    for (const auto& p : s.probes) {
      scores.push_back(p.score);
      if (p.accumulator_error) acc.push_back(*p.accumulator_error);
      if ((p.kind == ProbeKind::lag || p.kind == ProbeKind::recall) && p.source_session && *p.source_session < t) {
        auto& c = lag_counts[lag_bucket(t - *p.source_session)];
        ++c.second;
        if (p.recalled) ++c.first;
      }
    }
    set(4, t, mean_of(scores));
    set(5, t, mean_of(acc));
    std::vector<double> dep;
    for (const auto& task : s.tasks) {
      if (task.dep_recall) dep.push_back(*task.dep_recall);
    }
    set(6, t, mean_of(dep));
    if (session_complete(result, s)) {
      set(3, t, summarization_fidelity(s.memory, graph, t));
      set(7, t, static_cast<double>(s.memory_words));
    }
  }
  for (const auto& c : m.curves) {
    if (std::any_of(c.values.begin(), c.values.end(), [](const auto& v) { return v.has_value(); })) {
      m.stats[c.metric] = curve_stats(c.values);
    }
  }
  m.interference_resistance = interference_resistance(result);
  m.forget_accuracy = forget_accuracy(result, graph);
  m.accumulator = accumulator_metrics(result);
  m.chain = chain_recall(result, package);
  for (const auto& [bucket, c] : lag_counts) m.lag_accuracy[bucket] = static_cast<double>(c.first) / c.second;
  m.attribution = run_attribution(result);
  return m;
}

Json RunMetrics::to_json() const {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  Json curves_j = Json::object();
  for (const auto& c : curves) {
    Json arr = Json::array();
    for (const auto& v : c.values) arr.push_back(opt(v));
    curves_j[c.metric] = arr;
  }
  j["curves"] = curves_j;
  Json stats_j = Json::object();
  for (const auto& [name, s] : stats) stats_j[name] = curve_stats_json(s);
  j["curve_stats"] = stats_j;
  j["interference_resistance"] = opt(interference_resistance);
  j["forget_accuracy"] = opt(forget_accuracy);
  if (accumulator) {
    Json errs = Json::array();
    for (const auto& e : accumulator->errors) {
      errs.push_back({{"session", e.session}, {"probe_id", e.probe_id}, {"error", e.error}, {"missing", e.missing}});
    }
    j["accumulator"] = {{"errors", errs},
                        {"mean_error", accumulator->mean_error},
                        {"compounding_detected", accumulator->compounding_detected}};
  } else {
    j["accumulator"] = nullptr;
  }
  if (chain) {
    Json depth = Json::object();
    for (const auto& [k, v] : chain->by_depth) depth[std::to_string(k)] = v;
    Json span = Json::object();
    for (const auto& [k, v] : chain->by_span) span[std::to_string(k)] = v;
    Json hops = Json::array();
    for (const auto& h : chain->per_hop) {
      hops.push_back({{"probe_id", h.probe_id},
                      {"session", h.session},
                      {"fact_ids", h.fact_ids},
                      {"hits", h.hits},
                      {"first_failing_fact", h.first_failing_fact ? Json(*h.first_failing_fact) : Json(nullptr)}});
    }
    j["chain_recall"] = {{"by_depth", depth}, {"by_span", span}, {"per_hop", hops}};
  } else {
    j["chain_recall"] = nullptr;
  }
  j["lag_accuracy"] = lag_accuracy;
  j["attribution"] = attribution ? attribution->to_json() : Json(nullptr);
  return j;
}

std::string RunMetrics::to_csv(const std::string& run_id) const {
  std::ostringstream out;
  out << "run_id,session,metric,value\n";
  const std::size_t n = curves.empty() ? 0 : curves.front().values.size();
  for (std::size_t t = 0; t < n; ++t) {
    for (const auto& c : curves) {
      out << run_id << ',' << t << ',' << c.metric << ',';
      if (c.values[t]) {
        Json v = *c.values[t];
        out << v.dump();
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace agetrack
