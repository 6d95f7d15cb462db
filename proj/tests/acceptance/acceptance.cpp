// One PASS/FAIL line per acceptance criterion; exits non-zero when any fails.

#include "agetrack/controller.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/log.hpp"
#include "agetrack/metrics.hpp"
#include "agetrack/rng.hpp"
#include "agetrack/runner.hpp"
#include "agetrack/text.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace agetrack;

namespace {

// Tolerances and budgets, pinned.
constexpr double kC1MaxSeconds = 5.0;
constexpr double kC3HalfLifeTol = 1e-6;
constexpr double kC3SlopeTol = 1e-9;
constexpr double kC5MaxSeconds = 30.0;
constexpr double kC6MaxFidelityShift = 0.1;
constexpr double kC11MaxSeconds = 300.0;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failed = 0;

void report(const std::string& id, const std::string& title, const std::function<Outcome()>& check) {
  const auto t0 = Clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++g_failed;
  std::ostringstream secs;
  secs.precision(3);
  secs << std::fixed << seconds_since(t0);
  std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << title << " [" << secs.str() << "s] " << o.detail
            << std::endl;
}

std::string num(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

std::string opt(const std::optional<double>& v) { return v ? num(*v) : "null"; }

// C1
Outcome determinism() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  for (const auto& id : scenario_ids()) {
    const auto a = package_digest(generate(id, 7, 10, preset("medium")));
    const auto b = package_digest(generate(id, 7, 10, preset("medium")));
    if (a != b) {
      ok = false;
      detail += id + " digests differ; ";
    }
  }
  const double secs = seconds_since(t0);
  if (secs >= kC1MaxSeconds) {
    ok = false;
    detail += "took " + num(secs) + "s; ";
  }
  return {ok, detail + "6 scenarios, " + num(secs) + "s"};
}

// C2
Outcome accumulator_gold() {
  FactGraph g;
  g.add_accumulator("budget", 309, "USD");
  g.add_delta("budget", 1, -87);
  g.add_delta("budget", 2, -68);
  bool ok = g.gold_accumulator_value("budget", 1) == 222.0;
  for (int t = 2; t < 12; ++t) ok = ok && g.gold_accumulator_value("budget", t) == 154.0;
  if (!ok) return {false, "worked example mismatch"};

  Rng rng(20261015);
  for (int trial = 0; trial < 200; ++trial) {
    FactGraph h;
    const double init = static_cast<double>(rng.uniform_int(-500, 500));
    h.add_accumulator("acc", init, "");
    const int n = static_cast<int>(rng.uniform_int(0, 15));
    std::vector<std::pair<int, double>> deltas;
    for (int i = 0; i < n; ++i) {
      const int s = static_cast<int>(rng.uniform_int(0, 12));
      const double v = static_cast<double>(rng.uniform_int(-300, 300));
      deltas.emplace_back(s, v);
      h.add_delta("acc", s, v);
    }
    for (int t = 0; t <= 13; ++t) {
      double running = init;
      for (const auto& [s, v] : deltas) {
        if (s <= t) running += v;
      }
      if (h.gold_accumulator_value("acc", t) != running) {
        return {false, "trial " + std::to_string(trial) + " session " + std::to_string(t)};
      }
    }
  }
  return {true, "222 @1, 154 @>=2; 200 random sequences exact"};
}

// C3: independent half-life oracle. Scans a fine grid of the linear
// interpolant for the first sample at or below half of m(0), then bisects
// inside that grid cell.
double oracle_half_life(const Curve& m) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i]) pts.emplace_back(static_cast<double>(i), *m[i]);
  }
  const double m0 = pts.front().second;
  if (m0 <= 0) return std::numeric_limits<double>::infinity();
  const double half = 0.5 * m0;
  auto value = [&](double t) {
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (t <= pts[i].first) {
        const auto& [t0, v0] = pts[i - 1];
        const auto& [t1, v1] = pts[i];
        return v0 + (v1 - v0) * (t - t0) / (t1 - t0);
      }
    }
    return pts.back().second;
  };
  const double step = 1e-3;
  const double t_end = pts.back().first;
  const long steps = std::lround((t_end - pts.front().first) / step);
  double prev = pts.front().first;
  for (long k = 1; k <= steps; ++k) {
    const double t = pts.front().first + static_cast<double>(k) * step;
    if (value(t) <= half) {
      double lo = prev;
      double hi = t;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (value(mid) <= half ? hi : lo) = mid;
      }
      return hi;
    }
    prev = t;
  }
  return std::numeric_limits<double>::infinity();
}

Outcome curve_statistics() {
  Rng rng(31337);
  double worst = 0.0;
  int crossed = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(3, 15));
    Curve m(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const bool hole = i > 0 && i < n - 1 && rng.bernoulli(0.15);
      if (!hole) m[static_cast<std::size_t>(i)] = rng.uniform(0.02, 1.0);
    }
    const double got = half_life(m);
    const double want = oracle_half_life(m);
    if (std::isinf(want) != std::isinf(got)) return {false, "trial " + std::to_string(trial) + ": crossing disagrees"};
    if (!std::isinf(want)) {
      ++crossed;
      worst = std::max(worst, std::fabs(got - want));
    }
  }
  if (worst > kC3HalfLifeTol) return {false, "half_life max error " + num(worst)};

  for (int trial = 0; trial < 50; ++trial) {
    const double a = rng.uniform(-5, 5);
    const double b = rng.uniform(-2, 2);
    Curve m;
    for (int t = 0; t < 12; ++t) m.push_back(a + b * t);
    const auto s = ols_slope(m);
    if (!s || std::fabs(*s - b) > kC3SlopeTol) return {false, "linear slope off by " + num(s ? *s - b : NAN)};
  }
  for (double c : {0.0, 0.3, 1.0, 42.0}) {
    const auto st = curve_stats(Curve(10, c));
    if (!std::isinf(st.half_life) || !st.slope || *st.slope != 0.0 || st.hazard != 0.0) {
      return {false, "constant curve " + num(c) + " not (inf, 0, 0)"};
    }
  }
  return {true, "100 random curves (" + std::to_string(crossed) + " crossing), max |err| " + num(worst) +
                    "; linear slopes exact to 1e-9; constants (inf, 0, 0)"};
}

// C4
Outcome attribution_identity() {
  int monotone = 0;
  int anomalous = 0;
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      for (int k = 0; k <= 10; ++k) {
        const auto a = attribution_profile(i / 10.0, j / 10.0, k / 10.0);
        if (i <= j && j <= k) {
          ++monotone;
          if (a.anomaly || !a.util_err || !a.write_err || !a.read_err) return {false, "monotone triple flagged"};
          if (*a.util_err + *a.write_err + *a.read_err != Fraction(1) - Fraction(i, 10)) {
            return {false, "identity broken at " + std::to_string(i) + "," + std::to_string(j) + "," +
                               std::to_string(k)};
          }
        } else {
          ++anomalous;
          if (!a.anomaly || a.util_err || a.write_err || a.read_err || a.joint_err) {
            return {false, "non-monotone triple not withheld"};
          }
        }
      }
    }
  }
  return {true, std::to_string(monotone) + " monotone triples exact, " + std::to_string(anomalous) +
                    " non-monotone flagged"};
}

// C5
Outcome compression_dose_response() {
  const auto t0 = Clock::now();
  int wins = 0;
  std::string detail;
  for (std::uint64_t seed : {7, 11, 13}) {
    const auto pkg = generate("S1", seed, 10, preset("light"));
    RunConfig trunc;
    trunc.policy.policy = PolicyKind::growing_history;
    trunc.policy.word_budget = 60;
    trunc.summarizer = SummarizerKind::truncating;
    RunConfig extr = trunc;
    extr.policy.word_budget = 200;
    extr.summarizer = SummarizerKind::extractive;
    const auto mt = compute_run_metrics(run(pkg, trunc), pkg).stats.at("keyword_m");
    const auto me = compute_run_metrics(run(pkg, extr), pkg).stats.at("keyword_m");
    const bool win = mt.final_value < me.final_value && mt.half_life < me.half_life;
    wins += win ? 1 : 0;
    detail += "seed " + std::to_string(seed) + ": mF " + num(mt.final_value) + " vs " + num(me.final_value) + ", hl " +
              num(mt.half_life) + " vs " + num(me.half_life) + "; ";
  }
  const double secs = seconds_since(t0);
  return {wins >= 2 && secs < kC5MaxSeconds, std::to_string(wins) + "/3 seeds; " + detail};
}

// C6
Outcome interference_dial() {
  auto p0 = preset("medium");
  p0.n_confusable_pairs = 0;
  auto p12 = p0;
  p12.n_confusable_pairs = 12;
  const auto k0 = generate("S3", 7, 10, p0);
  const auto k12 = generate("S3", 7, 10, p12);
  RunConfig c;
  c.policy.policy = PolicyKind::growing_history;
  c.summarizer = SummarizerKind::extractive;
  c.agent = AgentBinding::scripted("recency_confused");
  const auto m0 = compute_run_metrics(run(k0, c), k0);
  const auto m12 = compute_run_metrics(run(k12, c), k12);
  const double f0 = m0.stats.at("summarization_fidelity").mean;
  const double f12 = m12.stats.at("summarization_fidelity").mean;
  const bool ok = !m0.interference_resistance && m12.interference_resistance && *m12.interference_resistance < 1.0 &&
                  std::fabs(f12 - f0) < kC6MaxFidelityShift;
  return {ok, "IR " + opt(m0.interference_resistance) + " -> " + opt(m12.interference_resistance) +
                  "; mean fidelity " + num(f0) + " -> " + num(f12)};
}

// C7
Outcome maintenance_shock() {
  const auto pkg = generate("S6", 7, 10, preset("medium"));
  RunConfig control;
  control.policy.policy = PolicyKind::growing_history;
  control.policy.word_budget = 600;
  control.summarizer = SummarizerKind::extractive;
  control.package_events = false;
  RunConfig shock = control;
  const auto event = LifecycleEvent::parse("flush@" + std::to_string(pkg.n_sessions / 2));
  shock.events.push_back(event);
  const auto rc = run(pkg, control);
  const auto rep = shock_report(run(pkg, shock), rc, pkg, event);
  const auto zero = shock_report(run(pkg, control), rc, pkg, event);
  const bool ok = rep.window_delta && *rep.window_delta < 0 && rep.paired_delta < 0 && zero.paired_delta == 0.0 &&
                  zero.window_delta && *zero.window_delta == 0.0;
  return {ok, event.describe() + ": paired " + num(rep.paired_delta) + ", window " + opt(rep.window_delta) +
                  "; zero-event paired " + num(zero.paired_delta) + ", window " + opt(zero.window_delta)};
}

// C8
Outcome typed_state_overlay() {
  const auto pkg = generate("S2", 7, 10, preset("medium"));
  RunConfig off;
  off.policy.policy = PolicyKind::growing_history;
  off.summarizer = SummarizerKind::truncating;
  RunConfig on = off;
  on.policy.overlay_enabled = true;
  const auto m_off = compute_run_metrics(run(pkg, off), pkg);
  const auto r_on = run(pkg, on);
  const auto m_on = compute_run_metrics(r_on, pkg);
  int probes = 0;
  for (const auto& s : r_on.sessions) {
    for (const auto& script_probe : pkg.scripts[static_cast<std::size_t>(s.session)].probes) {
      if (!script_probe.accumulator) continue;
      ++probes;
      const auto& name = *script_probe.accumulator;
      const double gold = pkg.graph.gold_accumulator_value(name, s.session);
      if (!s.memory.sidecar || !s.memory.sidecar->count(name) || s.memory.sidecar->at(name) != gold) {
        return {false, "sidecar differs from gold at session " + std::to_string(s.session)};
      }
    }
  }
  const bool ok = m_off.accumulator && m_on.accumulator && m_off.accumulator->mean_error > 0 &&
                  m_on.accumulator->mean_error == 0.0 && probes > 0;
  return {ok, "mean error off " + num(m_off.accumulator ? m_off.accumulator->mean_error : NAN) + ", on " +
                  num(m_on.accumulator ? m_on.accumulator->mean_error : NAN) + "; sidecar == gold at " +
                  std::to_string(probes) + " probes"};
}

// C9
Outcome controller_ordering() {
  // The ordering concerns the error-driven overlay trigger. Session 0
  // carries a huge error to show that warm-up never fires.
  const std::vector<ControllerSignals> trajectory = {{500.0, 0.0}, {10.0, 0.9}, {25.0, 0.45},
                                                     {40.0, 0.45}, {60.0, 0.3}, {80.0, 0.2}};
  const auto aggr = simulate_controller(trajectory, ControllerConfig::aggressive());
  const auto cons = simulate_controller(trajectory, ControllerConfig::conservative());
  if (!aggr.overlay_fired_at || !cons.overlay_fired_at) return {false, "overlay never fired on the trajectory"};
  bool ok = *aggr.overlay_fired_at <= *cons.overlay_fired_at && *aggr.overlay_fired_at > 0 &&
            (!aggr.careful_fired_at || *aggr.careful_fired_at > 0) && (!cons.careful_fired_at || *cons.careful_fired_at > 0);
  Rng rng(99);
  for (int trial = 0; trial < 500 && ok; ++trial) {
    std::vector<ControllerSignals> traj;
    for (int t = 0; t < 12; ++t) traj.push_back({rng.uniform(0, 120), rng.uniform(0, 1)});
    const auto a = simulate_controller(traj, ControllerConfig::aggressive());
    const auto c = simulate_controller(traj, ControllerConfig::conservative());
    if (c.overlay_fired_at && (!a.overlay_fired_at || *a.overlay_fired_at > *c.overlay_fired_at)) ok = false;
    if ((a.overlay_fired_at && *a.overlay_fired_at == 0) || (c.careful_fired_at && *c.careful_fired_at == 0)) ok = false;
  }
  std::string detail = "overlay fires at " + std::to_string(*aggr.overlay_fired_at) + " (aggressive) <= " +
                       std::to_string(*cons.overlay_fired_at) + " (conservative); 500 random trajectories ordered";

  const auto pkg = generate("S2", 7, 10, preset("medium"));
  RunConfig base;
  base.policy.policy = PolicyKind::growing_history;
  base.summarizer = SummarizerKind::truncating;
  const auto plain = run(pkg, base);
  int checked = 0;
  for (const auto& spec : {"20,0.4", "50,0.5", "150,0.5", "190,0.1"}) {
    RunConfig c = base;
    c.controller = ControllerConfig::parse(spec);
    const auto r = run(pkg, c);
    int fired = static_cast<int>(r.sessions.size());
    for (const auto& s : r.sessions) {
      if (!s.controller.empty()) {
        fired = s.session;
        break;
      }
    }
    if (fired == 0) ok = false;
    for (int t = 0; t < fired; ++t) {
      ++checked;
      if (r.sessions[static_cast<std::size_t>(t)].memory.to_json().dump() !=
          plain.sessions[static_cast<std::size_t>(t)].memory.to_json().dump()) {
        ok = false;
        detail += "; snapshot " + std::to_string(t) + " differs under " + spec;
      }
    }
  }
  return {ok, detail + "; " + std::to_string(checked) + " pre-trigger snapshots identical"};
}

// C10
Outcome p2_p3_contexts() {
  const auto pkg = generate("S2", 7, 10, preset("medium"));
  const auto& g = pkg.graph;
  RunConfig p3;
  p3.condition = ProbeCondition::P3;
  const auto r = run(pkg, p3);
  int contexts = 0;
  for (const auto& s : r.sessions) {
    const auto& script = pkg.scripts[static_cast<std::size_t>(s.session)];
    for (std::size_t i = 0; i < s.probes.size(); ++i) {
      const auto& rec = s.probes[i];
      const auto& spec = script.probes[i];
      if (rec.context_source != "fact_graph") return {false, "probe context not sourced from the graph"};
      ++contexts;
      for (const auto& id : spec.required_fact_ids) {
        const auto& lineage = g.fact(id).lineage_id;
        const auto& cur = g.fact_as_of(lineage, s.session);
        const bool retracted = cur.invalidated_at && *cur.invalidated_at < s.session;
        if (!retracted && rec.context.find(cur.text) == std::string::npos) {
          return {false, rec.probe_id + ": current text of " + cur.fact_id + " missing"};
        }
        for (const auto* v : g.lineage(lineage)) {
          if (!v->superseded_at || *v->superseded_at > s.session) continue;
          for (const auto& k : v->superseded_keywords) {
            if (text::contains_ci(rec.context, k)) return {false, rec.probe_id + ": superseded keyword " + k};
          }
        }
      }
    }
  }

  // Write omission: a store holding every session's text except the
  // sentences naming one fact yields no retrieval for a probe on that fact.
  int stripped = 0;
  int nonempty_before = 0;
  for (const auto& f : g.facts()) {
    if (f.superseded_at || f.invalidated_at) continue;
    std::vector<std::string> all;
    std::vector<std::string> kept;
    for (const auto& sc : pkg.scripts) {
      for (auto& sent : text::split_sentences(sc.env_text)) {
        bool names_fact = false;
        for (const auto& k : f.keywords) names_fact = names_fact || text::contains_ci(sent, k);
        all.push_back(sent);
        if (!names_fact) kept.push_back(sent);
      }
    }
    ProbeSpec probe;
    probe.probe_id = "omit_" + f.fact_id;
    probe.required_fact_ids = {f.fact_id};
    probe.eval_keywords = f.keywords;
    const int t = pkg.n_sessions - 1;
    MemoryState full;
    full.kind = MemoryKind::blob;
    full.blob = text::join(all, "\n");
    MemoryState omitted = full;
    omitted.blob = text::join(kept, "\n");
    if (!oracle_retrieval(full, probe, g, t).empty()) ++nonempty_before;
    if (!oracle_retrieval(omitted, probe, g, t).empty()) return {false, "extraction survived omission of " + f.fact_id};
    ++stripped;
  }
  return {contexts > 0 && stripped > 0 && nonempty_before > 0,
          std::to_string(contexts) + " P3 contexts clean; " + std::to_string(stripped) +
              " omitted facts give empty P2 extraction (" + std::to_string(nonempty_before) + " non-empty before)"};
}

// C11 runs every scenario under every policy in addition to the criteria above.
Outcome full_suite(Clock::time_point suite_start) {
  int runs = 0;
  for (const auto& id : scenario_ids()) {
    const auto pkg = generate(id, 7, 10, preset("medium"));
    for (auto policy : {PolicyKind::no_memory, PolicyKind::append_only, PolicyKind::growing_history,
                        PolicyKind::lossy_compress, PolicyKind::careful_compress, PolicyKind::workspace}) {
      RunConfig c;
      c.policy.policy = policy;
      c.summarizer = SummarizerKind::extractive;
      c.attribution = true;
      const auto r = run(pkg, c);
      if (!r.complete) return {false, id + " " + to_string(policy) + " did not complete"};
      compute_run_metrics(r, pkg);
      ++runs;
    }
  }
  const double secs = seconds_since(suite_start);
  return {g_failed == 0 && secs < kC11MaxSeconds,
          std::to_string(runs) + " scenario x policy runs; whole suite " + num(secs) + "s, offline, " +
              std::to_string(g_failed) + " earlier failures"};
}

}  // namespace

int main() {
  log::set_level(log::Level::error);
  const auto start = Clock::now();
  report("C1", "determinism", determinism);
  report("C2", "accumulator gold", accumulator_gold);
  report("C3", "curve statistics", curve_statistics);
  report("C4", "attribution identity", attribution_identity);
  report("C5", "compression dose-response", compression_dose_response);
  report("C6", "interference dial", interference_dial);
  report("C7", "maintenance shock", maintenance_shock);
  report("C8", "typed-state overlay", typed_state_overlay);
  report("C9", "controller ordering", controller_ordering);
  report("C10", "P2/P3 context construction", p2_p3_contexts);
  report("C11", "full offline suite", [&] { return full_suite(start); });
  return g_failed == 0 ? 0 : 1;
}
