#pragma once

// Aging curves, curve statistics, DAG-derived mechanism metrics, shock deltas
// and failure attribution. Everything here is a pure function of a run trace
// and its package.

#include "agetrack/fraction.hpp"
#include "agetrack/package.hpp"
#include "agetrack/runner.hpp"

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace agetrack {

using Curve = std::vector<std::optional<double>>;

struct AgingCurve {
  std::string metric;
  Curve values;  // one entry per session; nullopt where undefined
};

struct CurveStats {
  double half_life = std::numeric_limits<double>::infinity();
  std::optional<double> slope;  // needs >= 2 non-null points
  double hazard = 0.0;
  double final_value = 0.0;  // m_F
  double mean = 0.0;
  double tau = 0.0;
};

// First (fractional) t with m(t) <= 0.5 m(0), interpolated between adjacent
// non-null checkpoints; infinity when never crossed or when m(0) <= 0.
double half_life(const Curve& m);
// OLS coefficient of m on the session index, null sessions dropped.
std::optional<double> ols_slope(const Curve& m);
// Fraction of non-null sessions with m(t) < tau.
double hazard(const Curve& m, double tau);
// Throws ValidationError on an all-null curve. tau defaults to 0.5 m(0).
CurveStats curve_stats(const Curve& m, std::optional<double> tau = std::nullopt);

// Gold facts alive at t: current heads introduced at or before t, not
// retracted, not the distractor side of a confusable pair.
std::vector<const Fact*> cohort_facts(const FactGraph& graph, int t);

double keyword_m(const RunResult& result, const FactGraph& graph, int t);
std::optional<double> constraint_precision(const RunResult& result, int t);
double summarization_fidelity(const MemoryState& snapshot, const FactGraph& graph, int t);
double recall_rate(const RunResult& result, const RunPackage& package, int t);
std::optional<double> interference_resistance(const RunResult& result);
std::optional<double> forget_accuracy(const RunResult& result, const FactGraph& graph);

struct HopAnalysis {
  std::string probe_id;
  int session = 0;
  std::vector<std::string> fact_ids;
  std::vector<bool> hits;
  std::optional<std::string> first_failing_fact;
};

struct ChainRecall {
  std::map<int, double> by_depth;
  std::map<int, double> by_span;
  std::vector<HopAnalysis> per_hop;
};

// Dependency probes bucketed by version depth and by session span; a probe
// is correct when it scores 1. Null when there are no dependency probes.
std::optional<ChainRecall> chain_recall(const RunResult& result, const RunPackage& package);

struct AccumulatorProbeError {
  int session = 0;
  std::string probe_id;
  double error = 0.0;
  bool missing = false;
};

struct AccumulatorMetrics {
  std::vector<AccumulatorProbeError> errors;
  double mean_error = 0.0;
  bool compounding_detected = false;
};

// Errors that never decrease over >= 3 consecutive probe sessions and end
// above zero.
bool compounding(const std::vector<double>& per_session_errors);
std::optional<AccumulatorMetrics> accumulator_metrics(const RunResult& result);

struct AttributionProfile {
  Fraction acc_p1;
  Fraction acc_p2;
  Fraction acc_p3;
  bool anomaly = false;
  bool abstained = false;
  // Withheld on anomaly; read and write are merged into joint_err when abstained.
  std::optional<Fraction> util_err;
  std::optional<Fraction> write_err;
  std::optional<Fraction> read_err;
  std::optional<Fraction> joint_err;

  Json to_json() const;
};

AttributionProfile attribution_profile(Fraction p1, Fraction p2, Fraction p3, bool abstained = false);
AttributionProfile attribution_profile(double p1, double p2, double p3, bool abstained = false);
// Mean per-condition score over probes recorded with attribution data.
std::optional<AttributionProfile> run_attribution(const RunResult& result);

// mean(m over [e, e+w)) - mean(m over [e-w, e)), null sessions skipped.
std::optional<double> window_delta(const Curve& m, int event_session, int width = 2);

struct ShockReport {
  LifecycleEvent event;
  std::string metric;
  int window = 2;
  double paired_delta = 0.0;
  // Shock-run window change net of the control run's change over the same window.
  std::optional<double> window_delta;
  std::optional<double> window_delta_raw;
  std::optional<double> maintenance_share;

  Json to_json() const;
};

// Throws ConfigError when the runs differ in package, seed or any setting
// other than their events.
ShockReport shock_report(const RunResult& shock, const RunResult& control, const RunPackage& package,
                         const LifecycleEvent& event, const std::string& metric = "recall_rate", int window = 2);

struct RunMetrics {
  std::vector<AgingCurve> curves;
  std::map<std::string, CurveStats> stats;
  std::optional<double> interference_resistance;
  std::optional<double> forget_accuracy;
  std::optional<AccumulatorMetrics> accumulator;
  std::optional<ChainRecall> chain;
  std::map<std::string, double> lag_accuracy;
  std::optional<AttributionProfile> attribution;

  const Curve& curve(const std::string& metric) const;
  Json to_json() const;
  // run_id,session,metric,value (empty value for null)
  std::string to_csv(const std::string& run_id) const;
};

// Curve names: keyword_m, recall_rate, constraint_precision,
// summarization_fidelity, probe_accuracy, accumulator_error, dep_recall,
// memory_words.
RunMetrics compute_run_metrics(const RunResult& result, const RunPackage& package);

Json curve_stats_json(const CurveStats& s);

}  // namespace agetrack
