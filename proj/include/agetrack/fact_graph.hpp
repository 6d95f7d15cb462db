#pragma once

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

using Json = nlohmann::json;

inline constexpr int kGraphSchemaVersion = 1;

enum class ProbeType { compare, trend, synthesize, standalone };

std::string to_string(ProbeType t);
ProbeType probe_type_from_string(std::string_view s);

// One version of one fact. Versions of the same fact share a lineage id.
struct Fact {
  std::string fact_id;
  std::string lineage_id;
  int version = 1;
  std::string text;
  std::vector<std::string> keywords;
  std::string domain;
  int session_introduced = 0;
  bool valid = true;
  // Session of the revision that replaced this version, if any.
  std::optional<int> superseded_at;
  // Keywords that stopped being gold when this version was superseded.
  std::vector<std::string> superseded_keywords;
  std::optional<int> invalidated_at;

  friend bool operator==(const Fact&, const Fact&) = default;
};

struct DependencyProbe {
  std::string probe_id;
  std::string question;
  std::vector<std::string> required_fact_ids;
  ProbeType probe_type = ProbeType::standalone;
  int schedule_session = 0;
  std::vector<std::string> eval_keywords;
  std::vector<std::string> forbidden_keywords;

  friend bool operator==(const DependencyProbe&, const DependencyProbe&) = default;
};

struct InterferencePair {
  std::string pair_id;
  std::string fact_a;
  std::string fact_b;
  std::string shared_term;
  int injected_session = 0;

  friend bool operator==(const InterferencePair&, const InterferencePair&) = default;
};

struct AccumulatorDelta {
  int session = 0;
  double value = 0.0;

  friend bool operator==(const AccumulatorDelta&, const AccumulatorDelta&) = default;
};

struct Accumulator {
  std::string name;
  double initial_value = 0.0;
  std::string unit;
  std::vector<AccumulatorDelta> deltas;  // sorted by session, stable

  friend bool operator==(const Accumulator&, const Accumulator&) = default;
};

// The gold-truth substrate: facts with their version lineages, the probes
// that depend on them, confusable pairs and delta-driven accumulators.
//
// Built by a single writer during generation, then treated as immutable.
// History is append-only: superseded and invalidated facts stay stored so
// stale citations can be detected.
class FactGraph {
 public:
  // Starts a new lineage at version 1. Throws ValidationError on empty text,
  // empty keywords or negative session; ValidationError on duplicate id.
  Fact add_fact(std::string text, std::vector<std::string> keywords, std::string domain, int session,
                std::optional<std::string> fact_id = std::nullopt);

  // Appends version head+1 to the lineage. Keywords of the old head that the
  // new version drops become forbidden for probes scheduled after `session`.
  Fact supersede_fact(std::string_view lineage_id, std::string new_text, std::vector<std::string> new_keywords,
                      int session);

  // Retracts a fact. Returns false (and logs a warning) when it was already
  // invalid; the graph is unchanged in that case.
  bool invalidate_fact(std::string_view fact_id, int session);

  const Fact& fact(std::string_view fact_id) const;
  bool has_fact(std::string_view fact_id) const;
  const Fact& current_fact(std::string_view lineage_id) const;
  // Head of the lineage as of `session` (latest version introduced <= session).
  const Fact& fact_as_of(std::string_view lineage_id, int session) const;
  std::vector<const Fact*> lineage(std::string_view lineage_id) const;
  std::vector<std::string> lineage_ids() const;

  // Registers a probe. Forbidden keywords are completed from the retirement
  // history as of the probe's schedule session.
  const DependencyProbe& add_probe(DependencyProbe probe);
  const DependencyProbe& probe(std::string_view probe_id) const;

  const InterferencePair& add_pair(InterferencePair pair);

  void add_accumulator(std::string name, double initial_value, std::string unit);
  void add_delta(std::string_view name, int session, double value);
  const Accumulator& accumulator(std::string_view name) const;

  // initial + sum of deltas with session index <= session.
  double gold_accumulator_value(std::string_view name, int session) const;

  // Union of keywords retired (superseded or invalidated) strictly before
  // `session`.
  std::set<std::string> forbidden_keywords(int session) const;

  // Longest version chain (as of the probe's schedule) among required facts.
  int probe_version_depth(const DependencyProbe& probe) const;
  // max - min of session_introduced over required facts.
  int probe_session_span(const DependencyProbe& probe) const;

  const std::vector<Fact>& facts() const { return facts_; }
  const std::vector<DependencyProbe>& probes() const { return probes_; }
  const std::vector<InterferencePair>& pairs() const { return pairs_; }
  const std::vector<Accumulator>& accumulators() const { return accumulators_; }

  // Throws ValidationError naming the first offending record.
  void validate() const;

  Json to_json() const;
  static FactGraph from_json(const Json& j);

  friend bool operator==(const FactGraph& a, const FactGraph& b) {
    return a.facts_ == b.facts_ && a.probes_ == b.probes_ && a.pairs_ == b.pairs_ &&
           a.accumulators_ == b.accumulators_;
  }

 private:
  Fact& mutable_fact(std::string_view fact_id);
  void index_fact(std::size_t idx);

  std::vector<Fact> facts_;
  std::vector<DependencyProbe> probes_;
  std::vector<InterferencePair> pairs_;
  std::vector<Accumulator> accumulators_;

  std::map<std::string, std::size_t, std::less<>> fact_index_;
  std::map<std::string, std::vector<std::size_t>, std::less<>> lineages_;
  std::map<std::string, std::size_t, std::less<>> probe_index_;
  std::size_t next_fact_ = 1;
};

// Stable-key-ordered text document; equal graphs give identical bytes.
std::string serialize_graph(const FactGraph& graph);
// Throws ParseError naming the offending record on malformed input.
FactGraph load_graph(std::string_view document);

}  // namespace agetrack
