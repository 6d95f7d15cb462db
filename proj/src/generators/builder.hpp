#pragma once

// Shared machinery for the scenario generators.
//
// Structural choices (which lineage is revised or retracted in which session,
// which sessions carry a dependency probe) come from keyed draws on the seed,
// so turning one dial up only ever adds records of that kind. Content (values,
// names, which facts a probe touches, filler) comes from seeded streams: one
// for base content and one each for revisions, confusable pairs, dependency
// probes and filler.

#include "agetrack/fact_graph.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/package.hpp"
#include "agetrack/rng.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace agetrack::gen {

// Tracks every string that ends up in generated text so a new keyword can be
// rejected when it would match (or be matched by) something else.
class KeywordPool {
 public:
  void add_background(std::string_view text);
  bool keyword_ok(std::string_view kw) const;
  bool plain_ok(std::string_view s) const;
  void claim_keyword(std::string_view kw);
  void claim_plain(std::string_view s);

 private:
  std::vector<std::string> keywords_;
  std::vector<std::string> plain_;
  std::string background_;
};

struct FactMeta {
  int slot = -1;  // structural key; -1 for facts no dial may touch
  std::string kind;
  std::map<std::string, std::string> vars;
  std::string recall_question;
  std::string interference_question;
  // Pairable facts: a term shared with the confusable copy and the value it
  // carries. The confusable copy is rendered by the scenario.
  std::string term;
  std::string value_kw;
  bool pairable = false;
  bool updatable = true;
  bool forgettable = true;
  bool dep_ok = true;
  bool probe_ok = true;
};

struct FactDraft {
  std::string text;
  std::vector<std::string> keywords;
  FactMeta meta;
};

class Builder;

class Scenario {
 public:
  virtual ~Scenario() = default;
  virtual std::string id() const = 0;
  virtual std::string system_prompt() const = 0;
  virtual std::vector<std::string> alt_domains() const = 0;
  virtual void session(Builder& b, int t) = 0;
  // Content of the next version of a lineage. The text must not repeat the
  // values being replaced.
  virtual FactDraft revise(Builder& b, const Fact& head, const FactMeta& meta, int t) = 0;
  virtual std::string retraction_notice(Builder& b, const Fact& head, const FactMeta& meta, int t) = 0;
  // Text of the confusable copy of a pairable fact, in another domain.
  virtual std::string confusable_text(const FactMeta& meta, const std::string& alt_domain,
                                      const std::string& value) = 0;
  virtual std::string dependency_question(ProbeType type, const std::vector<const Fact*>& facts,
                                          const std::vector<const FactMeta*>& metas) = 0;
  // Called once after the last session.
  virtual void finish(Builder&) {}
};

class Builder {
 public:
  Builder(Scenario& scenario, std::uint64_t seed, int n_sessions, const PressureConfig& pressure,
          const GenerateOptions& options);

  Rng& rng() { return *active_; }
  FactGraph& graph() { return pkg_.graph; }
  KeywordPool& pool() { return pool_; }
  int n() const { return pkg_.n_sessions; }
  std::uint64_t seed() const { return pkg_.seed; }
  const PressureConfig& pressure() const { return pkg_.pressure; }
  const GenerateOptions& options() const { return options_; }
  SessionScript& script(int t) { return pkg_.scripts[static_cast<std::size_t>(t)]; }
  int maintenance_session() const;

  // Keyed structural draw in [0, 1).
  double draw(std::string_view tag, std::int64_t a, std::int64_t b = 0) const;

  // Draws candidates from `make` until one passes the pool; claims and
  // returns it. Falls back to the last candidate after many attempts.
  std::string unique_keyword(const std::function<std::string(Rng&)>& make);
  std::string unique_plain(const std::function<std::string(Rng&)>& make);

  // Picks an unused entry from a template bank (keyword-safe); recycles
  // the bank with a numeric suffix once exhausted.
  std::string pick_unused(const std::vector<std::string>& bank, const std::string& bank_name, bool as_keyword);

  // A perturbed copy of a numeric value keyword with the same shape and at
  // least a 25% difference.
  std::string perturb_value(const std::string& value_kw);

  void add_block(int t, std::string text);
  void add_task(int t, TaskKind kind, std::string prompt, std::vector<std::string> dependency_keywords = {},
                std::string topic = "");

  // New base lineage introduced at session t.
  std::string new_fact(int t, FactDraft draft, std::string domain);
  const FactMeta& meta(const std::string& fact_id) const;
  FactMeta& mutable_meta(const std::string& fact_id);

  // Registers the probe in the graph (unless it is an accumulator probe) and
  // appends it to the script.
  void add_probe(int t, ProbeSpec probe, ProbeType type = ProbeType::standalone);
  std::string next_probe_id(int t, std::string_view prefix);

  // Current valid heads of base lineages introduced at or before `at`, in
  // creation order.
  std::vector<const Fact*> live_heads(int at) const;

  // Retractions then revisions for lineages introduced before t. Notices and
  // update texts are added as blocks. Returns ids of facts created.
  std::vector<std::string> revisions(int t);

  // Confusable copies scheduled for session t; each gets an interference
  // probe now and another in the last session.
  void inject_pairs(int t);
  void final_interference_probes(int t);

  // One dependency probe when the session is past warm-up and its keyed draw
  // falls under dependency_density.
  void dependency_probe(int t);

  // Recall probe for one fact (kind recall or lag).
  void recall_probe(int t, const Fact& f, ProbeKind kind = ProbeKind::recall);

  RunPackage finish();

 private:
  void pad_sessions();

  // Routes rng() to a purpose-specific stream for the lifetime of the guard,
  // so dial-driven records never shift the base content stream.
  class StreamGuard {
   public:
    StreamGuard(Builder& b, Rng& stream) : b_(b), prev_(b.active_) { b.active_ = &stream; }
    ~StreamGuard() { b_.active_ = prev_; }
    StreamGuard(const StreamGuard&) = delete;
    StreamGuard& operator=(const StreamGuard&) = delete;

   private:
    Builder& b_;
    Rng* prev_;
  };

  Scenario& scenario_;
  GenerateOptions options_;
  RunPackage pkg_;
  Rng rng_;
  Rng revision_rng_;
  Rng pair_rng_;
  Rng dependency_rng_;
  Rng filler_rng_;
  Rng* active_ = &rng_;
  KeywordPool pool_;
  std::map<std::string, FactMeta> meta_;
  std::map<int, int> slot_counter_;
  std::map<int, int> probe_counter_;
  std::map<std::string, std::size_t> bank_cursor_;
  std::vector<std::vector<std::string>> blocks_;
  std::set<std::string> used_bank_entries_;

  struct PendingPair {
    std::string pair_id;
    std::string fact_a_lineage;
    std::string fact_b;
  };
  std::vector<PendingPair> pairs_done_;
};

// Template banks shared across scenarios.
namespace banks {
extern const std::vector<std::string> kFiller;
extern const std::vector<std::string> kFirstNames;
extern const std::vector<std::string> kLastNames;
extern const std::vector<std::string> kMonths;
}  // namespace banks

std::string fmt_int(std::int64_t v, bool commas);
std::string fmt_money(std::int64_t v);
std::string fmt_fixed(double v, int decimals);

std::unique_ptr<Scenario> make_s1();
std::unique_ptr<Scenario> make_s2();
std::unique_ptr<Scenario> make_s3();
std::unique_ptr<Scenario> make_s4();
std::unique_ptr<Scenario> make_s5();
std::unique_ptr<Scenario> make_s6();

}  // namespace agetrack::gen
