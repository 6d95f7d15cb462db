// S4: long-running software project. Sprint design notes name the helpers each
// module adopted; coding tasks build on earlier sprints and some notes are
// later retracted.

#include "builder.hpp"

#include "agetrack/prompts.hpp"
#include "agetrack/text.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace agetrack::gen {
namespace {

const std::vector<std::string> kModules = {"config",   "storage", "scheduler", "auth",    "export",  "importer",
                                           "cache",    "router",  "billing",   "audit",   "search",  "metrics",
                                           "webhooks", "queue",   "reports",   "uploads", "session", "alerts",
                                           "payments", "profiles", "inventory", "shipping", "catalog", "checkout",
                                           "invoices", "backup",  "logging",   "permissions", "sync", "notifications"};
const std::vector<std::string> kPurposes = {"input validation", "error recovery", "serialization", "rate limiting",
                                            "schema migration", "request batching", "lazy loading",  "retry handling",
                                            "pagination",       "field mapping",  "cache eviction", "dependency wiring"};
const std::vector<std::string> kVerbs = {"from", "load", "parse", "build", "merge", "resolve", "emit", "normalize",
                                         "encode", "fetch", "flush", "wrap"};
const std::vector<std::string> kNouns = {"dict",   "manifest", "payload", "schema", "batch",  "cursor", "token",
                                         "record", "snapshot", "bundle",  "index",  "window", "ledger", "patch"};

constexpr int kNotesPerSession = 3;
constexpr int kRecallPerSession = 2;

class S4 final : public Scenario {
 public:
  std::string id() const override { return "S4"; }
  std::string system_prompt() const override { return prompts::kTier1System; }
  std::vector<std::string> alt_domains() const override { return {}; }

  void session(Builder& b, int t) override {
    if (t == 0) {
      b.pool().add_background("sprint design note the module adopted for update to the design replaces the earlier "
                              "helper important refactor is no longer accurate do not cite this in future analyses "
                              "implement the next step extend work from the previous sprint reusing helpers");
    }
    b.revisions(t);
    std::vector<std::string> ids;
    for (int i = 0; i < kNotesPerSession; ++i) ids.push_back(note(b, t));
    notes_by_session_.push_back(ids);
    b.inject_pairs(t);

    std::vector<const Fact*> probeable;
    for (const Fact* f : b.live_heads(t)) {
      if (b.meta(f->fact_id).probe_ok) probeable.push_back(f);
    }
    b.rng().shuffle(probeable);
    if (probeable.size() > kRecallPerSession) probeable.resize(kRecallPerSession);
    for (const Fact* f : probeable) b.recall_probe(t, *f);
    b.dependency_probe(t);
    if (t == b.n() - 1) b.final_interference_probes(t);

    const std::string& module = b.meta(ids.front()).vars.at("module");
    b.add_task(t, TaskKind::task, "[coding] Implement the next step for the " + module + " module.");
    const auto& pr = b.pressure();
    if (t >= 1 && t >= pr.warmup_sessions && b.draw("dependency", t) < pr.dependency_density) {
      dependency_task(b, t);
    }
  }

  FactDraft revise(Builder& b, const Fact&, const FactMeta& meta, int) override {
    FactDraft d;
    d.meta = meta;
    const std::string ident = identifier(b);
    d.text = "Update to the " + meta.vars.at("module") + " design: " + ident + "() replaces the earlier helper for " +
             meta.vars.at("purpose") + ".";
    d.keywords = {ident};
    return d;
  }

  std::string retraction_notice(Builder&, const Fact&, const FactMeta& meta, int) override {
    return "IMPORTANT: The " + meta.vars.at("module") + " " + meta.vars.at("purpose") +
           " refactor is no longer accurate. Do NOT cite this in future analyses.";
  }

  std::string confusable_text(const FactMeta&, const std::string&, const std::string&) override {
    return "";  // no pairable facts in this scenario
  }

  std::string dependency_question(ProbeType type, const std::vector<const Fact*>&,
                                  const std::vector<const FactMeta*>& metas) override {
    std::vector<std::string> mods;
    for (const auto* m : metas) mods.push_back("the " + m->vars.at("module") + " module");
    switch (type) {
      case ProbeType::compare:
        return "Compare the helpers adopted by " + mods[0] + " and " + mods[1] + ". Could one reuse the other?";
      case ProbeType::trend:
        return "Which helpers do " + text::join(mods, ", ") + " currently rely on?";
      case ProbeType::synthesize:
        return "Draft an integration plan that wires together " + text::join(mods, " and ") + ".";
      case ProbeType::standalone:
        break;
    }
    return "Which helper does " + mods[0] + " currently use?";
  }

 private:
  static std::string identifier(Builder& b) {
    return b.unique_keyword([](Rng& r) { return r.pick(kVerbs) + "_" + r.pick(kNouns); });
  }

  std::string note(Builder& b, int t) {
    const std::string module = b.pick_unused(kModules, "module", false);
    const std::string purpose = b.rng().pick(kPurposes);
    const std::string ident = identifier(b);
    FactDraft d;
    d.text = "Sprint " + std::to_string(t + 1) + " design note: the " + module + " module adopted " + ident +
             "() for " + purpose + ".";
    d.keywords = {ident};
    d.meta.kind = "note";
    d.meta.vars["module"] = module;
    d.meta.vars["purpose"] = purpose;
    d.meta.recall_question = "Which helper did the " + module + " module adopt for " + purpose + "?";
    b.add_block(t, d.text);
    return b.new_fact(t, std::move(d), "engineering");
  }

  // D_t: words longer than four characters from the previous sprint's notes
  // that this session's own material does not already supply.
  void dependency_task(Builder& b, int t) {
    std::vector<const Fact*> prior;
    std::vector<std::string> modules;
    for (const auto& id : notes_by_session_[static_cast<std::size_t>(t - 1)]) {
      const Fact& head = b.graph().fact_as_of(b.graph().fact(id).lineage_id, t);
      if (!head.valid && head.invalidated_at && *head.invalidated_at <= t) continue;
      prior.push_back(&head);
      modules.push_back(b.meta(id).vars.at("module"));
    }
    if (prior.empty()) return;
    const std::string prompt = "[coding] Extend the work on the " + text::join(modules, " and ") +
                               " modules from the previous sprint, reusing the helpers recorded then.";

    std::set<std::string> present;
    for (auto& w : text::content_tokens(prompt)) present.insert(std::move(w));
    for (const auto& id : notes_by_session_[static_cast<std::size_t>(t)]) {
      for (auto& w : text::content_tokens(b.graph().fact(id).text)) present.insert(std::move(w));
    }
    std::vector<std::string> dep;
    for (const Fact* head : prior) {
      for (const auto& w : text::split_words(head->text)) {
        std::string clean;
        for (char c : w) {
          if (std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_') clean.push_back(c);
        }
        clean = text::to_lower(clean);
        if (clean.size() > 4 && present.count(clean) == 0 &&
            std::find(dep.begin(), dep.end(), clean) == dep.end()) {
          dep.push_back(clean);
        }
      }
    }
    b.add_task(t, TaskKind::dependency, prompt, dep);
  }

  std::vector<std::vector<std::string>> notes_by_session_;
};

}  // namespace

std::unique_ptr<Scenario> make_s4() { return std::make_unique<S4>(); }

}  // namespace agetrack::gen
