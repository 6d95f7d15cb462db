// S6: naturalistic multi-domain assistant. Short findings across domains,
// corrections that invalidate earlier findings, summary tasks, and a recall
// probe into every earlier session. A recompaction event lands mid-run.

#include "builder.hpp"

#include "agetrack/prompts.hpp"
#include "agetrack/text.hpp"

namespace agetrack::gen {
namespace {

const std::vector<std::string> kKinds = {"review", "distance", "quote", "version"};
const std::vector<std::string> kRepos = {"parser",  "billing", "sync",    "auth",   "search", "export",
                                         "ingest",  "router",  "cache",   "mailer", "queue",  "uploader",
                                         "reports", "payments", "gateway", "audit", "alerts", "scheduler"};
const std::vector<std::string> kSites = {"north",    "harbor", "airport", "hillside", "riverside", "quarry",
                                         "lakeside", "market", "stadium", "orchard",  "mill",      "canyon",
                                         "bayfront", "summit", "meadow",  "foundry",  "pier",      "ridge"};
const std::vector<std::string> kItems = {"roofing", "catering", "printing",   "fencing",   "plumbing", "signage",
                                         "flooring", "cleaning", "landscaping", "painting", "wiring",   "glazing",
                                         "paving",  "insulation", "furniture", "lighting",  "security", "shelving"};
const std::vector<std::string> kServices = {"ledger",  "profile", "notify", "invoice", "tracker", "portal",
                                            "catalog", "render",  "worker", "indexer", "limiter", "resolver",
                                            "archive", "session", "metrics", "gateway", "importer", "webhook"};

constexpr int kFindingsPerSession = 3;

class S6 final : public Scenario {
 public:
  std::string id() const override { return "S6"; }
  std::string system_prompt() const override { return prompts::kS6System; }
  std::vector<std::string> alt_domains() const override { return {}; }

  void session(Builder& b, int t) override {
    if (t == 0) {
      b.pool().add_background("finding patch has reviewers site is from the depot quote came in at service runs "
                              "version correction our previous finding about is now invalid update summarize today's "
                              "findings in two sentences");
    }
    b.revisions(t);
    std::vector<std::string> ids;
    for (int i = 0; i < kFindingsPerSession; ++i) ids.push_back(finding(b, t, kKinds[(t + i) % kKinds.size()]));
    by_session_.push_back(ids);

    if (const Fact* f = pick_valid(b, ids, t, t)) b.recall_probe(t, *f);
    for (int s = 0; s < t; ++s) {
      if (const Fact* f = pick_valid(b, by_session_[static_cast<std::size_t>(s)], t, s + t)) {
        b.recall_probe(t, *f, ProbeKind::lag);
      }
    }
    b.dependency_probe(t);
    b.add_task(t, TaskKind::task, "[" + b.meta(ids.front()).kind + "] Summarize today's findings in two sentences.");
    if (t == b.maintenance_session() && t > 0) {
      b.script(t).maintenance_event = LifecycleEvent{EventKind::recompact, t, std::nullopt};
    }
  }

  FactDraft revise(Builder& b, const Fact&, const FactMeta& meta, int) override {
    FactDraft d = make(b, meta.kind, &meta);
    d.text = "Finding update: " + d.meta.vars.at("body");
    return d;
  }

  std::string retraction_notice(Builder&, const Fact&, const FactMeta& meta, int) override {
    return "CORRECTION: Our previous finding about " + meta.vars.at("subject") + " is now INVALID.";
  }

  std::string confusable_text(const FactMeta&, const std::string&, const std::string&) override { return ""; }

  std::string dependency_question(ProbeType type, const std::vector<const Fact*>&,
                                  const std::vector<const FactMeta*>& metas) override {
    std::vector<std::string> subjects;
    for (const auto* m : metas) subjects.push_back(m->vars.at("subject"));
    switch (type) {
      case ProbeType::compare:
        return "Compare what we found about " + subjects[0] + " with " + subjects[1] + ".";
      case ProbeType::trend:
        return "Recap the current findings on " + text::join(subjects, ", ") + ".";
      case ProbeType::synthesize:
        return "Write one status line covering " + text::join(subjects, " and ") + ".";
      case ProbeType::standalone:
        break;
    }
    return "What is our current finding about " + subjects[0] + "?";
  }

 private:
  const Fact* pick_valid(Builder& b, const std::vector<std::string>& ids, int at, int offset) {
    std::vector<const Fact*> valid;
    for (const auto& id : ids) {
      const Fact& head = b.graph().fact_as_of(b.graph().fact(id).lineage_id, at);
      if (!head.valid && head.invalidated_at && *head.invalidated_at <= at) continue;
      valid.push_back(&head);
    }
    if (valid.empty()) return nullptr;
    return valid[static_cast<std::size_t>(offset) % valid.size()];
  }

  FactDraft make(Builder& b, const std::string& kind, const FactMeta* prev) {
    FactDraft d;
    if (prev != nullptr) d.meta = *prev;
    d.meta.kind = kind;
    auto& v = d.meta.vars;
    std::string kw;
    if (kind == "review") {
      if (prev == nullptr) v["name"] = b.pick_unused(kRepos, "repo", false);
      kw = b.unique_keyword([](Rng& r) {
        return r.pick(banks::kFirstNames) + static_cast<char>('A' + r.uniform_int(0, 25)) +
               std::to_string(r.uniform_int(10, 99));
      });
      v["body"] = "the " + v["name"] + " patch has Reviewers: " + kw + ".";
      v["subject"] = "the reviewers of the " + v["name"] + " patch";
      d.meta.recall_question = "Who was listed as reviewer on the " + v["name"] + " patch?";
    } else if (kind == "distance") {
      if (prev == nullptr) v["name"] = b.pick_unused(kSites, "site", false);
      kw = b.unique_keyword([](Rng& r) { return std::to_string(r.uniform_int(11, 480)) + " km"; });
      v["body"] = "the " + v["name"] + " site is " + kw + " from the depot.";
      v["subject"] = "the distance to the " + v["name"] + " site";
      d.meta.recall_question = "How far is the " + v["name"] + " site from the depot?";
    } else if (kind == "quote") {
      if (prev == nullptr) v["name"] = b.pick_unused(kItems, "item", false);
      kw = b.unique_keyword([](Rng& r) { return fmt_money(r.uniform_int(1200, 48000)); });
      v["body"] = "the " + v["name"] + " quote came in at " + kw + ".";
      v["subject"] = "the " + v["name"] + " quote";
      d.meta.recall_question = "What did the " + v["name"] + " quote come in at?";
    } else {
      if (prev == nullptr) v["name"] = b.pick_unused(kServices, "service", false);
      kw = b.unique_keyword([](Rng& r) {
        return std::to_string(r.uniform_int(1, 9)) + "." + std::to_string(r.uniform_int(10, 40)) + "." +
               std::to_string(r.uniform_int(1, 9));
      });
      v["body"] = "the " + v["name"] + " service runs version " + kw + ".";
      v["subject"] = "the " + v["name"] + " service version";
      d.meta.recall_question = "Which version does the " + v["name"] + " service run?";
    }
    d.text = "Finding: " + v["body"];
    d.keywords = {kw};
    return d;
  }

  std::string finding(Builder& b, int t, const std::string& kind) {
    FactDraft d = make(b, kind, nullptr);
    b.add_block(t, d.text);
    return b.new_fact(t, std::move(d), kind);
  }

  std::vector<std::vector<std::string>> by_session_;
};

}  // namespace

std::unique_ptr<Scenario> make_s6() { return std::make_unique<S6>(); }

}  // namespace agetrack::gen
