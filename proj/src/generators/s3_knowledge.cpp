// S3: project knowledge base. Each session is a review-meeting transcript with
// numbered decision records; later sessions revise or rescind them.

#include "builder.hpp"

#include "agetrack/prompts.hpp"
#include "agetrack/text.hpp"

#include <cstdio>

namespace agetrack::gen {
namespace {

const std::vector<std::string> kProjects = {"Catalyst", "Horizon", "Meridian", "Keystone", "Lighthouse", "Summit"};
const std::vector<std::string> kTags = {"budget", "infra", "staffing", "timeline", "vendor"};
const std::vector<std::string> kVendors = {"Northwind", "Acme Cloud", "Globex", "Initech", "Umbrella Data",
                                           "Stark Supply", "Wayne Logistics", "Hooli", "Vandelay", "Soylent Labs",
                                           "Cyberdyne", "Tyrell Systems"};
const std::vector<std::string> kServices = {"hosting", "monitoring", "payroll", "security audit", "translation",
                                            "catering", "legal review", "data labeling", "recruiting", "printing"};
const std::vector<std::string> kWorkstreams = {"backend", "frontend", "data", "mobile", "platform", "research",
                                               "support tooling", "analytics", "billing", "search"};
const std::vector<std::string> kClusters = {"ingest", "batch", "serving", "staging", "reporting", "streaming",
                                            "training", "archive", "edge", "gateway"};
const std::vector<std::string> kMilestones = {"beta launch", "public launch", "security review", "pilot rollout",
                                              "data migration", "pricing update", "partner demo", "load test"};
const std::vector<std::string> kAlt = {"marketing", "legal",   "sales", "support",    "finance",  "security",
                                       "research",  "design",  "hr",    "operations", "partners", "procurement"};

constexpr int kDecisionsPerSession = 4;
constexpr int kQueriesPerSession = 5;

std::string decision_id(int n) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "D%02d", n);
  return buf;
}

class S3 final : public Scenario {
 public:
  std::string id() const override { return "S3"; }
  std::string system_prompt() const override { return prompts::kTier1System; }
  std::vector<std::string> alt_domains() const override { return kAlt; }

  void session(Builder& b, int t) override {
    if (t == 0) {
      project_ = b.pick_unused(kProjects, "project", false);
      b.pool().add_background("project review session attendees reported category decision id revision to decision "
                              "has been rescinded and must not be cited phase spending of used kubernetes deployment "
                              "vcpus each team size set at for the workstream selected as the vendor milestone "
                              "moved to summarize the decisions");
    }
    b.revisions(t);

    std::vector<std::string> attendees;
    for (int i = 0; i < 3; ++i) {
      attendees.push_back(b.rng().pick(banks::kFirstNames) + " " + b.rng().pick(banks::kLastNames));
    }
    std::vector<std::string> lines = {"Project " + project_ + " Review --- Session " + std::to_string(t),
                                      "Attendees: " + text::join(attendees, ", ")};
    for (int i = 0; i < kDecisionsPerSession; ++i) {
      const std::string& speaker = attendees[static_cast<std::size_t>(i) % attendees.size()];
      FactDraft d = decision(b, b.rng().pick(kTags), nullptr);
      const std::string did = decision_id(++decision_counter_);
      d.meta.vars["decision"] = did;
      d.meta.recall_question = "What is the current status of Decision " + did + "?";
      d.text = speaker + " reported: " + d.text + " Category: " + d.meta.kind + ". Decision ID: " + did + ".";
      lines.push_back(d.text);
      const std::string kind = d.meta.kind;
      b.new_fact(t, std::move(d), kind);
    }
    b.add_block(t, text::join(lines, "\n"));
    b.inject_pairs(t);

    auto heads = b.live_heads(t);
    std::vector<const Fact*> probeable;
    for (const Fact* f : heads) {
      if (b.meta(f->fact_id).probe_ok) probeable.push_back(f);
    }
    b.rng().shuffle(probeable);
    if (probeable.size() > kQueriesPerSession) probeable.resize(kQueriesPerSession);
    for (const Fact* f : probeable) b.recall_probe(t, *f);
    b.dependency_probe(t);
    if (t == b.n() - 1) b.final_interference_probes(t);
    b.add_task(t, TaskKind::task, "Summarize the decisions from this review meeting for the project log.");
  }

  FactDraft revise(Builder& b, const Fact&, const FactMeta& meta, int) override {
    FactDraft d = decision(b, meta.kind, &meta);
    d.text = "Revision to Decision " + meta.vars.at("decision") + ": " + d.text;
    return d;
  }

  std::string retraction_notice(Builder&, const Fact&, const FactMeta& meta, int) override {
    return "Decision " + meta.vars.at("decision") + " has been rescinded and must not be cited.";
  }

  std::string confusable_text(const FactMeta& meta, const std::string& alt, const std::string& value) override {
    if (meta.kind == "budget") {
      return "The " + alt + " group reported its own " + meta.vars.at("phase") + " spending: " + value + " used.";
    }
    return "The " + alt + " group runs a separate Kubernetes deployment on " + value + ".";
  }

  std::string dependency_question(ProbeType type, const std::vector<const Fact*>&,
                                  const std::vector<const FactMeta*>& metas) override {
    std::vector<std::string> ids;
    for (const auto* m : metas) ids.push_back("Decision " + m->vars.at("decision"));
    switch (type) {
      case ProbeType::compare:
        return "Compare " + ids[0] + " with " + ids[1] + ". Which has the larger impact on the project?";
      case ProbeType::trend:
        return "How do " + text::join(ids, ", ") + " together shape the project direction?";
      case ProbeType::synthesize:
        return "Write a one-paragraph status brief that combines " + text::join(ids, " and ") + ".";
      case ProbeType::standalone:
        break;
    }
    return "What does " + ids[0] + " currently say?";
  }

 private:
  FactDraft decision(Builder& b, const std::string& tag, const FactMeta* prev) {
    FactDraft d;
    if (prev != nullptr) d.meta = *prev;
    d.meta.kind = tag;
    auto& v = d.meta.vars;
    if (tag == "budget") {
      if (prev == nullptr) v["phase"] = "Phase " + std::to_string(++phase_counter_);
      std::int64_t total_v = 0;
      const std::string total = b.unique_plain([&](Rng& r) {
        total_v = r.uniform_int(120, 480) * 1000 + r.uniform_int(0, 999);
        return fmt_money(total_v);
      });
      std::int64_t spent_v = 0;
      const std::string spent = b.unique_keyword([&](Rng& r) {
        spent_v = static_cast<std::int64_t>(static_cast<double>(total_v) * r.uniform(0.35, 0.95));
        return fmt_money(spent_v);
      });
      const std::string pct = b.unique_plain([&](Rng&) {
        return fmt_fixed(100.0 * static_cast<double>(spent_v) / static_cast<double>(total_v), 1) + "%";
      });
      d.text = v["phase"] + " spending: " + spent + " of " + total + " used (" + pct + ").";
      d.keywords = {spent};
      d.meta.interference_question =
          "How much has Project " + project_ + " spent so far in " + v["phase"] + "? Give the exact figure.";
      d.meta.term = "spending";
      d.meta.value_kw = spent;
      d.meta.pairable = true;
    } else if (tag == "infra") {
      if (prev == nullptr) v["cluster"] = b.pick_unused(kClusters, "cluster", false);
      const std::string nodes = b.unique_keyword([](Rng& r) { return std::to_string(r.uniform_int(12, 180)) + " nodes"; });
      const std::string vcpu = b.unique_plain([](Rng& r) { return std::to_string(4 * r.uniform_int(2, 16)) + " vCPUs"; });
      d.text = "Kubernetes deployment for the " + v["cluster"] + " cluster on " + nodes + ", " + vcpu + " each.";
      d.keywords = {nodes};
      d.meta.interference_question =
          "How many nodes does the Kubernetes deployment for the " + v["cluster"] + " cluster use?";
      d.meta.term = "Kubernetes deployment";
      d.meta.value_kw = nodes;
      d.meta.pairable = true;
    } else if (tag == "staffing") {
      if (prev == nullptr) v["stream"] = b.pick_unused(kWorkstreams, "workstream", false);
      const std::string size =
          b.unique_keyword([](Rng& r) { return std::to_string(r.uniform_int(3, 40)) + " engineers"; });
      d.text = "Team size set at " + size + " for the " + v["stream"] + " workstream.";
      d.keywords = {size};
    } else if (tag == "timeline") {
      if (prev == nullptr) v["milestone"] = b.pick_unused(kMilestones, "milestone", false);
      const std::string date = b.unique_keyword([](Rng& r) {
        return r.pick(banks::kMonths) + " " + std::to_string(r.uniform_int(1, 28));
      });
      d.text = "The " + v["milestone"] + " milestone moved to " + date + ".";
      d.keywords = {date};
    } else {
      if (prev == nullptr) v["service"] = b.pick_unused(kServices, "service", false);
      const std::string vendor = b.pick_unused(kVendors, "vendor", true);
      d.text = "Selected " + vendor + " as the " + v["service"] + " vendor.";
      d.keywords = {vendor};
    }
    return d;
  }

  std::string project_;
  int decision_counter_ = 0;
  int phase_counter_ = 0;
};

}  // namespace

std::unique_ptr<Scenario> make_s3() { return std::make_unique<S3>(); }

}  // namespace agetrack::gen
