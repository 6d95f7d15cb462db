// S1: research literature agent. Each session delivers a batch of technical
// results; probes ask for the reported figures later.

#include "builder.hpp"

#include "agetrack/prompts.hpp"
#include "agetrack/text.hpp"

namespace agetrack::gen {
namespace {

const std::vector<std::string> kPrefixes = {"CDN",     "Cache",  "Auth",   "Search",  "Billing", "Ingest",
                                            "Render",  "Queue",  "Storage", "Gateway", "Scheduler", "Index",
                                            "Payment", "Routing", "Metrics", "Session", "Upload",  "Ledger"};
const std::vector<std::string> kSuffixes = {"Layer", "Service", "Pipeline", "Cluster", "Engine", "Module"};
const std::vector<std::string> kDomains = {"infra", "search", "billing", "platform", "data", "frontend"};
const std::vector<std::string> kAlt = {"marketing", "finance", "legal",  "support", "sales",  "security",
                                       "research",  "design",  "mobile", "hr",      "ops",    "partners"};

constexpr int kBatchesPerSession = 4;

class S1 final : public Scenario {
 public:
  std::string id() const override { return "S1"; }
  std::string system_prompt() const override { return prompts::kTier1System; }
  std::vector<std::string> alt_domains() const override { return kAlt; }

  void session(Builder& b, int t) override {
    if (t == 0) {
      b.pool().add_background("performance optimization reduced latency from throughput increased req/sec cache "
                              "hit rate memory reduced follow-up benchmark what specific metric was reported for");
    }
    b.revisions(t);
    for (int i = 0; i < kBatchesPerSession; ++i) new_batch(b, t);
    b.inject_pairs(t);

    for (const Fact* f : b.live_heads(t)) {
      if (b.meta(f->fact_id).probe_ok) b.recall_probe(t, *f);
    }
    b.dependency_probe(t);
    if (t == b.n() - 1) b.final_interference_probes(t);
    b.add_task(t, TaskKind::task, "Read the new batch of results and record the key figures for later reference.");
  }

  FactDraft revise(Builder& b, const Fact&, const FactMeta& meta, int) override {
    const std::string& comp = meta.vars.at("component");
    const std::string rate = rate_keyword(b);
    const std::string lat = latency_keyword(b);
    FactDraft d;
    d.text = comp + " follow-up benchmark. " + comp + " latency is now " + lat + "ms and cache hit rate is now " +
             rate + ".";
    d.keywords = {rate, lat};
    d.meta = meta;
    d.meta.value_kw = rate;
    return d;
  }

  std::string retraction_notice(Builder&, const Fact&, const FactMeta& meta, int) override {
    return "Retraction notice. The " + meta.vars.at("component") +
           " benchmark figures reported in an earlier batch were flawed and must not be cited.";
  }

  std::string confusable_text(const FactMeta& meta, const std::string& alt, const std::string& value) override {
    return "Note for the " + alt + " team: the " + meta.vars.at("component") + " cache hit rate is " + value + ".";
  }

  std::string dependency_question(ProbeType type, const std::vector<const Fact*>&,
                                  const std::vector<const FactMeta*>& metas) override {
    std::vector<std::string> names;
    for (const auto* m : metas) names.push_back(m->vars.at("component"));
    switch (type) {
      case ProbeType::compare:
        return "Compare the latency results for " + names[0] + " with the " + names[1] +
               " results. Which improved more?";
      case ProbeType::trend:
        return "Describe the trend in cache hit rate across " + text::join(names, ", ") + ".";
      case ProbeType::synthesize:
        return "Combine the reported latency and cache hit rate figures for " + text::join(names, " and ") +
               " into one capacity summary.";
      case ProbeType::standalone:
        break;
    }
    return "What latency and cache hit rate were reported for " + names[0] + "?";
  }

 private:
  static std::string rate_keyword(Builder& b) {
    return b.unique_keyword([](Rng& r) { return fmt_fixed(r.uniform(40.0, 98.0), 1) + "%"; });
  }
  static std::string latency_keyword(Builder& b) {
    return b.unique_keyword([](Rng& r) { return std::to_string(r.uniform_int(110, 480)); });
  }

  void new_batch(Builder& b, int t) {
    static const std::vector<std::string> kComponents = [] {
      std::vector<std::string> out;
      for (const auto& p : kPrefixes) {
        for (const auto& s : kSuffixes) out.push_back(p + " " + s);
      }
      return out;
    }();
    const std::string comp = b.pick_unused(kComponents, "component", false);
    const std::string rate = rate_keyword(b);
    const std::string lat = latency_keyword(b);
    const std::string before = b.unique_plain([&](Rng& r) {
      return std::to_string(std::stoi(lat) + r.uniform_int(4, 60));
    });
    const std::string tput = b.unique_plain([](Rng& r) { return fmt_int(r.uniform_int(12000, 98000), true); });
    const std::string mem_hi = b.unique_plain([](Rng& r) { return fmt_fixed(r.uniform(6.0, 14.0), 1); });
    const std::string mem_lo = b.unique_plain([](Rng& r) { return fmt_fixed(r.uniform(1.5, 5.9), 1); });

    FactDraft d;
    d.text = comp + " Performance Optimization. " + comp + " optimization reduced latency from " + before + "ms to " +
             lat + "ms. Throughput increased to " + tput + " req/sec. Cache hit rate: " + rate +
             ". Memory reduced from " + mem_hi + "GB to " + mem_lo + "GB.";
    d.keywords = {rate, lat};
    d.meta.kind = "batch";
    d.meta.vars["component"] = comp;
    d.meta.recall_question = "What specific metric was reported for " + comp + "?";
    d.meta.interference_question = "What cache hit rate was reported for " + comp + " in the research batches?";
    d.meta.term = "cache hit rate";
    d.meta.value_kw = rate;
    d.meta.pairable = true;
    b.add_block(t, d.text);
    b.new_fact(t, std::move(d), b.rng().pick(kDomains));
  }
};

}  // namespace

std::unique_ptr<Scenario> make_s1() { return std::make_unique<S1>(); }

}  // namespace agetrack::gen
