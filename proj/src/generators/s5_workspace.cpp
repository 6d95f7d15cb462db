// S5: workspace mode. Each session hands the agent a few personal facts and
// asks it to save them under notes/; later sessions ask about them. Halfway
// through, the workspace is wiped.

#include "builder.hpp"

#include "agetrack/prompts.hpp"
#include "agetrack/text.hpp"

namespace agetrack::gen {
namespace {

const std::vector<std::string> kTopics = {"budget", "dining", "contacts", "health", "memberships"};
const std::vector<std::string> kCategories = {"clothing", "books",  "coffee", "streaming", "gardening", "hobby",
                                              "pet care", "travel", "gym",    "concert",   "charity",   "gadget",
                                              "grocery",  "taxi",   "school", "craft"};
const std::vector<std::string> kRoles = {"dentist",     "optometrist", "physiotherapist", "dermatologist",
                                         "pediatrician", "allergist",  "chiropractor",    "cardiologist",
                                         "nutritionist", "audiologist", "podiatrist",     "orthodontist"};
const std::vector<std::string> kRelations = {"landlord", "plumber",  "babysitter", "accountant", "mechanic", "neighbor",
                                             "tutor",    "electrician", "gardener", "dog walker", "lawyer",   "barber"};
const std::vector<std::string> kClubs = {"gym",         "library",    "museum",      "climbing gym", "swim club",
                                         "food co-op",  "chess club", "film society", "zoo",         "bike share",
                                         "tennis club", "yoga studio"};
const std::vector<std::string> kRestaurants = {"Bella Notte",  "Golden Lotus", "Casa Verde",  "Blue Harbor",
                                               "Little Saigon", "Olive Grove", "Sakura House", "Maple Table",
                                               "Red Lantern",  "Copper Pot",  "Saffron Room", "Harbor Grill"};

constexpr int kFactsPerSession = 3;

std::string letters(Rng& r, int n) {
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('A' + r.uniform_int(0, 25)));
  return s;
}

class S5 final : public Scenario {
 public:
  std::string id() const override { return "S5"; }
  std::string system_prompt() const override { return prompts::kWorkspaceSystem; }
  std::vector<std::string> alt_domains() const override { return {}; }

  void session(Builder& b, int t) override {
    if (t == 0) {
      b.pool().add_background("new_info your monthly budget is dentist next checkup phone number ends in membership "
                              "number reservation code for update now please forget it no longer applies save the "
                              "new information from this session to your notes");
    }
    b.revisions(t);
    std::vector<std::string> ids;
    for (int i = 0; i < kFactsPerSession; ++i) ids.push_back(new_info(b, t, b.rng().pick(kTopics)));
    by_session_.push_back(ids);

    // One recall probe on today's material, then one lag probe per earlier session.
    if (const Fact* f = pick_valid(b, ids, t, t)) b.recall_probe(t, *f);
    for (int s = 0; s < t; ++s) {
      if (const Fact* f = pick_valid(b, by_session_[static_cast<std::size_t>(s)], t, s + t)) {
        b.recall_probe(t, *f, ProbeKind::lag);
      }
    }
    b.dependency_probe(t);
    b.add_task(t, TaskKind::save, "Save the new information from this session to your notes.", {},
               "session_" + std::to_string(t));
    if (t == b.maintenance_session() && t > 0) {
      b.script(t).maintenance_event = LifecycleEvent{EventKind::workspace_flush, t, std::nullopt};
    }
  }

  FactDraft revise(Builder& b, const Fact&, const FactMeta& meta, int) override {
    FactDraft d = make(b, meta.kind, &meta);
    d.text = "[new_info] Update: " + d.meta.vars.at("update_text");
    return d;
  }

  std::string retraction_notice(Builder&, const Fact&, const FactMeta& meta, int) override {
    return "[new_info] Please forget what I told you about my " + meta.vars.at("subject") +
           "; it no longer applies.";
  }

  std::string confusable_text(const FactMeta&, const std::string&, const std::string&) override { return ""; }

  std::string dependency_question(ProbeType type, const std::vector<const Fact*>&,
                                  const std::vector<const FactMeta*>& metas) override {
    std::vector<std::string> subjects;
    for (const auto* m : metas) subjects.push_back("my " + m->vars.at("subject"));
    switch (type) {
      case ProbeType::compare:
        return "Looking at " + subjects[0] + " and " + subjects[1] + ", which needs attention first?";
      case ProbeType::trend:
        return "Give me a quick status of " + text::join(subjects, ", ") + ".";
      case ProbeType::synthesize:
        return "Put " + text::join(subjects, " and ") + " into a single reminder note.";
      case ProbeType::standalone:
        break;
    }
    return "What do you have on file about " + subjects[0] + "?";
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

  FactDraft make(Builder& b, const std::string& topic, const FactMeta* prev) {
    FactDraft d;
    if (prev != nullptr) d.meta = *prev;
    d.meta.kind = topic;
    auto& v = d.meta.vars;
    if (topic == "budget") {
      if (prev == nullptr) v["category"] = b.pick_unused(kCategories, "category", false);
      const std::string amount = b.unique_keyword([](Rng& r) { return fmt_money(r.uniform_int(120, 990)); });
      d.text = "Your monthly " + v["category"] + " budget is " + amount + ".";
      v["update_text"] = "your monthly " + v["category"] + " budget is now " + amount + ".";
      v["subject"] = v["category"] + " budget";
      d.keywords = {amount};
      d.meta.recall_question = "What is my monthly " + v["category"] + " budget?";
    } else if (topic == "health") {
      if (prev == nullptr) v["role"] = b.pick_unused(kRoles, "role", false);
      const std::string doctor = b.unique_keyword([](Rng& r) { return "Dr. " + r.pick(banks::kLastNames); });
      const std::string date = b.unique_keyword([](Rng& r) {
        return r.pick(banks::kMonths) + " " + std::to_string(r.uniform_int(1, 28));
      });
      d.text = "Your " + v["role"] + " is " + doctor + "; next checkup " + date + ".";
      v["update_text"] = "your " + v["role"] + " is now " + doctor + "; next checkup " + date + ".";
      v["subject"] = v["role"];
      d.keywords = {doctor, date};
      d.meta.recall_question = "Who is my " + v["role"] + " and when is my next checkup?";
    } else if (topic == "contacts") {
      if (prev == nullptr) v["relation"] = b.pick_unused(kRelations, "relation", false);
      const std::string digits = b.unique_keyword([](Rng& r) { return std::to_string(r.uniform_int(1000, 9999)); });
      d.text = "Your " + v["relation"] + "'s phone number ends in " + digits + ".";
      v["update_text"] = "your " + v["relation"] + "'s phone number now ends in " + digits + ".";
      v["subject"] = v["relation"] + "'s phone number";
      d.keywords = {digits};
      d.meta.recall_question = "What are the last digits of my " + v["relation"] + "'s phone number?";
    } else if (topic == "memberships") {
      if (prev == nullptr) v["club"] = b.pick_unused(kClubs, "club", false);
      const std::string number = b.unique_keyword([](Rng& r) {
        return letters(r, 2) + "-" + std::to_string(r.uniform_int(10000, 99999));
      });
      d.text = "Your " + v["club"] + " membership number is " + number + ".";
      v["update_text"] = "your " + v["club"] + " membership number is now " + number + ".";
      v["subject"] = v["club"] + " membership";
      d.keywords = {number};
      d.meta.recall_question = "What is my " + v["club"] + " membership number?";
    } else {
      if (prev == nullptr) v["restaurant"] = b.pick_unused(kRestaurants, "restaurant", false);
      const std::string code = b.unique_keyword([](Rng& r) {
        return letters(r, 1) + std::to_string(r.uniform_int(100, 999)) + letters(r, 1);
      });
      d.text = "Your reservation code for " + v["restaurant"] + " is " + code + ".";
      v["update_text"] = "your reservation code for " + v["restaurant"] + " is now " + code + ".";
      v["subject"] = v["restaurant"] + " reservation";
      d.keywords = {code};
      d.meta.recall_question = "What is my reservation code for " + v["restaurant"] + "?";
    }
    return d;
  }

  std::string new_info(Builder& b, int t, const std::string& topic) {
    FactDraft d = make(b, topic, nullptr);
    d.text = "[new_info] " + d.text;
    b.add_block(t, d.text);
    return b.new_fact(t, std::move(d), topic);
  }

  std::vector<std::vector<std::string>> by_session_;
};

}  // namespace

std::unique_ptr<Scenario> make_s5() { return std::make_unique<S5>(); }

}  // namespace agetrack::gen
