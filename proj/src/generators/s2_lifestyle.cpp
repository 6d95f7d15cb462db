// S2: lifestyle assistant. A fixed constraint profile at session 0, one dining
// expense per later session feeding the dining_budget accumulator, and
// constraint updates over time.

#include "builder.hpp"

#include "agetrack/prompts.hpp"
#include "agetrack/text.hpp"

#include <cctype>

namespace agetrack::gen {
namespace {

const std::vector<std::string> kMerchants = {"Walmart", "Amazon", "Target",  "Costco", "Wayfair",
                                             "Temu",    "Shein",  "Kroger",  "Macy's", "Best Buy"};
const std::vector<std::string> kAllergens = {"shellfish", "peanut", "sesame", "gluten", "lactose", "walnut"};
const std::vector<std::string> kRestaurants = {"Bella Notte",  "Golden Lotus", "Casa Verde",  "Blue Harbor",
                                               "Little Saigon", "Olive Grove", "Sakura House", "Maple Table",
                                               "Red Lantern",  "Copper Pot"};
const std::vector<std::string> kRides = {"Lyft", "Uber", "Curb", "Bolt", "Wingz", "Gett"};
const std::vector<std::string> kAirlines = {"Delta", "Lufthansa", "Emirates", "Qantas", "Finnair", "Iberia",
                                            "Aer Lingus", "JetBlue"};
const std::vector<std::string> kDiners = {"Trattoria Sole", "Pho Corner",   "Taco Haus",    "Noodle Bar",
                                          "Curry Leaf",     "Burger Den",   "Dumpling Hut", "Falafel King",
                                          "Ramen Yard",     "Pizza Forno",  "Sushi Wave",   "Bistro Lune",
                                          "Grill Point",    "Crepe Corner", "Poke Stop",    "Kebab Cove"};
const std::vector<std::string> kAlt = {"travel",    "groceries", "clothing", "fitness", "entertainment", "utilities",
                                       "education", "pets",      "gardening", "charity", "hobbies",      "transit"};
const std::vector<std::string> kTasks = {
    "[scheduling] Schedule a meeting for next Monday afternoon.",
    "[subscriptions] I found a streaming subscription offer. Should I sign up?",
    "[gifting] I need a gift idea for an upcoming birthday. Any ideas?",
    "[dining] Find a restaurant for a casual Friday dinner. We want Italian food.",
    "[transport] Book me a ride to the airport tomorrow morning.",
    "[shopping] Order a new set of kitchen towels for me.",
    "[travel] Look up flights for a long weekend away.",
    "[health] Suggest a quick lunch I can order today.",
};

constexpr const char* kAccumulator = "dining_budget";

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

class S2 final : public Scenario {
 public:
  std::string id() const override { return "S2"; }
  std::string system_prompt() const override { return prompts::kTier1System; }
  std::vector<std::string> alt_domains() const override { return kAlt; }

  void session(Builder& b, int t) override {
    if (t == 0) {
      for (const auto& task : kTasks) b.pool().add_background(task);
      b.pool().add_background("user profile dining budget exactly month maximum never buy from personal boycott "
                              "active subscriptions at any time dietary restriction allergy favorite restaurant "
                              "no meetings before transport always book never partner birthday preferred airline "
                              "aisle seat gift budget range expense log spent at for dinner update");
      profile(b);
    } else {
      b.revisions(t);
      expense(b, t);
    }
    b.inject_pairs(t);

    for (const Fact* f : b.live_heads(t)) {
      if (b.meta(f->fact_id).probe_ok) b.recall_probe(t, *f);
    }
    if (t >= 1) {
      ProbeSpec acc;
      acc.probe_id = b.next_probe_id(t, "a");
      acc.question = "What is my remaining dining budget this month? Give me the exact number.";
      acc.eval_keywords = {text::format_number(b.graph().gold_accumulator_value(kAccumulator, t))};
      acc.kind = ProbeKind::accumulator;
      acc.required_fact_ids = {c1_id_};
      acc.accumulator = kAccumulator;
      b.add_probe(t, std::move(acc));
    }
    b.dependency_probe(t);
    if (t == b.n() - 1) b.final_interference_probes(t);

    std::vector<std::string> tasks = kTasks;
    b.rng().shuffle(tasks);
    const auto n_tasks = static_cast<std::size_t>(b.rng().uniform_int(3, 5));
    for (std::size_t i = 0; i < n_tasks; ++i) b.add_task(t, TaskKind::task, tasks[i]);
  }

  FactDraft revise(Builder& b, const Fact&, const FactMeta& meta, int) override {
    FactDraft d = make_constraint(b, meta.kind, &meta);
    d.text = d.meta.vars["update_text"];
    return d;
  }

  std::string retraction_notice(Builder&, const Fact&, const FactMeta& meta, int) override {
    return "Update: please drop my rule about my " + meta.vars.at("topic") + "; it no longer applies.";
  }

  std::string confusable_text(const FactMeta&, const std::string& alt, const std::string& value) override {
    return capitalize(alt) + " budget is " + value + "/month.";
  }

  std::string dependency_question(ProbeType type, const std::vector<const Fact*>&,
                                  const std::vector<const FactMeta*>& metas) override {
    std::vector<std::string> topics;
    for (const auto* m : metas) topics.push_back("my " + m->vars.at("topic"));
    switch (type) {
      case ProbeType::compare:
        return "Compare " + topics[0] + " with " + topics[1] + ". Which one limits a weekend outing more?";
      case ProbeType::trend:
        return "Summarize where things stand now for " + text::join(topics, ", ") + ".";
      case ProbeType::synthesize:
        return "Plan a casual Friday evening that respects " + text::join(topics, " and ") + ".";
      case ProbeType::standalone:
        break;
    }
    return "Remind me of " + topics[0] + ".";
  }

 private:
  // Builds version 1 (meta == nullptr) or the next version of a constraint.
  FactDraft make_constraint(Builder& b, const std::string& kind, const FactMeta* prev) {
    FactDraft d;
    if (prev != nullptr) d.meta = *prev;
    d.meta.kind = kind;
    auto& v = d.meta.vars;
    if (kind == "C1") {
      const std::string budget =
          b.unique_keyword([](Rng& r) { return fmt_money(r.uniform_int(250, 480)); });
      d.text = "Dining budget: exactly " + budget + "/month maximum.";
      d.keywords = {budget};
      v["topic"] = "dining budget";
      v["amount"] = budget.substr(1);
      d.meta.recall_question = "What is my monthly dining budget limit?";
      d.meta.interference_question = "What is my dining budget? Give the exact monthly figure.";
      d.meta.term = "budget";
      d.meta.value_kw = budget;
      d.meta.pairable = true;
      d.meta.updatable = false;
      d.meta.forgettable = false;
    } else if (kind == "C2") {
      const std::string m = b.pick_unused(kMerchants, "merchant", true);
      d.text = "Never buy from " + m + ". Personal boycott.";
      v["update_text"] = "Update: I am now boycotting " + m + ". Never buy from " + m + ".";
      d.keywords = {m};
      v["topic"] = "shopping boycott";
      d.meta.recall_question = "Which store have I asked you never to buy from?";
    } else if (kind == "C3") {
      const std::string cap = b.unique_keyword([](Rng& r) {
        return std::to_string(r.uniform_int(2, 7)) + " active subscriptions";
      });
      d.text = "Maximum " + cap + " at any time.";
      v["update_text"] = "Update: my subscription cap changed. Maximum " + cap + " at any time.";
      d.keywords = {cap};
      v["topic"] = "subscription limit";
      d.meta.recall_question = "How many active subscriptions am I allowed to keep?";
    } else if (kind == "C4") {
      const std::string a = b.pick_unused(kAllergens, "allergen", true);
      d.text = "Dietary restriction: " + a + " allergy, so avoid any dish containing " + a + ".";
      d.keywords = {a};
      v["topic"] = "dietary restriction";
      d.meta.recall_question = "What food allergy do I have?";
      d.meta.updatable = false;
      d.meta.forgettable = false;
    } else if (kind == "C5") {
      const std::string r = b.pick_unused(kRestaurants, "restaurant", true);
      d.text = "Favorite restaurant: " + r + ".";
      v["update_text"] = "Update: my new favorite restaurant is " + r + ".";
      d.keywords = {r};
      v["topic"] = "favorite restaurant";
      d.meta.recall_question = "What is my favorite restaurant?";
    } else if (kind == "C6") {
      const std::string hour = b.unique_keyword([](Rng& r) { return std::to_string(r.uniform_int(8, 11)) + ":00 AM"; });
      d.text = "No meetings before " + hour + ".";
      v["update_text"] = "Update: no meetings before " + hour + " from now on.";
      d.keywords = {hour};
      v["topic"] = "meeting hours";
      d.meta.recall_question = "What is the earliest time I accept meetings?";
    } else if (kind == "C7") {
      const std::string keep = prev != nullptr ? v.at("keep") : b.pick_unused(kRides, "ride", true);
      const std::string avoid = b.pick_unused(kRides, "ride", true);
      v["keep"] = keep;
      d.text = "Transport: always book " + keep + ", never " + avoid + ".";
      v["update_text"] = "Update: my transport constraint is now stricter. Always book " + keep + ", never " + avoid +
                         ". Had a billing dispute with " + avoid + ".";
      d.keywords = {keep, avoid};
      v["topic"] = "transport rule";
      d.meta.recall_question = "Which ride service should I book, and which should I avoid?";
    } else if (kind == "C8") {
      const std::string partner = b.pick_unused(banks::kFirstNames, "person", false);
      const std::string date = b.unique_keyword([](Rng& r) {
        return r.pick(banks::kMonths) + " " + std::to_string(r.uniform_int(1, 28));
      });
      d.text = "Partner " + partner + " has a birthday on " + date + ".";
      d.keywords = {date};
      v["topic"] = "partner's birthday";
      d.meta.recall_question = "When is my partner's birthday?";
      d.meta.updatable = false;
    } else if (kind == "C9") {
      const std::string airline = b.pick_unused(kAirlines, "airline", true);
      d.text = "Preferred airline: " + airline + ", aisle seat.";
      v["update_text"] = "Update: switch my preferred airline to " + airline + ".";
      d.keywords = {airline};
      v["topic"] = "preferred airline";
      d.meta.recall_question = "Which airline do I prefer to fly?";
    } else {
      const std::string friend_name = prev != nullptr ? v.at("friend") : b.pick_unused(banks::kFirstNames, "person", false);
      v["friend"] = friend_name;
      const std::string lo = b.unique_keyword([](Rng& r) { return fmt_money(r.uniform_int(40, 95)); });
      const std::string hi = b.unique_keyword([&](Rng& r) {
        return fmt_money(std::stoi(lo.substr(1)) + r.uniform_int(20, 45));
      });
      d.text = "Gift budget for " + friend_name + ": " + lo + "-" + hi + " range.";
      v["update_text"] = "Update: the gift budget for " + friend_name + " is now " + lo + "-" + hi + ".";
      d.keywords = {lo, hi};
      v["topic"] = "gift budget for " + friend_name;
      d.meta.recall_question = "What is my gift budget range for " + friend_name + "?";
    }
    return d;
  }

  void profile(Builder& b) {
    std::vector<std::string> lines = {"User profile."};
    static const char* const kKinds[] = {"C1", "C2", "C3", "C4", "C5", "C6", "C7", "C8", "C9", "C10"};
    static const char* const kDomains[] = {"dining",    "shopping",  "subscriptions", "health", "restaurants",
                                           "scheduling", "transport", "contacts",      "travel", "gifting"};
    for (int i = 0; i < 10; ++i) {
      FactDraft d = make_constraint(b, kKinds[i], nullptr);
      std::string line = std::string(kKinds[i]) + ": " + d.text;
      if (i == 0) {
        const std::string amount = d.meta.vars.at("amount");
        b.graph().add_accumulator(kAccumulator, std::stod(amount), "USD");
        if (b.options().emit_sentinels) line += " [ACCUM_INIT:" + std::string(kAccumulator) + ":" + amount + "]";
      }
      lines.push_back(line);
      const std::string id = b.new_fact(0, std::move(d), kDomains[i]);
      if (i == 0) c1_id_ = id;
    }
    b.add_block(0, text::join(lines, "\n"));
  }

  void expense(Builder& b, int t) {
    const std::string diner = b.pick_unused(kDiners, "diner", true);
    const std::int64_t amount = std::stoll(b.unique_plain([](Rng& r) { return std::to_string(r.uniform_int(10, 120)); }));
    FactDraft d;
    d.text = "Expense log: spent $" + std::to_string(amount) + " at " + diner + " for dinner.";
    d.keywords = {diner};
    d.meta.kind = "expense";
    d.meta.updatable = d.meta.forgettable = d.meta.dep_ok = d.meta.probe_ok = false;
    d.meta.recall_question = "Where did I spend money on dinner recently?";
    std::string line = d.text;
    if (b.options().emit_sentinels) {
      line += " [ACCUM:" + std::string(kAccumulator) + ":-" + std::to_string(amount) + "]";
    }
    b.add_block(t, line);
    b.new_fact(t, std::move(d), "expenses");
    b.graph().add_delta(kAccumulator, t, -static_cast<double>(amount));
  }

  std::string c1_id_;
};

}  // namespace

std::unique_ptr<Scenario> make_s2() { return std::make_unique<S2>(); }

}  // namespace agetrack::gen
