#include "builder.hpp"

#include "agetrack/errors.hpp"
#include "agetrack/log.hpp"
#include "agetrack/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace agetrack::gen {

namespace banks {

const std::vector<std::string> kFiller = {
    "The group walked through the open items and agreed to revisit them later.",
    "Most of the discussion focused on general housekeeping rather than new work.",
    "Several people noted that the shared calendar had been hard to follow this week.",
    "There was a short tangent about where to keep the meeting notes.",
    "Someone suggested trying a quieter room for the next long discussion.",
    "The weather came up briefly before the conversation returned to routine matters.",
    "A reminder went around about keeping the shared folder tidy.",
    "People agreed that the weekly summary email was still useful.",
    "Nobody raised concerns about the general pace of the work.",
    "The coffee machine on the third floor was reported as working again.",
    "A few attendees joined late because of a scheduling overlap.",
    "The chat channel was noisy but nothing urgent was flagged there.",
    "Everyone was asked to keep comments short during the next review.",
    "The facilitator thanked the group for staying on topic.",
    "A short break was taken halfway through the session.",
    "Some background reading was shared for anyone who wanted more context.",
    "The team discussed whether the usual template still fit their needs.",
    "It was agreed that minor wording changes could wait until later.",
    "Small logistics questions were answered quickly and without debate.",
    "There was general agreement that the process felt smoother than before.",
    "Several informal updates were shared that did not need any follow up.",
    "The room booking system was mentioned as a recurring annoyance.",
    "A question about the seating plan was deferred to another day.",
    "The notes from this part of the conversation were kept brief.",
    "A colleague mentioned that the hallway printer was out of paper again.",
    "Someone described a podcast episode they had enjoyed over the weekend.",
    "The group briefly compared preferences for morning versus afternoon calls.",
    "Light conversation filled the time while the screen share was set up.",
    "An idea about reorganizing the wiki was noted without a decision.",
    "The discussion drifted to favorite lunch spots before refocusing.",
    "It was pointed out that the agenda had been sent out a little late.",
    "People shared general impressions without committing to anything specific.",
    "A reminder about the building fire drill was read aloud.",
    "The video call dropped once but reconnected without trouble.",
    "The usual round of greetings took a few minutes at the start.",
    "A suggestion to rotate the note taker was welcomed by everyone.",
    "Some time was spent tidying up stale reminders in the shared tracker.",
    "The meeting wrapped up with a short round of thanks.",
    "Nothing in this stretch of the conversation changed any earlier plans.",
    "A brief aside covered how everyone was settling into the new office layout.",
};

const std::vector<std::string> kFirstNames = {
    "Luna",  "Vera",  "Kai",   "Carlos", "Ingrid", "Mei",    "Tomas",  "Priya", "Oskar", "Amara",
    "Felix", "Noor",  "Hugo",  "Selma",  "Ravi",   "Elena",  "Jonas",  "Yara",  "Milo",  "Dalia",
    "Arjun", "Freya", "Idris", "Lotte",  "Mateo",  "Sanna",  "Tariq",  "Wren",  "Zofia", "Bruno",
};

const std::vector<std::string> kLastNames = {
    "Sharma", "Patel",  "Singh",  "Kowalski", "Moreau", "Okafor",  "Lindqvist", "Tanaka",
    "Haddad", "Novak",  "Reyes",  "Fischer",  "Duarte", "Kaplan",  "Ivanova",   "Mensah",
    "Berg",   "Castro", "Nakamura", "Quinlan", "Rossi", "Schultz", "Varga",     "Whitfield",
};

const std::vector<std::string> kMonths = {"January", "February", "March",     "April",   "May",      "June",
                                          "July",    "August",   "September", "October", "November", "December"};

}  // namespace banks

std::string fmt_int(std::int64_t v, bool commas) {
  std::string digits = std::to_string(v < 0 ? -v : v);
  if (commas) {
    for (int i = static_cast<int>(digits.size()) - 3; i > 0; i -= 3) digits.insert(static_cast<std::size_t>(i), ",");
  }
  return v < 0 ? "-" + digits : digits;
}

std::string fmt_money(std::int64_t v) { return "$" + fmt_int(v, true); }

std::string fmt_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

void KeywordPool::add_background(std::string_view t) {
  background_ += text::to_lower(t);
  background_ += '\n';
}

bool KeywordPool::keyword_ok(std::string_view kw) const {
  const std::string lk = text::to_lower(kw);
  if (text::trim(lk).empty()) return false;
  if (background_.find(lk) != std::string::npos) return false;
  for (const auto& p : plain_) {
    if (p.find(lk) != std::string::npos) return false;
  }
  for (const auto& k : keywords_) {
    if (k.find(lk) != std::string::npos || lk.find(k) != std::string::npos) return false;
  }
  return true;
}

bool KeywordPool::plain_ok(std::string_view s) const {
  const std::string ls = text::to_lower(s);
  for (const auto& k : keywords_) {
    if (ls.find(k) != std::string::npos) return false;
  }
  return true;
}

void KeywordPool::claim_keyword(std::string_view kw) { keywords_.push_back(text::to_lower(kw)); }
void KeywordPool::claim_plain(std::string_view s) { plain_.push_back(text::to_lower(s)); }

Builder::Builder(Scenario& scenario, std::uint64_t seed, int n_sessions, const PressureConfig& pressure,
                 const GenerateOptions& options)
    : scenario_(scenario),
      options_(options),
      rng_(mix_hash(seed, "content:" + scenario.id())),
      revision_rng_(mix_hash(seed, "revision:" + scenario.id())),
      pair_rng_(mix_hash(seed, "pairs:" + scenario.id())),
      dependency_rng_(mix_hash(seed, "dependency:" + scenario.id())),
      filler_rng_(mix_hash(seed, "filler:" + scenario.id())) {
  pkg_.scenario_id = scenario.id();
  pkg_.seed = seed;
  pkg_.n_sessions = n_sessions;
  pkg_.pressure = pressure;
  pkg_.system_prompt = scenario.system_prompt();
  pkg_.scripts.resize(static_cast<std::size_t>(n_sessions));
  blocks_.resize(static_cast<std::size_t>(n_sessions));
  for (int t = 0; t < n_sessions; ++t) pkg_.scripts[static_cast<std::size_t>(t)].session_index = t;
  for (const auto& f : banks::kFiller) pool_.add_background(f);
}

int Builder::maintenance_session() const {
  const int s = options_.maintenance_session.value_or(n() / 2);
  return std::clamp(s, 0, n() - 1);
}

double Builder::draw(std::string_view tag, std::int64_t a, std::int64_t b) const {
  return keyed_unit(seed(), pkg_.scenario_id + ":" + std::string(tag), a, b);
}

std::string Builder::unique_keyword(const std::function<std::string(Rng&)>& make) {
  std::string cand;
  for (int attempt = 0; attempt < 200; ++attempt) {
    cand = make(rng());
    if (pool_.keyword_ok(cand)) {
      pool_.claim_keyword(cand);
      return cand;
    }
  }
  log::warn("generator: keyword pool exhausted; accepting '" + cand + "' despite a collision");
  pool_.claim_keyword(cand);
  return cand;
}

std::string Builder::unique_plain(const std::function<std::string(Rng&)>& make) {
  std::string cand;
  for (int attempt = 0; attempt < 200; ++attempt) {
    cand = make(rng());
    if (pool_.plain_ok(cand)) {
      pool_.claim_plain(cand);
      return cand;
    }
  }
  pool_.claim_plain(cand);
  return cand;
}

std::string Builder::pick_unused(const std::vector<std::string>& bank, const std::string& bank_name, bool as_keyword) {
  std::vector<std::string> free;
  for (const auto& e : bank) {
    if (used_bank_entries_.count(bank_name + "\x1f" + e) != 0) continue;
    if (as_keyword ? pool_.keyword_ok(e) : pool_.plain_ok(e)) free.push_back(e);
  }
  std::string chosen;
  if (!free.empty()) {
    chosen = rng().pick(free);
  } else {
    // Bank exhausted: recycle with a distinguishing suffix.
    const std::size_t round = ++bank_cursor_[bank_name];
    static const char* const kSuffix[] = {"North", "South", "East", "West", "Central", "Prime", "Nova", "Alto"};
    for (std::size_t k = 0; k < bank.size() * 8 && chosen.empty(); ++k) {
      std::string cand = bank[(k + round) % bank.size()] + " " + kSuffix[(k / bank.size() + round) % 8];
      if (used_bank_entries_.count(bank_name + "\x1f" + cand) == 0 &&
          (as_keyword ? pool_.keyword_ok(cand) : pool_.plain_ok(cand))) {
        chosen = cand;
      }
    }
    if (chosen.empty()) chosen = rng().pick(bank) + " " + std::to_string(round);
  }
  used_bank_entries_.insert(bank_name + "\x1f" + chosen);
  if (as_keyword) {
    pool_.claim_keyword(chosen);
  } else {
    pool_.claim_plain(chosen);
  }
  return chosen;
}

std::string Builder::perturb_value(const std::string& kw) {
  const auto b = kw.find_first_of("0123456789");
  if (b == std::string::npos) throw ValidationError("perturb_value: '" + kw + "' carries no number");
  std::size_t e = b;
  while (e < kw.size() &&
         (std::isdigit(static_cast<unsigned char>(kw[e])) != 0 || kw[e] == ',' ||
          (kw[e] == '.' && e + 1 < kw.size() && std::isdigit(static_cast<unsigned char>(kw[e + 1])) != 0))) {
    ++e;
  }
  const std::string prefix = kw.substr(0, b);
  const std::string core = kw.substr(b, e - b);
  const std::string suffix = kw.substr(e);
  const bool commas = core.find(',') != std::string::npos;
  const auto dot = core.find('.');
  const int decimals = dot == std::string::npos ? 0 : static_cast<int>(core.size() - dot - 1);
  std::string plain_digits;
  for (char c : core) {
    if (c != ',') plain_digits.push_back(c);
  }
  const double v = std::stod(plain_digits);
  const bool percent = !suffix.empty() && suffix[0] == '%';
  return unique_keyword([&](Rng& r) {
    const double f = r.uniform(0.3, 0.6);
    bool up = r.bernoulli(0.5);
    if (percent && v * (1.0 + f) >= 100.0) up = false;
    if (v * (1.0 - f) < 1.0) up = true;
    double nv = up ? v * (1.0 + f) : v * (1.0 - f);
    std::string num;
    if (decimals > 0) {
      num = fmt_fixed(nv, decimals);
    } else {
      nv = std::max(1.0, std::round(nv));
      num = fmt_int(static_cast<std::int64_t>(nv), commas);
    }
    return prefix + num + suffix;
  });
}

void Builder::add_block(int t, std::string block) {
  blocks_[static_cast<std::size_t>(t)].push_back(std::move(block));
}

void Builder::add_task(int t, TaskKind kind, std::string prompt, std::vector<std::string> dependency_keywords,
                       std::string topic) {
  auto& s = script(t);
  TaskSpec task;
  task.task_id = "t" + std::to_string(t) + "_" + std::to_string(s.tasks.size() + 1);
  task.kind = kind;
  task.prompt = std::move(prompt);
  task.dependency_keywords = std::move(dependency_keywords);
  task.topic = std::move(topic);
  s.tasks.push_back(std::move(task));
}

std::string Builder::new_fact(int t, FactDraft draft, std::string domain) {
  draft.meta.slot = t * 1000 + slot_counter_[t]++;
  Fact f = graph().add_fact(std::move(draft.text), std::move(draft.keywords), std::move(domain), t);
  meta_[f.fact_id] = std::move(draft.meta);
  return f.fact_id;
}

const FactMeta& Builder::meta(const std::string& fact_id) const {
  auto it = meta_.find(fact_id);
  if (it == meta_.end()) throw LookupError("generator: no metadata for fact " + fact_id);
  return it->second;
}

FactMeta& Builder::mutable_meta(const std::string& fact_id) {
  auto it = meta_.find(fact_id);
  if (it == meta_.end()) throw LookupError("generator: no metadata for fact " + fact_id);
  return it->second;
}

std::string Builder::next_probe_id(int t, std::string_view prefix) {
  return std::string(prefix) + std::to_string(t) + "_" + std::to_string(++probe_counter_[t]);
}

void Builder::add_probe(int t, ProbeSpec probe, ProbeType type) {
  if (probe.probe_id.empty()) probe.probe_id = next_probe_id(t, "q");
  if (probe.kind != ProbeKind::accumulator) {
    DependencyProbe dp;
    dp.probe_id = probe.probe_id;
    dp.question = probe.question;
    dp.required_fact_ids = probe.required_fact_ids;
    dp.probe_type = type;
    dp.schedule_session = t;
    dp.eval_keywords = probe.eval_keywords;
    dp.forbidden_keywords = probe.forbidden_keywords;
    probe.forbidden_keywords = graph().add_probe(std::move(dp)).forbidden_keywords;
  }
  script(t).probes.push_back(std::move(probe));
}

std::vector<const Fact*> Builder::live_heads(int at) const {
  std::vector<const Fact*> out;
  for (const auto& lid : pkg_.graph.lineage_ids()) {
    const auto chain = pkg_.graph.lineage(lid);
    const Fact& first = *chain.front();
    if (first.session_introduced > at) continue;
    if (meta(first.fact_id).slot < 0) continue;
    const Fact& head = pkg_.graph.fact_as_of(lid, at);
    if (!head.valid && head.invalidated_at && *head.invalidated_at <= at) continue;
    out.push_back(&head);
  }
  return out;
}

std::vector<std::string> Builder::revisions(int t) {
  StreamGuard guard(*this, revision_rng_);
  std::vector<std::string> created;
  const auto& pr = pressure();
  for (const auto& lid : graph().lineage_ids()) {
    const Fact& first = *graph().lineage(lid).front();
    if (first.session_introduced >= t) continue;
    const FactMeta& first_meta = meta(first.fact_id);
    if (first_meta.slot < 0) continue;
    const Fact head = graph().current_fact(lid);
    if (!head.valid) continue;
    const FactMeta head_meta = meta(head.fact_id);
    if (head_meta.forgettable && draw("forget", head_meta.slot, t) < pr.forget_rate) {
      add_block(t, scenario_.retraction_notice(*this, head, head_meta, t));
      graph().invalidate_fact(head.fact_id, t);
      continue;
    }
    if (head_meta.updatable && head.version < pr.max_chain_depth && draw("update", head_meta.slot, t) < pr.update_rate) {
      FactDraft draft = scenario_.revise(*this, head, head_meta, t);
      draft.meta.slot = head_meta.slot;
      add_block(t, draft.text);
      Fact f = graph().supersede_fact(lid, std::move(draft.text), std::move(draft.keywords), t);
      meta_[f.fact_id] = std::move(draft.meta);
      created.push_back(f.fact_id);
    }
  }
  return created;
}

void Builder::inject_pairs(int t) {
  const int n_pairs = pressure().n_confusable_pairs;
  if (n_pairs == 0) return;
  StreamGuard guard(*this, pair_rng_);
  const int start = std::min(pressure().confusable_start_session, n() - 1);
  const int span = n() - start;
  const auto alts = scenario_.alt_domains();
  if (alts.empty()) {
    if (t == 0) log::debug("generator: scenario " + scenario_.id() + " has no confusable pairs");
    return;
  }
  for (int i = 0; i < n_pairs; ++i) {
    if (start + i % span != t) continue;
    std::vector<const Fact*> candidates;
    for (const Fact* f : live_heads(t)) {
      if (f->session_introduced <= t && meta(f->fact_id).pairable) candidates.push_back(f);
    }
    if (candidates.empty()) {
      log::warn("generator: no pairable fact available for pair " + std::to_string(i + 1) + " at session " +
                std::to_string(t));
      continue;
    }
    // Prefer lineages that have no confusable copy yet.
    std::vector<const Fact*> fresh;
    for (const Fact* f : candidates) {
      bool used = std::any_of(pairs_done_.begin(), pairs_done_.end(),
                              [&](const PendingPair& p) { return p.fact_a_lineage == f->lineage_id; });
      if (!used) fresh.push_back(f);
    }
    const Fact fact_a = *rng().pick(fresh.empty() ? candidates : fresh);
    const FactMeta meta_a = meta(fact_a.fact_id);

    std::vector<std::string> alt_choices;
    for (const auto& d : alts) {
      if (d == fact_a.domain) continue;
      bool taken = false;
      for (const auto& p : pairs_done_) {
        if (p.fact_a_lineage == fact_a.lineage_id && graph().fact(p.fact_b).domain == d) taken = true;
      }
      if (!taken) alt_choices.push_back(d);
    }
    if (alt_choices.empty()) alt_choices = alts;
    const std::string alt = rng().pick(alt_choices);
    const std::string value = perturb_value(meta_a.value_kw);
    const std::string text_b = scenario_.confusable_text(meta_a, alt, value);
    add_block(t, text_b);
    Fact fact_b = graph().add_fact(text_b, {value}, alt, t);
    FactMeta meta_b;
    meta_b.kind = "confusable";
    meta_b.updatable = meta_b.forgettable = meta_b.dep_ok = meta_b.probe_ok = false;
    meta_[fact_b.fact_id] = meta_b;

    InterferencePair pair{"P" + std::to_string(i + 1), fact_a.fact_id, fact_b.fact_id, meta_a.term, t};
    graph().add_pair(pair);
    pairs_done_.push_back({pair.pair_id, fact_a.lineage_id, fact_b.fact_id});

    ProbeSpec probe;
    probe.probe_id = next_probe_id(t, "i");
    probe.question = meta_a.interference_question;
    probe.eval_keywords = {meta_a.value_kw};
    probe.kind = ProbeKind::interference;
    probe.required_fact_ids = {fact_a.fact_id};
    probe.confusable_keywords = {value};
    probe.source_session = fact_a.session_introduced;
    add_probe(t, std::move(probe));
  }
}

void Builder::final_interference_probes(int t) {
  for (const auto& p : pairs_done_) {
    const Fact& fact_b = graph().fact(p.fact_b);
    if (fact_b.session_introduced >= t) continue;
    const Fact& head = graph().current_fact(p.fact_a_lineage);
    if (!head.valid) continue;
    const FactMeta& m = meta(head.fact_id);
    if (!m.pairable) continue;
    ProbeSpec probe;
    probe.probe_id = next_probe_id(t, "i");
    probe.question = m.interference_question;
    probe.eval_keywords = {m.value_kw};
    probe.kind = ProbeKind::interference;
    probe.required_fact_ids = {head.fact_id};
    probe.confusable_keywords = fact_b.keywords;
    probe.source_session = head.session_introduced;
    add_probe(t, std::move(probe));
  }
}

void Builder::dependency_probe(int t) {
  const auto& pr = pressure();
  if (t < pr.warmup_sessions) return;
  if (draw("dependency", t) >= pr.dependency_density) return;
  StreamGuard guard(*this, dependency_rng_);
  std::vector<const Fact*> candidates;
  for (const Fact* f : live_heads(t)) {
    if (meta(f->fact_id).dep_ok) candidates.push_back(f);
  }
  if (candidates.empty()) {
    log::warn("generator: no facts available for the dependency probe at session " + std::to_string(t));
    return;
  }
  static const std::vector<double> kTypeWeights = {0.3, 0.2, 0.2, 0.3};
  static const ProbeType kTypes[] = {ProbeType::compare, ProbeType::trend, ProbeType::synthesize,
                                     ProbeType::standalone};
  ProbeType type = kTypes[rng().weighted_index(kTypeWeights)];
  std::size_t want = 1;
  switch (type) {
    case ProbeType::compare:
      want = 2;
      break;
    case ProbeType::trend:
      want = 3;
      break;
    case ProbeType::synthesize:
      want = static_cast<std::size_t>(rng().uniform_int(2, 3));
      break;
    case ProbeType::standalone:
      want = 1;
      break;
  }
  rng().shuffle(candidates);
  const std::size_t k = std::min(want, candidates.size());
  candidates.resize(k);
  if (k == 1) type = ProbeType::standalone;

  std::vector<const FactMeta*> metas;
  ProbeSpec probe;
  probe.probe_id = next_probe_id(t, "d");
  probe.kind = ProbeKind::dependency;
  for (const Fact* f : candidates) {
    metas.push_back(&meta(f->fact_id));
    probe.required_fact_ids.push_back(f->fact_id);
    for (const auto& kw : f->keywords) {
      if (std::find(probe.eval_keywords.begin(), probe.eval_keywords.end(), kw) == probe.eval_keywords.end()) {
        probe.eval_keywords.push_back(kw);
      }
    }
  }
  probe.question = scenario_.dependency_question(type, candidates, metas);
  add_probe(t, std::move(probe), type);
}

void Builder::recall_probe(int t, const Fact& f, ProbeKind kind) {
  const FactMeta& m = meta(f.fact_id);
  ProbeSpec probe;
  probe.probe_id = next_probe_id(t, kind == ProbeKind::lag ? "l" : "r");
  probe.question = m.recall_question;
  probe.eval_keywords = f.keywords;
  probe.kind = kind;
  probe.required_fact_ids = {f.fact_id};
  probe.source_session = f.session_introduced;
  add_probe(t, std::move(probe));
}

void Builder::pad_sessions() {
  const int target = pressure().tokens_per_session;
  for (int t = 0; t < n(); ++t) {
    auto& blocks = blocks_[static_cast<std::size_t>(t)];
    std::size_t content = 0;
    for (const auto& b : blocks) content += text::word_count(b);
    std::vector<std::string> filler;
    std::size_t total = content;
    while (total < static_cast<std::size_t>(target)) {
      std::string s = filler_rng_.pick(banks::kFiller);
      while (!filler.empty() && s == filler.back()) s = filler_rng_.pick(banks::kFiller);
      filler.push_back(s);
      total += text::word_count(s);
    }
    if (content > static_cast<std::size_t>(target) * 6 / 5) {
      log::debug("generator: session " + std::to_string(t) + " content (" + std::to_string(content) +
                 " words) exceeds the word target by more than 20%");
    }
    // Spread the filler evenly behind the content blocks.
    const std::size_t groups = std::max<std::size_t>(blocks.size(), 1);
    std::string env;
    std::size_t next = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      if (g < blocks.size()) {
        env += blocks[g];
        env += "\n\n";
      }
      const std::size_t upto = filler.size() * (g + 1) / groups;
      std::vector<std::string> chunk(filler.begin() + static_cast<std::ptrdiff_t>(next),
                                     filler.begin() + static_cast<std::ptrdiff_t>(upto));
      next = upto;
      if (!chunk.empty()) {
        env += text::join(chunk, " ");
        env += "\n\n";
      }
    }
    script(t).env_text = text::trim(env);
  }
}

RunPackage Builder::finish() {
  scenario_.finish(*this);
  pad_sessions();
  for (auto& s : pkg_.scripts) {
    for (auto& p : s.probes) {
      if (p.kind != ProbeKind::accumulator) p.forbidden_keywords = pkg_.graph.probe(p.probe_id).forbidden_keywords;
    }
    if (s.maintenance_event) s.maintenance_event->session = s.session_index;
  }
  pkg_.validate();
  return std::move(pkg_);
}

}  // namespace agetrack::gen
