#include "agetrack/fact_graph.hpp"

#include "agetrack/errors.hpp"
#include "agetrack/log.hpp"
#include "agetrack/text.hpp"
#include "json_fields.hpp"

#include <algorithm>

namespace agetrack {

std::string to_string(ProbeType t) {
  switch (t) {
    case ProbeType::compare:
      return "compare";
    case ProbeType::trend:
      return "trend";
    case ProbeType::synthesize:
      return "synthesize";
    case ProbeType::standalone:
      return "standalone";
  }
  return "standalone";
}

ProbeType probe_type_from_string(std::string_view s) {
  if (s == "compare") return ProbeType::compare;
  if (s == "trend") return ProbeType::trend;
  if (s == "synthesize") return ProbeType::synthesize;
  if (s == "standalone") return ProbeType::standalone;
  throw ParseError("unknown probe type '" + std::string(s) + "'");
}

namespace {

bool contains_keyword_ci(const std::vector<std::string>& set, std::string_view kw) {
  const auto lk = text::to_lower(kw);
  return std::any_of(set.begin(), set.end(), [&](const std::string& s) { return text::to_lower(s) == lk; });
}

void push_unique(std::vector<std::string>& v, const std::string& s) {
  if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
}

}  // namespace

void FactGraph::index_fact(std::size_t idx) {
  const Fact& f = facts_[idx];
  fact_index_.emplace(f.fact_id, idx);
  lineages_[f.lineage_id].push_back(idx);
}

Fact FactGraph::add_fact(std::string text, std::vector<std::string> keywords, std::string domain, int session,
                         std::optional<std::string> fact_id) {
  if (text::trim(text).empty()) throw ValidationError("add_fact: empty text rejected");
  if (keywords.empty()) throw ValidationError("add_fact: keywords must be non-empty");
  if (session < 0) throw ValidationError("add_fact: negative session");
  Fact f;
  f.fact_id = fact_id ? *fact_id : "f" + std::to_string(next_fact_);
  if (fact_index_.count(f.fact_id) != 0) throw ValidationError("add_fact: duplicate fact id '" + f.fact_id + "'");
  f.lineage_id = "L" + std::to_string(next_fact_);
  while (lineages_.count(f.lineage_id) != 0) f.lineage_id += "_";
  ++next_fact_;
  f.version = 1;
  f.text = std::move(text);
  f.keywords = std::move(keywords);
  f.domain = std::move(domain);
  f.session_introduced = session;
  facts_.push_back(std::move(f));
  index_fact(facts_.size() - 1);
  return facts_.back();
}

Fact FactGraph::supersede_fact(std::string_view lineage_id, std::string new_text, std::vector<std::string> new_keywords,
                               int session) {
  auto it = lineages_.find(lineage_id);
  if (it == lineages_.end()) throw LookupError("supersede_fact: unknown lineage '" + std::string(lineage_id) + "'");
  if (text::trim(new_text).empty()) throw ValidationError("supersede_fact: empty text rejected");
  if (new_keywords.empty()) throw ValidationError("supersede_fact: keywords must be non-empty");
  const std::size_t head_idx = it->second.back();
  if (session < facts_[head_idx].session_introduced) {
    throw ValidationError("supersede_fact: session precedes the current head of lineage " + std::string(lineage_id));
  }
  if (!facts_[head_idx].valid) {
    throw ValidationError("supersede_fact: lineage " + std::string(lineage_id) + " was invalidated");
  }

  std::vector<std::string> retired;
  for (const auto& kw : facts_[head_idx].keywords) {
    if (!contains_keyword_ci(new_keywords, kw)) retired.push_back(kw);
  }

  Fact f;
  f.fact_id = "f" + std::to_string(next_fact_++);
  while (fact_index_.count(f.fact_id) != 0) f.fact_id += "_";
  f.lineage_id = std::string(lineage_id);
  f.version = facts_[head_idx].version + 1;
  f.text = std::move(new_text);
  f.keywords = std::move(new_keywords);
  f.domain = facts_[head_idx].domain;
  f.session_introduced = session;

  facts_[head_idx].superseded_at = session;
  facts_[head_idx].superseded_keywords = retired;

  for (auto& p : probes_) {
    if (p.schedule_session > session) {
      for (const auto& kw : retired) push_unique(p.forbidden_keywords, kw);
    }
  }

  facts_.push_back(std::move(f));
  index_fact(facts_.size() - 1);
  return facts_.back();
}

bool FactGraph::invalidate_fact(std::string_view fact_id, int session) {
  Fact& f = mutable_fact(fact_id);
  if (!f.valid) {
    log::warn("invalidate_fact: fact " + f.fact_id + " is already invalid; ignoring");
    return false;
  }
  f.valid = false;
  f.invalidated_at = session;
  for (auto& p : probes_) {
    if (p.schedule_session > session) {
      for (const auto& kw : f.keywords) push_unique(p.forbidden_keywords, kw);
    }
  }
  return true;
}

Fact& FactGraph::mutable_fact(std::string_view fact_id) {
  auto it = fact_index_.find(fact_id);
  if (it == fact_index_.end()) throw LookupError("unknown fact '" + std::string(fact_id) + "'");
  return facts_[it->second];
}

const Fact& FactGraph::fact(std::string_view fact_id) const {
  auto it = fact_index_.find(fact_id);
  if (it == fact_index_.end()) throw LookupError("unknown fact '" + std::string(fact_id) + "'");
  return facts_[it->second];
}

bool FactGraph::has_fact(std::string_view fact_id) const { return fact_index_.count(fact_id) != 0; }

const Fact& FactGraph::current_fact(std::string_view lineage_id) const {
  auto it = lineages_.find(lineage_id);
  if (it == lineages_.end()) throw LookupError("unknown lineage '" + std::string(lineage_id) + "'");
  return facts_[it->second.back()];
}

const Fact& FactGraph::fact_as_of(std::string_view lineage_id, int session) const {
  auto it = lineages_.find(lineage_id);
  if (it == lineages_.end()) throw LookupError("unknown lineage '" + std::string(lineage_id) + "'");
  const Fact* best = &facts_[it->second.front()];
  for (auto idx : it->second) {
    if (facts_[idx].session_introduced <= session) best = &facts_[idx];
  }
  return *best;
}

std::vector<const Fact*> FactGraph::lineage(std::string_view lineage_id) const {
  auto it = lineages_.find(lineage_id);
  if (it == lineages_.end()) throw LookupError("unknown lineage '" + std::string(lineage_id) + "'");
  std::vector<const Fact*> out;
  for (auto idx : it->second) out.push_back(&facts_[idx]);
  return out;
}

std::vector<std::string> FactGraph::lineage_ids() const {
  // Insertion order of the first version, not map order.
  std::vector<std::string> out;
  for (const auto& f : facts_) {
    if (f.version == 1) out.push_back(f.lineage_id);
  }
  return out;
}

const DependencyProbe& FactGraph::add_probe(DependencyProbe probe) {
  const std::string ctx = "probe " + probe.probe_id;
  if (probe.probe_id.empty()) throw ValidationError("add_probe: empty probe id");
  if (probe_index_.count(probe.probe_id) != 0) throw ValidationError(ctx + ": duplicate probe id");
  if (probe.required_fact_ids.empty()) throw ValidationError(ctx + ": no required facts");
  if (probe.eval_keywords.empty()) throw ValidationError(ctx + ": no eval keywords");
  for (const auto& id : probe.required_fact_ids) {
    if (!has_fact(id)) throw ValidationError(ctx + ": references unknown fact '" + id + "'");
    if (fact(id).session_introduced > probe.schedule_session) {
      throw ValidationError(ctx + ": scheduled before required fact " + id + " is introduced");
    }
  }
  if ((probe.probe_type == ProbeType::standalone) != (probe.required_fact_ids.size() == 1)) {
    throw ValidationError(ctx + ": standalone probes must have exactly one required fact");
  }
  for (const auto& kw : forbidden_keywords(probe.schedule_session)) push_unique(probe.forbidden_keywords, kw);
  probes_.push_back(std::move(probe));
  probe_index_.emplace(probes_.back().probe_id, probes_.size() - 1);
  return probes_.back();
}

const DependencyProbe& FactGraph::probe(std::string_view probe_id) const {
  auto it = probe_index_.find(probe_id);
  if (it == probe_index_.end()) throw LookupError("unknown probe '" + std::string(probe_id) + "'");
  return probes_[it->second];
}

const InterferencePair& FactGraph::add_pair(InterferencePair pair) {
  const std::string ctx = "pair " + pair.pair_id;
  const Fact& a = fact(pair.fact_a);
  const Fact& b = fact(pair.fact_b);
  if (a.domain == b.domain) throw ValidationError(ctx + ": facts share domain '" + a.domain + "'");
  if (!text::contains_ci(a.text, pair.shared_term) || !text::contains_ci(b.text, pair.shared_term)) {
    throw ValidationError(ctx + ": shared term '" + pair.shared_term + "' missing from a fact text");
  }
  pairs_.push_back(std::move(pair));
  return pairs_.back();
}

void FactGraph::add_accumulator(std::string name, double initial_value, std::string unit) {
  for (const auto& a : accumulators_) {
    if (a.name == name) throw ValidationError("add_accumulator: duplicate accumulator '" + name + "'");
  }
  accumulators_.push_back(Accumulator{std::move(name), initial_value, std::move(unit), {}});
}

void FactGraph::add_delta(std::string_view name, int session, double value) {
  for (auto& a : accumulators_) {
    if (a.name == name) {
      auto pos = std::upper_bound(a.deltas.begin(), a.deltas.end(), session,
                                  [](int s, const AccumulatorDelta& d) { return s < d.session; });
      a.deltas.insert(pos, AccumulatorDelta{session, value});
      return;
    }
  }
  throw LookupError("unknown accumulator '" + std::string(name) + "'");
}

const Accumulator& FactGraph::accumulator(std::string_view name) const {
  for (const auto& a : accumulators_) {
    if (a.name == name) return a;
  }
  throw LookupError("unknown accumulator '" + std::string(name) + "'");
}

double FactGraph::gold_accumulator_value(std::string_view name, int session) const {
  const Accumulator& a = accumulator(name);
  double v = a.initial_value;
  for (const auto& d : a.deltas) {
    if (d.session <= session) v += d.value;
  }
  return v;
}

std::set<std::string> FactGraph::forbidden_keywords(int session) const {
  std::set<std::string> out;
  for (const auto& f : facts_) {
    if (f.superseded_at && *f.superseded_at < session) out.insert(f.superseded_keywords.begin(), f.superseded_keywords.end());
    if (f.invalidated_at && *f.invalidated_at < session) out.insert(f.keywords.begin(), f.keywords.end());
  }
  return out;
}

int FactGraph::probe_version_depth(const DependencyProbe& probe) const {
  int depth = 1;
  for (const auto& id : probe.required_fact_ids) {
    const Fact& f = fact(id);
    int chain = 0;
    for (const Fact* v : lineage(f.lineage_id)) {
      if (v->session_introduced <= probe.schedule_session) ++chain;
    }
    depth = std::max({depth, chain, f.version});
  }
  return depth;
}

int FactGraph::probe_session_span(const DependencyProbe& probe) const {
  int lo = 0, hi = 0;
  bool first = true;
  for (const auto& id : probe.required_fact_ids) {
    const int s = fact(id).session_introduced;
    if (first) {
      lo = hi = s;
      first = false;
    } else {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
  }
  return hi - lo;
}

void FactGraph::validate() const {
  for (std::size_t i = 0; i < facts_.size(); ++i) {
    const auto& f = facts_[i];
    const std::string ctx = "facts[" + std::to_string(i) + "] (" + f.fact_id + ")";
    if (f.version < 1) throw ValidationError(ctx + ": version < 1");
    if (f.session_introduced < 0) throw ValidationError(ctx + ": negative session");
  }
  for (const auto& [lid, idxs] : lineages_) {
    for (std::size_t k = 0; k < idxs.size(); ++k) {
      if (facts_[idxs[k]].version != static_cast<int>(k) + 1) {
        throw ValidationError("lineage " + lid + ": versions are not consecutive from 1");
      }
    }
  }
  for (std::size_t i = 0; i < probes_.size(); ++i) {
    const auto& p = probes_[i];
    const std::string ctx = "probes[" + std::to_string(i) + "] (" + p.probe_id + ")";
    if (p.required_fact_ids.empty()) throw ValidationError(ctx + ": no required facts");
    for (const auto& id : p.required_fact_ids) {
      if (!has_fact(id)) throw ValidationError(ctx + ": unknown fact '" + id + "'");
      if (fact(id).keywords.empty()) throw ValidationError(ctx + ": fact " + id + " has no keywords");
      if (fact(id).session_introduced > p.schedule_session) throw ValidationError(ctx + ": scheduled too early");
    }
    if ((p.probe_type == ProbeType::standalone) != (p.required_fact_ids.size() == 1)) {
      throw ValidationError(ctx + ": standalone iff single required fact");
    }
  }
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    const auto& p = pairs_[i];
    const std::string ctx = "pairs[" + std::to_string(i) + "] (" + p.pair_id + ")";
    if (!has_fact(p.fact_a) || !has_fact(p.fact_b)) throw ValidationError(ctx + ": unknown fact");
    if (fact(p.fact_a).domain == fact(p.fact_b).domain) throw ValidationError(ctx + ": same domain");
    if (!text::contains_ci(fact(p.fact_a).text, p.shared_term) || !text::contains_ci(fact(p.fact_b).text, p.shared_term)) {
      throw ValidationError(ctx + ": shared term missing");
    }
  }
  for (const auto& a : accumulators_) {
    for (std::size_t k = 1; k < a.deltas.size(); ++k) {
      if (a.deltas[k].session < a.deltas[k - 1].session) {
        throw ValidationError("accumulator " + a.name + ": deltas not sorted by session");
      }
    }
  }
}

Json FactGraph::to_json() const {
  Json facts = Json::array();
  for (const auto& f : facts_) {
    facts.push_back({{"fact_id", f.fact_id},
                     {"lineage_id", f.lineage_id},
                     {"version", f.version},
                     {"text", f.text},
                     {"keywords", f.keywords},
                     {"domain", f.domain},
                     {"session_introduced", f.session_introduced},
                     {"valid", f.valid},
                     {"superseded_at", detail::optional_to_json(f.superseded_at)},
                     {"superseded_keywords", f.superseded_keywords},
                     {"invalidated_at", detail::optional_to_json(f.invalidated_at)}});
  }
  Json probes = Json::array();
  for (const auto& p : probes_) {
    probes.push_back({{"probe_id", p.probe_id},
                      {"question", p.question},
                      {"required_fact_ids", p.required_fact_ids},
                      {"probe_type", to_string(p.probe_type)},
                      {"schedule_session", p.schedule_session},
                      {"eval_keywords", p.eval_keywords},
                      {"forbidden_keywords", p.forbidden_keywords}});
  }
  Json pairs = Json::array();
  for (const auto& p : pairs_) {
    pairs.push_back({{"pair_id", p.pair_id},
                     {"fact_a", p.fact_a},
                     {"fact_b", p.fact_b},
                     {"shared_term", p.shared_term},
                     {"injected_session", p.injected_session}});
  }
  Json accs = Json::array();
  for (const auto& a : accumulators_) {
    Json deltas = Json::array();
    for (const auto& d : a.deltas) deltas.push_back({{"session", d.session}, {"value", d.value}});
    accs.push_back({{"name", a.name}, {"initial_value", a.initial_value}, {"unit", a.unit}, {"deltas", deltas}});
  }
  return Json{{"schema_version", kGraphSchemaVersion},
              {"facts", facts},
              {"probes", probes},
              {"pairs", pairs},
              {"accumulators", accs}};
}

FactGraph FactGraph::from_json(const Json& j) {
  using detail::get;
  const std::string root = "graph";
  const int version = get<int>(j, "schema_version", root);
  if (version != kGraphSchemaVersion) {
    throw ParseError(root + ": unsupported schema_version " + std::to_string(version));
  }
  FactGraph g;
  const auto& facts = detail::array_field(j, "facts", root);
  for (std::size_t i = 0; i < facts.size(); ++i) {
    const std::string ctx = "facts[" + std::to_string(i) + "]";
    const auto& fj = facts[i];
    Fact f;
    f.fact_id = get<std::string>(fj, "fact_id", ctx);
    f.lineage_id = get<std::string>(fj, "lineage_id", ctx);
    f.version = get<int>(fj, "version", ctx);
    f.text = get<std::string>(fj, "text", ctx);
    f.keywords = get<std::vector<std::string>>(fj, "keywords", ctx);
    f.domain = get<std::string>(fj, "domain", ctx);
    f.session_introduced = get<int>(fj, "session_introduced", ctx);
    f.valid = get<bool>(fj, "valid", ctx);
    f.superseded_at = detail::get_optional<int>(fj, "superseded_at", ctx);
    f.superseded_keywords = get<std::vector<std::string>>(fj, "superseded_keywords", ctx);
    f.invalidated_at = detail::get_optional<int>(fj, "invalidated_at", ctx);
    if (g.fact_index_.count(f.fact_id) != 0) throw ParseError(ctx + ": duplicate fact id '" + f.fact_id + "'");
    g.facts_.push_back(std::move(f));
    g.index_fact(g.facts_.size() - 1);
  }
  g.next_fact_ = g.facts_.size() + 1;

  const auto& probes = detail::array_field(j, "probes", root);
  for (std::size_t i = 0; i < probes.size(); ++i) {
    const std::string ctx = "probes[" + std::to_string(i) + "]";
    const auto& pj = probes[i];
    DependencyProbe p;
    p.probe_id = get<std::string>(pj, "probe_id", ctx);
    p.question = get<std::string>(pj, "question", ctx);
    p.required_fact_ids = get<std::vector<std::string>>(pj, "required_fact_ids", ctx);
    try {
      p.probe_type = probe_type_from_string(get<std::string>(pj, "probe_type", ctx));
    } catch (const ParseError& e) {
      throw ParseError(ctx + ": " + e.what());
    }
    p.schedule_session = get<int>(pj, "schedule_session", ctx);
    p.eval_keywords = get<std::vector<std::string>>(pj, "eval_keywords", ctx);
    p.forbidden_keywords = get<std::vector<std::string>>(pj, "forbidden_keywords", ctx);
    if (g.probe_index_.count(p.probe_id) != 0) throw ParseError(ctx + ": duplicate probe id");
    g.probes_.push_back(std::move(p));
    g.probe_index_.emplace(g.probes_.back().probe_id, g.probes_.size() - 1);
  }

  const auto& pairs = detail::array_field(j, "pairs", root);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::string ctx = "pairs[" + std::to_string(i) + "]";
    const auto& pj = pairs[i];
    g.pairs_.push_back(InterferencePair{get<std::string>(pj, "pair_id", ctx), get<std::string>(pj, "fact_a", ctx),
                                        get<std::string>(pj, "fact_b", ctx), get<std::string>(pj, "shared_term", ctx),
                                        get<int>(pj, "injected_session", ctx)});
  }

  const auto& accs = detail::array_field(j, "accumulators", root);
  for (std::size_t i = 0; i < accs.size(); ++i) {
    const std::string ctx = "accumulators[" + std::to_string(i) + "]";
    const auto& aj = accs[i];
    Accumulator a;
    a.name = get<std::string>(aj, "name", ctx);
    a.initial_value = get<double>(aj, "initial_value", ctx);
    a.unit = get<std::string>(aj, "unit", ctx);
    const auto& deltas = detail::array_field(aj, "deltas", ctx);
    for (std::size_t k = 0; k < deltas.size(); ++k) {
      const std::string dctx = ctx + ".deltas[" + std::to_string(k) + "]";
      a.deltas.push_back(AccumulatorDelta{get<int>(deltas[k], "session", dctx), get<double>(deltas[k], "value", dctx)});
    }
    g.accumulators_.push_back(std::move(a));
  }

  try {
    g.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return g;
}

std::string serialize_graph(const FactGraph& graph) { return graph.to_json().dump(2) + "\n"; }

FactGraph load_graph(std::string_view document) {
  Json j;
  try {
    j = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("graph document is not valid JSON: ") + e.what());
  }
  return FactGraph::from_json(j);
}

}  // namespace agetrack
