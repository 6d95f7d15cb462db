#include "agetrack/package.hpp"

#include "agetrack/digest.hpp"
#include "agetrack/errors.hpp"
#include "agetrack/text.hpp"
#include "json_fields.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace agetrack {

std::string to_string(EventKind k) {
  switch (k) {
    case EventKind::history_flush:
      return "history_flush";
    case EventKind::recompact:
      return "recompact";
    case EventKind::budget_cut:
      return "budget_cut";
    case EventKind::workspace_flush:
      return "workspace_flush";
  }
  return "history_flush";
}

EventKind event_kind_from_string(std::string_view s) {
  if (s == "history_flush" || s == "flush") return EventKind::history_flush;
  if (s == "recompact") return EventKind::recompact;
  if (s == "budget_cut") return EventKind::budget_cut;
  if (s == "workspace_flush") return EventKind::workspace_flush;
  throw ConfigError("unknown lifecycle event '" + std::string(s) + "'");
}

namespace {

int parse_int(std::string_view s, std::string_view what) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ConfigError("bad " + std::string(what) + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace

LifecycleEvent LifecycleEvent::parse(std::string_view spec) {
  const auto at = spec.rfind('@');
  if (at == std::string_view::npos) throw ConfigError("event '" + std::string(spec) + "' lacks '@<session>'");
  std::string_view head = spec.substr(0, at);
  LifecycleEvent e;
  e.session = parse_int(spec.substr(at + 1), "event session");
  if (e.session < 0) throw ConfigError("event session must be >= 0");
  const auto colon = head.find(':');
  e.kind = event_kind_from_string(head.substr(0, colon));
  if (e.kind == EventKind::budget_cut) {
    if (colon == std::string_view::npos) throw ConfigError("budget_cut needs a budget, e.g. budget_cut:50@5");
    e.new_budget = parse_int(head.substr(colon + 1), "budget");
    if (*e.new_budget < 1) throw ConfigError("budget_cut budget must be >= 1");
  } else if (colon != std::string_view::npos) {
    throw ConfigError("event '" + std::string(spec) + "' takes no argument");
  }
  return e;
}

std::string LifecycleEvent::describe() const {
  std::string s = to_string(kind);
  if (new_budget) s += ":" + std::to_string(*new_budget);
  return s + "@" + std::to_string(session);
}

Json LifecycleEvent::to_json() const {
  return {{"kind", to_string(kind)}, {"session", session}, {"new_budget", detail::optional_to_json(new_budget)}};
}

LifecycleEvent LifecycleEvent::from_json(const Json& j, const std::string& ctx) {
  LifecycleEvent e;
  try {
    e.kind = event_kind_from_string(detail::get<std::string>(j, "kind", ctx));
  } catch (const ConfigError& err) {
    throw ParseError(ctx + ": " + err.what());
  }
  e.session = detail::get<int>(j, "session", ctx);
  e.new_budget = detail::get_optional<int>(j, "new_budget", ctx);
  if (e.kind == EventKind::budget_cut && !e.new_budget) throw ParseError(ctx + ": budget_cut without new_budget");
  return e;
}

std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::task:
      return "task";
    case TaskKind::dependency:
      return "dependency";
    case TaskKind::save:
      return "save";
  }
  return "task";
}

std::string to_string(ProbeKind k) {
  switch (k) {
    case ProbeKind::recall:
      return "recall";
    case ProbeKind::dependency:
      return "dependency";
    case ProbeKind::accumulator:
      return "accumulator";
    case ProbeKind::interference:
      return "interference";
    case ProbeKind::lag:
      return "lag";
  }
  return "recall";
}

TaskKind task_kind_from_string(std::string_view s) {
  if (s == "task") return TaskKind::task;
  if (s == "dependency") return TaskKind::dependency;
  if (s == "save") return TaskKind::save;
  throw ParseError("unknown task kind '" + std::string(s) + "'");
}

ProbeKind probe_kind_from_string(std::string_view s) {
  if (s == "recall") return ProbeKind::recall;
  if (s == "dependency") return ProbeKind::dependency;
  if (s == "accumulator") return ProbeKind::accumulator;
  if (s == "interference") return ProbeKind::interference;
  if (s == "lag") return ProbeKind::lag;
  throw ParseError("unknown probe kind '" + std::string(s) + "'");
}

void RunPackage::validate() const {
  if (static_cast<int>(scripts.size()) != n_sessions) {
    throw ValidationError("package: " + std::to_string(scripts.size()) + " scripts for " +
                          std::to_string(n_sessions) + " sessions");
  }
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    const auto& s = scripts[i];
    if (s.session_index != static_cast<int>(i)) {
      throw ValidationError("scripts[" + std::to_string(i) + "]: session_index " + std::to_string(s.session_index) +
                            " breaks the 0..N-1 sequence");
    }
    for (const auto& p : s.probes) {
      for (const auto& id : p.required_fact_ids) {
        if (!graph.has_fact(id)) {
          throw ValidationError("scripts[" + std::to_string(i) + "] probe " + p.probe_id + ": unknown fact '" + id +
                                "'");
        }
      }
      if (p.eval_keywords.empty()) {
        throw ValidationError("scripts[" + std::to_string(i) + "] probe " + p.probe_id + ": no eval keywords");
      }
    }
    if (s.maintenance_event && (s.maintenance_event->session < 0 || s.maintenance_event->session >= n_sessions)) {
      throw ValidationError("scripts[" + std::to_string(i) + "]: maintenance event outside the run horizon");
    }
  }
  graph.validate();
}

Json RunPackage::to_json() const {
  Json scripts_j = Json::array();
  for (const auto& s : scripts) {
    Json tasks = Json::array();
    for (const auto& t : s.tasks) {
      tasks.push_back({{"task_id", t.task_id},
                       {"kind", to_string(t.kind)},
                       {"prompt", t.prompt},
                       {"dependency_keywords", t.dependency_keywords},
                       {"topic", t.topic}});
    }
    Json probes = Json::array();
    for (const auto& p : s.probes) {
      probes.push_back({{"probe_id", p.probe_id},
                        {"question", p.question},
                        {"eval_keywords", p.eval_keywords},
                        {"forbidden_keywords", p.forbidden_keywords},
                        {"kind", to_string(p.kind)},
                        {"required_fact_ids", p.required_fact_ids},
                        {"confusable_keywords", p.confusable_keywords},
                        {"accumulator", detail::optional_to_json(p.accumulator)},
                        {"source_session", detail::optional_to_json(p.source_session)}});
    }
    scripts_j.push_back({{"session_index", s.session_index},
                         {"env_text", s.env_text},
                         {"tasks", tasks},
                         {"probes", probes},
                         {"maintenance_event", s.maintenance_event ? s.maintenance_event->to_json() : Json(nullptr)}});
  }
  return Json{{"schema_version", kPackageSchemaVersion},
              {"scenario_id", scenario_id},
              {"seed", seed},
              {"n_sessions", n_sessions},
              {"pressure", pressure.to_json()},
              {"graph", graph.to_json()},
              {"scripts", scripts_j},
              {"system_prompt", system_prompt}};
}

RunPackage RunPackage::from_json(const Json& j) {
  using detail::get;
  const std::string root = "package";
  const int version = get<int>(j, "schema_version", root);
  if (version != kPackageSchemaVersion) {
    throw ParseError(root + ": unsupported schema_version " + std::to_string(version));
  }
  RunPackage pkg;
  pkg.scenario_id = get<std::string>(j, "scenario_id", root);
  pkg.seed = get<std::uint64_t>(j, "seed", root);
  pkg.n_sessions = get<int>(j, "n_sessions", root);
  pkg.pressure = PressureConfig::from_json(detail::field(j, "pressure", root));
  pkg.graph = FactGraph::from_json(detail::field(j, "graph", root));
  pkg.system_prompt = get<std::string>(j, "system_prompt", root);
  const auto& scripts = detail::array_field(j, "scripts", root);
  for (std::size_t i = 0; i < scripts.size(); ++i) {
    const std::string ctx = "scripts[" + std::to_string(i) + "]";
    const auto& sj = scripts[i];
    SessionScript s;
    s.session_index = get<int>(sj, "session_index", ctx);
    s.env_text = get<std::string>(sj, "env_text", ctx);
    const auto& tasks = detail::array_field(sj, "tasks", ctx);
    for (std::size_t k = 0; k < tasks.size(); ++k) {
      const std::string tctx = ctx + ".tasks[" + std::to_string(k) + "]";
      TaskSpec t;
      t.task_id = get<std::string>(tasks[k], "task_id", tctx);
      try {
        t.kind = task_kind_from_string(get<std::string>(tasks[k], "kind", tctx));
      } catch (const ParseError& e) {
        throw ParseError(tctx + ": " + e.what());
      }
      t.prompt = get<std::string>(tasks[k], "prompt", tctx);
      t.dependency_keywords = get<std::vector<std::string>>(tasks[k], "dependency_keywords", tctx);
      t.topic = detail::get_or<std::string>(tasks[k], "topic", "", tctx);
      s.tasks.push_back(std::move(t));
    }
    const auto& probes = detail::array_field(sj, "probes", ctx);
    for (std::size_t k = 0; k < probes.size(); ++k) {
      const std::string pctx = ctx + ".probes[" + std::to_string(k) + "]";
      const auto& pj = probes[k];
      ProbeSpec p;
      p.probe_id = get<std::string>(pj, "probe_id", pctx);
      p.question = get<std::string>(pj, "question", pctx);
      p.eval_keywords = get<std::vector<std::string>>(pj, "eval_keywords", pctx);
      p.forbidden_keywords = get<std::vector<std::string>>(pj, "forbidden_keywords", pctx);
      try {
        p.kind = probe_kind_from_string(get<std::string>(pj, "kind", pctx));
      } catch (const ParseError& e) {
        throw ParseError(pctx + ": " + e.what());
      }
      p.required_fact_ids = get<std::vector<std::string>>(pj, "required_fact_ids", pctx);
      p.confusable_keywords = get<std::vector<std::string>>(pj, "confusable_keywords", pctx);
      p.accumulator = detail::get_optional<std::string>(pj, "accumulator", pctx);
      p.source_session = detail::get_optional<int>(pj, "source_session", pctx);
      s.probes.push_back(std::move(p));
    }
    auto ev = sj.find("maintenance_event");
    if (ev != sj.end() && !ev->is_null()) s.maintenance_event = LifecycleEvent::from_json(*ev, ctx + ".maintenance_event");
    pkg.scripts.push_back(std::move(s));
  }
  try {
    pkg.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return pkg;
}

std::string serialize_package(const RunPackage& pkg) { return pkg.to_json().dump(2) + "\n"; }

RunPackage load_package(std::string_view document) {
  Json j;
  try {
    j = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("package document is not valid JSON: ") + e.what());
  }
  return RunPackage::from_json(j);
}

RunPackage load_package_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open package '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_package(ss.str());
}

std::string package_digest(const RunPackage& pkg) { return sha256_hex(serialize_package(pkg)); }

Json package_manifest(const RunPackage& pkg) {
  return {{"scenario_id", pkg.scenario_id},
          {"seed", pkg.seed},
          {"n_sessions", pkg.n_sessions},
          {"pressure", pkg.pressure.to_json()},
          {"package_digest", package_digest(pkg)},
          {"n_facts", pkg.graph.facts().size()},
          {"n_probes_registered", pkg.graph.probes().size()},
          {"n_pairs", pkg.graph.pairs().size()}};
}

}  // namespace agetrack
