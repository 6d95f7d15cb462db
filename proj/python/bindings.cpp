#include "agetrack/errors.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/metrics.hpp"
#include "agetrack/report.hpp"
#include "agetrack/runner.hpp"
#include "agetrack/scoring.hpp"
#include "agetrack/sentinel.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace agetrack;

namespace {

// Documents cross the boundary as JSON text; the Python wrapper decodes them.

std::string generate_package(const std::string& scenario, std::uint64_t seed, int n_sessions,
                             const std::string& preset_name, const std::map<std::string, double>& dials,
                             std::optional<int> maintenance_session, bool emit_sentinels) {
  auto pressure = preset(preset_name);
  for (const auto& [name, value] : dials) set_dial(pressure, name, value);
  GenerateOptions opts;
  opts.maintenance_session = maintenance_session;
  opts.emit_sentinels = emit_sentinels;
  return serialize_package(generate(scenario, seed, n_sessions, pressure, opts));
}

std::string trace_jsonl(const RunResult& r) {
  std::ostringstream out;
  for (const auto& j : r.trace_records()) out << j.dump() << '\n';
  return out.str();
}

std::vector<Json> parse_jsonl(const std::string& text) {
  std::vector<Json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = Json::parse(line, nullptr, false);
    if (j.is_discarded()) throw ParseError("trace line is not JSON");
    out.push_back(std::move(j));
  }
  return out;
}

py::tuple run_package(const std::string& package_json, const std::string& config_json) {
  const auto pkg = load_package(package_json);
  const auto cfg = RunConfig::from_json(Json::parse(config_json));
  RunResult r;
  {
    py::gil_scoped_release release;
    r = run(pkg, cfg);
  }
  const auto metrics = compute_run_metrics(r, pkg);
  return py::make_tuple(trace_jsonl(r), run_summary(r, metrics).dump());
}

std::string metrics_from_trace(const std::string& package_json, const std::string& trace) {
  const auto pkg = load_package(package_json);
  const auto r = RunResult::from_trace(parse_jsonl(trace));
  return compute_run_metrics(r, pkg).to_json().dump();
}

std::string run_into_dir(const std::string& package_json, const std::string& config_json, const std::string& dir,
                         const std::string& command) {
  const auto pkg = load_package(package_json);
  const auto cfg = RunConfig::from_json(Json::parse(config_json));
  RunOutcome out;
  {
    py::gil_scoped_release release;
    out = run_to_dir(pkg, cfg, dir, command);
  }
  return run_summary(out.result, out.metrics).dump();
}

std::string attribution_json(double p1, double p2, double p3, bool abstained) {
  return attribution_profile(p1, p2, p3, abstained).to_json().dump();
}

py::list sentinel_effects(const std::string& text) {
  py::list out;
  for (const auto& e : parse_sentinels(text).effects) {
    out.append(py::make_tuple(e.kind == SentinelKind::init ? "init" : "delta", e.name, e.value));
  }
  return out;
}

}  // namespace

PYBIND11_MODULE(_agetrack, m) {
  m.doc() = "Memory aging harness core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<LookupError>(m, "LookupError", PyExc_KeyError);
  py::register_exception<BackendError>(m, "BackendError", PyExc_RuntimeError);

  m.def("version", &tool_version);
  m.def("scenario_ids", &scenario_ids);
  m.def("generate_package", &generate_package, py::arg("scenario"), py::arg("seed"), py::arg("n_sessions"),
        py::arg("preset") = "medium", py::arg("dials") = std::map<std::string, double>{},
        py::arg("maintenance_session") = std::nullopt, py::arg("emit_sentinels") = true);
  m.def("package_digest", [](const std::string& doc) { return package_digest(load_package(doc)); });
  m.def("run_package", &run_package, py::arg("package_json"), py::arg("config_json"));
  m.def("run_to_dir", &run_into_dir, py::arg("package_json"), py::arg("config_json"), py::arg("dir"),
        py::arg("command") = "python");
  m.def("metrics_from_trace", &metrics_from_trace, py::arg("package_json"), py::arg("trace_jsonl"));
  m.def("default_run_config", [] { return RunConfig{}.to_json().dump(); });

  m.def("half_life", &half_life, py::arg("curve"));
  m.def("ols_slope", &ols_slope, py::arg("curve"));
  m.def("window_delta", &window_delta, py::arg("curve"), py::arg("event_session"), py::arg("width") = 2);
  m.def("keyword_score", &keyword_score, py::arg("response"), py::arg("eval_keywords"),
        py::arg("forbidden_keywords") = std::vector<std::string>{});
  m.def("dep_recall", &dep_recall, py::arg("response"), py::arg("dependency_keywords"));
  m.def("last_number", &last_number, py::arg("response"));
  m.def("attribution_profile", &attribution_json, py::arg("p1"), py::arg("p2"), py::arg("p3"),
        py::arg("abstained") = false);
  m.def("parse_sentinels", &sentinel_effects, py::arg("text"));
}
