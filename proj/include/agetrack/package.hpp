#pragma once

#include "agetrack/fact_graph.hpp"
#include "agetrack/pressure.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agetrack {

inline constexpr int kPackageSchemaVersion = 1;

enum class EventKind { history_flush, recompact, budget_cut, workspace_flush };

std::string to_string(EventKind k);
EventKind event_kind_from_string(std::string_view s);

struct LifecycleEvent {
  EventKind kind = EventKind::history_flush;
  int session = 0;
  std::optional<int> new_budget;  // budget_cut only

  Json to_json() const;
  static LifecycleEvent from_json(const Json& j, const std::string& ctx);
  // "flush@5", "recompact@5", "budget_cut:50@5", "workspace_flush@6".
  static LifecycleEvent parse(std::string_view spec);
  std::string describe() const;

  friend bool operator==(const LifecycleEvent&, const LifecycleEvent&) = default;
};

enum class TaskKind { task, dependency, save };
enum class ProbeKind { recall, dependency, accumulator, interference, lag };

std::string to_string(TaskKind k);
std::string to_string(ProbeKind k);
TaskKind task_kind_from_string(std::string_view s);
ProbeKind probe_kind_from_string(std::string_view s);

struct TaskSpec {
  std::string task_id;
  TaskKind kind = TaskKind::task;
  std::string prompt;
  // D_t for dependency tasks: words the response is expected to carry over.
  std::vector<std::string> dependency_keywords;
  // Suggested notes/ topic for save tasks.
  std::string topic;

  friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

struct ProbeSpec {
  std::string probe_id;
  std::string question;
  std::vector<std::string> eval_keywords;
  std::vector<std::string> forbidden_keywords;
  ProbeKind kind = ProbeKind::recall;
  std::vector<std::string> required_fact_ids;
  // Values of confusable alternatives (interference probes).
  std::vector<std::string> confusable_keywords;
  std::optional<std::string> accumulator;
  // Session the probed fact came from (recall and lag probes).
  std::optional<int> source_session;

  friend bool operator==(const ProbeSpec&, const ProbeSpec&) = default;
};

struct SessionScript {
  int session_index = 0;
  std::string env_text;
  std::vector<TaskSpec> tasks;
  std::vector<ProbeSpec> probes;
  std::optional<LifecycleEvent> maintenance_event;

  friend bool operator==(const SessionScript&, const SessionScript&) = default;
};

struct RunPackage {
  std::string scenario_id;
  std::uint64_t seed = 0;
  int n_sessions = 0;
  PressureConfig pressure;
  FactGraph graph;
  std::vector<SessionScript> scripts;
  std::string system_prompt;

  // Throws ValidationError when a probe references a missing fact or the
  // session indices have gaps.
  void validate() const;

  Json to_json() const;
  static RunPackage from_json(const Json& j);

  friend bool operator==(const RunPackage&, const RunPackage&) = default;
};

std::string serialize_package(const RunPackage& pkg);
RunPackage load_package(std::string_view document);
RunPackage load_package_file(const std::string& path);
// SHA-256 of the serialized package.
std::string package_digest(const RunPackage& pkg);

// Scenario, seed, pressure and N; written next to generated packages.
Json package_manifest(const RunPackage& pkg);

}  // namespace agetrack
