#include "agetrack/errors.hpp"
#include "agetrack/generators.hpp"
#include "agetrack/log.hpp"
#include "agetrack/metrics.hpp"
#include "agetrack/report.hpp"
#include "agetrack/runner.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace agetrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitAborted = 2;
constexpr int kExitReportInput = 3;

struct ReportInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PackageFlags {
  std::string scenario;
  std::uint64_t seed = 0;
  int sessions = 10;
  std::string preset = "medium";
  std::vector<std::string> dials;
  std::optional<int> maintenance_session;
  bool no_sentinels = false;

  void add(CLI::App* app, bool scenario_required) {
    auto* s = app->add_option("--scenario", scenario, "Scenario id (S1..S6)");
    if (scenario_required) s->required();
    app->add_option("--seed", seed, "Generator seed");
    app->add_option("--sessions", sessions, "Number of sessions N");
    app->add_option("--preset", preset, "Pressure preset: none, light, medium, heavy");
    app->add_option("--set", dials, "Dial override name=value (repeatable)");
    app->add_option("--maintenance-session", maintenance_session, "Session of the scenario's own maintenance event");
    app->add_flag("--no-sentinels", no_sentinels, "Omit accumulator sentinels from S2 environment text");
  }

  PressureConfig pressure() const {
    PressureConfig p = agetrack::preset(preset);
    for (const auto& d : dials) {
      const auto eq = d.find('=');
      if (eq == std::string::npos) throw ConfigError("dial override '" + d + "' must look like name=value");
      double v = 0.0;
      try {
        v = std::stod(d.substr(eq + 1));
      } catch (const std::exception&) {
        throw ConfigError("dial override '" + d + "' has a non-numeric value");
      }
      set_dial(p, d.substr(0, eq), v);
    }
    p.validate();
    return p;
  }

  GenerateOptions options() const {
    GenerateOptions o;
    o.maintenance_session = maintenance_session;
    o.emit_sentinels = !no_sentinels;
    return o;
  }

  RunPackage build() const { return generate(scenario, seed, sessions, pressure(), options()); }
};

struct EndpointFlags {
  std::string url;
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  double temperature = 0.0;
  std::optional<int> max_tokens;
  int max_attempts = 3;
  double backoff = 1.0;
  int timeout = 120;
  int max_context_words = 0;

  void add(CLI::App* app, const std::string& prefix) {
    app->add_option("--" + prefix + "endpoint", url, "OpenAI-compatible base URL, e.g. http://host:8000/v1");
    app->add_option("--" + prefix + "model", model, "Model name sent to the endpoint");
    if (!prefix.empty()) return;
    app->add_option("--api-key-env", api_key_env, "Environment variable holding the bearer token");
    app->add_option("--temperature", temperature, "Sampling temperature");
    app->add_option("--max-tokens", max_tokens, "Completion token cap");
    app->add_option("--max-attempts", max_attempts, "Attempts per request, including the first");
    app->add_option("--backoff", backoff, "Base backoff in seconds, doubled per retry");
    app->add_option("--timeout", timeout, "Request timeout in seconds");
    app->add_option("--max-context-words", max_context_words, "Pre-flight word cap per request (0 disables)");
  }

  EndpointConfig build(const EndpointFlags& shared) const {
    EndpointConfig e;
    e.base_url = url;
    e.model = model;
    e.api_key_env = shared.api_key_env;
    e.temperature = shared.temperature;
    e.max_tokens = shared.max_tokens;
    e.max_attempts = shared.max_attempts;
    e.backoff_base_s = shared.backoff;
    e.timeout_s = shared.timeout;
    e.max_context_words = shared.max_context_words;
    e.validate();
    return e;
  }
};

struct RunFlags {
  std::string config_file;
  std::string policy = "growing_history";
  int budget = 200;
  int retrieval_k = 5;
  std::string summarizer = "truncating";
  std::string agent = "oracle_reader";
  EndpointFlags endpoint;
  EndpointFlags summarizer_endpoint;
  std::string condition = "P1";
  std::vector<std::string> events;
  bool no_package_events = false;
  std::string controller;
  bool overlay = false;
  std::uint64_t run_seed = 0;
  bool attribution = false;
  bool p2_abstain = false;
  bool probes_in_history = false;
  std::map<std::string, CLI::Option*> opts;

  void add(CLI::App* app) {
    opts["config"] = app->add_option("--config", config_file, "Run configuration JSON; flags given alongside override it")
                         ->check(CLI::ExistingFile);
    opts["policy"] = app->add_option("--policy", policy,
                                     "no_memory, append_only, growing_history, lossy_compress, careful_compress, workspace");
    opts["budget"] = app->add_option("--budget", budget, "Memory word budget");
    opts["retrieval_k"] = app->add_option("--retrieval-k", retrieval_k, "Entries retrieved by append_only");
    opts["summarizer"] = app->add_option("--summarizer", summarizer, "truncating, extractive or remote");
    opts["agent"] = app->add_option("--agent", agent,
                                    "oracle_reader, amnesiac, recency_confused, noisy_reader:P or remote");
    endpoint.add(app, "");
    summarizer_endpoint.add(app, "summarizer-");
    opts["condition"] = app->add_option("--condition", condition,
                                        "P1, P2, P3, no_memory_floor or full_context_ceiling");
    opts["event"] = app->add_option("--event", events, "Lifecycle event, e.g. flush@5 or budget_cut:50@4 (repeatable)");
    opts["no_package_events"] =
        app->add_flag("--no-package-events", no_package_events, "Skip the package's own maintenance event");
    opts["controller"] = app->add_option("--controller", controller,
                                         "conservative, aggressive or theta_acc,theta_prec[:retroactive]");
    opts["overlay"] = app->add_flag("--overlay", overlay, "Enable the typed-state overlay from session 0");
    opts["run_seed"] = app->add_option("--run-seed", run_seed, "Seed for stochastic scripted agents");
    opts["attribution"] = app->add_flag("--attribution", attribution, "Score every probe under P1, P2 and P3");
    opts["p2_abstain"] = app->add_flag("--p2-abstain", p2_abstain, "Treat blob stores as non-retrievable for P2");
    opts["probes_in_history"] =
        app->add_flag("--probes-in-history", probes_in_history, "Append probe exchanges to the session history");
  }

  bool given(const std::string& name) const { return opts.at(name)->count() > 0; }

  RunConfig build() const {
    RunConfig c;
    const bool from_file = given("config");
    if (from_file) {
      try {
        c = RunConfig::from_json(Json::parse(read_text_file(config_file)));
      } catch (const Json::parse_error& e) {
        throw ConfigError(config_file + ": " + e.what());
      } catch (const ParseError& e) {
        throw ConfigError(config_file + ": " + e.what());
      }
    }
    auto use = [&](const char* name) { return !from_file || given(name); };
    if (use("policy")) c.policy.policy = policy_kind_from_string(policy);
    if (use("budget")) c.policy.word_budget = budget;
    if (use("retrieval_k")) c.policy.retrieval_k = retrieval_k;
    if (use("overlay")) c.policy.overlay_enabled = overlay;
    if (use("summarizer")) c.summarizer = summarizer_kind_from_string(summarizer);
    if (use("agent")) {
      if (agent == "remote") {
        if (endpoint.url.empty()) throw ConfigError("--agent remote needs --endpoint");
        c.agent = AgentBinding::remote(endpoint.build(endpoint));
      } else {
        c.agent = AgentBinding::scripted(agent);
      }
    }
    if (!summarizer_endpoint.url.empty()) {
      EndpointFlags s = summarizer_endpoint;
      if (s.model.empty()) s.model = endpoint.model;
      c.summarizer_endpoint = s.build(endpoint);
    } else if (c.summarizer == SummarizerKind::remote && !c.summarizer_endpoint && !endpoint.url.empty()) {
      c.summarizer_endpoint = endpoint.build(endpoint);
    }
    if (use("condition")) c.condition = probe_condition_from_string(condition);
    if (use("event")) {
      c.events.clear();
      for (const auto& e : events) c.events.push_back(LifecycleEvent::parse(e));
    }
    if (use("no_package_events")) c.package_events = !no_package_events;
    if (use("controller")) {
      if (controller.empty()) {
        c.controller.reset();
      } else {
        c.controller = ControllerConfig::parse(controller);
      }
    }
    if (use("run_seed")) c.run_seed = run_seed;
    if (use("attribution")) c.attribution = attribution;
    if (use("p2_abstain")) c.p2_abstain = p2_abstain;
    if (use("probes_in_history")) c.probes_in_history = probes_in_history;
    c.validate();
    return c;
  }
};

std::string command_line(int argc, char** argv) {
  std::string out;
  for (int i = 0; i < argc; ++i) {
    if (i > 0) out += ' ';
    out += i == 0 ? std::string("agetrack") : std::string(argv[i]);
  }
  return out;
}

std::string optional_text(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string("null");
}

int cmd_generate(const PackageFlags& flags, const std::string& out_dir, bool force, const std::string& command) {
  if (flags.sessions < 1) throw ConfigError("--sessions must be >= 1");
  const fs::path dir(out_dir);
  if (!force && fs::exists(dir / "package.json")) {
    throw ConfigError((dir / "package.json").string() + " exists; pass --force to overwrite");
  }
  const auto pkg = flags.build();
  Json manifest = package_manifest(pkg);
  manifest["package_digest"] = package_digest(pkg);
  manifest["tool_version"] = tool_version();
  manifest["command"] = command;
  write_text_file(dir / "package.json", serialize_package(pkg));
  write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");
  std::cout << manifest.dump(2) << '\n';
  return kExitOk;
}

int cmd_run(const std::string& package_path, const PackageFlags& pflags, const RunFlags& rflags,
            const std::string& out_dir, bool force, const std::string& command) {
  if (package_path.empty() && pflags.scenario.empty()) throw ConfigError("run needs --package or --scenario");
  if (!package_path.empty() && !pflags.scenario.empty()) throw ConfigError("give --package or --scenario, not both");
  const auto config = rflags.build();
  const fs::path dir(out_dir);
  if (!force && run_dir_occupied(dir)) throw ConfigError(dir.string() + " already holds a run; pass --force");
  RunPackage pkg;
  if (!package_path.empty()) {
    try {
      pkg = load_package_file(package_path);
    } catch (const ParseError& e) {
      throw ConfigError(e.what());
    }
  } else {
    if (pflags.sessions < 1) throw ConfigError("--sessions must be >= 1");
    pkg = pflags.build();
  }
  const auto outcome = run_to_dir(pkg, config, dir, command);
  const auto& r = outcome.result;
  std::cout << "run " << r.run_id << " " << r.scenario_id << " sessions " << r.sessions.size() << "/" << r.n_sessions
            << " status " << outcome.manifest.status << '\n';
  for (const char* m : {"keyword_m", "recall_rate", "probe_accuracy", "summarization_fidelity"}) {
    auto it = outcome.metrics.stats.find(m);
    if (it != outcome.metrics.stats.end()) {
      std::cout << "  " << m << " final " << format_number(it->second.final_value) << " mean "
                << format_number(it->second.mean) << '\n';
    }
  }
  std::cout << "  interference_resistance " << optional_text(outcome.metrics.interference_resistance) << '\n';
  if (outcome.metrics.accumulator) {
    std::cout << "  accumulator mean_error " << format_number(outcome.metrics.accumulator->mean_error) << '\n';
  }
  std::cout << "  outputs " << dir.string() << '\n';
  if (!r.complete) {
    std::cerr << "run aborted: " << r.error << '\n';
    return kExitAborted;
  }
  return kExitOk;
}

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& specs) {
  std::vector<std::uint64_t> out;
  for (const auto& spec : specs) {
    std::stringstream ss(spec);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        out.push_back(std::stoull(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        throw ConfigError("seed '" + item + "' is not a non-negative integer");
      }
    }
  }
  return out;
}

int cmd_sweep(const PackageFlags& pflags, const RunFlags& rflags, const std::vector<std::string>& axes,
              const std::vector<std::string>& seeds, int jobs, const std::string& out_dir, bool force,
              const std::string& command) {
  SweepPlan plan;
  plan.scenario_id = pflags.scenario;
  plan.n_sessions = pflags.sessions;
  plan.base = pflags.pressure();
  for (const auto& a : axes) plan.axes.push_back(SweepAxis::parse(a));
  plan.seeds = parse_seeds(seeds);
  plan.config = rflags.build();
  plan.jobs = jobs;
  plan.validate();
  const fs::path dir(out_dir);
  if (!force && fs::exists(dir / "sweep.json")) throw ConfigError(dir.string() + " already holds a sweep; pass --force");
  const auto result = run_sweep(plan, dir, command);
  std::cout << aggregate_table(result.aggregate);
  std::size_t failed = 0;
  for (const auto& c : result.cells) failed += c.ok ? 0 : 1;
  std::cout << result.cells.size() << " cells, " << failed << " failed; outputs " << dir.string() << '\n';
  return failed == 0 ? kExitOk : kExitAborted;
}

void report_run(const fs::path& dir, const fs::path& out) {
  LoadedRun run;
  try {
    run = load_run_dir(dir);
  } catch (const std::exception& e) {
    throw ReportInputError(e.what());
  }
  if (!run.result.complete) throw ReportInputError(dir.string() + " holds an aborted run");
  write_curve_files(out, run.metrics);
  const auto rows = attribution_rows(run.result);
  write_text_file(out / "curve_stats.csv", curve_stats_csv(run.metrics));
  write_text_file(out / "attribution.csv", attribution_csv(rows));
  std::cout << "run " << run.result.run_id << " (" << run.result.scenario_id << ")\n\n"
            << curve_stats_table(run.metrics) << '\n'
            << attribution_table(rows);
}

void report_sweep(const fs::path& dir, const fs::path& out) {
  Json sweep;
  Json aggregate;
  try {
    sweep = Json::parse(read_text_file(dir / "sweep.json"));
    aggregate = Json::parse(read_text_file(dir / "aggregate.json"));
  } catch (const std::exception& e) {
    throw ReportInputError(e.what());
  }
  std::vector<std::pair<std::string, std::optional<AttributionProfile>>> rows;
  std::size_t loaded = 0;
  for (const auto& cell : sweep.at("cells")) {
    if (!cell.at("ok").get<bool>()) continue;
    const auto rel = cell.at("dir").get<std::string>();
    LoadedRun run;
    try {
      run = load_run_dir(dir / rel);
    } catch (const std::exception& e) {
      throw ReportInputError(e.what());
    }
    write_curve_files(out / rel, run.metrics);
    write_text_file(out / rel / "curve_stats.csv", curve_stats_csv(run.metrics));
    rows.emplace_back(rel, run.metrics.attribution);
    ++loaded;
  }
  if (loaded == 0) throw ReportInputError(dir.string() + " has no completed sweep cells");
  write_text_file(out / "attribution.csv", attribution_csv(rows));
  std::cout << aggregate_table(aggregate) << '\n' << attribution_table(rows);
}

int cmd_report(const std::string& in_dir, const std::string& control_dir, const std::string& event_spec,
               const std::string& metric, int window, const std::string& out_dir) {
  const fs::path dir(in_dir);
  if (!fs::is_directory(dir) || fs::is_empty(dir)) throw ReportInputError(in_dir + " is missing or empty");
  const fs::path out = out_dir.empty() ? dir / "report" : fs::path(out_dir);
  if (!control_dir.empty()) {
    LoadedRun shock;
    LoadedRun control;
    try {
      shock = load_run_dir(dir);
      control = load_run_dir(control_dir);
    } catch (const std::exception& e) {
      throw ReportInputError(e.what());
    }
    LifecycleEvent event;
    if (!event_spec.empty()) {
      event = LifecycleEvent::parse(event_spec);
    } else if (!shock.result.config.events.empty()) {
      event = shock.result.config.events.front();
    } else {
      throw ReportInputError("shock run has no configured event; pass --event");
    }
    ShockReport report;
    try {
      report = shock_report(shock.result, control.result, shock.package, event, metric, window);
    } catch (const ConfigError& e) {
      throw ReportInputError(e.what());
    }
    write_text_file(out / "shock.json", report.to_json().dump(2) + "\n");
    std::cout << shock_table(report);
    return kExitOk;
  }
  if (fs::exists(dir / "sweep.json")) {
    report_sweep(dir, out);
  } else if (fs::exists(dir / "trace.jsonl")) {
    report_run(dir, out);
  } else {
    throw ReportInputError(in_dir + " holds neither a run nor a sweep");
  }
  std::cout << "\nreport files in " << out.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"agetrack: multi-session agent aging harness"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log info messages");
  const std::string command = command_line(argc, argv);

  auto* gen = app.add_subcommand("generate", "Generate a run package");
  PackageFlags gen_flags;
  std::string gen_out;
  bool gen_force = false;
  gen->add_option("scenario", gen_flags.scenario, "Scenario id (S1..S6)")->required();
  gen->add_option("--seed", gen_flags.seed, "Generator seed");
  gen->add_option("--sessions", gen_flags.sessions, "Number of sessions N");
  gen->add_option("--preset", gen_flags.preset, "Pressure preset: none, light, medium, heavy");
  gen->add_option("--set", gen_flags.dials, "Dial override name=value (repeatable)");
  gen->add_option("--maintenance-session", gen_flags.maintenance_session,
                  "Session of the scenario's own maintenance event");
  gen->add_flag("--no-sentinels", gen_flags.no_sentinels, "Omit accumulator sentinels from S2 environment text");
  gen->add_option("--out", gen_out, "Output directory")->required();
  gen->add_flag("--force", gen_force, "Overwrite an existing package");

  auto* runc = app.add_subcommand("run", "Run a package and write its trace, metrics and summary");
  std::string run_package;
  PackageFlags run_pkg_flags;
  RunFlags run_flags;
  std::string run_out;
  bool run_force = false;
  runc->add_option("--package", run_package, "Package file from `generate`");
  run_pkg_flags.add(runc, false);
  run_flags.add(runc);
  runc->add_option("--out", run_out, "Output directory")->required();
  runc->add_flag("--force", run_force, "Overwrite an existing run directory");

  auto* sweep = app.add_subcommand("sweep", "Run a dial grid across seeds and aggregate");
  PackageFlags sweep_pkg_flags;
  RunFlags sweep_flags;
  std::vector<std::string> sweep_axes;
  std::vector<std::string> sweep_seeds;
  int sweep_jobs = 0;
  std::string sweep_out;
  bool sweep_force = false;
  sweep_pkg_flags.add(sweep, true);
  sweep_flags.add(sweep);
  sweep->add_option("--dial", sweep_axes, "Axis name=v1,v2,... (repeatable; cartesian product)");
  sweep->add_option("--seeds", sweep_seeds, "Seeds, comma separated")->required();
  sweep->add_option("--jobs", sweep_jobs, "Parallel cells (0 = available workers)");
  sweep->add_option("--out", sweep_out, "Output directory")->required();
  sweep->add_flag("--force", sweep_force, "Overwrite an existing sweep");

  auto* rep = app.add_subcommand("report", "Emit curve data and tables for a run or sweep directory");
  std::string rep_dir;
  std::string rep_control;
  std::string rep_event;
  std::string rep_metric = "recall_rate";
  int rep_window = 2;
  std::string rep_out;
  rep->add_option("dir", rep_dir, "Run or sweep directory (the shock run when --control is given)")->required();
  rep->add_option("--control", rep_control, "Control run directory for a shock report");
  rep->add_option("--event", rep_event, "Shock event; defaults to the shock run's first configured event");
  rep->add_option("--metric", rep_metric, "Curve compared by the shock report");
  rep->add_option("--window", rep_window, "Window width in sessions");
  rep->add_option("--out", rep_out, "Report directory (default <dir>/report)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }
  if (verbose) log::set_level(log::Level::info);

  try {
    if (gen->parsed()) return cmd_generate(gen_flags, gen_out, gen_force, command);
    if (runc->parsed()) return cmd_run(run_package, run_pkg_flags, run_flags, run_out, run_force, command);
    if (sweep->parsed()) {
      return cmd_sweep(sweep_pkg_flags, sweep_flags, sweep_axes, sweep_seeds, sweep_jobs, sweep_out, sweep_force,
                       command);
    }
    if (rep->parsed()) return cmd_report(rep_dir, rep_control, rep_event, rep_metric, rep_window, rep_out);
  } catch (const ReportInputError& e) {
    std::cerr << "agetrack report: " << e.what() << '\n';
    return kExitReportInput;
  } catch (const BackendError& e) {
    std::cerr << "agetrack: backend failure: " << e.what() << '\n';
    return kExitAborted;
  } catch (const std::exception& e) {
    std::cerr << "agetrack: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
