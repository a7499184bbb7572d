#include "commands.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <trustnav/analytics.hpp>
#include <trustnav/csv.hpp>
#include <trustnav/event_log.hpp>

namespace trustnav::cli {

namespace fs = std::filesystem;

namespace {

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, std::string_view text) { write_file(path.string(), text); }

std::vector<fs::path> expand_logs(const std::vector<std::string>& paths) {
  std::vector<fs::path> files;
  for (const auto& p : paths) {
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (const auto& e : fs::directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      files.emplace_back(p);
    } else {
      throw std::runtime_error("log '" + p + "' does not exist");
    }
  }
  return files;
}

std::string tasks_csv(const std::vector<TaskRecord>& records) {
  std::vector<csv::Row> rows{{"session", "group", "task", "training", "config_id", "condition",
                              "presence", "report_source", "report_label", "outcome", "total_time",
                              "a_robot", "a_participant", "control_proportion", "mode_switches",
                              "score"}};
  for (const auto& r : records) {
    const auto cp = control_proportion(r);
    rows.push_back({r.session, std::to_string(r.group), std::to_string(r.task),
                    r.training ? "true" : "false", r.config_id, condition_name(r.condition),
                    std::string(to_string(r.presence)), std::string(to_string(r.report_shown.source)),
                    r.report_shown.label ? std::string(to_string(*r.report_shown.label)) : "",
                    std::string(to_string(r.outcome)), csv::number(r.total_time),
                    std::to_string(cp.a_robot), std::to_string(cp.a_participant),
                    cp.value ? csv::number(*cp.value) : "", std::to_string(r.mode_switches.size()),
                    csv::number(r.score)});
  }
  return csv::format(rows);
}

}  // namespace

int cmd_gen(const GenOptions& o, std::ostream& out, std::ostream& err) {
  if (o.count < 1) {
    err << "error: --n must be at least 1\n";
    return 2;
  }
  const auto configs = generate_configs(o.seed, o.count, o.params);
  fs::create_directories(o.out);
  for (const auto& c : configs) {
    const fs::path path = fs::path(o.out) / (c.id() + ".json");
    write_text(path, to_json(c).dump(2) + "\n");
    out << path.string() << "\n";
  }
  return 0;
}

int cmd_solve(const SolveOptions& o, std::ostream& out, std::ostream& err) {
  const GridConfig config = load_grid_file(o.config);
  const Solution solution = solve_value_iteration(config, o.solver);
  const std::string doc = to_json(solution, o.solver).dump(2) + "\n";
  if (o.out.empty()) {
    out << doc;
  } else {
    write_text(o.out, doc);
    err << "solved " << config.id() << " in " << solution.iterations << " sweeps -> " << o.out << "\n";
  }
  return 0;
}

nlohmann::json assess_report(const GridConfig& config, const AssessOptions& o) {
  const Solution solution = solve_value_iteration(config, o.params.solver);
  // Salted like TaskLibrary::build so both agree on a config's label.
  const OutcomeAssessment a =
      assess(config, solution.policy, derive_seed(o.seed, hash_id(config.id())), o.params);
  nlohmann::json report = to_json(a);
  report["statement"] = render_statement("red", a.label).text;
  report["low_sample_count"] = a.n_samples < kLowSampleThreshold;
  return report;
}

int cmd_assess(const AssessOptions& o, std::ostream& out, std::ostream& err) {
  if (o.params.n_rollouts < 1) {
    err << "error: --n must be at least 1\n";
    return 2;
  }
  const GridConfig config = load_grid_file(o.config);
  const auto report = assess_report(config, o);
  if (report["low_sample_count"].get<bool>()) {
    err << "warning: only " << o.params.n_rollouts << " rollouts; the assessment is unreliable below "
        << kLowSampleThreshold << "\n";
  }
  out << report.dump(2) << "\n";
  return 0;
}

int cmd_run_headless(const HeadlessOptions& o, std::ostream& out, std::ostream& err) {
  RunManifest manifest = RunManifest::from_json(read_json_file(o.manifest));
  // Relative paths inside the manifest are resolved against its directory.
  const fs::path base = fs::path(o.manifest).parent_path();
  if (!manifest.out.empty() && fs::path(manifest.out).is_relative()) {
    manifest.out = (base / manifest.out).lexically_normal().string();
  }
  if (o.seed) manifest.seed = *o.seed;
  if (o.condition) manifest.condition = parse_condition(*o.condition);
  if (o.op) manifest.op.kind = parse_operator_kind(*o.op);
  if (o.n_sessions) manifest.n_sessions = *o.n_sessions;
  if (o.out) manifest.out = *o.out;
  if (manifest.n_sessions < 1) {
    err << "error: n_sessions must be at least 1\n";
    return 2;
  }

  std::vector<std::string> config_paths;
  for (const auto& c : manifest.configs) {
    config_paths.push_back(fs::path(c).is_absolute() ? c : (base / c).lexically_normal().string());
  }
  const auto library = TaskLibrary::build(load_configs(config_paths), manifest.library);

  std::vector<TaskRecord> records;
  if (manifest.out.empty()) {
    StreamEventSink sink(out);
    records = run_headless(library, manifest, sink);
  } else {
    if (const auto parent = fs::path(manifest.out).parent_path(); !parent.empty()) {
      fs::create_directories(parent);
    }
    std::ofstream file(manifest.out, std::ios::binary | std::ios::trunc);
    if (!file) throw std::runtime_error("cannot write '" + manifest.out + "'");
    StreamEventSink sink(file);
    records = run_headless(library, manifest, sink);
  }

  int success = 0, failure = 0, aborted = 0;
  for (const auto& r : records) {
    if (r.outcome == TaskOutcome::Success) ++success;
    if (r.outcome == TaskOutcome::Failure) ++failure;
    if (r.outcome == TaskOutcome::Abort) ++aborted;
  }
  err << manifest.n_sessions << " sessions, " << records.size() << " tasks: " << success
      << " success, " << failure << " failure, " << aborted << " abort\n";
  return 0;
}

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  std::vector<Event> events;
  int skipped = 0;
  for (const auto& path : expand_logs(o.logs)) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
    auto result = read_event_log(in);
    skipped += result.skipped;
    events.insert(events.end(), std::make_move_iterator(result.events.begin()),
                  std::make_move_iterator(result.events.end()));
  }
  if (skipped > 0) err << "warning: skipped " << skipped << " schema-invalid log lines\n";

  const auto records = records_from_events(events);
  if (records.empty()) err << "warning: no completed tasks in the given logs\n";

  fs::create_directories(o.out);
  const fs::path dir(o.out);

  const auto summaries = aggregate_by_report(records);
  write_text(dir / "tasks.csv", tasks_csv(records));
  write_text(dir / "control_proportion_by_label.csv", summaries_csv(summaries));
  auto summary_json = nlohmann::json::array();
  for (const auto& s : summaries) summary_json.push_back(to_json(s));
  write_text(dir / "control_proportion_by_label.json", summary_json.dump(2) + "\n");

  nlohmann::json report = {{"events", events.size()},
                           {"skipped_lines", skipped},
                           {"tasks", records.size()},
                           {"control_proportion_by_label", summary_json},
                           {"contingency", nlohmann::json::object()}};
  for (Factor f : {Factor::Performance, Factor::ReportPresence, Factor::ReportSource}) {
    const std::string name(to_string(f));
    const auto table = outcome_contingency(records, f);
    write_text(dir / ("contingency_" + name + ".csv"), contingency_csv(table));
    nlohmann::json entry = to_json(table);
    try {
      const auto chi = chi_square(table);
      entry["chi_square"] = {{"statistic", chi.statistic}, {"dof", chi.dof}, {"p_value", chi.p_value}};
      entry["cramers_v"] = cramers_v(chi.statistic, table.n(), static_cast<int>(table.row_labels.size()),
                                     static_cast<int>(table.col_labels.size()));
    } catch (const AnalyticsError& e) {
      entry["chi_square"] = nullptr;
      entry["cramers_v"] = nullptr;
      entry["note"] = e.what();
    }
    write_text(dir / ("contingency_" + name + ".json"), entry.dump(2) + "\n");
    report["contingency"][name] = std::move(entry);
  }
  write_text(dir / "report.json", report.dump(2) + "\n");
  out << (dir / "report.json").string() << "\n";
  return 0;
}

}  // namespace trustnav::cli
