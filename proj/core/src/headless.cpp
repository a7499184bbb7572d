#include "trustnav/headless.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "trustnav/protocol.hpp"

namespace trustnav {

RunManifest RunManifest::from_json(const nlohmann::json& doc) {
  RunManifest m;
  m.seed = doc.value("seed", std::uint64_t{0});
  m.condition = parse_condition(doc.value("condition", std::string{"informed-high"}));
  if (doc.contains("operator")) {
    const auto& op = doc["operator"];
    if (op.is_string()) {
      m.op.kind = parse_operator_kind(op.get<std::string>());
    } else {
      m.op.kind = parse_operator_kind(op.at("kind").get<std::string>());
      m.op.mix_probability = op.value("mix_probability", m.op.mix_probability);
      m.op.patience_factor = op.value("patience_factor", m.op.patience_factor);
    }
  }
  m.n_sessions = doc.value("n_sessions", 1);
  if (doc.contains("configs")) {
    const auto& c = doc["configs"];
    if (c.is_string()) {
      m.configs.push_back(c.get<std::string>());
    } else {
      m.configs = c.get<std::vector<std::string>>();
    }
  }
  if (doc.contains("session")) {
    const auto& s = doc["session"];
    m.session.groups = s.value("groups", m.session.groups);
    m.session.tasks_per_group = s.value("tasks_per_group", m.session.tasks_per_group);
    m.session.robot_color = s.value("robot_color", m.session.robot_color);
    m.session.training_round = s.value("training_round", m.session.training_round);
    m.session.cadence_ms = s.value("cadence_ms", m.session.cadence_ms);
    m.session.sensor_radius = s.value("sensor_radius", m.session.sensor_radius);
  }
  if (doc.contains("assessment")) {
    const auto& a = doc["assessment"];
    m.library.seed = a.value("seed", m.library.seed);
    m.library.assessment.n_rollouts = a.value("n", m.library.assessment.n_rollouts);
    m.library.assessment.r_min = a.value("r_min", m.library.assessment.r_min);
    m.library.assessment.mode = parse_oa_mode(a.value("oa_mode", std::string{"semantic"}));
    m.library.assessment.solver.gamma = a.value("gamma", m.library.assessment.solver.gamma);
  }
  m.out = doc.value("out", std::string{});
  if (m.n_sessions < 1) throw std::invalid_argument("n_sessions must be at least 1");
  return m;
}

nlohmann::json RunManifest::to_json() const {
  return {{"seed", seed},
          {"condition", condition_name(condition)},
          {"operator",
           {{"kind", to_string(op.kind)},
            {"mix_probability", op.mix_probability},
            {"patience_factor", op.patience_factor}}},
          {"n_sessions", n_sessions},
          {"configs", configs},
          {"session",
           {{"groups", session.groups},
            {"tasks_per_group", session.tasks_per_group},
            {"robot_color", session.robot_color},
            {"training_round", session.training_round},
            {"cadence_ms", session.cadence_ms},
            {"sensor_radius", session.sensor_radius}}},
          {"assessment",
           {{"seed", library.seed},
            {"n", library.assessment.n_rollouts},
            {"r_min", library.assessment.r_min},
            {"oa_mode", to_string(library.assessment.mode)},
            {"gamma", library.assessment.solver.gamma}}},
          {"out", out}};
}

std::vector<GridConfig> load_configs(const std::vector<std::string>& paths) {
  namespace fs = std::filesystem;
  std::vector<GridConfig> out;
  for (const auto& path : paths) {
    if (fs::is_directory(path)) {
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(path)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".json" || ext == ".txt")) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& f : files) out.push_back(load_grid_file(f.string()));
    } else if (fs::exists(path)) {
      out.push_back(load_grid_file(path));
    } else {
      throw GridError("missing config '" + path + "'");
    }
  }
  return out;
}

std::vector<TaskRecord> run_headless(const TaskLibrary& library, const RunManifest& manifest,
                                     EventSink& sink) {
  SessionOptions options = manifest.session;
  options.surveys = false;
  const std::int64_t cadence = options.cadence_ms;

  std::vector<TaskRecord> records;
  for (int i = 0; i < manifest.n_sessions; ++i) {
    const std::uint64_t seed = derive_seed(manifest.seed, static_cast<std::uint64_t>(i));
    char id[32];
    std::snprintf(id, sizeof id, "s%05d", i);
    ProtocolSession session(library, build_session_plan(library, manifest.condition, seed, id, options),
                            options, sink);
    SimulatedOperator op(manifest.op, library, derive_seed(seed, 0x0be7a70bULL));

    std::int64_t t = 0;
    auto messages = session.start(t);
    while (!session.complete()) {
      const auto state = std::find_if(messages.rbegin(), messages.rend(), [](const auto& m) {
        return m.at("type") == "state_update";
      });
      if (state == messages.rend()) {
        throw SessionError("headless driver lost track of the task state");
      }
      const auto decision = op.decide(*state);
      t += cadence;
      messages = decision ? session.handle(*decision, t) : session.tick(t);
      for (const auto& m : messages) {
        if (m.at("type") == "error") {
          throw SessionError("headless operator command rejected: " + m.dump());
        }
      }
    }
    const auto& done = session.session().records();
    records.insert(records.end(), done.begin(), done.end());
  }
  sink.flush();
  return records;
}

}  // namespace trustnav
