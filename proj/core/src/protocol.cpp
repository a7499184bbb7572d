#include "trustnav/protocol.hpp"

namespace trustnav {

namespace {

nlohmann::json pose_json(Pose p) { return nlohmann::json::array({p.x, p.y}); }

}  // namespace

ProtocolSession::ProtocolSession(const TaskLibrary& library, SessionPlan plan,
                                 SessionOptions options, EventSink& sink,
                                 SurveyInstrument instrument)
    : session_(library, std::move(plan), std::move(options), sink, std::move(instrument)) {}

bool ProtocolSession::autonomy_active() const noexcept {
  const LiveTask* task = session_.current_task();
  return !closed_ && task && task->running() && task->mode() == ControlMode::Automatic;
}

nlohmann::json ProtocolSession::error(std::string_view reason, const nlohmann::json& request) {
  nlohmann::json msg = {{"type", "error"}, {"reason", reason}};
  if (request.is_object() && request.contains("type")) msg["request"] = request["type"];
  return msg;
}

nlohmann::json ProtocolSession::state_update() const {
  const LiveTask* task = session_.current_task();
  if (!task) return {{"type", "state_update"}, {"status", "idle"}};
  const auto& config = task->config();
  auto visible = nlohmann::json::array();
  for (const auto& c : sensor_view(config, task->pose(), session_.options().sensor_radius)) {
    visible.push_back({{"x", c.pose.x}, {"y", c.pose.y}, {"cell", to_string(c.cell)}});
  }
  const auto& report = task->report();
  return {{"type", "state_update"},
          {"session", task->context().session},
          {"group", task->context().group},
          {"task", task->context().task},
          {"training", task->context().training},
          {"config_id", config.id()},
          {"width", config.width()},
          {"height", config.height()},
          {"goal", pose_json(config.goal())},
          {"pose", pose_json(task->pose())},
          {"visible_cells", std::move(visible)},
          {"sensor_radius", session_.options().sensor_radius},
          {"mode", to_string(task->mode())},
          {"score", task->score()},
          {"report_text", report.text},
          {"report_label", report.label ? nlohmann::json(to_string(*report.label)) : nlohmann::json(nullptr)},
          {"status", to_string(task->status())}};
}

void ProtocolSession::begin_task(std::int64_t t_ms) {
  LiveTask& task = session_.start_next_task(t_ms);
  explored_.clear();
  for (const auto& c : sensor_view(task.config(), task.pose(), session_.options().sensor_radius)) {
    explored_.insert(c.pose);
  }
}

nlohmann::json ProtocolSession::survey_request() const {
  return {{"type", "survey_request"},
          {"group", *session_.pending_survey()},
          {"items", session_.instrument().to_json()["items"]}};
}

nlohmann::json ProtocolSession::session_complete() const {
  return {{"type", "session_complete"}, {"tasks", session_.records().size()}};
}

ProtocolSession::Messages ProtocolSession::advance(std::int64_t t_ms) {
  switch (session_.phase()) {
    case Session::Phase::Survey:
      return {survey_request()};
    case Session::Phase::Ready:
      begin_task(t_ms);
      return {state_update()};
    case Session::Phase::Complete:
      return {session_complete()};
    case Session::Phase::Task:
      break;
  }
  return {state_update()};
}

ProtocolSession::Messages ProtocolSession::resume() const {
  switch (session_.phase()) {
    case Session::Phase::Survey:
      return {survey_request()};
    case Session::Phase::Complete:
      return {session_complete()};
    case Session::Phase::Ready:
    case Session::Phase::Task:
      break;
  }
  return {state_update()};
}

ProtocolSession::Messages ProtocolSession::after_transition(std::int64_t t_ms) {
  LiveTask* task = session_.current_task();
  for (const auto& c : sensor_view(task->config(), task->pose(), session_.options().sensor_radius)) {
    explored_.insert(c.pose);
  }
  if (task->running()) return {state_update()};

  Messages out{state_update()};
  const TaskRecord& record = session_.finish_task(t_ms);
  out.push_back({{"type", "task_end"},
                 {"group", record.group},
                 {"task", record.task},
                 {"config_id", record.config_id},
                 {"outcome", to_string(record.outcome)},
                 {"score", record.score},
                 {"total_time", record.total_time}});
  for (auto& m : advance(t_ms)) out.push_back(std::move(m));
  return out;
}

ProtocolSession::Messages ProtocolSession::start(std::int64_t t_ms) {
  if (session_.phase() != Session::Phase::Ready) return advance(t_ms);
  begin_task(t_ms);
  return {state_update()};
}

ProtocolSession::Messages ProtocolSession::handle_text(std::string_view text, std::int64_t t_ms) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return {error("malformed JSON", nullptr)};
  }
  return handle(msg, t_ms);
}

ProtocolSession::Messages ProtocolSession::handle(const nlohmann::json& msg, std::int64_t t_ms) {
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    return {error("message needs a string 'type'", msg)};
  }
  if (complete()) return {error("session complete", msg)};
  const auto type = msg["type"].get<std::string>();

  try {
    if (type == "survey_submit") {
      if (session_.phase() != Session::Phase::Survey) return {error("no survey pending", msg)};
      const int group = msg.value("group", *session_.pending_survey());
      std::vector<SurveyRating> ratings;
      for (const auto& r : msg.at("ratings")) {
        SurveyRating rating{r.at("id").get<std::string>(), std::nullopt};
        if (!r.at("rating").is_null()) rating.rating = r.at("rating").get<int>();
        ratings.push_back(std::move(rating));
      }
      session_.record_survey(group, std::move(ratings), t_ms);
      return advance(t_ms);
    }

    LiveTask* task = session_.current_task();
    if (session_.phase() != Session::Phase::Task || !task) return {error("no task in progress", msg)};

    if (type == "set_mode") {
      task->set_mode(parse_control_mode(msg.at("mode").get<std::string>()), t_ms);
      return {state_update()};
    }
    if (type == "move") {
      task->apply_operator_action(parse_action(msg.at("direction").get<std::string>()), t_ms);
      return after_transition(t_ms);
    }
    if (type == "abort_task") {
      task->abort(t_ms);
      return after_transition(t_ms);
    }
  } catch (const SessionError& e) {
    return {error(e.what(), msg)};
  } catch (const std::invalid_argument& e) {
    return {error(e.what(), msg)};
  } catch (const nlohmann::json::exception& e) {
    return {error(std::string("malformed message: ") + e.what(), msg)};
  }
  return {error("unknown message type '" + type + "'", msg)};
}

ProtocolSession::Messages ProtocolSession::tick(std::int64_t t_ms) {
  if (!autonomy_active()) return {};
  session_.current_task()->autonomy_tick(session_.autonomy_rng(), t_ms);
  return after_transition(t_ms);
}

ProtocolSession::Messages ProtocolSession::disconnect(std::int64_t t_ms) {
  Messages out;
  if (closed_) return out;
  LiveTask* task = session_.current_task();
  if (session_.phase() == Session::Phase::Task && task) {
    if (task->running()) task->abort(t_ms);
    const TaskRecord& record = session_.finish_task(t_ms);
    out.push_back({{"type", "task_end"},
                   {"group", record.group},
                   {"task", record.task},
                   {"config_id", record.config_id},
                   {"outcome", to_string(record.outcome)},
                   {"score", record.score},
                   {"total_time", record.total_time}});
  }
  closed_ = true;
  return out;
}

}  // namespace trustnav
