#pragma once

#include <cstdint>
#include <set>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustnav/session.hpp"

namespace trustnav {

// Message-level view of a Session, independent of transport.
//
// Server -> client: state_update, task_end, survey_request, session_complete,
// error. Client -> server: set_mode {mode}, move {direction}, abort_task,
// survey_submit {group, ratings: [{id, rating|null}]}.
//
// Every call returns the messages to send, in order. A rejected or malformed
// client message yields a single error message and leaves the session state
// unchanged.
class ProtocolSession {
 public:
  using Messages = std::vector<nlohmann::json>;

  ProtocolSession(const TaskLibrary& library, SessionPlan plan, SessionOptions options,
                  EventSink& sink, SurveyInstrument instrument = SurveyInstrument::placeholder());

  // Starts the first task.
  Messages start(std::int64_t t_ms);
  Messages handle(const nlohmann::json& message, std::int64_t t_ms);
  Messages handle_text(std::string_view text, std::int64_t t_ms);
  // Autonomy cadence; a no-op outside a running Automatic-mode task.
  Messages tick(std::int64_t t_ms);
  // Operator gone past the grace period: the running task ends as Abort and
  // the session stops.
  Messages disconnect(std::int64_t t_ms);
  // What a reconnecting client needs to resynchronise: the current
  // state_update, the pending survey_request or session_complete.
  Messages resume() const;

  bool complete() const noexcept { return closed_ || session_.phase() == Session::Phase::Complete; }
  bool autonomy_active() const noexcept;
  const Session& session() const noexcept { return session_; }

  // Cells seen so far in the current task (fog of war).
  const std::set<Pose>& explored() const noexcept { return explored_; }

  nlohmann::json state_update() const;

 private:
  Messages after_transition(std::int64_t t_ms);
  Messages advance(std::int64_t t_ms);
  nlohmann::json survey_request() const;
  nlohmann::json session_complete() const;
  void begin_task(std::int64_t t_ms);
  static nlohmann::json error(std::string_view reason, const nlohmann::json& request);

  Session session_;
  std::set<Pose> explored_;
  bool closed_ = false;
};

}  // namespace trustnav
