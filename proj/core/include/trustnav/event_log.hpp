#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace trustnav {

enum class EventType {
  TaskStart,
  ModeChange,
  OperatorAction,
  RobotAction,
  ReportShown,
  Abort,
  TaskEnd,
  Survey,
};

std::string_view to_string(EventType t) noexcept;
std::optional<EventType> parse_event_type(std::string_view s) noexcept;

struct Event {
  std::int64_t t_ms = 0;  // session clock
  std::string session;
  int group = 0;  // -1 for the training round
  int task = 0;
  EventType type = EventType::TaskStart;
  nlohmann::json payload = nlohmann::json::object();
};

// One JSONL line without the trailing newline. Field order is fixed:
// t_ms, session, group, task, type, payload.
std::string to_jsonl(const Event& e);

class EventSchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Event event_from_json(const nlohmann::json& doc);

class EventSink {
 public:
  virtual ~EventSink() = default;
  virtual void write(const Event& e) = 0;
  // Called at task boundaries so live logs survive a crash.
  virtual void flush() {}
};

class MemoryEventSink final : public EventSink {
 public:
  void write(const Event& e) override { events_.push_back(e); }
  const std::vector<Event>& events() const noexcept { return events_; }
  std::string jsonl() const;

 private:
  std::vector<Event> events_;
};

class StreamEventSink final : public EventSink {
 public:
  explicit StreamEventSink(std::ostream& out) : out_(out) {}
  void write(const Event& e) override;
  void flush() override;

 private:
  std::ostream& out_;
};

struct EventLogReadResult {
  std::vector<Event> events;
  int skipped = 0;  // blank lines are not counted
};

// Schema-invalid lines are skipped and counted.
EventLogReadResult read_event_log(std::istream& in);

}  // namespace trustnav
