#include "trustnav/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>

namespace trustnav {

namespace {

constexpr std::array<std::pair<EventType, std::string_view>, 8> kEventNames{{
    {EventType::TaskStart, "task_start"},
    {EventType::ModeChange, "mode_change"},
    {EventType::OperatorAction, "operator_action"},
    {EventType::RobotAction, "robot_action"},
    {EventType::ReportShown, "report_shown"},
    {EventType::Abort, "abort"},
    {EventType::TaskEnd, "task_end"},
    {EventType::Survey, "survey"},
}};

}  // namespace

std::string_view to_string(EventType t) noexcept {
  for (const auto& [type, name] : kEventNames) {
    if (type == t) return name;
  }
  return "task_start";
}

std::optional<EventType> parse_event_type(std::string_view s) noexcept {
  for (const auto& [type, name] : kEventNames) {
    if (name == s) return type;
  }
  return std::nullopt;
}

std::string to_jsonl(const Event& e) {
  nlohmann::ordered_json line;
  line["t_ms"] = e.t_ms;
  line["session"] = e.session;
  line["group"] = e.group;
  line["task"] = e.task;
  line["type"] = to_string(e.type);
  line["payload"] = e.payload;
  return line.dump();
}

Event event_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw EventSchemaError("event is not an object");
  for (const char* key : {"t_ms", "session", "group", "task", "type", "payload"}) {
    if (!doc.contains(key)) throw EventSchemaError(std::string("event missing '") + key + "'");
  }
  const auto& t = doc["t_ms"];
  const auto& group = doc["group"];
  const auto& task = doc["task"];
  if (!t.is_number_integer() || !group.is_number_integer() || !task.is_number_integer()) {
    throw EventSchemaError("t_ms, group and task must be integers");
  }
  if (!doc["session"].is_string() || !doc["type"].is_string()) {
    throw EventSchemaError("session and type must be strings");
  }
  if (!doc["payload"].is_object()) throw EventSchemaError("payload must be an object");
  const auto type = parse_event_type(doc["type"].get<std::string>());
  if (!type) throw EventSchemaError("unknown event type");
  return {t.get<std::int64_t>(), doc["session"].get<std::string>(), group.get<int>(),
          task.get<int>(), *type, doc["payload"]};
}

std::string MemoryEventSink::jsonl() const {
  std::string out;
  for (const auto& e : events_) {
    out += to_jsonl(e);
    out += '\n';
  }
  return out;
}

void StreamEventSink::write(const Event& e) { out_ << to_jsonl(e) << '\n'; }

void StreamEventSink::flush() { out_.flush(); }

EventLogReadResult read_event_log(std::istream& in) {
  EventLogReadResult result;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      result.events.push_back(event_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception&) {
      ++result.skipped;
    } catch (const EventSchemaError&) {
      ++result.skipped;
    }
  }
  return result;
}

}  // namespace trustnav
