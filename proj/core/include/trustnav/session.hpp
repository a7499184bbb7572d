#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustnav/assessment.hpp"
#include "trustnav/event_log.hpp"
#include "trustnav/rng.hpp"
#include "trustnav/solver.hpp"
#include "trustnav/world.hpp"

namespace trustnav {

class SessionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A command that is invalid in the current task state. The task is left
// untouched.
class CommandRejected : public SessionError {
 public:
  using SessionError::SessionError;
};

enum class ReportingLevel { Informed, Random };
enum class PerformanceLevel { High, Random };
enum class ReportPresence { Present, Absent };
enum class TaskOutcome { Success, Failure, Abort };

std::string_view to_string(ReportingLevel r) noexcept;
std::string_view to_string(PerformanceLevel p) noexcept;
std::string_view to_string(ReportPresence p) noexcept;
std::string_view to_string(TaskOutcome o) noexcept;
ReportingLevel parse_reporting_level(std::string_view s);
PerformanceLevel parse_performance_level(std::string_view s);
ReportPresence parse_report_presence(std::string_view s);
TaskOutcome parse_task_outcome(std::string_view s);

struct StudyCondition {
  ReportingLevel reporting = ReportingLevel::Informed;
  PerformanceLevel performance = PerformanceLevel::High;
  // Probability that the robot takes its policy action on an autonomy tick.
  double follow_probability = 1.0;

  static StudyCondition make(ReportingLevel reporting, PerformanceLevel performance);
  friend bool operator==(const StudyCondition&, const StudyCondition&) = default;
};

// "informed-high", "random-random", ...
StudyCondition parse_condition(std::string_view s);
std::string condition_name(const StudyCondition& c);

// Offline precomputation for a configuration set: the robot's policy, the
// deterministic manual-control policy and the outcome assessment.
struct LibraryOptions {
  AssessmentParams assessment;
  std::uint64_t seed = 0;  // salted per config id for the assessment rollouts
};

class TaskLibrary {
 public:
  struct Entry {
    GridConfig config;
    Solution solution;
    Policy manual_policy;
    OutcomeAssessment assessment;
  };

  // Throws SessionError on duplicate config ids.
  static TaskLibrary build(std::vector<GridConfig> configs, const LibraryOptions& options = {});

  const Entry& at(std::string_view id) const;
  bool contains(std::string_view id) const;
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }

 private:
  std::vector<Entry> entries_;
};

struct SessionOptions {
  int groups = 2;  // one Absent group, the rest Present
  int tasks_per_group = 4;
  std::string robot_color = "red";
  bool training_round = false;
  bool surveys = true;
  int cadence_ms = 500;
  int sensor_radius = kDefaultSensorRadius;
};

struct PlannedTask {
  std::string config_id;
  ReportStatement report;
};

struct TaskGroup {
  ReportPresence presence = ReportPresence::Present;
  std::vector<PlannedTask> tasks;
  bool survey_after = true;
};

struct SessionPlan {
  std::string participant_id;
  std::uint64_t seed = 0;
  StudyCondition condition;
  std::string robot_color;
  std::optional<PlannedTask> training;  // high performance, no report
  std::vector<TaskGroup> groups;
};

// Seed-determined group order and config assignment; every task gets a
// distinct configuration. Present-group reports come from the library's
// assessments (Informed) or from random_report (Random).
SessionPlan build_session_plan(const TaskLibrary& library, const StudyCondition& condition,
                               std::uint64_t seed, std::string participant_id,
                               const SessionOptions& options = {});

// Score deltas in tenths of a point so the fold is exact.
inline constexpr int kStartScoreTenths = 50;
inline constexpr int kManualActionTenths = -1;
inline constexpr int kFailTenths = -50;
inline constexpr int kAbortTenths = -30;

class ScoreLedger {
 public:
  void record(int delta_tenths) { deltas_.push_back(delta_tenths); }
  // Running total clamped to [0, 5] points.
  int tenths() const noexcept;
  double points() const noexcept { return tenths() / 10.0; }
  const std::vector<int>& deltas() const noexcept { return deltas_; }

 private:
  std::vector<int> deltas_;
};

// Reference fold: 5 + sum(deltas), clamped to [0, 5].
double fold_score(std::span<const double> deltas_in_points);

struct ActionEntry {
  Pose at;
  Action action;
  friend bool operator==(const ActionEntry&, const ActionEntry&) = default;
};

struct ModeSwitch {
  std::int64_t t_ms;
  ControlMode mode;
  friend bool operator==(const ModeSwitch&, const ModeSwitch&) = default;
};

struct TaskRecord {
  std::string session;
  int group = 0;
  int task = 0;
  bool training = false;
  std::string config_id;
  StudyCondition condition;
  ReportPresence presence = ReportPresence::Absent;
  ReportStatement report_shown;
  TaskOutcome outcome = TaskOutcome::Abort;
  double total_time = 0.0;  // seconds
  std::vector<ActionEntry> participant_actions;
  std::vector<ActionEntry> robot_actions;
  std::vector<ModeSwitch> mode_switches;
  double score = 0.0;
};

enum class TaskStatus { Running, Success, Failure, Aborted };

std::string_view to_string(TaskStatus s) noexcept;

struct TaskContext {
  std::string session;
  int group = 0;
  int task = 0;
  bool training = false;
  ReportPresence presence = ReportPresence::Absent;
};

// Single-writer state machine for one navigation task. Every mutation is
// logged to the sink with the caller's timestamp.
class LiveTask {
 public:
  LiveTask(const TaskLibrary::Entry& entry, StudyCondition condition, ReportStatement report,
           TaskContext context, EventSink& sink, std::int64_t t_start_ms);

  Pose pose() const noexcept { return pose_; }
  ControlMode mode() const noexcept { return mode_; }
  TaskStatus status() const noexcept { return status_; }
  bool running() const noexcept { return status_ == TaskStatus::Running; }
  bool finalized() const noexcept { return finalized_; }
  double score() const noexcept { return ledger_.points(); }
  const ScoreLedger& ledger() const noexcept { return ledger_; }
  const GridConfig& config() const noexcept { return entry_.config; }
  const TaskLibrary::Entry& entry() const noexcept { return entry_; }
  const ReportStatement& report() const noexcept { return report_; }
  const TaskContext& context() const noexcept { return context_; }

  // Manual teleoperation step. Throws CommandRejected in Automatic mode or
  // once the task has ended.
  TransitionResult apply_operator_action(Action action, std::int64_t t_ms);

  // One autonomy step; returns nullopt (and does nothing) unless the task is
  // running in Automatic mode.
  std::optional<TransitionResult> autonomy_tick(Rng& rng, std::int64_t t_ms);

  // Returns false when already in `mode`.
  bool set_mode(ControlMode mode, std::int64_t t_ms);

  void abort(std::int64_t t_ms);

  // Produces the immutable record; requires a terminal status and may only
  // be called once.
  TaskRecord finalize(std::int64_t t_ms);

 private:
  Event make_event(EventType type, std::int64_t t_ms, nlohmann::json payload) const;
  nlohmann::json transition_payload(Pose from, Action action, const TransitionResult& t,
                                    int delta_tenths) const;
  int settle(const TransitionResult& t);

  const TaskLibrary::Entry& entry_;
  StudyCondition condition_;
  ReportStatement report_;
  TaskContext context_;
  EventSink& sink_;
  std::int64_t t_start_ms_;

  Pose pose_;
  ControlMode mode_ = ControlMode::Manual;
  TaskStatus status_ = TaskStatus::Running;
  bool finalized_ = false;
  ScoreLedger ledger_;
  std::vector<ActionEntry> participant_actions_;
  std::vector<ActionEntry> robot_actions_;
  std::vector<ModeSwitch> mode_switches_;
};

enum class Subscale { Reliability, Capability };

std::string_view to_string(Subscale s) noexcept;

// Item wording is supplied by configuration; only ids and sub-scale
// membership matter to scoring.
struct SurveyInstrument {
  struct Item {
    std::string id;
    Subscale subscale = Subscale::Reliability;
    std::string text;
  };
  std::vector<Item> items;

  static SurveyInstrument from_json(const nlohmann::json& doc);
  nlohmann::json to_json() const;
  // Four placeholder items per sub-scale.
  static SurveyInstrument placeholder();
};

struct SurveyRating {
  std::string item_id;
  std::optional<int> rating;  // 0..7; nullopt is "does not fit"
  friend bool operator==(const SurveyRating&, const SurveyRating&) = default;
};

struct SurveyResponse {
  int group_index = 0;
  std::vector<SurveyRating> items;
  std::optional<double> reliability_mean;  // missing when nothing was answered
  std::optional<double> capability_mean;
};

// Throws SessionError on ratings outside 0..7 or unknown item ids.
SurveyResponse score_survey(const SurveyInstrument& instrument, int group_index,
                            std::vector<SurveyRating> ratings);

// Orchestrates the plan: task sequencing, per-task autonomy randomness,
// finalization and between-group surveys.
class Session {
 public:
  enum class Phase { Ready, Task, Survey, Complete };

  Session(const TaskLibrary& library, SessionPlan plan, SessionOptions options, EventSink& sink,
          SurveyInstrument instrument = SurveyInstrument::placeholder());

  Phase phase() const noexcept { return phase_; }
  const SessionPlan& plan() const noexcept { return plan_; }
  const SessionOptions& options() const noexcept { return options_; }
  const SurveyInstrument& instrument() const noexcept { return instrument_; }

  LiveTask& start_next_task(std::int64_t t_ms);
  LiveTask* current_task() noexcept { return current_ ? &*current_ : nullptr; }
  const LiveTask* current_task() const noexcept { return current_ ? &*current_ : nullptr; }

  // Autonomy stream of the current task, seeded from (plan seed, group, task).
  Rng& autonomy_rng() noexcept { return task_rng_; }

  // Finalizes the current (ended) task and advances the phase.
  const TaskRecord& finish_task(std::int64_t t_ms);

  // Group whose survey is pending, if any.
  std::optional<int> pending_survey() const noexcept { return pending_survey_; }
  SurveyResponse record_survey(int group_index, std::vector<SurveyRating> ratings,
                               std::int64_t t_ms);

  const std::vector<TaskRecord>& records() const noexcept { return records_; }
  const std::vector<SurveyResponse>& surveys() const noexcept { return surveys_; }

 private:
  struct Slot {
    int group;  // -1 = training
    int task;
  };

  const TaskLibrary& library_;
  SessionPlan plan_;
  SessionOptions options_;
  EventSink& sink_;
  SurveyInstrument instrument_;
  std::vector<Slot> slots_;
  std::size_t next_slot_ = 0;
  Phase phase_ = Phase::Ready;
  std::optional<LiveTask> current_;
  Rng task_rng_;
  std::optional<int> pending_survey_;
  std::vector<bool> group_done_;
  std::vector<TaskRecord> records_;
  std::vector<SurveyResponse> surveys_;
};

}  // namespace trustnav
