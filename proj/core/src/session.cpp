#include "trustnav/session.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trustnav {

std::string_view to_string(ReportingLevel r) noexcept {
  return r == ReportingLevel::Informed ? "informed" : "random";
}

std::string_view to_string(PerformanceLevel p) noexcept {
  return p == PerformanceLevel::High ? "high" : "random";
}

std::string_view to_string(ReportPresence p) noexcept {
  return p == ReportPresence::Present ? "present" : "absent";
}

std::string_view to_string(TaskOutcome o) noexcept {
  switch (o) {
    case TaskOutcome::Success: return "success";
    case TaskOutcome::Failure: return "failure";
    case TaskOutcome::Abort: return "abort";
  }
  return "abort";
}

std::string_view to_string(TaskStatus s) noexcept {
  switch (s) {
    case TaskStatus::Running: return "running";
    case TaskStatus::Success: return "success";
    case TaskStatus::Failure: return "failure";
    case TaskStatus::Aborted: return "abort";
  }
  return "running";
}

std::string_view to_string(Subscale s) noexcept {
  return s == Subscale::Reliability ? "reliability" : "capability";
}

ReportingLevel parse_reporting_level(std::string_view s) {
  if (s == "informed") return ReportingLevel::Informed;
  if (s == "random") return ReportingLevel::Random;
  throw std::invalid_argument("unknown reporting level '" + std::string(s) + "'");
}

PerformanceLevel parse_performance_level(std::string_view s) {
  if (s == "high") return PerformanceLevel::High;
  if (s == "random") return PerformanceLevel::Random;
  throw std::invalid_argument("unknown performance level '" + std::string(s) + "'");
}

ReportPresence parse_report_presence(std::string_view s) {
  if (s == "present") return ReportPresence::Present;
  if (s == "absent") return ReportPresence::Absent;
  throw std::invalid_argument("unknown report presence '" + std::string(s) + "'");
}

TaskOutcome parse_task_outcome(std::string_view s) {
  if (s == "success") return TaskOutcome::Success;
  if (s == "failure") return TaskOutcome::Failure;
  if (s == "abort") return TaskOutcome::Abort;
  throw std::invalid_argument("unknown task outcome '" + std::string(s) + "'");
}

StudyCondition StudyCondition::make(ReportingLevel reporting, PerformanceLevel performance) {
  return {reporting, performance, performance == PerformanceLevel::High ? 1.0 : 0.5};
}

StudyCondition parse_condition(std::string_view s) {
  const auto dash = s.find('-');
  if (dash == std::string_view::npos) {
    throw std::invalid_argument("condition must look like <reporting>-<performance>, got '" +
                                std::string(s) + "'");
  }
  return StudyCondition::make(parse_reporting_level(s.substr(0, dash)),
                              parse_performance_level(s.substr(dash + 1)));
}

std::string condition_name(const StudyCondition& c) {
  return std::string(to_string(c.reporting)) + "-" + std::string(to_string(c.performance));
}

// --- TaskLibrary ---

TaskLibrary TaskLibrary::build(std::vector<GridConfig> configs, const LibraryOptions& options) {
  TaskLibrary lib;
  lib.entries_.reserve(configs.size());
  for (auto& config : configs) {
    if (lib.contains(config.id())) throw SessionError("duplicate config id '" + config.id() + "'");
    auto solution = solve_value_iteration(config, options.assessment.solver, Dynamics::Automatic);
    auto manual = solve_value_iteration(config, options.assessment.solver, Dynamics::Manual);
    auto assessment = assess(config, solution.policy, derive_seed(options.seed, hash_id(config.id())),
                             options.assessment);
    lib.entries_.push_back(
        {std::move(config), std::move(solution), std::move(manual.policy), std::move(assessment)});
  }
  return lib;
}

const TaskLibrary::Entry& TaskLibrary::at(std::string_view id) const {
  for (const auto& e : entries_) {
    if (e.config.id() == id) return e;
  }
  throw SessionError("unknown config id '" + std::string(id) + "'");
}

bool TaskLibrary::contains(std::string_view id) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.config.id() == id; });
}

// --- Planning ---

SessionPlan build_session_plan(const TaskLibrary& library, const StudyCondition& condition,
                               std::uint64_t seed, std::string participant_id,
                               const SessionOptions& options) {
  if (options.groups < 2) throw SessionError("a session needs at least two task groups");
  if (options.tasks_per_group < 1) throw SessionError("a task group needs at least one task");
  const std::size_t needed = static_cast<std::size_t>(options.groups * options.tasks_per_group) +
                             (options.training_round ? 1U : 0U);
  if (library.size() < needed) {
    throw SessionError("insufficient configurations: need " + std::to_string(needed) + ", have " +
                       std::to_string(library.size()));
  }

  Rng rng{seed};
  std::vector<std::size_t> order(library.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<ReportPresence> presences(static_cast<std::size_t>(options.groups),
                                        ReportPresence::Present);
  presences.front() = ReportPresence::Absent;
  std::shuffle(presences.begin(), presences.end(), rng);

  SessionPlan plan;
  plan.participant_id = std::move(participant_id);
  plan.seed = seed;
  plan.condition = condition;
  plan.robot_color = options.robot_color;

  std::size_t next = 0;
  if (options.training_round) {
    plan.training = PlannedTask{library.entries()[order[next++]].config.id(),
                                ReportStatement::absent(options.robot_color)};
  }
  for (ReportPresence presence : presences) {
    TaskGroup group;
    group.presence = presence;
    for (int t = 0; t < options.tasks_per_group; ++t) {
      const auto& entry = library.entries()[order[next++]];
      ReportStatement report = ReportStatement::absent(options.robot_color);
      if (presence == ReportPresence::Present) {
        report = condition.reporting == ReportingLevel::Informed
                     ? render_statement(options.robot_color, entry.assessment.label)
                     : random_report(rng, options.robot_color);
      }
      group.tasks.push_back({entry.config.id(), std::move(report)});
    }
    plan.groups.push_back(std::move(group));
  }
  return plan;
}

// --- Scoring ---

int ScoreLedger::tenths() const noexcept {
  const int total = std::accumulate(deltas_.begin(), deltas_.end(), kStartScoreTenths);
  return std::clamp(total, 0, kStartScoreTenths);
}

double fold_score(std::span<const double> deltas_in_points) {
  long total = kStartScoreTenths;
  for (double d : deltas_in_points) total += std::lround(d * 10.0);
  return std::clamp(total, 0L, static_cast<long>(kStartScoreTenths)) / 10.0;
}

// --- LiveTask ---

namespace {

nlohmann::json pose_json(Pose p) { return nlohmann::json::array({p.x, p.y}); }

nlohmann::json label_json(const ReportStatement& r) {
  return r.label ? nlohmann::json(to_string(*r.label)) : nlohmann::json(nullptr);
}

nlohmann::json condition_json(const StudyCondition& c) {
  return {{"reporting", to_string(c.reporting)},
          {"performance", to_string(c.performance)},
          {"follow_probability", c.follow_probability}};
}

}  // namespace

LiveTask::LiveTask(const TaskLibrary::Entry& entry, StudyCondition condition,
                   ReportStatement report, TaskContext context, EventSink& sink,
                   std::int64_t t_start_ms)
    : entry_(entry),
      condition_(condition),
      report_(std::move(report)),
      context_(std::move(context)),
      sink_(sink),
      t_start_ms_(t_start_ms),
      pose_(entry.config.start()) {
  sink_.write(make_event(EventType::TaskStart, t_start_ms,
                         {{"config_id", entry_.config.id()},
                          {"condition", condition_json(condition_)},
                          {"presence", to_string(context_.presence)},
                          {"training", context_.training},
                          {"robot_color", report_.robot_color},
                          {"start", pose_json(entry_.config.start())},
                          {"goal", pose_json(entry_.config.goal())},
                          {"mode", to_string(mode_)},
                          {"report_label", label_json(report_)},
                          {"report_source", to_string(report_.source)}}));
  if (report_.source != ReportSource::Absent) {
    sink_.write(make_event(EventType::ReportShown, t_start_ms,
                           {{"text", report_.text},
                            {"label", label_json(report_)},
                            {"source", to_string(report_.source)}}));
  }
}

Event LiveTask::make_event(EventType type, std::int64_t t_ms, nlohmann::json payload) const {
  return {t_ms, context_.session, context_.group, context_.task, type, std::move(payload)};
}

nlohmann::json LiveTask::transition_payload(Pose from, Action action, const TransitionResult& t,
                                            int delta_tenths) const {
  return {{"x", from.x},
          {"y", from.y},
          {"action", to_string(action)},
          {"next", pose_json(t.next)},
          {"deflected", t.deflected},
          {"terminal", to_string(t.terminal)},
          {"reward", t.reward},
          {"score_delta", delta_tenths / 10.0}};
}

int LiveTask::settle(const TransitionResult& t) {
  pose_ = t.next;
  if (t.terminal == Terminal::Success) {
    status_ = TaskStatus::Success;
  } else if (t.terminal == Terminal::Failure) {
    status_ = TaskStatus::Failure;
    return kFailTenths;
  }
  return 0;
}

TransitionResult LiveTask::apply_operator_action(Action action, std::int64_t t_ms) {
  if (!running()) throw CommandRejected("task has ended");
  if (mode_ != ControlMode::Manual) throw CommandRejected("move rejected in automatic mode");
  const Pose from = pose_;
  Rng unused{0};
  const auto t = step(entry_.config, from, action, ControlMode::Manual, unused);
  participant_actions_.push_back({from, action});
  const int delta = kManualActionTenths + settle(t);
  ledger_.record(delta);
  sink_.write(make_event(EventType::OperatorAction, t_ms, transition_payload(from, action, t, delta)));
  return t;
}

std::optional<TransitionResult> LiveTask::autonomy_tick(Rng& rng, std::int64_t t_ms) {
  if (!running() || mode_ != ControlMode::Automatic) return std::nullopt;
  const Pose from = pose_;
  const Action planned = entry_.solution.policy.action(from);
  Action action = planned;
  bool followed = true;
  if (condition_.follow_probability < 1.0 && !bernoulli(rng, condition_.follow_probability)) {
    action = kActions[uniform_index(rng, kActions.size())];
    followed = false;
  }
  const auto t = step(entry_.config, from, action, ControlMode::Automatic, rng);
  robot_actions_.push_back({from, action});
  const int delta = settle(t);
  if (delta != 0) ledger_.record(delta);
  auto payload = transition_payload(from, action, t, delta);
  payload["policy_action"] = to_string(planned);
  payload["followed_policy"] = followed;
  sink_.write(make_event(EventType::RobotAction, t_ms, std::move(payload)));
  return t;
}

bool LiveTask::set_mode(ControlMode mode, std::int64_t t_ms) {
  if (!running()) throw CommandRejected("task has ended");
  if (mode == mode_) return false;
  mode_ = mode;
  mode_switches_.push_back({t_ms, mode});
  sink_.write(make_event(EventType::ModeChange, t_ms, {{"mode", to_string(mode)}}));
  return true;
}

void LiveTask::abort(std::int64_t t_ms) {
  if (!running()) throw CommandRejected("abort after task end");
  status_ = TaskStatus::Aborted;
  ledger_.record(kAbortTenths);
  sink_.write(make_event(EventType::Abort, t_ms, {{"score_delta", kAbortTenths / 10.0}}));
}

TaskRecord LiveTask::finalize(std::int64_t t_ms) {
  if (running()) throw SessionError("cannot finalize a running task");
  if (finalized_) throw SessionError("task already finalized");
  finalized_ = true;

  TaskRecord r;
  r.session = context_.session;
  r.group = context_.group;
  r.task = context_.task;
  r.training = context_.training;
  r.config_id = entry_.config.id();
  r.condition = condition_;
  r.presence = context_.presence;
  r.report_shown = report_;
  r.outcome = status_ == TaskStatus::Success   ? TaskOutcome::Success
              : status_ == TaskStatus::Failure ? TaskOutcome::Failure
                                               : TaskOutcome::Abort;
  r.total_time = static_cast<double>(t_ms - t_start_ms_) / 1000.0;
  r.participant_actions = participant_actions_;
  r.robot_actions = robot_actions_;
  r.mode_switches = mode_switches_;
  r.score = ledger_.points();

  sink_.write(make_event(EventType::TaskEnd, t_ms,
                         {{"config_id", r.config_id},
                          {"outcome", to_string(r.outcome)},
                          {"total_time", r.total_time},
                          {"score", r.score},
                          {"robot_actions", r.robot_actions.size()},
                          {"participant_actions", r.participant_actions.size()},
                          {"mode_switches", r.mode_switches.size()},
                          {"final_pose", pose_json(pose_)},
                          {"training", r.training}}));
  return r;
}

// --- Survey ---

SurveyInstrument SurveyInstrument::from_json(const nlohmann::json& doc) {
  SurveyInstrument inst;
  for (const auto& item : doc.at("items")) {
    const auto sub = item.at("subscale").get<std::string>();
    Subscale s;
    if (sub == "reliability") {
      s = Subscale::Reliability;
    } else if (sub == "capability") {
      s = Subscale::Capability;
    } else {
      throw SessionError("unknown survey subscale '" + sub + "'");
    }
    inst.items.push_back({item.at("id").get<std::string>(), s, item.value("text", std::string{})});
  }
  return inst;
}

nlohmann::json SurveyInstrument::to_json() const {
  auto arr = nlohmann::json::array();
  for (const auto& item : items) {
    arr.push_back({{"id", item.id}, {"subscale", trustnav::to_string(item.subscale)}, {"text", item.text}});
  }
  return {{"items", std::move(arr)}};
}

SurveyInstrument SurveyInstrument::placeholder() {
  SurveyInstrument inst;
  for (int i = 1; i <= 4; ++i) {
    inst.items.push_back({"reliability_" + std::to_string(i), Subscale::Reliability,
                          "Reliability item " + std::to_string(i)});
  }
  for (int i = 1; i <= 4; ++i) {
    inst.items.push_back({"capability_" + std::to_string(i), Subscale::Capability,
                          "Capability item " + std::to_string(i)});
  }
  return inst;
}

SurveyResponse score_survey(const SurveyInstrument& instrument, int group_index,
                            std::vector<SurveyRating> ratings) {
  double sums[2] = {0.0, 0.0};
  int counts[2] = {0, 0};
  for (const auto& r : ratings) {
    const auto it = std::find_if(instrument.items.begin(), instrument.items.end(),
                                 [&](const auto& item) { return item.id == r.item_id; });
    if (it == instrument.items.end()) throw SessionError("unknown survey item '" + r.item_id + "'");
    if (!r.rating) continue;
    if (*r.rating < 0 || *r.rating > 7) {
      throw SessionError("rating for '" + r.item_id + "' outside 0..7");
    }
    const auto k = static_cast<std::size_t>(it->subscale);
    sums[k] += *r.rating;
    ++counts[k];
  }
  SurveyResponse resp;
  resp.group_index = group_index;
  resp.items = std::move(ratings);
  if (counts[0] > 0) resp.reliability_mean = sums[0] / counts[0];
  if (counts[1] > 0) resp.capability_mean = sums[1] / counts[1];
  return resp;
}

// --- Session ---

Session::Session(const TaskLibrary& library, SessionPlan plan, SessionOptions options,
                 EventSink& sink, SurveyInstrument instrument)
    : library_(library),
      plan_(std::move(plan)),
      options_(std::move(options)),
      sink_(sink),
      instrument_(std::move(instrument)),
      group_done_(plan_.groups.size(), false) {
  if (plan_.training) slots_.push_back({-1, 0});
  for (std::size_t g = 0; g < plan_.groups.size(); ++g) {
    for (std::size_t t = 0; t < plan_.groups[g].tasks.size(); ++t) {
      slots_.push_back({static_cast<int>(g), static_cast<int>(t)});
    }
  }
  if (slots_.empty()) phase_ = Phase::Complete;
}

LiveTask& Session::start_next_task(std::int64_t t_ms) {
  if (phase_ != Phase::Ready) throw SessionError("session is not ready for a new task");
  const Slot slot = slots_[next_slot_++];
  const bool training = slot.group < 0;
  const PlannedTask& planned =
      training ? *plan_.training
               : plan_.groups[static_cast<std::size_t>(slot.group)].tasks[static_cast<std::size_t>(slot.task)];
  const ReportPresence presence =
      training ? ReportPresence::Absent : plan_.groups[static_cast<std::size_t>(slot.group)].presence;
  const StudyCondition condition =
      training ? StudyCondition::make(plan_.condition.reporting, PerformanceLevel::High)
               : plan_.condition;

  task_rng_.seed(derive_seed(plan_.seed, static_cast<std::uint64_t>((slot.group + 1) * 4096 + slot.task)));
  current_.reset();
  current_.emplace(library_.at(planned.config_id), condition, planned.report,
                   TaskContext{plan_.participant_id, slot.group, slot.task, training, presence}, sink_,
                   t_ms);
  phase_ = Phase::Task;
  return *current_;
}

const TaskRecord& Session::finish_task(std::int64_t t_ms) {
  if (phase_ != Phase::Task || !current_) throw SessionError("no task in progress");
  records_.push_back(current_->finalize(t_ms));
  sink_.flush();
  const int group = current_->context().group;
  current_.reset();

  const bool group_complete =
      group >= 0 && (next_slot_ >= slots_.size() || slots_[next_slot_].group != group);
  if (group_complete) {
    group_done_[static_cast<std::size_t>(group)] = true;
    if (options_.surveys && plan_.groups[static_cast<std::size_t>(group)].survey_after) {
      pending_survey_ = group;
      phase_ = Phase::Survey;
      return records_.back();
    }
  }
  phase_ = next_slot_ < slots_.size() ? Phase::Ready : Phase::Complete;
  return records_.back();
}

SurveyResponse Session::record_survey(int group_index, std::vector<SurveyRating> ratings,
                                      std::int64_t t_ms) {
  if (group_index < 0 || static_cast<std::size_t>(group_index) >= group_done_.size() ||
      !group_done_[static_cast<std::size_t>(group_index)]) {
    throw SessionError("survey for a group that has not been completed");
  }
  if (std::any_of(surveys_.begin(), surveys_.end(),
                  [&](const SurveyResponse& r) { return r.group_index == group_index; })) {
    throw SessionError("survey for this group already recorded");
  }
  auto response = score_survey(instrument_, group_index, std::move(ratings));

  auto items = nlohmann::json::array();
  for (const auto& r : response.items) {
    items.push_back({{"id", r.item_id},
                     {"rating", r.rating ? nlohmann::json(*r.rating) : nlohmann::json(nullptr)}});
  }
  auto mean_json = [](const std::optional<double>& m) {
    return m ? nlohmann::json(*m) : nlohmann::json(nullptr);
  };
  sink_.write({t_ms, plan_.participant_id, group_index, 0, EventType::Survey,
               {{"presence", to_string(plan_.groups[static_cast<std::size_t>(group_index)].presence)},
                {"items", std::move(items)},
                {"reliability_mean", mean_json(response.reliability_mean)},
                {"capability_mean", mean_json(response.capability_mean)}}});
  sink_.flush();

  if (pending_survey_ == group_index) {
    pending_survey_.reset();
    phase_ = next_slot_ < slots_.size() ? Phase::Ready : Phase::Complete;
  }
  surveys_.push_back(response);
  return response;
}

}  // namespace trustnav
