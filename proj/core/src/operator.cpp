#include "trustnav/operator.hpp"

#include <cmath>

namespace trustnav {

std::string_view to_string(OperatorKind k) noexcept {
  switch (k) {
    case OperatorKind::AutoOnly: return "auto-only";
    case OperatorKind::ManualOptimal: return "manual-optimal";
    case OperatorKind::ReportFollowing: return "report-following";
    case OperatorKind::Mixed: return "mixed";
  }
  return "auto-only";
}

OperatorKind parse_operator_kind(std::string_view s) {
  for (auto k : {OperatorKind::AutoOnly, OperatorKind::ManualOptimal, OperatorKind::ReportFollowing,
                 OperatorKind::Mixed}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown operator model '" + std::string(s) + "'");
}

std::optional<int> manual_path_length(const TaskLibrary::Entry& entry) {
  const auto& config = entry.config;
  Pose pose = config.start();
  for (int steps = 0; steps < static_cast<int>(config.size()); ++steps) {
    const auto a = entry.manual_policy.at(pose);
    if (!a) return std::nullopt;
    pose = manual_transition(config, pose, *a).front().pose;
    if (pose == config.goal()) return steps + 1;
    if (config.at(pose) == Cell::Crater) return std::nullopt;
  }
  return std::nullopt;
}

SimulatedOperator::SimulatedOperator(OperatorModel model, const TaskLibrary& library,
                                     std::uint64_t seed)
    : model_(model), library_(library), rng_(seed) {}

SimulatedOperator::TaskPlan SimulatedOperator::plan_task(const nlohmann::json& state) {
  TaskPlan plan;
  plan.group = state.at("group").get<int>();
  plan.task = state.at("task").get<int>();
  switch (model_.kind) {
    case OperatorKind::AutoOnly: plan.mode = ControlMode::Automatic; break;
    case OperatorKind::ManualOptimal: plan.mode = ControlMode::Manual; break;
    case OperatorKind::ReportFollowing: {
      const auto& label = state.at("report_label");
      plan.mode = ControlMode::Automatic;
      if (label.is_string()) {
        const Label l = parse_label(label.get<std::string>());
        if (l == Label::VeryBad || l == Label::Bad) plan.mode = ControlMode::Manual;
      }
      break;
    }
    case OperatorKind::Mixed:
      plan.mode = bernoulli(rng_, model_.mix_probability) ? ControlMode::Automatic : ControlMode::Manual;
      break;
  }
  const auto& entry = library_.at(state.at("config_id").get<std::string>());
  const int shortest = manual_path_length(entry).value_or(static_cast<int>(entry.config.size()));
  plan.patience = std::max(1, static_cast<int>(std::ceil(model_.patience_factor * shortest)));
  return plan;
}

std::optional<nlohmann::json> SimulatedOperator::decide(const nlohmann::json& state) {
  const int group = state.at("group").get<int>();
  const int task = state.at("task").get<int>();
  if (!current_ || current_->group != group || current_->task != task) current_ = plan_task(state);

  if (parse_control_mode(state.at("mode").get<std::string>()) != current_->mode) {
    return nlohmann::json{{"type", "set_mode"}, {"mode", to_string(current_->mode)}};
  }
  if (current_->steps >= current_->patience) return nlohmann::json{{"type", "abort_task"}};
  ++current_->steps;
  if (current_->mode == ControlMode::Automatic) return std::nullopt;

  const auto& entry = library_.at(state.at("config_id").get<std::string>());
  const auto& p = state.at("pose");
  const Pose pose{p.at(0).get<int>(), p.at(1).get<int>()};
  return nlohmann::json{{"type", "move"}, {"direction", to_string(entry.manual_policy.action(pose))}};
}

}  // namespace trustnav
