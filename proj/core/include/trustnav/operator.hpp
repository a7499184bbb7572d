#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trustnav/rng.hpp"
#include "trustnav/session.hpp"

namespace trustnav {

// Scripted stand-ins for a human operator.
//   AutoOnly         switches to Automatic and lets the robot drive.
//   ManualOptimal    stays in Manual and drives the shortest manual path.
//   ReportFollowing  Manual for "very bad"/"bad" reports, Automatic otherwise
//                    (including when no report is shown).
//   Mixed            per task, Automatic with mix_probability, else Manual.
enum class OperatorKind { AutoOnly, ManualOptimal, ReportFollowing, Mixed };

std::string_view to_string(OperatorKind k) noexcept;
OperatorKind parse_operator_kind(std::string_view s);

struct OperatorModel {
  OperatorKind kind = OperatorKind::AutoOnly;
  double mix_probability = 0.5;
  // The operator aborts once a task has taken this many times the length of
  // the shortest manual path.
  double patience_factor = 3.0;
};

class SimulatedOperator {
 public:
  SimulatedOperator(OperatorModel model, const TaskLibrary& library, std::uint64_t seed);

  // Client message answering a state_update, or nullopt to let one autonomy
  // tick happen.
  std::optional<nlohmann::json> decide(const nlohmann::json& state);

 private:
  struct TaskPlan {
    int group = 0;
    int task = 0;
    ControlMode mode = ControlMode::Automatic;
    int steps = 0;
    int patience = 0;
  };

  TaskPlan plan_task(const nlohmann::json& state);

  OperatorModel model_;
  const TaskLibrary& library_;
  Rng rng_;
  std::optional<TaskPlan> current_;
};

// Steps needed to reach the goal by following the manual policy, or nullopt
// if it never gets there.
std::optional<int> manual_path_length(const TaskLibrary::Entry& entry);

}  // namespace trustnav
