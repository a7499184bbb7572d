#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustnav/rng.hpp"
#include "trustnav/world.hpp"

namespace trustnav {

struct SolverParams {
  double gamma = 0.95;
  double tolerance = 1e-6;  // max-norm change between sweeps
  int max_iterations = 10'000;
  int step_cap = 1'000;  // rollout truncation

  void validate() const;
};

// Which transition model the planner optimises against. Automatic is the
// robot's own model (debris deflects); Manual is the deterministic model an
// operator experiences while teleoperating.
enum class Dynamics { Automatic, Manual };

class ValueFunction {
 public:
  ValueFunction() = default;
  ValueFunction(int width, int height, std::vector<double> values);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  double at(Pose p) const;
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// Greedy action per state; undefined on obstacles and terminal cells.
class Policy {
 public:
  Policy() = default;
  Policy(std::string config_id, int width, int height);

  const std::string& config_id() const noexcept { return config_id_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }

  std::optional<Action> at(Pose p) const;
  // Throws std::out_of_range when undefined at p.
  Action action(Pose p) const;
  void set(Pose p, std::optional<Action> a);

  bool matches(const GridConfig& config) const noexcept {
    return config.width() == width_ && config.height() == height_;
  }

  friend bool operator==(const Policy&, const Policy&) = default;

 private:
  std::size_t index(Pose p) const;

  std::string config_id_;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::optional<Action>> actions_;
};

struct Solution {
  ValueFunction values;
  Policy policy;
  int iterations = 0;
  double residual = 0.0;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(int iterations, double residual);
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

// Synchronous value iteration; terminal states are absorbing with value 0.
// Greedy extraction picks the first maximal action in canonical order.
Solution solve_value_iteration(const GridConfig& config, const SolverParams& params = {},
                               Dynamics dynamics = Dynamics::Automatic);

// Max-norm change produced by one further Bellman sweep over `values`.
double bellman_residual(const GridConfig& config, const ValueFunction& values,
                        const SolverParams& params, Dynamics dynamics = Dynamics::Automatic);

enum class RolloutOutcome { Success, Failure, Truncated };

std::string_view to_string(RolloutOutcome o) noexcept;

struct RolloutResult {
  double total_reward = 0.0;  // undiscounted
  RolloutOutcome outcome = RolloutOutcome::Truncated;
  int steps = 0;
  std::vector<std::pair<Pose, Action>> trajectory;  // filled only on request
};

// Automatic-mode episode from the start pose following `policy`.
RolloutResult rollout(const GridConfig& config, const Policy& policy, Rng& rng,
                      const SolverParams& params = {}, bool record_trajectory = false);

// n independent rollout returns drawn from one random stream, in draw order.
std::vector<double> reward_distribution(const GridConfig& config, const Policy& policy, int n,
                                        Rng& rng, const SolverParams& params = {});

nlohmann::json to_json(const Solution& solution, const SolverParams& params);
Solution solution_from_json(const nlohmann::json& doc);

}  // namespace trustnav
