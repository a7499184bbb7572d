#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "trustnav/rng.hpp"

namespace trustnav {

enum class Cell : unsigned char { Free, Obstacle, Debris, Crater };

// Canonical order doubles as the tie-breaking order of the planner.
enum class Action : unsigned char { Up, Down, Left, Right };

inline constexpr std::array<Action, 4> kActions{Action::Up, Action::Down, Action::Left,
                                                Action::Right};

enum class ControlMode : unsigned char { Manual, Automatic };

enum class Terminal : unsigned char { None, Success, Failure };

struct Pose {
  int x = 0;
  int y = 0;

  friend constexpr bool operator==(const Pose&, const Pose&) = default;
  friend constexpr auto operator<=>(const Pose&, const Pose&) = default;
};

// (0,0) is the top-left cell; Up decrements y.
constexpr Pose neighbor(Pose p, Action a) noexcept {
  switch (a) {
    case Action::Up: return {p.x, p.y - 1};
    case Action::Down: return {p.x, p.y + 1};
    case Action::Left: return {p.x - 1, p.y};
    case Action::Right: return {p.x + 1, p.y};
  }
  return p;
}

std::string_view to_string(Cell c) noexcept;
std::string_view to_string(Action a) noexcept;
std::string_view to_string(ControlMode m) noexcept;
std::string_view to_string(Terminal t) noexcept;

// Parse the lower-case wire names ("up", "manual", ...). Throws std::invalid_argument.
Action parse_action(std::string_view s);
ControlMode parse_control_mode(std::string_view s);

class GridError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Parse failure with a 1-based location in the source text; column 0 means
// the whole row.
class GridParseError : public GridError {
 public:
  GridParseError(const std::string& what, int row, int column);
  int row() const noexcept { return row_; }
  int column() const noexcept { return column_; }

 private:
  int row_;
  int column_;
};

inline constexpr int kDefaultWidth = 31;
inline constexpr int kDefaultHeight = 8;

// An immutable, validated task configuration.
class GridConfig {
 public:
  // Validates dimensions, start/goal placement and start-to-goal
  // reachability; throws GridError on any violation.
  static GridConfig create(std::string id, int width, int height, std::vector<Cell> cells,
                           Pose start, Pose goal);

  const std::string& id() const noexcept { return id_; }
  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  Pose start() const noexcept { return start_; }
  Pose goal() const noexcept { return goal_; }
  std::size_t size() const noexcept { return cells_.size(); }

  bool in_bounds(Pose p) const noexcept {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }
  std::size_t index(Pose p) const noexcept {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(p.x);
  }
  Pose pose_at(std::size_t index) const noexcept {
    return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
  }
  Cell at(Pose p) const { return cells_.at(index(p)); }
  const std::vector<Cell>& cells() const noexcept { return cells_; }

  // Goal and craters end a task.
  bool is_terminal(Pose p) const { return p == goal_ || at(p) == Cell::Crater; }

  GridConfig with_id(std::string id) const;

  friend bool operator==(const GridConfig&, const GridConfig&) = default;

 private:
  GridConfig() = default;

  std::string id_;
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
  Pose start_;
  Pose goal_;
};

// Flood fill over cells that are neither Obstacle nor Crater.
bool goal_reachable(int width, int height, const std::vector<Cell>& cells, Pose start, Pose goal);

// ASCII map: '.' free, '#' obstacle, '~' debris, 'O' crater, 'S' start, 'G' goal.
GridConfig parse_grid(std::string_view text, std::string id = "");
std::string to_ascii(const GridConfig& config);

nlohmann::json to_json(const GridConfig& config);
GridConfig grid_from_json(const nlohmann::json& doc);

GridConfig load_grid_file(const std::string& path);

struct WeightedPose {
  Pose pose;
  double probability = 0.0;

  friend bool operator==(const WeightedPose&, const WeightedPose&) = default;
};

// Planner dynamics: debris always deflects the robot to a uniformly chosen
// open (in bounds, not Obstacle) neighbour of the debris cell.
std::vector<WeightedPose> transition_distribution(const GridConfig& config, Pose pose,
                                                  Action action);

// Manual-mode dynamics: debris behaves as free ground.
std::vector<WeightedPose> manual_transition(const GridConfig& config, Pose pose, Action action);

// -1 per action, +100 on reaching the goal, -100 on entering a crater.
double reward(const GridConfig& config, Pose pose, Action action, Pose next);

struct TransitionResult {
  Pose next;
  Terminal terminal = Terminal::None;
  bool deflected = false;
  double reward = 0.0;
};

TransitionResult step(const GridConfig& config, Pose pose, Action action, ControlMode mode,
                      Rng& rng);

struct SensedCell {
  Pose pose;
  Cell cell = Cell::Free;

  friend bool operator==(const SensedCell&, const SensedCell&) = default;
};

inline constexpr int kDefaultSensorRadius = 2;

// Chebyshev disc around the robot, clipped to the grid, in row-major order.
std::vector<SensedCell> sensor_view(const GridConfig& config, Pose pose, int radius);

}  // namespace trustnav
