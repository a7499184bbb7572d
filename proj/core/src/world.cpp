#include "trustnav/world.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

namespace trustnav {

std::string_view to_string(Cell c) noexcept {
  switch (c) {
    case Cell::Free: return "free";
    case Cell::Obstacle: return "obstacle";
    case Cell::Debris: return "debris";
    case Cell::Crater: return "crater";
  }
  return "free";
}

std::string_view to_string(Action a) noexcept {
  switch (a) {
    case Action::Up: return "up";
    case Action::Down: return "down";
    case Action::Left: return "left";
    case Action::Right: return "right";
  }
  return "up";
}

std::string_view to_string(ControlMode m) noexcept {
  return m == ControlMode::Manual ? "manual" : "automatic";
}

std::string_view to_string(Terminal t) noexcept {
  switch (t) {
    case Terminal::None: return "none";
    case Terminal::Success: return "success";
    case Terminal::Failure: return "failure";
  }
  return "none";
}

Action parse_action(std::string_view s) {
  for (Action a : kActions) {
    if (to_string(a) == s) return a;
  }
  throw std::invalid_argument("unknown action '" + std::string(s) + "'");
}

ControlMode parse_control_mode(std::string_view s) {
  if (s == "manual") return ControlMode::Manual;
  if (s == "automatic") return ControlMode::Automatic;
  throw std::invalid_argument("unknown control mode '" + std::string(s) + "'");
}

GridParseError::GridParseError(const std::string& what, int row, int column)
    : GridError("line " + std::to_string(row) + (column > 0 ? ", column " + std::to_string(column) : "") +
                ": " + what),
      row_(row),
      column_(column) {}

bool goal_reachable(int width, int height, const std::vector<Cell>& cells, Pose start, Pose goal) {
  auto idx = [width](Pose p) {
    return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width) +
           static_cast<std::size_t>(p.x);
  };
  std::vector<bool> seen(cells.size(), false);
  std::deque<Pose> frontier{start};
  seen[idx(start)] = true;
  while (!frontier.empty()) {
    const Pose p = frontier.front();
    frontier.pop_front();
    if (p == goal) return true;
    for (Action a : kActions) {
      const Pose n = neighbor(p, a);
      if (n.x < 0 || n.y < 0 || n.x >= width || n.y >= height) continue;
      const Cell c = cells[idx(n)];
      if (c == Cell::Obstacle || c == Cell::Crater || seen[idx(n)]) continue;
      seen[idx(n)] = true;
      frontier.push_back(n);
    }
  }
  return false;
}

GridConfig GridConfig::create(std::string id, int width, int height, std::vector<Cell> cells,
                              Pose start, Pose goal) {
  if (width <= 0 || height <= 0) throw GridError("grid dimensions must be positive");
  if (cells.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw GridError("cell array does not match " + std::to_string(width) + "x" +
                    std::to_string(height));
  }
  GridConfig g;
  g.id_ = std::move(id);
  g.width_ = width;
  g.height_ = height;
  g.cells_ = std::move(cells);
  g.start_ = start;
  g.goal_ = goal;
  if (!g.in_bounds(start)) throw GridError("start out of bounds");
  if (!g.in_bounds(goal)) throw GridError("goal out of bounds");
  if (start == goal) throw GridError("start and goal coincide");
  if (g.at(start) != Cell::Free) throw GridError("start is not on a free cell");
  if (g.at(goal) != Cell::Free) throw GridError("goal is not on a free cell");
  if (!goal_reachable(width, height, g.cells_, start, goal)) {
    throw GridError("goal unreachable from start");
  }
  return g;
}

GridConfig GridConfig::with_id(std::string id) const {
  GridConfig copy = *this;
  copy.id_ = std::move(id);
  return copy;
}

GridConfig parse_grid(std::string_view text, std::string id) {
  std::vector<std::string_view> rows;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view row = text.substr(pos, eol - pos);
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    rows.push_back(row);
    pos = eol + 1;
  }
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  if (rows.empty()) throw GridParseError("empty map", 1, 0);

  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(width) * static_cast<std::size_t>(height));
  std::optional<Pose> start;
  std::optional<Pose> goal;

  for (int y = 0; y < height; ++y) {
    const auto row = rows[static_cast<std::size_t>(y)];
    if (static_cast<int>(row.size()) != width) {
      throw GridParseError("row has " + std::to_string(row.size()) + " cells, expected " +
                               std::to_string(width),
                           y + 1, 0);
    }
    for (int x = 0; x < width; ++x) {
      const char ch = row[static_cast<std::size_t>(x)];
      switch (ch) {
        case '.': cells.push_back(Cell::Free); break;
        case '#': cells.push_back(Cell::Obstacle); break;
        case '~': cells.push_back(Cell::Debris); break;
        case 'O': cells.push_back(Cell::Crater); break;
        case 'S':
          if (start) throw GridParseError("duplicate start", y + 1, x + 1);
          start = Pose{x, y};
          cells.push_back(Cell::Free);
          break;
        case 'G':
          if (goal) throw GridParseError("duplicate goal", y + 1, x + 1);
          goal = Pose{x, y};
          cells.push_back(Cell::Free);
          break;
        default:
          throw GridParseError(std::string("unknown character '") + ch + "'", y + 1, x + 1);
      }
    }
  }
  if (!start) throw GridParseError("missing start", height, 0);
  if (!goal) throw GridParseError("missing goal", height, 0);
  return GridConfig::create(std::move(id), width, height, std::move(cells), *start, *goal);
}

std::string to_ascii(const GridConfig& config) {
  std::string out;
  out.reserve(config.size() + static_cast<std::size_t>(config.height()));
  for (int y = 0; y < config.height(); ++y) {
    for (int x = 0; x < config.width(); ++x) {
      const Pose p{x, y};
      if (p == config.start()) {
        out += 'S';
      } else if (p == config.goal()) {
        out += 'G';
      } else {
        switch (config.at(p)) {
          case Cell::Free: out += '.'; break;
          case Cell::Obstacle: out += '#'; break;
          case Cell::Debris: out += '~'; break;
          case Cell::Crater: out += 'O'; break;
        }
      }
    }
    out += '\n';
  }
  return out;
}

nlohmann::json to_json(const GridConfig& config) {
  auto obstacles = nlohmann::json::array();
  auto debris = nlohmann::json::array();
  auto craters = nlohmann::json::array();
  for (std::size_t i = 0; i < config.size(); ++i) {
    const Pose p = config.pose_at(i);
    switch (config.cells()[i]) {
      case Cell::Obstacle: obstacles.push_back({p.x, p.y}); break;
      case Cell::Debris: debris.push_back({p.x, p.y}); break;
      case Cell::Crater: craters.push_back({p.x, p.y}); break;
      case Cell::Free: break;
    }
  }
  return {{"id", config.id()},
          {"width", config.width()},
          {"height", config.height()},
          {"start", {config.start().x, config.start().y}},
          {"goal", {config.goal().x, config.goal().y}},
          {"obstacles", std::move(obstacles)},
          {"debris", std::move(debris)},
          {"craters", std::move(craters)}};
}

namespace {

Pose pose_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 2) throw GridError("coordinate must be [x, y]");
  return {j.at(0).get<int>(), j.at(1).get<int>()};
}

}  // namespace

GridConfig grid_from_json(const nlohmann::json& doc) {
  try {
    const int width = doc.value("width", kDefaultWidth);
    const int height = doc.value("height", kDefaultHeight);
    if (width <= 0 || height <= 0) throw GridError("grid dimensions must be positive");
    std::vector<Cell> cells(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                            Cell::Free);
    auto place = [&](const char* key, Cell kind) {
      if (!doc.contains(key)) return;
      for (const auto& c : doc.at(key)) {
        const Pose p = pose_from_json(c);
        if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
          throw GridError(std::string(key) + " cell out of bounds");
        }
        auto& slot = cells[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width) +
                           static_cast<std::size_t>(p.x)];
        if (slot != Cell::Free) throw GridError("cell listed under more than one kind");
        slot = kind;
      }
    };
    place("obstacles", Cell::Obstacle);
    place("debris", Cell::Debris);
    place("craters", Cell::Crater);
    return GridConfig::create(doc.value("id", std::string{}), width, height, std::move(cells),
                              pose_from_json(doc.at("start")), pose_from_json(doc.at("goal")));
  } catch (const nlohmann::json::exception& e) {
    throw GridError(std::string("malformed grid document: ") + e.what());
  }
}

GridConfig load_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw GridError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return grid_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
      throw GridError(path + ": " + e.what());
    }
  }
  std::string id = path;
  if (auto slash = id.find_last_of('/'); slash != std::string::npos) id = id.substr(slash + 1);
  if (auto dot = id.find_last_of('.'); dot != std::string::npos) id = id.substr(0, dot);
  return parse_grid(text, id);
}

namespace {

void require_in_bounds(const GridConfig& config, Pose pose) {
  if (!config.in_bounds(pose)) {
    throw std::out_of_range("pose (" + std::to_string(pose.x) + ", " + std::to_string(pose.y) +
                            ") is outside the grid");
  }
}

bool open(const GridConfig& config, Pose p) {
  return config.in_bounds(p) && config.at(p) != Cell::Obstacle;
}

}  // namespace

std::vector<WeightedPose> transition_distribution(const GridConfig& config, Pose pose,
                                                  Action action) {
  require_in_bounds(config, pose);
  if (config.is_terminal(pose)) throw std::invalid_argument("transition from a terminal pose");
  const Pose dest = neighbor(pose, action);
  if (!open(config, dest)) return {{pose, 1.0}};
  if (config.at(dest) != Cell::Debris) return {{dest, 1.0}};

  std::vector<Pose> targets;
  for (Action a : kActions) {
    const Pose n = neighbor(dest, a);
    if (open(config, n)) targets.push_back(n);
  }
  if (targets.empty()) return {{pose, 1.0}};
  const double p = 1.0 / static_cast<double>(targets.size());
  std::vector<WeightedPose> out;
  out.reserve(targets.size());
  for (Pose t : targets) out.push_back({t, p});
  return out;
}

std::vector<WeightedPose> manual_transition(const GridConfig& config, Pose pose, Action action) {
  require_in_bounds(config, pose);
  if (config.is_terminal(pose)) throw std::invalid_argument("transition from a terminal pose");
  const Pose dest = neighbor(pose, action);
  if (!open(config, dest)) return {{pose, 1.0}};
  return {{dest, 1.0}};
}

double reward(const GridConfig& config, Pose /*pose*/, Action /*action*/, Pose next) {
  double r = -1.0;
  if (next == config.goal()) r += 100.0;
  if (config.at(next) == Cell::Crater) r -= 100.0;
  return r;
}

TransitionResult step(const GridConfig& config, Pose pose, Action action, ControlMode mode,
                      Rng& rng) {
  require_in_bounds(config, pose);
  if (config.is_terminal(pose)) throw std::logic_error("step from a terminal pose");

  TransitionResult result;
  if (mode == ControlMode::Manual) {
    result.next = manual_transition(config, pose, action).front().pose;
  } else {
    const auto dist = transition_distribution(config, pose, action);
    const Pose dest = neighbor(pose, action);
    // The robot's own cell always neighbours the debris, so a debris
    // destination always deflects.
    result.deflected = config.in_bounds(dest) && config.at(dest) == Cell::Debris;
    result.next = dist.size() == 1 ? dist.front().pose : dist[uniform_index(rng, dist.size())].pose;
  }
  result.reward = reward(config, pose, action, result.next);
  if (result.next == config.goal()) {
    result.terminal = Terminal::Success;
  } else if (config.at(result.next) == Cell::Crater) {
    result.terminal = Terminal::Failure;
  }
  return result;
}

std::vector<SensedCell> sensor_view(const GridConfig& config, Pose pose, int radius) {
  require_in_bounds(config, pose);
  if (radius < 0) throw std::invalid_argument("sensor radius must be non-negative");
  std::vector<SensedCell> out;
  const int y0 = std::max(0, pose.y - radius);
  const int y1 = std::min(config.height() - 1, pose.y + radius);
  const int x0 = std::max(0, pose.x - radius);
  const int x1 = std::min(config.width() - 1, pose.x + radius);
  out.reserve(static_cast<std::size_t>((y1 - y0 + 1) * (x1 - x0 + 1)));
  for (int y = y0; y <= y1; ++y) {
    for (int x = x0; x <= x1; ++x) out.push_back({{x, y}, config.at({x, y})});
  }
  return out;
}

}  // namespace trustnav
