#include "trustnav/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trustnav {

void SolverParams::validate() const {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (max_iterations <= 0) throw std::invalid_argument("max_iterations must be positive");
  if (step_cap <= 0) throw std::invalid_argument("step_cap must be positive");
}

ValueFunction::ValueFunction(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("value array does not match grid dimensions");
  }
}

double ValueFunction::at(Pose p) const {
  if (p.x < 0 || p.y < 0 || p.x >= width_ || p.y >= height_) {
    throw std::out_of_range("value lookup outside the grid");
  }
  return values_[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) +
                 static_cast<std::size_t>(p.x)];
}

Policy::Policy(std::string config_id, int width, int height)
    : config_id_(std::move(config_id)),
      width_(width),
      height_(height),
      actions_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {}

std::size_t Policy::index(Pose p) const {
  if (p.x < 0 || p.y < 0 || p.x >= width_ || p.y >= height_) {
    throw std::out_of_range("policy lookup outside the grid");
  }
  return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) +
         static_cast<std::size_t>(p.x);
}

std::optional<Action> Policy::at(Pose p) const { return actions_[index(p)]; }

Action Policy::action(Pose p) const {
  const auto a = actions_[index(p)];
  if (!a) {
    throw std::out_of_range("policy undefined at (" + std::to_string(p.x) + ", " +
                            std::to_string(p.y) + ")");
  }
  return *a;
}

void Policy::set(Pose p, std::optional<Action> a) { actions_[index(p)] = a; }

ConvergenceError::ConvergenceError(int iterations, double residual)
    : std::runtime_error("value iteration did not converge after " + std::to_string(iterations) +
                         " sweeps (residual " + std::to_string(residual) + ")"),
      iterations_(iterations),
      residual_(residual) {}

namespace {

struct Outcome {
  std::size_t next;
  double probability;
  double reward;
};

// Expanded transition model: per state, per action, the weighted successors.
// Empty for obstacle and terminal states.
struct Model {
  std::vector<std::array<std::vector<Outcome>, 4>> table;
  std::vector<bool> active;
};

Model build_model(const GridConfig& config, Dynamics dynamics) {
  Model m;
  m.table.resize(config.size());
  m.active.assign(config.size(), false);
  for (std::size_t s = 0; s < config.size(); ++s) {
    const Pose p = config.pose_at(s);
    if (config.at(p) == Cell::Obstacle || config.is_terminal(p)) continue;
    m.active[s] = true;
    for (Action a : kActions) {
      const auto dist = dynamics == Dynamics::Automatic ? transition_distribution(config, p, a)
                                                        : manual_transition(config, p, a);
      auto& out = m.table[s][static_cast<std::size_t>(a)];
      out.reserve(dist.size());
      for (const auto& w : dist) {
        out.push_back({config.index(w.pose), w.probability, reward(config, p, a, w.pose)});
      }
    }
  }
  return m;
}

double q_value(const std::vector<Outcome>& outcomes, const std::vector<double>& v, double gamma) {
  double q = 0.0;
  for (const auto& o : outcomes) q += o.probability * (o.reward + gamma * v[o.next]);
  return q;
}

double sweep(const Model& m, const std::vector<double>& v, std::vector<double>& out, double gamma) {
  double residual = 0.0;
  for (std::size_t s = 0; s < v.size(); ++s) {
    if (!m.active[s]) {
      out[s] = 0.0;
      continue;
    }
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& outcomes : m.table[s]) best = std::max(best, q_value(outcomes, v, gamma));
    out[s] = best;
    residual = std::max(residual, std::abs(best - v[s]));
  }
  return residual;
}

}  // namespace

Solution solve_value_iteration(const GridConfig& config, const SolverParams& params,
                               Dynamics dynamics) {
  params.validate();
  const Model model = build_model(config, dynamics);
  std::vector<double> v(config.size(), 0.0);
  std::vector<double> next(config.size(), 0.0);

  int iterations = 0;
  double residual = std::numeric_limits<double>::infinity();
  while (iterations < params.max_iterations) {
    residual = sweep(model, v, next, params.gamma);
    v.swap(next);
    ++iterations;
    if (residual <= params.tolerance) break;
  }
  if (residual > params.tolerance) throw ConvergenceError(iterations, residual);

  Policy policy(config.id(), config.width(), config.height());
  for (std::size_t s = 0; s < config.size(); ++s) {
    if (!model.active[s]) continue;
    std::size_t best_action = 0;
    double best = q_value(model.table[s][0], v, params.gamma);
    for (std::size_t a = 1; a < kActions.size(); ++a) {
      const double q = q_value(model.table[s][a], v, params.gamma);
      // Relative slack keeps ties that differ only by rounding on the
      // earlier action.
      if (q > best + 1e-12 * std::max(1.0, std::abs(best))) {
        best = q;
        best_action = a;
      }
    }
    policy.set(config.pose_at(s), kActions[best_action]);
  }
  return {ValueFunction(config.width(), config.height(), std::move(v)), std::move(policy),
          iterations, residual};
}

double bellman_residual(const GridConfig& config, const ValueFunction& values,
                        const SolverParams& params, Dynamics dynamics) {
  const Model model = build_model(config, dynamics);
  std::vector<double> next(config.size(), 0.0);
  return sweep(model, values.values(), next, params.gamma);
}

std::string_view to_string(RolloutOutcome o) noexcept {
  switch (o) {
    case RolloutOutcome::Success: return "success";
    case RolloutOutcome::Failure: return "failure";
    case RolloutOutcome::Truncated: return "truncated";
  }
  return "truncated";
}

RolloutResult rollout(const GridConfig& config, const Policy& policy, Rng& rng,
                      const SolverParams& params, bool record_trajectory) {
  if (!policy.matches(config)) throw std::invalid_argument("policy does not match configuration");
  RolloutResult result;
  Pose pose = config.start();
  while (result.steps < params.step_cap) {
    const Action a = policy.action(pose);
    if (record_trajectory) result.trajectory.emplace_back(pose, a);
    const auto t = step(config, pose, a, ControlMode::Automatic, rng);
    result.total_reward += t.reward;
    ++result.steps;
    pose = t.next;
    if (t.terminal == Terminal::Success) {
      result.outcome = RolloutOutcome::Success;
      return result;
    }
    if (t.terminal == Terminal::Failure) {
      result.outcome = RolloutOutcome::Failure;
      return result;
    }
  }
  result.outcome = RolloutOutcome::Truncated;
  return result;
}

std::vector<double> reward_distribution(const GridConfig& config, const Policy& policy, int n,
                                        Rng& rng, const SolverParams& params) {
  if (n < 1) throw std::invalid_argument("sample count must be at least 1");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out.push_back(rollout(config, policy, rng, params).total_reward);
  return out;
}

namespace {

char action_glyph(std::optional<Action> a) {
  if (!a) return '-';
  switch (*a) {
    case Action::Up: return 'U';
    case Action::Down: return 'D';
    case Action::Left: return 'L';
    case Action::Right: return 'R';
  }
  return '-';
}

std::optional<Action> glyph_action(char c) {
  switch (c) {
    case 'U': return Action::Up;
    case 'D': return Action::Down;
    case 'L': return Action::Left;
    case 'R': return Action::Right;
    case '-': return std::nullopt;
    default: throw std::invalid_argument(std::string("bad policy glyph '") + c + "'");
  }
}

}  // namespace

nlohmann::json to_json(const Solution& solution, const SolverParams& params) {
  const int w = solution.policy.width();
  const int h = solution.policy.height();
  auto values = nlohmann::json::array();
  auto policy = nlohmann::json::array();
  for (int y = 0; y < h; ++y) {
    auto row = nlohmann::json::array();
    std::string glyphs;
    for (int x = 0; x < w; ++x) {
      row.push_back(solution.values.at({x, y}));
      glyphs += action_glyph(solution.policy.at({x, y}));
    }
    values.push_back(std::move(row));
    policy.push_back(std::move(glyphs));
  }
  return {{"config_id", solution.policy.config_id()},
          {"width", w},
          {"height", h},
          {"gamma", params.gamma},
          {"tolerance", params.tolerance},
          {"iterations", solution.iterations},
          {"residual", solution.residual},
          {"values", std::move(values)},
          {"policy", std::move(policy)}};
}

Solution solution_from_json(const nlohmann::json& doc) {
  const int w = doc.at("width").get<int>();
  const int h = doc.at("height").get<int>();
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  Policy policy(doc.at("config_id").get<std::string>(), w, h);
  const auto& rows = doc.at("values");
  const auto& glyph_rows = doc.at("policy");
  if (rows.size() != static_cast<std::size_t>(h) || glyph_rows.size() != static_cast<std::size_t>(h)) {
    throw std::invalid_argument("solution document has wrong row count");
  }
  for (int y = 0; y < h; ++y) {
    const auto& row = rows.at(static_cast<std::size_t>(y));
    const auto glyphs = glyph_rows.at(static_cast<std::size_t>(y)).get<std::string>();
    if (row.size() != static_cast<std::size_t>(w) || glyphs.size() != static_cast<std::size_t>(w)) {
      throw std::invalid_argument("solution document has wrong column count");
    }
    for (int x = 0; x < w; ++x) {
      values.push_back(row.at(static_cast<std::size_t>(x)).get<double>());
      policy.set({x, y}, glyph_action(glyphs[static_cast<std::size_t>(x)]));
    }
  }
  return {ValueFunction(w, h, std::move(values)), std::move(policy),
          doc.value("iterations", 0), doc.value("residual", 0.0)};
}

}  // namespace trustnav
