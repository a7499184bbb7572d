#include <gtest/gtest.h>

#include <map>
#include <numeric>

#include <trustnav/world.hpp>

#include "oracles.hpp"

using namespace trustnav;

namespace {

GridConfig grid(std::string_view text) { return parse_grid(text, "t"); }

double total_probability(const std::vector<WeightedPose>& d) {
  return std::accumulate(d.begin(), d.end(), 0.0,
                         [](double acc, const WeightedPose& w) { return acc + w.probability; });
}

}  // namespace

TEST(ParseGrid, SmallestMap) {
  const auto g = grid("S.G");
  EXPECT_EQ(g.width(), 3);
  EXPECT_EQ(g.height(), 1);
  EXPECT_EQ(g.start(), (Pose{0, 0}));
  EXPECT_EQ(g.goal(), (Pose{2, 0}));
  for (Cell c : g.cells()) EXPECT_EQ(c, Cell::Free);
}

TEST(ParseGrid, UnreachableGoalRejected) {
  EXPECT_THROW(grid("S#G"), GridError);
  EXPECT_THROW(grid("SOG"), GridError);
  EXPECT_NO_THROW(grid("S~G"));
}

TEST(ParseGrid, DuplicateStartReportsLocation) {
  try {
    grid("SG\nSG");
    FAIL() << "expected a parse error";
  } catch (const GridParseError& e) {
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), 1);
  }
}

TEST(ParseGrid, UnknownCharacterReportsLocation) {
  try {
    grid("S..\n.x.\n..G");
    FAIL() << "expected a parse error";
  } catch (const GridParseError& e) {
    EXPECT_EQ(e.row(), 2);
    EXPECT_EQ(e.column(), 2);
  }
}

TEST(ParseGrid, RaggedRowsRejected) {
  try {
    grid("S..\n..\n..G");
    FAIL() << "expected a parse error";
  } catch (const GridParseError& e) {
    EXPECT_EQ(e.row(), 2);
  }
}

TEST(ParseGrid, MissingGoalRejected) { EXPECT_THROW(grid("S.."), GridParseError); }

TEST(ParseGrid, AcceptsCrlfAndTrailingNewline) {
  const auto g = grid("S.~\r\n#OG\r\n");
  EXPECT_EQ(g.height(), 2);
  EXPECT_EQ(g.at({2, 0}), Cell::Debris);
  EXPECT_EQ(g.at({1, 1}), Cell::Crater);
}

TEST(GridConfig, CreateValidatesPlacement) {
  std::vector<Cell> cells(3, Cell::Free);
  EXPECT_THROW(GridConfig::create("x", 3, 1, cells, {0, 0}, {0, 0}), GridError);
  EXPECT_THROW(GridConfig::create("x", 3, 1, cells, {0, 0}, {3, 0}), GridError);
  EXPECT_THROW(GridConfig::create("x", 3, 1, {Cell::Free, Cell::Free}, {0, 0}, {2, 0}), GridError);
  cells[2] = Cell::Debris;
  EXPECT_THROW(GridConfig::create("x", 3, 1, cells, {0, 0}, {2, 0}), GridError);
}

TEST(GridFormats, AsciiAndJsonRoundTrip) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto g = oracle::random_valid_grid(rng, 9, 5, 0.15, 0.15, 0.1, "r" + std::to_string(i));
    EXPECT_EQ(parse_grid(to_ascii(g), g.id()), g);
    EXPECT_EQ(grid_from_json(to_json(g)), g);
  }
}

TEST(GridFormats, JsonListsHazardsOnly) {
  const auto j = to_json(grid("S#~\n..G\nO.."));
  EXPECT_EQ(j["obstacles"], nlohmann::json::parse("[[1,0]]"));
  EXPECT_EQ(j["debris"], nlohmann::json::parse("[[2,0]]"));
  EXPECT_EQ(j["craters"], nlohmann::json::parse("[[0,2]]"));
  EXPECT_EQ(j["start"], nlohmann::json::parse("[0,0]"));
  EXPECT_EQ(j["goal"], nlohmann::json::parse("[2,1]"));
}

TEST(Transition, FreeMoveIsDeterministic) {
  const auto g = grid("...\nS..\n..G");
  const auto d = transition_distribution(g, {0, 1}, Action::Right);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], (WeightedPose{{1, 1}, 1.0}));
}

TEST(Transition, DebrisWithFourOpenNeighbours) {
  const auto g = grid("...\nS~.\n..G");
  auto d = transition_distribution(g, {0, 1}, Action::Right);
  std::map<Pose, double> by_pose;
  for (const auto& w : d) by_pose[w.pose] += w.probability;
  const std::map<Pose, double> expected{{{1, 0}, 0.25}, {{1, 2}, 0.25}, {{0, 1}, 0.25}, {{2, 1}, 0.25}};
  EXPECT_EQ(by_pose, expected);
}

TEST(Transition, DebrisNeighboursExcludeObstaclesButKeepCraters) {
  const auto g = grid(".#.\nS~O\n..G");
  std::map<Pose, double> by_pose;
  for (const auto& w : transition_distribution(g, {0, 1}, Action::Right)) by_pose[w.pose] += w.probability;
  ASSERT_EQ(by_pose.size(), 3u);
  EXPECT_DOUBLE_EQ(by_pose[(Pose{2, 1})], 1.0 / 3.0);
  EXPECT_FALSE(by_pose.count({1, 0}));
}

TEST(Transition, BoundaryBlocks) {
  const auto g = grid("S.G");
  const auto d = transition_distribution(g, {0, 0}, Action::Left);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d[0], (WeightedPose{{0, 0}, 1.0}));
}

TEST(Transition, DebrisInCorridorSplitsBetweenEnds) {
  const auto g = grid("S~G");
  const auto d = transition_distribution(g, {0, 0}, Action::Right);
  std::map<Pose, double> by_pose;
  for (const auto& w : d) by_pose[w.pose] += w.probability;
  EXPECT_DOUBLE_EQ(by_pose[(Pose{0, 0})], 0.5);
  EXPECT_DOUBLE_EQ(by_pose[(Pose{2, 0})], 0.5);
}

TEST(Transition, RejectsBadPoses) {
  const auto g = grid("S.G");
  EXPECT_THROW(transition_distribution(g, {5, 0}, Action::Left), std::out_of_range);
  EXPECT_THROW(transition_distribution(g, {2, 0}, Action::Left), std::invalid_argument);
}

TEST(Transition, PropertySupportAndMass) {
  Rng rng(2024);
  for (int i = 0; i < 200; ++i) {
    const auto g = oracle::random_valid_grid(rng, 7, 6, 0.2, 0.25, 0.1);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const Pose p = g.pose_at(k);
      if (g.at(p) == Cell::Obstacle || g.is_terminal(p)) continue;
      for (Action a : kActions) {
        for (const auto& dist : {transition_distribution(g, p, a), manual_transition(g, p, a)}) {
          EXPECT_NEAR(total_probability(dist), 1.0, 1e-12);
          for (const auto& w : dist) {
            ASSERT_TRUE(g.in_bounds(w.pose));
            EXPECT_NE(g.at(w.pose), Cell::Obstacle);
            EXPECT_GT(w.probability, 0.0);
          }
        }
      }
    }
  }
}

TEST(Reward, AdditiveComposition) {
  const auto g = grid("S.O\n..G");
  EXPECT_EQ(reward(g, {0, 0}, Action::Right, {1, 0}), -1.0);
  EXPECT_EQ(reward(g, {1, 1}, Action::Right, {2, 1}), 99.0);
  EXPECT_EQ(reward(g, {1, 0}, Action::Right, {2, 0}), -101.0);
}

TEST(Step, ManualModeIgnoresDebris) {
  const auto g = grid("...\nS~.\n..G");
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto r = step(g, {0, 1}, Action::Right, ControlMode::Manual, rng);
    EXPECT_EQ(r.next, (Pose{1, 1}));
    EXPECT_FALSE(r.deflected);
  }
}

TEST(Step, CraterFailsInBothModes) {
  const auto g = grid("SO.\n..G");
  for (ControlMode m : {ControlMode::Manual, ControlMode::Automatic}) {
    Rng rng(1);
    const auto r = step(g, {0, 0}, Action::Right, m, rng);
    EXPECT_EQ(r.terminal, Terminal::Failure);
    EXPECT_EQ(r.reward, -101.0);
  }
}

TEST(Step, ObstacleCostsAnAction) {
  const auto g = grid("S#.\n..G");
  Rng rng(1);
  const auto r = step(g, {0, 0}, Action::Right, ControlMode::Automatic, rng);
  EXPECT_EQ(r.next, (Pose{0, 0}));
  EXPECT_EQ(r.reward, -1.0);
  EXPECT_EQ(r.terminal, Terminal::None);
}

TEST(Step, GoalSucceeds) {
  const auto g = grid("S.G");
  Rng rng(1);
  const auto r = step(g, {1, 0}, Action::Right, ControlMode::Automatic, rng);
  EXPECT_EQ(r.terminal, Terminal::Success);
  EXPECT_EQ(r.reward, 99.0);
}

TEST(Step, TerminalPoseRejected) {
  const auto g = grid("S.G");
  Rng rng(1);
  EXPECT_THROW(step(g, {2, 0}, Action::Left, ControlMode::Manual, rng), std::logic_error);
}

TEST(Step, ReplayDeterminism) {
  const auto g = grid("....\nS~~.\n.~.G");
  Rng a(77), b(77);
  for (int i = 0; i < 200; ++i) {
    const auto ra = step(g, {0, 1}, Action::Right, ControlMode::Automatic, a);
    const auto rb = step(g, {0, 1}, Action::Right, ControlMode::Automatic, b);
    EXPECT_EQ(ra.next, rb.next);
    EXPECT_EQ(ra.deflected, rb.deflected);
  }
}

TEST(Step, DeflectionFrequencies) {
  const auto g = grid("...\nS~.\n..G");
  Rng rng(5);
  std::map<Pose, int> counts;
  constexpr int kDraws = 10'000;
  for (int i = 0; i < kDraws; ++i) {
    const auto r = step(g, {0, 1}, Action::Right, ControlMode::Automatic, rng);
    EXPECT_TRUE(r.deflected);
    ++counts[r.next];
  }
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [pose, n] : counts) EXPECT_NEAR(n / double(kDraws), 0.25, 0.02);
}

TEST(SensorView, RadiusZeroIsOwnCell) {
  const auto g = parse_grid(std::string(30, '.') + "G\n" + "S" + std::string(30, '.'));
  const auto v = sensor_view(g, {4, 1}, 0);
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].pose, (Pose{4, 1}));
}

TEST(SensorView, MatchesClippedDisc) {
  Rng rng(3);
  const auto g = oracle::random_valid_grid(rng, kDefaultWidth, kDefaultHeight, 0.1, 0.1, 0.05);
  EXPECT_EQ(sensor_view(g, {15, 4}, 2).size(), 25u);
  EXPECT_EQ(sensor_view(g, {0, 0}, 2).size(), 9u);
  for (int r = 0; r <= 4; ++r) {
    for (std::size_t k = 0; k < g.size(); k += 7) {
      const Pose p = g.pose_at(k);
      std::set<Pose> got;
      for (const auto& c : sensor_view(g, p, r)) {
        got.insert(c.pose);
        EXPECT_EQ(c.cell, g.at(c.pose));
      }
      EXPECT_EQ(got, oracle::chebyshev_disc(g.width(), g.height(), p, r));
    }
  }
}

TEST(Names, WireNamesRoundTrip) {
  for (Action a : kActions) EXPECT_EQ(parse_action(to_string(a)), a);
  for (ControlMode m : {ControlMode::Manual, ControlMode::Automatic}) {
    EXPECT_EQ(parse_control_mode(to_string(m)), m);
  }
  EXPECT_THROW(parse_action("north"), std::invalid_argument);
  EXPECT_THROW(parse_control_mode("auto"), std::invalid_argument);
}
