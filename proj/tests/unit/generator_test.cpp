#include <gtest/gtest.h>

#include <trustnav/generator.hpp>

#include "oracles.hpp"

using namespace trustnav;

TEST(Generator, ZeroDensitiesGiveEmptyDefaultGrid) {
  GeneratorParams p;
  p.obstacle_density = p.debris_density = p.crater_density = 0.0;
  const auto configs = generate_configs(1, 5, p);
  ASSERT_EQ(configs.size(), 5u);
  for (const auto& c : configs) {
    EXPECT_EQ(c.width(), 31);
    EXPECT_EQ(c.height(), 8);
    for (Cell cell : c.cells()) EXPECT_EQ(cell, Cell::Free);
    EXPECT_EQ(c.start().x, 0);
    EXPECT_EQ(c.goal().x, 30);
  }
}

TEST(Generator, SameSeedSameSet) {
  const auto a = generate_configs(42, 20, {});
  const auto b = generate_configs(42, 20, {});
  EXPECT_EQ(a, b);
  const auto c = generate_configs(43, 20, {});
  EXPECT_NE(a, c);
}

TEST(Generator, SetIsPrefixOfLargerSet) {
  const auto small = generate_configs(9, 5, {});
  const auto large = generate_configs(9, 12, {});
  for (std::size_t i = 0; i < small.size(); ++i) EXPECT_EQ(small[i], large[i]);
}

TEST(Generator, HundredConfigsAllValid) {
  const auto configs = generate_configs(7, 100, {});
  ASSERT_EQ(configs.size(), 100u);
  std::set<std::string> ids;
  for (const auto& c : configs) {
    ids.insert(c.id());
    EXPECT_TRUE(oracle::bfs_distance(c).has_value()) << c.id();
    EXPECT_EQ(c.at(c.start()), Cell::Free);
    EXPECT_EQ(c.at(c.goal()), Cell::Free);
    // Re-validating through the public constructor must succeed.
    EXPECT_NO_THROW(GridConfig::create(c.id(), c.width(), c.height(), c.cells(), c.start(), c.goal()));
  }
  EXPECT_EQ(ids.size(), 100u);
}

TEST(Generator, InfeasibleDensitiesFail) {
  GeneratorParams p;
  p.obstacle_density = 0.95;
  p.debris_density = 0.0;
  p.crater_density = 0.0;
  p.max_retries = 50;
  EXPECT_THROW(generate_configs(1, 1, p), GridError);
}

TEST(Generator, InvalidDensitiesRejected) {
  GeneratorParams p;
  p.obstacle_density = 0.6;
  p.debris_density = 0.6;
  EXPECT_THROW(generate_configs(1, 1, p), GridError);
  p = {};
  p.crater_density = -0.1;
  EXPECT_THROW(generate_configs(1, 1, p), GridError);
}
