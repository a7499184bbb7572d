#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trustnav/world.hpp"

namespace trustnav {

// Independent per-cell hazard probabilities. Start is placed on the left
// edge and goal on the right edge, each on a random row.
struct GeneratorParams {
  int width = kDefaultWidth;
  int height = kDefaultHeight;
  double obstacle_density = 0.10;
  double debris_density = 0.30;
  double crater_density = 0.10;
  int max_retries = 1000;
  std::string id_prefix = "cfg";
};

// Rejection-samples until the goal is reachable. Throws GridError when the
// densities are invalid or no reachable layout turns up within max_retries.
GridConfig generate_config(Rng& rng, const GeneratorParams& params, std::string id);

// Config i is drawn from its own seed derived from (seed, i), so a set is a
// prefix of any larger set generated with the same seed.
std::vector<GridConfig> generate_configs(std::uint64_t seed, int count,
                                         const GeneratorParams& params);

}  // namespace trustnav
