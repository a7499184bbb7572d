#include "trustnav/generator.hpp"

#include <cstdio>

namespace trustnav {

GridConfig generate_config(Rng& rng, const GeneratorParams& params, std::string id) {
  const double total = params.obstacle_density + params.debris_density + params.crater_density;
  if (params.obstacle_density < 0 || params.debris_density < 0 || params.crater_density < 0 ||
      total > 1.0) {
    throw GridError("hazard densities must be non-negative and sum to at most 1");
  }
  if (params.width < 2 || params.height < 1) throw GridError("generator needs width >= 2");

  const auto n = static_cast<std::size_t>(params.width) * static_cast<std::size_t>(params.height);
  std::uniform_real_distribution<double> unit{0.0, 1.0};
  for (int attempt = 0; attempt < params.max_retries; ++attempt) {
    const Pose start{0, static_cast<int>(uniform_index(rng, static_cast<std::size_t>(params.height)))};
    const Pose goal{params.width - 1,
                    static_cast<int>(uniform_index(rng, static_cast<std::size_t>(params.height)))};
    std::vector<Cell> cells(n, Cell::Free);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = unit(rng);
      if (u < params.obstacle_density) {
        cells[i] = Cell::Obstacle;
      } else if (u < params.obstacle_density + params.debris_density) {
        cells[i] = Cell::Debris;
      } else if (u < total) {
        cells[i] = Cell::Crater;
      }
    }
    auto at = [&](Pose p) -> Cell& {
      return cells[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(params.width) +
                   static_cast<std::size_t>(p.x)];
    };
    at(start) = Cell::Free;
    at(goal) = Cell::Free;
    if (goal_reachable(params.width, params.height, cells, start, goal)) {
      return GridConfig::create(std::move(id), params.width, params.height, std::move(cells),
                                start, goal);
    }
  }
  throw GridError("no reachable layout after " + std::to_string(params.max_retries) +
                  " attempts; densities infeasible");
}

std::vector<GridConfig> generate_configs(std::uint64_t seed, int count,
                                         const GeneratorParams& params) {
  std::vector<GridConfig> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    Rng rng{derive_seed(seed, static_cast<std::uint64_t>(i))};
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "%03d", i);
    out.push_back(generate_config(rng, params, params.id_prefix + "-" + suffix));
  }
  return out;
}

}  // namespace trustnav
