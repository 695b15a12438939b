#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pwanav/common.hpp"
#include "pwanav/dynamics.hpp"
#include "pwanav/geometry.hpp"
#include "pwanav/graph.hpp"
#include "pwanav/sysid.hpp"

namespace pwanav::cli {

struct DynamicsSpec {
  enum class Kind { Terrain, Affine };
  Kind kind = Kind::Terrain;
  // Affine parameters; unused for builtin models.
  Mat A;
  Mat B;
  Vec c;
};

struct TargetSpec {
  std::optional<geometry::CellId> cell;
  std::optional<Vec> state;
};

/// Everything needed to set up a mission: the (hidden) environment, the grid,
/// the control box, the prior Lipschitz constants, and the identification and
/// weighting knobs.
struct Scenario {
  DynamicsSpec dynamics;
  Box state_bounds;
  std::vector<int> grid;
  Box control_box;
  double lipschitz_df = 0.03;
  double lipschitz_g = 0.03;
  double gamma = 100.0;
  sysid::IdentificationConfig sysid;
  Vec initial_state;
  TargetSpec target;
  graph::WeightMode weight_mode = graph::WeightMode::Constant;

  std::shared_ptr<const dynamics::ControlAffineField> make_field() const;
  geometry::GridPartition make_partition() const;
  geometry::CellId target_cell(const geometry::GridPartition& partition) const;
};

/// Parses and validates a scenario document. Unknown or missing keys, wrong
/// shapes, and out-of-range values raise ConfigError naming the offending
/// field; JSON syntax errors report the line and column.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

/// The experiment setup used by the bundled terrain.json: 20×20 grid on
/// [-10, 10]², P_u = [-5, 5]², L_df = L_g = 0.03, γ = 100, N = 100.
Scenario terrain_scenario();

}  // namespace pwanav::cli
