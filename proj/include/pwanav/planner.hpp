#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pwanav/dynamics.hpp"
#include "pwanav/graph.hpp"
#include "pwanav/scenario.hpp"

namespace pwanav::planner {

using geometry::CellId;

struct MissionConfig {
  cli::Scenario scenario;
  int max_iterations = 400;
  /// ζ: failed transits through one (cell, facet) before the edge is excluded.
  int stuck_retry_limit = 3;
  /// κ: transit watchdog as a multiple of the T0 bound.
  double transit_timeout_factor = 3.0;
  std::uint64_t seed = 0;
  double integration_step = 1e-3;
};

enum class TerminalStatus { ReachedTarget, Stuck, IterationCap };

struct ModelSummary {
  dynamics::AffineModel model;
  double residual_rms = 0.0;
  double displacement = 0.0;
  bool ridge_used = false;
};

struct TransitRecord {
  CellId from = 0;
  CellId to = 0;
  int exit_facet = 0;
  double t0_bound = 0.0;
  double timeout = 0.0;
  dynamics::ExitRecord exit;
  CellId arrived = 0;
  bool vertex_inputs_in_box = true;
};

struct IterationRecord {
  int iteration = 0;
  CellId cell = 0;
  /// Set when this iteration identified the cell.
  std::optional<ModelSummary> identified;
  std::vector<CellId> path;
  double path_cost = 0.0;
  std::optional<TransitRecord> transit;
  std::string note;
};

struct TrajectoryPoint {
  double t = 0.0;
  Vec x;
  Vec u;
  CellId cell = -1;
};

struct EdgeOverride {
  int iteration = 0;
  CellId src = 0;
  CellId dst = 0;
  int failures = 0;
};

struct MissionLog {
  CellId initial_cell = 0;
  CellId target_cell = 0;
  std::vector<IterationRecord> iterations;
  std::vector<TrajectoryPoint> trajectory;
  std::vector<EdgeOverride> overrides;
  std::map<CellId, dynamics::AffineModel> models;
  graph::ReachGraph graph;
  TerminalStatus status = TerminalStatus::IterationCap;
  std::string diagnostic;
};

/// Explore-and-navigate loop: identify the current cell, refresh the graph,
/// search for a path to the target, and drive through the first edge with the
/// synthesized controller until the target cell is entered or a cap triggers.
/// Throws ConfigError when the initial state lies outside the state domain.
MissionLog run_mission(const MissionConfig& cfg);

/// Per-cell identification seed derived from the mission seed.
std::uint64_t cell_seed(std::uint64_t mission_seed, CellId cell);

const char* to_string(TerminalStatus status);

}  // namespace pwanav::planner
