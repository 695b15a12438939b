#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>

#include <json.hpp>

#include "pwanav/graph.hpp"
#include "pwanav/planner.hpp"
#include "pwanav/scenario.hpp"

namespace pwanav::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitStuck = 2,
  kExitIterationCap = 3,
  kExitIdentification = 4,
};

// -- serialization ----------------------------------------------------------

/// {"nodes":[{"id","center"}], "edges":[{"src","dst","status","weight","definitive",...}]}
/// plus the graph-level and per-edge fields needed for a lossless reload.
nlohmann::json graph_to_json(const graph::ReachGraph& graph);
graph::ReachGraph graph_from_json(const nlohmann::json& doc);

/// Header t,x1..xn,u1..um,cell_id; values printed with 17 significant digits.
std::string trajectory_csv(const planner::MissionLog& log, int state_dim, int input_dim);

nlohmann::json mission_to_json(const planner::MissionLog& log);

/// One rect per cell and one path for the trajectory (projected on the first
/// two state coordinates).
std::string render_trajectory_svg(const geometry::GridPartition& partition,
                                  const planner::MissionLog& log);

struct GraphFigure {
  std::set<geometry::CellId> explored;
  std::optional<geometry::CellId> initial;
  std::optional<geometry::CellId> target;
  /// Drawn as a single path when non-empty.
  std::vector<Vec> trajectory;
};

/// Cells colored by exploration status, edges as arrows colored by status
/// (exists blue, absent red, uncertain grey).
std::string render_graph_svg(const geometry::GridPartition& partition,
                             const graph::ReachGraph& graph, const GraphFigure& figure);

/// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

// -- subcommands --------------------------------------------------------------

struct PlanOptions {
  std::string scenario_path;
  std::string out_dir;
  std::optional<int> max_iterations;
  std::optional<std::uint64_t> seed;
};

/// Runs a mission and writes trajectory.csv, graph_final.json, mission.json,
/// trajectory.svg and graph.svg. Returns 0 on reaching the target, 2 when
/// stuck, 3 at the iteration cap, 1 on a malformed scenario.
int cmd_plan(const PlanOptions& opts);

/// Linearizes at every cell center and decides every adjacent (cell, facet)
/// pair; writes graph_truth.json and truth.svg.
int cmd_truth_graph(const std::string& scenario_path, const std::string& out_dir);

struct SysidCheckOptions {
  std::string scenario_path;
  std::string out_dir;
  geometry::CellId cell = 0;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
};

/// Identifies the model at the cell center and writes sysid_report.json with
/// the recovered model, the analytic linearization at the model center and the
/// entrywise error. Returns 4 when identification fails.
int cmd_sysid_check(const SysidCheckOptions& opts);

/// Ground-truth graph: every edge decided from the analytic linearization at
/// its source cell center.
graph::ReachGraph truth_graph(const Scenario& scenario);

}  // namespace pwanav::cli
