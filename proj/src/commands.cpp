#include <filesystem>

#include <spdlog/spdlog.h>

#include "pwanav/cli.hpp"
#include "pwanav/reach.hpp"
#include "pwanav/sysid.hpp"

namespace pwanav::cli {

using nlohmann::json;
using geometry::CellId;

namespace {

std::string in_dir(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory '" + dir + "': " + ec.message());
}

json mat_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    a.push_back(row);
  }
  return a;
}

json vec_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace

graph::ReachGraph truth_graph(const Scenario& sc) {
  const auto field = sc.make_field();
  const auto partition = sc.make_partition();
  graph::ReachGraph g(partition, sc.gamma, sc.weight_mode);

  std::map<CellId, dynamics::AffineModel> models;
  double total = 0.0;
  int known = 0;
  for (const auto& [key, existing] : g.edges()) {
    const CellId src = key.first;
    auto it = models.find(src);
    if (it == models.end()) {
      it = models.emplace(src, dynamics::linearize_at(*field, partition.center(src))).first;
    }
    const auto& cell = partition.cell(src);
    graph::EdgeRecord rec = existing;
    auto decision = reach::decide_exit_facet(cell, rec.exit_facet, it->second, sc.control_box);
    rec.status = decision.status;
    rec.definitive = true;
    rec.witnesses = std::move(decision.witnesses);
    rec.weight = 0.0;
    if (rec.status == graph::EdgeStatus::Exists) {
      rec.weight = sc.weight_mode == graph::WeightMode::Constant
                       ? 1.0
                       : reach::t0_upper_bound(cell, rec.exit_facet, it->second, *rec.witnesses,
                                               reach::EntryAlpha::worst_case());
      total += rec.weight;
      ++known;
    }
    g.edge(key.first, key.second) = std::move(rec);
  }
  g.set_mean_known_weight(known > 0 ? total / known : 1.0);
  return g;
}

int cmd_plan(const PlanOptions& opts) {
  planner::MissionConfig cfg;
  try {
    cfg.scenario = load_scenario(opts.scenario_path);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  }
  cfg.seed = opts.seed.value_or(cfg.scenario.sysid.seed);
  if (opts.max_iterations) {
    if (*opts.max_iterations <= 0) {
      spdlog::error("--max-iters must be positive");
      return kExitConfig;
    }
    cfg.max_iterations = *opts.max_iterations;
  }

  const planner::MissionLog log = planner::run_mission(cfg);
  const auto partition = cfg.scenario.make_partition();
  const int n = partition.dim();
  const int m = cfg.scenario.control_box.dim();

  ensure_dir(opts.out_dir);
  write_file_atomic(in_dir(opts.out_dir, "trajectory.csv"), trajectory_csv(log, n, m));
  write_file_atomic(in_dir(opts.out_dir, "graph_final.json"), graph_to_json(log.graph).dump(1));
  write_file_atomic(in_dir(opts.out_dir, "mission.json"), mission_to_json(log).dump(1));
  write_file_atomic(in_dir(opts.out_dir, "trajectory.svg"), render_trajectory_svg(partition, log));

  GraphFigure fig;
  for (const auto& kv : log.models) fig.explored.insert(kv.first);
  fig.initial = log.initial_cell;
  fig.target = log.target_cell;
  for (const auto& p : log.trajectory) fig.trajectory.push_back(p.x);
  write_file_atomic(in_dir(opts.out_dir, "graph.svg"), render_graph_svg(partition, log.graph, fig));

  switch (log.status) {
    case planner::TerminalStatus::ReachedTarget: return kExitOk;
    case planner::TerminalStatus::Stuck:
      spdlog::error("stuck: {}", log.diagnostic);
      return kExitStuck;
    case planner::TerminalStatus::IterationCap:
      spdlog::error("{}", log.diagnostic);
      return kExitIterationCap;
  }
  return kExitIterationCap;
}

int cmd_truth_graph(const std::string& scenario_path, const std::string& out_dir) {
  Scenario sc;
  try {
    sc = load_scenario(scenario_path);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  }
  const auto g = truth_graph(sc);
  const auto partition = sc.make_partition();
  spdlog::info("truth graph: {} exists, {} absent", g.count(graph::EdgeStatus::Exists),
               g.count(graph::EdgeStatus::Absent));

  ensure_dir(out_dir);
  write_file_atomic(in_dir(out_dir, "graph_truth.json"), graph_to_json(g).dump(1));
  GraphFigure fig;
  for (CellId id = 0; id < partition.num_cells(); ++id) fig.explored.insert(id);
  write_file_atomic(in_dir(out_dir, "truth.svg"), render_graph_svg(partition, g, fig));
  return kExitOk;
}

int cmd_sysid_check(const SysidCheckOptions& opts) {
  Scenario sc;
  try {
    sc = load_scenario(opts.scenario_path);
  } catch (const ConfigError& e) {
    spdlog::error("{}", e.what());
    return kExitConfig;
  }
  const auto partition = sc.make_partition();
  if (opts.cell < 0 || opts.cell >= partition.num_cells()) {
    spdlog::error("--cell {} is out of range [0, {})", opts.cell, partition.num_cells());
    return kExitConfig;
  }
  sysid::IdentificationConfig idc = sc.sysid;
  if (opts.samples) {
    if (*opts.samples <= 0) {
      spdlog::error("--samples must be positive");
      return kExitConfig;
    }
    idc.samples = *opts.samples;
  }
  if (opts.seed) idc.seed = *opts.seed;

  const auto field = sc.make_field();
  const Vec start = partition.center(opts.cell);
  sysid::IdentificationResult id;
  try {
    id = sysid::identify(*field, start, idc, sc.control_box);
  } catch (const IdentificationFailedError& e) {
    spdlog::error("identification failed: {}", e.what());
    return kExitIdentification;
  }
  const auto truth = dynamics::linearize_at(*field, id.model.center);
  const Mat eA = (id.model.A - truth.A).cwiseAbs();
  const Mat eB = (id.model.B - truth.B).cwiseAbs();
  const Vec ec = (id.model.c - truth.c).cwiseAbs();
  const double max_entry = std::max({eA.maxCoeff(), eB.maxCoeff(), ec.maxCoeff()});

  json report = {
      {"cell", opts.cell},
      {"start_state", vec_json(start)},
      {"samples", idc.samples},
      {"time_step", idc.time_step},
      {"seed", idc.seed},
      {"identified", {{"A", mat_json(id.model.A)}, {"B", mat_json(id.model.B)},
                      {"c", vec_json(id.model.c)}, {"center", vec_json(id.model.center)}}},
      {"analytic", {{"A", mat_json(truth.A)}, {"B", mat_json(truth.B)}, {"c", vec_json(truth.c)},
                    {"center", vec_json(truth.center)}}},
      {"abs_error", {{"A", mat_json(eA)}, {"B", mat_json(eB)}, {"c", vec_json(ec)}}},
      {"max_entry_error", max_entry},
      {"residual_rms", id.residual_rms},
      {"ridge_used", id.ridge_used},
      {"final_state", vec_json(id.final_state)},
  };
  ensure_dir(opts.out_dir);
  write_file_atomic(in_dir(opts.out_dir, "sysid_report.json"), report.dump(1));
  spdlog::info("cell {}: max entry error {:.3g}", opts.cell, max_entry);
  return kExitOk;
}

}  // namespace pwanav::cli
