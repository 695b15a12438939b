#include "pwanav/planner.hpp"

#include <spdlog/spdlog.h>

#include "pwanav/reach.hpp"
#include "pwanav/sysid.hpp"

namespace pwanav::planner {

const char* to_string(TerminalStatus status) {
  switch (status) {
    case TerminalStatus::ReachedTarget: return "reached_target";
    case TerminalStatus::Stuck: return "stuck";
    case TerminalStatus::IterationCap: return "iteration_cap";
  }
  return "unknown";
}

std::uint64_t cell_seed(std::uint64_t mission_seed, CellId cell) {
  // splitmix64 finalizer
  std::uint64_t z = mission_seed + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(cell) + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

class Mission {
 public:
  explicit Mission(const MissionConfig& cfg)
      : cfg_(cfg),
        sc_(cfg.scenario),
        field_(sc_.make_field()),
        partition_(sc_.make_partition()) {
    if (!sc_.state_bounds.contains(sc_.initial_state)) {
      throw ConfigError("initial_state lies outside state_bounds");
    }
    if (cfg.max_iterations <= 0 || cfg.stuck_retry_limit <= 0 ||
        !(cfg.transit_timeout_factor > 0.0) || !(cfg.integration_step > 0.0)) {
      throw ConfigError("mission limits must be positive");
    }
    log_.graph = graph::ReachGraph(partition_, sc_.gamma, sc_.weight_mode);
    x_ = sc_.initial_state;
    current_ = geometry::locate(partition_, x_);
    log_.initial_cell = current_;
    log_.target_cell = sc_.target_cell(partition_);
    append(0.0, x_, Vec::Zero(field_->input_dim()));
  }

  MissionLog run() && {
    if (current_ == log_.target_cell) return finish(TerminalStatus::ReachedTarget, "");
    for (int iter = 0; iter < cfg_.max_iterations; ++iter) {
      if (auto status = step(iter)) return finish(*status, diagnostic_);
      if (current_ == log_.target_cell) return finish(TerminalStatus::ReachedTarget, "");
    }
    return finish(TerminalStatus::IterationCap,
                  "iteration cap of " + std::to_string(cfg_.max_iterations) + " reached");
  }

 private:
  // One loop iteration; returns a terminal status when the mission must stop.
  std::optional<TerminalStatus> step(int iter) {
    IterationRecord rec;
    rec.iteration = iter;
    rec.cell = current_;

    if (!log_.models.count(current_)) {
      identify_current(rec);
      if (!sc_.state_bounds.contains(x_)) {
        log_.iterations.push_back(std::move(rec));
        diagnostic_ = "state left the domain during identification";
        return TerminalStatus::Stuck;
      }
      const CellId now = geometry::locate(partition_, x_);
      if (now != current_) {
        rec.note = "identification drifted into cell " + std::to_string(now);
        spdlog::debug("iteration {}: {}", iter, rec.note);
        current_ = now;
        log_.iterations.push_back(std::move(rec));
        return std::nullopt;
      }
    }

    graph::update_graph(log_.graph, partition_, log_.models, sc_.lipschitz_df, sc_.lipschitz_g,
                        sc_.control_box);
    const auto path = graph::shortest_path(log_.graph, current_, log_.target_cell);
    if (!path) {
      rec.note = "no path to target";
      log_.iterations.push_back(std::move(rec));
      diagnostic_ = "no path from cell " + std::to_string(current_) + " to target cell " +
                    std::to_string(log_.target_cell);
      return TerminalStatus::Stuck;
    }
    rec.path = path->nodes;
    rec.path_cost = path->cost;
    const CellId next = path->nodes.at(1);

    graph::EdgeRecord& edge = log_.graph.edge(current_, next);
    const auto& cell = partition_.cell(current_);
    const auto& model = log_.models.at(current_);
    if (!edge.definitive) {
      auto decision = reach::decide_exit_facet(cell, edge.exit_facet, model, sc_.control_box);
      edge.definitive = true;
      edge.reference.reset();
      edge.status = decision.status;
      edge.witnesses = std::move(decision.witnesses);
      edge.weight = 0.0;
      if (edge.status == graph::EdgeStatus::Exists) {
        edge.weight = sc_.weight_mode == graph::WeightMode::Constant
                          ? 1.0
                          : reach::t0_upper_bound(cell, edge.exit_facet, model, *edge.witnesses,
                                                  reach::EntryAlpha::worst_case());
      }
    }
    if (edge.status != graph::EdgeStatus::Exists) {
      rec.note = "edge resolved absent; replanning";
      log_.iterations.push_back(std::move(rec));
      return std::nullopt;
    }

    TransitRecord tr;
    tr.from = current_;
    tr.to = next;
    tr.exit_facet = edge.exit_facet;
    for (const auto& u : *edge.witnesses) {
      tr.vertex_inputs_in_box = tr.vertex_inputs_in_box && sc_.control_box.contains(u);
    }
    const reach::PiecewiseControllerLaw law(cell, *edge.witnesses);
    tr.t0_bound = reach::t0_upper_bound(cell, edge.exit_facet, model, *edge.witnesses,
                                        reach::EntryAlpha::at(x_));
    tr.timeout = std::max(cfg_.transit_timeout_factor * tr.t0_bound, 10.0 * cfg_.integration_step);

    std::vector<dynamics::TrajectorySample> samples;
    dynamics::SimulationOptions opts;
    opts.domain = sc_.state_bounds;
    opts.recorder = &samples;
    opts.time_offset = t_;
    tr.exit = dynamics::simulate_closed_loop(*field_, law, cell, x_, cfg_.integration_step,
                                             tr.timeout, sc_.control_box, opts);
    for (const auto& s : samples) append(s.t, s.x, s.u);
    t_ += tr.exit.exit_time;
    x_ = tr.exit.exit_state;

    if (tr.exit.outcome == dynamics::ExitOutcome::LeftDomain) {
      tr.arrived = -1;
      rec.transit = std::move(tr);
      log_.iterations.push_back(std::move(rec));
      diagnostic_ = "state left the domain during a transit";
      return TerminalStatus::Stuck;
    }

    const bool failed = tr.exit.outcome == dynamics::ExitOutcome::Timeout ||
                        tr.exit.exit_facet != edge.exit_facet;
    if (failed) {
      int& count = failures_[{current_, edge.exit_facet}];
      ++count;
      rec.note = tr.exit.outcome == dynamics::ExitOutcome::Timeout ? "transit timed out"
                                                                   : "left through another facet";
      if (count >= cfg_.stuck_retry_limit && !edge.overridden) {
        edge.status = graph::EdgeStatus::Absent;
        edge.overridden = true;
        edge.definitive = true;
        edge.weight = 0.0;
        edge.witnesses.reset();
        log_.overrides.push_back({iter, current_, next, count});
        spdlog::info("edge {} -> {} excluded after {} failed transits", current_, next, count);
      }
    }

    current_ = geometry::locate(partition_, x_);
    tr.arrived = current_;
    spdlog::debug("iteration {}: transit {} -> {} arrived in {} at t = {:.4f}", iter, tr.from,
                  tr.to, tr.arrived, t_);
    rec.transit = std::move(tr);
    log_.iterations.push_back(std::move(rec));
    return std::nullopt;
  }

  void identify_current(IterationRecord& rec) {
    sysid::IdentificationConfig idc = sc_.sysid;
    idc.seed = cell_seed(cfg_.seed, current_);
    const Vec start = x_;
    auto id = sysid::identify(*field_, x_, idc, sc_.control_box);
    for (const auto& s : id.samples) append(t_ + s.t, s.x, s.u);
    t_ += idc.samples * idc.time_step;
    x_ = id.final_state;
    append(t_, x_, Vec::Zero(field_->input_dim()));

    ModelSummary summary;
    summary.model = id.model;
    summary.residual_rms = id.residual_rms;
    summary.displacement = (x_ - start).norm();
    summary.ridge_used = id.ridge_used;
    spdlog::debug("identified cell {} (residual {:.3g}, displacement {:.3f})", current_,
                  id.residual_rms, summary.displacement);
    rec.identified = std::move(summary);
    log_.models.emplace(current_, std::move(id.model));
  }

  void append(double t, const Vec& x, const Vec& u) {
    if (!log_.trajectory.empty() && !(t > log_.trajectory.back().t)) return;
    const CellId cell = sc_.state_bounds.contains(x) ? geometry::locate(partition_, x) : -1;
    log_.trajectory.push_back({t, x, u, cell});
  }

  MissionLog finish(TerminalStatus status, std::string diagnostic) {
    log_.status = status;
    log_.diagnostic = std::move(diagnostic);
    spdlog::info("mission finished: {} after {} iterations{}{}", to_string(status),
                 log_.iterations.size(), log_.diagnostic.empty() ? "" : ": ", log_.diagnostic);
    return std::move(log_);
  }

  const MissionConfig& cfg_;
  const cli::Scenario& sc_;
  std::shared_ptr<const dynamics::ControlAffineField> field_;
  geometry::GridPartition partition_;
  MissionLog log_;
  std::map<std::pair<CellId, int>, int> failures_;
  std::string diagnostic_;
  Vec x_;
  double t_ = 0.0;
  CellId current_ = 0;
};

}  // namespace

MissionLog run_mission(const MissionConfig& cfg) { return Mission(cfg).run(); }

}  // namespace pwanav::planner
