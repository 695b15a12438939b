#pragma once

#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "pwanav/common.hpp"
#include "pwanav/dynamics.hpp"
#include "pwanav/geometry.hpp"
#include "pwanav/reach.hpp"

namespace pwanav::graph {

using geometry::CellId;
using reach::EdgeStatus;

enum class WeightMode { Constant, T0Bound };

struct EdgeRecord {
  /// Facet of the source cell shared with the destination.
  int exit_facet = 0;
  EdgeStatus status = EdgeStatus::Uncertain;
  double weight = 1.0;
  /// Set once the source cell's own model decided the edge; frozen afterwards.
  bool definitive = false;
  std::optional<std::vector<Vec>> witnesses;
  /// Explored cell whose model produced a predictive status.
  std::optional<CellId> reference;
  /// Excluded after repeated failed transits rather than by a reachability test.
  bool overridden = false;

  bool operator==(const EdgeRecord&) const = default;
};

struct Node {
  CellId id = 0;
  Vec center;

  bool operator==(const Node&) const = default;
};

using EdgeKey = std::pair<CellId, CellId>;

class ReachGraph {
 public:
  ReachGraph() = default;
  /// One node per cell and one Uncertain edge per ordered pair of cells that
  /// share a facet.
  ReachGraph(const geometry::GridPartition& partition, double gamma, WeightMode mode);

  double gamma() const { return gamma_; }
  WeightMode weight_mode() const { return weight_mode_; }
  double mean_known_weight() const { return mean_known_weight_; }
  void set_mean_known_weight(double w) { mean_known_weight_ = w; }
  void set_gamma(double gamma) { gamma_ = gamma; }
  void set_weight_mode(WeightMode mode) { weight_mode_ = mode; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const std::map<EdgeKey, EdgeRecord>& edges() const { return edges_; }

  void add_node(Node node);
  void set_edge(CellId src, CellId dst, EdgeRecord record);
  const EdgeRecord& edge(CellId src, CellId dst) const;
  EdgeRecord& edge(CellId src, CellId dst);
  bool has_edge(CellId src, CellId dst) const { return edges_.count({src, dst}) > 0; }
  bool has_node(CellId id) const;

  std::size_t count(EdgeStatus status) const;

  bool operator==(const ReachGraph&) const = default;

 private:
  std::vector<Node> nodes_;
  std::map<EdgeKey, EdgeRecord> edges_;
  double gamma_ = 100.0;
  WeightMode weight_mode_ = WeightMode::Constant;
  double mean_known_weight_ = 1.0;
};

/// w_u = γ · w̄_e · (Σ_i 1/d_i) / #explored, with d_i the center distance from
/// dst_cell to the i-th explored cell, floored at half the cell diameter.
double uncertain_weight(CellId dst_cell, const std::vector<CellId>& explored,
                        double mean_known_weight, double gamma,
                        const geometry::GridPartition& partition);

struct ChangeSummary {
  int newly_definitive = 0;
  int predictions_computed = 0;
  int status_changes = 0;
  double mean_known_weight = 1.0;
};

/// Refreshes every non-definitive edge: sources with an identified model get a
/// definitive decision, the others a prediction from the nearest explored cell
/// (by center distance, lowest id on ties) under the deviation bounds between
/// the two centers. Uncertain edges are then reweighted. Definitive records
/// are never recomputed. Requires at least one explored model.
ChangeSummary update_graph(ReachGraph& graph, const geometry::GridPartition& partition,
                           const std::map<CellId, dynamics::AffineModel>& explored_models,
                           double lipschitz_df, double lipschitz_g, const Box& control_box);

struct Path {
  std::vector<CellId> nodes;
  double cost = 0.0;
};

/// Dijkstra over Exists and Uncertain edges. Among minimum-cost paths the
/// lexicographically smallest node sequence is returned.
std::optional<Path> shortest_path(const ReachGraph& graph, CellId src, CellId dst);

const char* to_string(EdgeStatus status);
const char* to_string(WeightMode mode);

}  // namespace pwanav::graph
