#include "pwanav/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>

namespace pwanav::graph {

const char* to_string(EdgeStatus status) {
  switch (status) {
    case EdgeStatus::Exists: return "exists";
    case EdgeStatus::Absent: return "absent";
    case EdgeStatus::Uncertain: return "uncertain";
  }
  return "unknown";
}

const char* to_string(WeightMode mode) {
  return mode == WeightMode::Constant ? "constant" : "t0_bound";
}

ReachGraph::ReachGraph(const geometry::GridPartition& partition, double gamma, WeightMode mode)
    : gamma_(gamma), weight_mode_(mode) {
  if (!(gamma > 0.0)) throw PreconditionError("gamma must be positive");
  for (CellId id = 0; id < partition.num_cells(); ++id) {
    add_node({id, partition.center(id)});
  }
  for (CellId id = 0; id < partition.num_cells(); ++id) {
    for (CellId other : partition.neighbors(id)) {
      const auto facet = geometry::common_facet(partition, id, other);
      if (!facet) continue;
      EdgeRecord rec;
      rec.exit_facet = *facet;
      set_edge(id, other, std::move(rec));
    }
  }
}

void ReachGraph::add_node(Node node) {
  if (has_node(node.id)) throw PreconditionError("duplicate node id");
  nodes_.push_back(std::move(node));
  std::sort(nodes_.begin(), nodes_.end(), [](const Node& a, const Node& b) { return a.id < b.id; });
}

bool ReachGraph::has_node(CellId id) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), Node{id, {}},
                            [](const Node& a, const Node& b) { return a.id < b.id; });
}

void ReachGraph::set_edge(CellId src, CellId dst, EdgeRecord record) {
  edges_[{src, dst}] = std::move(record);
}

const EdgeRecord& ReachGraph::edge(CellId src, CellId dst) const {
  auto it = edges_.find({src, dst});
  if (it == edges_.end()) {
    throw PreconditionError("no edge " + std::to_string(src) + " -> " + std::to_string(dst));
  }
  return it->second;
}

EdgeRecord& ReachGraph::edge(CellId src, CellId dst) {
  return const_cast<EdgeRecord&>(std::as_const(*this).edge(src, dst));
}

std::size_t ReachGraph::count(EdgeStatus status) const {
  return static_cast<std::size_t>(std::count_if(
      edges_.begin(), edges_.end(), [&](const auto& kv) { return kv.second.status == status; }));
}

double uncertain_weight(CellId dst_cell, const std::vector<CellId>& explored,
                        double mean_known_weight, double gamma,
                        const geometry::GridPartition& partition) {
  if (explored.empty()) throw PreconditionError("uncertain weight needs an explored cell");
  const double floor = 0.5 * partition.cell_diameter();
  const Vec center = partition.center(dst_cell);
  double sum = 0.0;
  for (CellId e : explored) {
    const double d = std::max((center - partition.center(e)).norm(), floor);
    sum += 1.0 / d;
  }
  return gamma * mean_known_weight * sum / static_cast<double>(explored.size());
}

namespace {

double exists_weight(const ReachGraph& graph, const geometry::Polytope& cell, int facet,
                     const dynamics::AffineModel& model, const std::vector<Vec>& witnesses) {
  if (graph.weight_mode() == WeightMode::Constant) return 1.0;
  return reach::t0_upper_bound(cell, facet, model, witnesses, reach::EntryAlpha::worst_case());
}

CellId nearest_explored(const geometry::GridPartition& partition, CellId cell,
                        const std::map<CellId, dynamics::AffineModel>& explored) {
  const Vec c = partition.center(cell);
  CellId best = explored.begin()->first;
  double best_d = std::numeric_limits<double>::infinity();
  for (const auto& [id, model] : explored) {
    const double d = (partition.center(id) - c).norm();
    if (d < best_d) {
      best_d = d;
      best = id;
    }
  }
  return best;
}

}  // namespace

ChangeSummary update_graph(ReachGraph& graph, const geometry::GridPartition& partition,
                           const std::map<CellId, dynamics::AffineModel>& explored_models,
                           double lipschitz_df, double lipschitz_g, const Box& control_box) {
  if (explored_models.empty()) throw PreconditionError("update_graph needs an explored model");
  ChangeSummary summary;

  std::map<CellId, CellId> reference_of;
  for (auto& [key, rec] : graph.edges()) {
    (void)rec;
    const CellId src = key.first;
    if (!explored_models.count(src) && !reference_of.count(src)) {
      reference_of[src] = nearest_explored(partition, src, explored_models);
    }
  }

  for (const auto& [key, existing] : graph.edges()) {
    if (existing.definitive) continue;
    const auto [src, dst] = key;
    EdgeRecord rec = existing;
    const auto& cell = partition.cell(src);

    if (auto it = explored_models.find(src); it != explored_models.end()) {
      auto decision = reach::decide_exit_facet(cell, rec.exit_facet, it->second, control_box);
      rec.definitive = true;
      rec.reference.reset();
      rec.status = decision.status;
      rec.witnesses = std::move(decision.witnesses);
      rec.weight = rec.status == EdgeStatus::Exists
                       ? exists_weight(graph, cell, rec.exit_facet, it->second, *rec.witnesses)
                       : 0.0;
      ++summary.newly_definitive;
    } else {
      const CellId ref = reference_of.at(src);
      if (rec.reference != ref) {
        const auto& ref_model = explored_models.at(ref);
        const auto bounds = reach::deviation_bounds(ref_model, partition.center(ref),
                                                    partition.center(src), lipschitz_df,
                                                    lipschitz_g);
        auto decision =
            reach::predict_exit_facet(cell, rec.exit_facet, ref_model, bounds, control_box);
        rec.reference = ref;
        rec.status = decision.status;
        rec.witnesses = std::move(decision.witnesses);
        rec.weight = rec.status == EdgeStatus::Exists
                         ? exists_weight(graph, cell, rec.exit_facet, ref_model, *rec.witnesses)
                         : 0.0;
        ++summary.predictions_computed;
      }
    }
    if (rec.status != existing.status) ++summary.status_changes;
    graph.edge(src, dst) = std::move(rec);
  }

  double total = 0.0;
  int known = 0;
  for (const auto& [key, rec] : graph.edges()) {
    if (rec.definitive && rec.status == EdgeStatus::Exists) {
      total += rec.weight;
      ++known;
    }
  }
  graph.set_mean_known_weight(known > 0 ? total / known : 1.0);
  summary.mean_known_weight = graph.mean_known_weight();

  std::vector<CellId> explored;
  explored.reserve(explored_models.size());
  for (const auto& kv : explored_models) explored.push_back(kv.first);

  std::map<CellId, double> weight_cache;
  for (const auto& [key, rec] : graph.edges()) {
    if (rec.status != EdgeStatus::Uncertain) continue;
    const CellId dst = key.second;
    auto [it, fresh] = weight_cache.try_emplace(dst, 0.0);
    if (fresh) {
      it->second = uncertain_weight(dst, explored, graph.mean_known_weight(), graph.gamma(),
                                    partition);
    }
    graph.edge(key.first, dst).weight = it->second;
  }
  return summary;
}

std::optional<Path> shortest_path(const ReachGraph& graph, CellId src, CellId dst) {
  if (!graph.has_node(src) || !graph.has_node(dst)) throw PreconditionError("unknown node");
  if (src == dst) return Path{{src}, 0.0};

  auto usable = [](const EdgeRecord& e) {
    return e.status == EdgeStatus::Exists || e.status == EdgeStatus::Uncertain;
  };

  std::map<CellId, std::vector<std::pair<CellId, double>>> reverse;
  std::map<CellId, std::vector<std::pair<CellId, double>>> forward;
  for (const auto& [key, rec] : graph.edges()) {
    if (!usable(rec)) continue;
    if (!(rec.weight >= 0.0)) throw PreconditionError("negative or undefined edge weight");
    reverse[key.second].push_back({key.first, rec.weight});
    forward[key.first].push_back({key.second, rec.weight});
  }

  // Distances to dst over reversed edges.
  const double inf = std::numeric_limits<double>::infinity();
  std::map<CellId, double> to_dst;
  for (const auto& n : graph.nodes()) to_dst[n.id] = inf;
  using Item = std::pair<double, CellId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  to_dst[dst] = 0.0;
  queue.push({0.0, dst});
  while (!queue.empty()) {
    const auto [d, v] = queue.top();
    queue.pop();
    if (d > to_dst[v]) continue;
    auto it = reverse.find(v);
    if (it == reverse.end()) continue;
    for (const auto& [u, w] : it->second) {
      if (d + w < to_dst[u]) {
        to_dst[u] = d + w;
        queue.push({d + w, u});
      }
    }
  }
  if (!std::isfinite(to_dst[src])) return std::nullopt;

  // Walk forward, taking the smallest-id successor that stays on a shortest path.
  Path path;
  path.nodes.push_back(src);
  CellId at = src;
  while (at != dst) {
    auto& succ = forward[at];
    std::sort(succ.begin(), succ.end());
    const double tol = 1e-9 * (1.0 + to_dst[at]);
    std::optional<std::pair<CellId, double>> next;
    for (const auto& [v, w] : succ) {
      if (std::abs(w + to_dst[v] - to_dst[at]) <= tol) {
        next = {v, w};
        break;
      }
    }
    if (!next || path.nodes.size() > graph.nodes().size()) {
      throw PreconditionError("shortest-path reconstruction failed");
    }
    path.cost += next->second;
    path.nodes.push_back(next->first);
    at = next->first;
  }
  return path;
}

}  // namespace pwanav::graph
