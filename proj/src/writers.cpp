#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pwanav/cli.hpp"

namespace pwanav::cli {

using nlohmann::json;
using geometry::CellId;
using graph::EdgeStatus;

namespace {

json to_json(const Vec& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json to_json(const Mat& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
  return a;
}

Vec vec_from(const json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

EdgeStatus status_from(const std::string& s) {
  if (s == "exists") return EdgeStatus::Exists;
  if (s == "absent") return EdgeStatus::Absent;
  if (s == "uncertain") return EdgeStatus::Uncertain;
  throw ConfigError("unknown edge status '" + s + "'");
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json model_json(const dynamics::AffineModel& m) {
  return {{"A", to_json(m.A)}, {"B", to_json(m.B)}, {"c", to_json(m.c)}, {"center", to_json(m.center)}};
}

// Maps the first two state coordinates onto an SVG canvas (y up).
class Canvas {
 public:
  explicit Canvas(const Box& domain) : lo_(domain.lo), hi_(domain.hi) {
    const double wx = hi_[0] - lo_[0];
    const double wy = lo_.size() > 1 ? hi_[1] - lo_[1] : wx;
    scale_ = kSize / std::max(wx, wy);
    width_ = wx * scale_ + 2 * kPad;
    height_ = wy * scale_ + 2 * kPad;
  }

  double px(double x) const { return kPad + (x - lo_[0]) * scale_; }
  double py(const Vec& x) const {
    const double y = x.size() > 1 ? x[1] : 0.5 * (lo_[0] + hi_[0]);
    const double ylo = lo_.size() > 1 ? lo_[1] : lo_[0];
    return height_ - kPad - (y - ylo) * scale_;
  }
  double scale() const { return scale_; }

  std::string open() const {
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width_) << "\" height=\""
       << num(height_) << "\" viewBox=\"0 0 " << num(width_) << ' ' << num(height_) << "\">\n";
    return os.str();
  }

  std::string rect(const Box& b, const std::string& fill) const {
    Vec top = b.lo;
    if (top.size() > 1) top[1] = b.hi[1];
    const double h = b.dim() > 1 ? (b.hi[1] - b.lo[1]) * scale_ : 20.0;
    std::ostringstream os;
    os << "<rect x=\"" << num(px(b.lo[0])) << "\" y=\"" << num(b.dim() > 1 ? py(top) : py(b.lo) - 10)
       << "\" width=\"" << num((b.hi[0] - b.lo[0]) * scale_) << "\" height=\"" << num(h)
       << "\" fill=\"" << fill << "\" stroke=\"#999999\" stroke-width=\"0.5\"/>\n";
    return os.str();
  }

  std::string path(const std::vector<Vec>& points, const std::string& stroke) const {
    std::ostringstream os;
    os << "<path d=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
      os << (i == 0 ? "M" : " L") << num(px(points[i][0])) << ',' << num(py(points[i]));
    }
    os << "\" fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\"/>\n";
    return os.str();
  }

 private:
  static constexpr double kSize = 800.0;
  static constexpr double kPad = 20.0;
  Vec lo_;
  Vec hi_;
  double scale_ = 1.0;
  double width_ = 0.0;
  double height_ = 0.0;
};

std::vector<Vec> thin(const std::vector<Vec>& points, std::size_t max_points) {
  if (points.size() <= max_points) return points;
  std::vector<Vec> out;
  const std::size_t stride = (points.size() + max_points - 1) / max_points;
  for (std::size_t i = 0; i < points.size(); i += stride) out.push_back(points[i]);
  if ((points.size() - 1) % stride != 0) out.push_back(points.back());
  return out;
}

}  // namespace

json graph_to_json(const graph::ReachGraph& g) {
  json nodes = json::array();
  for (const auto& n : g.nodes()) nodes.push_back({{"id", n.id}, {"center", to_json(n.center)}});
  json edges = json::array();
  for (const auto& [key, e] : g.edges()) {
    json w = nullptr;
    if (e.witnesses) {
      w = json::array();
      for (const auto& u : *e.witnesses) w.push_back(to_json(u));
    }
    edges.push_back({{"src", key.first},
                     {"dst", key.second},
                     {"status", graph::to_string(e.status)},
                     {"weight", e.weight},
                     {"definitive", e.definitive},
                     {"facet", e.exit_facet},
                     {"overridden", e.overridden},
                     {"reference", e.reference ? json(*e.reference) : json(nullptr)},
                     {"witnesses", w}});
  }
  return {{"gamma", g.gamma()},
          {"weight_mode", graph::to_string(g.weight_mode())},
          {"mean_known_weight", g.mean_known_weight()},
          {"nodes", nodes},
          {"edges", edges}};
}

graph::ReachGraph graph_from_json(const json& doc) {
  graph::ReachGraph g;
  try {
    g.set_gamma(doc.at("gamma").get<double>());
    const auto mode = doc.at("weight_mode").get<std::string>();
    if (mode == "constant") {
      g.set_weight_mode(graph::WeightMode::Constant);
    } else if (mode == "t0_bound") {
      g.set_weight_mode(graph::WeightMode::T0Bound);
    } else {
      throw ConfigError("unknown weight_mode '" + mode + "'");
    }
    g.set_mean_known_weight(doc.at("mean_known_weight").get<double>());
    for (const auto& n : doc.at("nodes")) {
      g.add_node({n.at("id").get<CellId>(), vec_from(n.at("center"))});
    }
    for (const auto& e : doc.at("edges")) {
      graph::EdgeRecord rec;
      rec.exit_facet = e.at("facet").get<int>();
      rec.status = status_from(e.at("status").get<std::string>());
      rec.weight = e.at("weight").get<double>();
      rec.definitive = e.at("definitive").get<bool>();
      rec.overridden = e.at("overridden").get<bool>();
      if (!e.at("reference").is_null()) rec.reference = e.at("reference").get<CellId>();
      if (!e.at("witnesses").is_null()) {
        std::vector<Vec> w;
        for (const auto& u : e.at("witnesses")) w.push_back(vec_from(u));
        rec.witnesses = std::move(w);
      }
      g.set_edge(e.at("src").get<CellId>(), e.at("dst").get<CellId>(), std::move(rec));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed graph JSON: ") + e.what());
  }
  return g;
}

std::string trajectory_csv(const planner::MissionLog& log, int state_dim, int input_dim) {
  std::ostringstream os;
  os << 't';
  for (int i = 1; i <= state_dim; ++i) os << ",x" << i;
  for (int i = 1; i <= input_dim; ++i) os << ",u" << i;
  os << ",cell_id\n";
  for (const auto& p : log.trajectory) {
    os << num(p.t);
    for (int i = 0; i < state_dim; ++i) os << ',' << num(p.x[i]);
    for (int i = 0; i < input_dim; ++i) os << ',' << num(p.u[i]);
    os << ',' << p.cell << '\n';
  }
  return os.str();
}

json mission_to_json(const planner::MissionLog& log) {
  json iterations = json::array();
  for (const auto& it : log.iterations) {
    json rec = {{"iteration", it.iteration}, {"cell", it.cell}, {"path", it.path},
                {"path_cost", it.path_cost}, {"note", it.note}};
    if (it.identified) {
      rec["identified"] = {{"residual_rms", it.identified->residual_rms},
                           {"displacement", it.identified->displacement},
                           {"ridge_used", it.identified->ridge_used}};
    }
    if (it.transit) {
      const auto& tr = *it.transit;
      const char* outcome = tr.exit.outcome == dynamics::ExitOutcome::ExitedFacet ? "exited_facet"
                            : tr.exit.outcome == dynamics::ExitOutcome::Timeout   ? "timeout"
                                                                                  : "left_domain";
      rec["transit"] = {{"from", tr.from},
                        {"to", tr.to},
                        {"exit_facet", tr.exit_facet},
                        {"t0_bound", tr.t0_bound},
                        {"timeout", tr.timeout},
                        {"outcome", outcome},
                        {"observed_facet", tr.exit.exit_facet ? json(*tr.exit.exit_facet) : json(nullptr)},
                        {"duration", tr.exit.exit_time},
                        {"exit_state", to_json(tr.exit.exit_state)},
                        {"arrived", tr.arrived},
                        {"vertex_inputs_in_box", tr.vertex_inputs_in_box}};
    }
    iterations.push_back(std::move(rec));
  }
  json overrides = json::array();
  for (const auto& o : log.overrides) {
    overrides.push_back(
        {{"iteration", o.iteration}, {"src", o.src}, {"dst", o.dst}, {"failures", o.failures}});
  }
  json models = json::object();
  for (const auto& [id, m] : log.models) models[std::to_string(id)] = model_json(m);

  return {{"status", planner::to_string(log.status)},
          {"diagnostic", log.diagnostic},
          {"initial_cell", log.initial_cell},
          {"target_cell", log.target_cell},
          {"iterations_run", log.iterations.size()},
          {"final_time", log.trajectory.empty() ? 0.0 : log.trajectory.back().t},
          {"edge_counts",
           {{"exists", log.graph.count(EdgeStatus::Exists)},
            {"absent", log.graph.count(EdgeStatus::Absent)},
            {"uncertain", log.graph.count(EdgeStatus::Uncertain)}}},
          {"overrides", overrides},
          {"models", models},
          {"iterations", iterations}};
}

std::string render_trajectory_svg(const geometry::GridPartition& partition,
                                  const planner::MissionLog& log) {
  const Canvas canvas(partition.bounds());
  std::string out = canvas.open();
  for (CellId id = 0; id < partition.num_cells(); ++id) {
    std::string fill = "#ffffff";
    if (id == log.target_cell) {
      fill = "#8fd18f";
    } else if (id == log.initial_cell) {
      fill = "#f3e27a";
    } else if (log.models.count(id)) {
      fill = "#cfe3f7";
    }
    out += canvas.rect(partition.cell(id).as_box(), fill);
  }
  std::vector<Vec> points;
  points.reserve(log.trajectory.size());
  for (const auto& p : log.trajectory) points.push_back(p.x);
  if (!points.empty()) out += canvas.path(thin(points, 20000), "#1f4e9c");
  out += "</svg>\n";
  return out;
}

std::string render_graph_svg(const geometry::GridPartition& partition,
                             const graph::ReachGraph& g, const GraphFigure& figure) {
  const Canvas canvas(partition.bounds());
  std::string out = canvas.open();
  out +=
      "<defs>\n"
      "<marker id=\"head-exists\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" "
      "orient=\"auto\"><polygon points=\"0,0 6,3 0,6\" fill=\"#1f4e9c\"/></marker>\n"
      "<marker id=\"head-absent\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" "
      "orient=\"auto\"><polygon points=\"0,0 6,3 0,6\" fill=\"#c0392b\"/></marker>\n"
      "<marker id=\"head-uncertain\" markerWidth=\"6\" markerHeight=\"6\" refX=\"5\" refY=\"3\" "
      "orient=\"auto\"><polygon points=\"0,0 6,3 0,6\" fill=\"#aaaaaa\"/></marker>\n"
      "</defs>\n";
  for (CellId id = 0; id < partition.num_cells(); ++id) {
    std::string fill = "#ffffff";
    if (figure.target && id == *figure.target) {
      fill = "#8fd18f";
    } else if (figure.initial && id == *figure.initial) {
      fill = "#f3e27a";
    } else if (figure.explored.count(id)) {
      fill = "#cfe3f7";
    }
    out += canvas.rect(partition.cell(id).as_box(), fill);
  }
  for (const auto& [key, e] : g.edges()) {
    const Vec a = partition.center(key.first);
    const Vec b = partition.center(key.second);
    // Arrow from near the source center to just short of the shared facet, so
    // the two directions of a pair stay apart.
    const Vec from = a + 0.15 * (b - a);
    const Vec to = a + 0.45 * (b - a);
    const char* name = graph::to_string(e.status);
    const char* color = e.status == EdgeStatus::Exists   ? "#1f4e9c"
                        : e.status == EdgeStatus::Absent ? "#c0392b"
                                                         : "#aaaaaa";
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"%s\" "
                  "stroke-width=\"1\" marker-end=\"url(#head-%s)\" class=\"%s\"/>\n",
                  canvas.px(from[0]), canvas.py(from), canvas.px(to[0]), canvas.py(to), color, name,
                  name);
    out += buf;
  }
  if (!figure.trajectory.empty()) out += canvas.path(thin(figure.trajectory, 20000), "#222222");
  out += "</svg>\n";
  return out;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot move '" + tmp.string() + "' into place: " + ec.message());
}

}  // namespace pwanav::cli
