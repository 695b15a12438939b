#include "pwanav/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace pwanav::cli {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw ConfigError("field '" + field + "': " + what);
}

void expect_keys(const json& obj, const std::string& field, const std::set<std::string>& required,
                 const std::set<std::string>& optional = {}) {
  if (!obj.is_object()) fail(field, "expected an object");
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!required.count(key) && !optional.count(key)) {
      fail(field.empty() ? key : field + "." + key, "unknown key");
    }
  }
  for (const auto& key : required) {
    if (!obj.contains(key)) fail(field.empty() ? key : field + "." + key, "missing");
  }
}

std::string join(const std::string& field, const std::string& key) {
  return field.empty() ? key : field + "." + key;
}

double number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(field, "expected a finite number");
  return v;
}

double positive(const json& j, const std::string& field) {
  const double v = number(j, field);
  if (!(v > 0.0)) fail(field, "must be positive");
  return v;
}

Vec vector(const json& j, const std::string& field, int expected_size = -1) {
  if (!j.is_array() || j.empty()) fail(field, "expected a non-empty array of numbers");
  if (expected_size >= 0 && static_cast<int>(j.size()) != expected_size) {
    fail(field, "expected " + std::to_string(expected_size) + " entries");
  }
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = number(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Mat matrix(const json& j, const std::string& field, int rows, int cols = -1) {
  if (!j.is_array() || static_cast<int>(j.size()) != rows) {
    fail(field, "expected " + std::to_string(rows) + " rows");
  }
  const int width = cols >= 0 ? cols : (j[0].is_array() ? static_cast<int>(j[0].size()) : 0);
  if (width <= 0) fail(field, "expected non-empty rows");
  Mat m(rows, width);
  for (int r = 0; r < rows; ++r) {
    m.row(r) = vector(j[r], field + "[" + std::to_string(r) + "]", width).transpose();
  }
  return m;
}

Box box(const json& j, const std::string& field, int dim = -1) {
  expect_keys(j, field, {"low", "high"});
  Box b{vector(j["low"], join(field, "low"), dim), Vec()};
  b.hi = vector(j["high"], join(field, "high"), static_cast<int>(b.lo.size()));
  for (int d = 0; d < b.dim(); ++d) {
    if (!(b.lo[d] < b.hi[d])) fail(field, "low must be below high in every dimension");
  }
  return b;
}

DynamicsSpec dynamics(const json& j, int n) {
  const std::string field = "dynamics";
  if (!j.is_object() || j.size() != 1) fail(field, "expected exactly one of 'builtin' or 'affine'");
  DynamicsSpec d;
  if (j.contains("builtin")) {
    if (j["builtin"] != "terrain") fail("dynamics.builtin", "unknown builtin model");
    if (n != 2) fail(field, "the terrain model is two-dimensional");
    d.kind = DynamicsSpec::Kind::Terrain;
    return d;
  }
  if (!j.contains("affine")) fail(field, "expected exactly one of 'builtin' or 'affine'");
  const json& a = j["affine"];
  expect_keys(a, "dynamics.affine", {"A", "B", "c"});
  d.kind = DynamicsSpec::Kind::Affine;
  d.A = matrix(a["A"], "dynamics.affine.A", n, n);
  d.B = matrix(a["B"], "dynamics.affine.B", n);
  d.c = vector(a["c"], "dynamics.affine.c", n);
  return d;
}

sysid::VelocityMode velocity_mode(const json& j) {
  if (j == "oracle") return sysid::VelocityMode::OracleVelocity;
  if (j == "finite_difference") return sysid::VelocityMode::FiniteDifference;
  fail("sysid.velocity_mode", "expected \"oracle\" or \"finite_difference\"");
}

}  // namespace

std::shared_ptr<const dynamics::ControlAffineField> Scenario::make_field() const {
  if (dynamics.kind == DynamicsSpec::Kind::Terrain) return dynamics::terrain_model();
  return std::make_shared<dynamics::AffineField>(dynamics.A, dynamics.B, dynamics.c, lipschitz_df,
                                                 lipschitz_g);
}

geometry::GridPartition Scenario::make_partition() const {
  return geometry::build_grid_partition(state_bounds, grid);
}

geometry::CellId Scenario::target_cell(const geometry::GridPartition& partition) const {
  if (target.cell) return *target.cell;
  return geometry::locate(partition, *target.state);
}

Scenario parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed scenario JSON: ") + e.what());
  }
  expect_keys(doc, "",
              {"dynamics", "state_bounds", "grid", "control_box", "lipschitz", "gamma", "sysid",
               "initial_state", "target", "weight_mode"});

  Scenario sc;
  sc.state_bounds = box(doc["state_bounds"], "state_bounds");
  const int n = sc.state_bounds.dim();

  const json& grid = doc["grid"];
  if (!grid.is_array() || static_cast<int>(grid.size()) != n) {
    fail("grid", "expected one cell count per state dimension");
  }
  for (std::size_t d = 0; d < grid.size(); ++d) {
    if (!grid[d].is_number_integer() || grid[d].get<long long>() < 1) {
      fail("grid[" + std::to_string(d) + "]", "expected a positive integer");
    }
    sc.grid.push_back(grid[d].get<int>());
  }

  sc.dynamics = dynamics(doc["dynamics"], n);
  sc.control_box = box(doc["control_box"], "control_box");
  const int m = sc.control_box.dim();
  if (sc.dynamics.kind == DynamicsSpec::Kind::Affine && sc.dynamics.B.cols() != m) {
    fail("dynamics.affine.B", "column count must match the control_box dimension");
  }
  if (sc.dynamics.kind == DynamicsSpec::Kind::Terrain && m != 2) {
    fail("control_box", "the terrain model has two inputs");
  }

  expect_keys(doc["lipschitz"], "lipschitz", {"L_df", "L_g"});
  sc.lipschitz_df = positive(doc["lipschitz"]["L_df"], "lipschitz.L_df");
  sc.lipschitz_g = positive(doc["lipschitz"]["L_g"], "lipschitz.L_g");
  sc.gamma = positive(doc["gamma"], "gamma");

  const json& sj = doc["sysid"];
  expect_keys(sj, "sysid", {"N", "T", "input_scale", "velocity_mode", "seed"});
  if (!sj["N"].is_number_integer() || sj["N"].get<long long>() < 1) {
    fail("sysid.N", "expected a positive integer");
  }
  sc.sysid.samples = sj["N"].get<int>();
  sc.sysid.time_step = positive(sj["T"], "sysid.T");
  sc.sysid.input_scale = positive(sj["input_scale"], "sysid.input_scale");
  sc.sysid.velocity_mode = velocity_mode(sj["velocity_mode"]);
  if (!sj["seed"].is_number_unsigned()) fail("sysid.seed", "expected a non-negative integer");
  sc.sysid.seed = sj["seed"].get<std::uint64_t>();

  sc.initial_state = vector(doc["initial_state"], "initial_state", n);
  if (!sc.state_bounds.contains(sc.initial_state)) {
    fail("initial_state", "lies outside state_bounds");
  }

  const json& tj = doc["target"];
  if (!tj.is_object() || tj.size() != 1 || !(tj.contains("cell") || tj.contains("state"))) {
    fail("target", "expected exactly one of 'cell' or 'state'");
  }
  const auto partition = sc.make_partition();
  if (tj.contains("cell")) {
    if (!tj["cell"].is_number_integer()) fail("target.cell", "expected an integer cell id");
    const long long id = tj["cell"].get<long long>();
    if (id < 0 || id >= partition.num_cells()) fail("target.cell", "cell id out of range");
    sc.target.cell = static_cast<geometry::CellId>(id);
  } else {
    sc.target.state = vector(tj["state"], "target.state", n);
    if (!sc.state_bounds.contains(*sc.target.state)) fail("target.state", "lies outside state_bounds");
  }

  const json& wm = doc["weight_mode"];
  if (wm == "constant") {
    sc.weight_mode = graph::WeightMode::Constant;
  } else if (wm == "t0_bound") {
    sc.weight_mode = graph::WeightMode::T0Bound;
  } else {
    fail("weight_mode", "expected \"constant\" or \"t0_bound\"");
  }
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

Scenario terrain_scenario() {
  Scenario sc;
  sc.dynamics.kind = DynamicsSpec::Kind::Terrain;
  sc.state_bounds = {Vec::Constant(2, -10.0), Vec::Constant(2, 10.0)};
  sc.grid = {20, 20};
  sc.control_box = {Vec::Constant(2, -5.0), Vec::Constant(2, 5.0)};
  sc.lipschitz_df = 0.03;
  sc.lipschitz_g = 0.03;
  sc.gamma = 100.0;
  sc.sysid.samples = 100;
  sc.sysid.time_step = 1e-3;
  sc.sysid.input_scale = sysid::default_input_scale(sc.control_box);
  sc.sysid.velocity_mode = sysid::VelocityMode::OracleVelocity;
  sc.sysid.seed = 7;
  sc.initial_state = Vec(2);
  sc.initial_state << 7.5, 7.5;
  sc.target.state = Vec(2);
  *sc.target.state << -7.5, -7.5;
  sc.weight_mode = graph::WeightMode::Constant;
  return sc;
}

}  // namespace pwanav::cli
