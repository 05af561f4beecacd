#include "bendkit/sceneio.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "json.hpp"

namespace bendkit::io {

using nlohmann::json;

namespace {

json grid_to_json(const ChartGrid& grid) {
  json g;
  g["dim"] = grid.dim();
  json bounds = json::array();
  for (int d = 0; d < grid.dim(); ++d) bounds.push_back({grid.lower(d), grid.upper(d)});
  g["bounds"] = bounds;
  g["resolution"] = grid.resolution();
  json per = json::array();
  for (int d = 0; d < grid.dim(); ++d) per.push_back(grid.periodic(d));
  g["periodic"] = per;
  return g;
}

ChartGrid grid_from_json(const json& g) {
  if (!g.contains("dim") || !g.contains("bounds") || !g.contains("resolution") ||
      !g.contains("periodic"))
    throw IoError("grid: missing dim/bounds/resolution/periodic");
  int dim = g["dim"].get<int>();
  std::vector<std::array<double, 2>> bounds;
  for (const auto& b : g["bounds"])
    bounds.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
  std::vector<int> res = g["resolution"].get<std::vector<int>>();
  std::vector<bool> per = g["periodic"].get<std::vector<bool>>();
  if (static_cast<int>(bounds.size()) != dim || static_cast<int>(res.size()) != dim ||
      static_cast<int>(per.size()) != dim)
    throw IoError("grid: axis counts disagree with dim");
  return ChartGrid(bounds, res, per);
}

json field_to_json(const GridField& field) {
  // row-major nested arrays: one nested block per node
  const auto& shape = field.shape();
  json nodes = json::array();
  for (std::size_t node = 0; node < field.num_nodes(); ++node) {
    std::span<const double> v = field.at(node);
    std::size_t pos = 0;
    std::function<json(std::size_t)> emit = [&](std::size_t depth) -> json {
      json arr = json::array();
      if (depth + 1 == shape.size()) {
        for (int k = 0; k < shape[depth]; ++k) arr.push_back(v[pos++]);
      } else {
        for (int k = 0; k < shape[depth]; ++k) arr.push_back(emit(depth + 1));
      }
      return arr;
    };
    nodes.push_back(shape.empty() ? json(v[0]) : emit(0));
  }
  return nodes;
}

GridField field_from_json(const ChartGrid& grid, const json& nodes,
                          const std::vector<int>& shape, const std::string& what) {
  if (!nodes.is_array() || nodes.size() != grid.num_nodes())
    throw IoError(what + ": expected one value block per node (" +
                  std::to_string(grid.num_nodes()) + " nodes)");
  GridField field(grid, shape);
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    std::span<double> v = field.at(node);
    std::size_t pos = 0;
    std::function<void(const json&, std::size_t)> absorb = [&](const json& arr,
                                                               std::size_t depth) {
      if (!arr.is_array() || static_cast<int>(arr.size()) != shape[depth])
        throw IoError(what + ": node " + std::to_string(node) + " has wrong shape");
      if (depth + 1 == shape.size()) {
        for (const auto& x : arr) v[pos++] = x.get<double>();
      } else {
        for (const auto& x : arr) absorb(x, depth + 1);
      }
    };
    absorb(nodes[node], 0);
  }
  field.require_finite(what);
  return field;
}

scenes::Params params_from_json(const json& j) {
  scenes::Params params;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.value().is_number())
      params.num[it.key()] = it.value().get<double>();
    else if (it.value().is_string())
      params.str[it.key()] = it.value().get<std::string>();
    else if (it.value().is_boolean())
      params.num[it.key()] = it.value().get<bool>() ? 1.0 : 0.0;
    else
      throw IoError("catalog params must be numbers or strings");
  }
  return params;
}

json params_to_json(const scenes::Params& params) {
  json j = json::object();
  for (const auto& [k, v] : params.num) j[k] = v;
  for (const auto& [k, v] : params.str) j[k] = v;
  return j;
}

}  // namespace

SceneInput read_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw IoError("malformed scene file '" + path + "': " + e.what());
  }
  SceneInput out;
  if (!j.contains("kind")) throw IoError("scene file: missing 'kind'");
  out.kind = j["kind"].get<std::string>();
  if (out.kind != "scene" && out.kind != "bending" && out.kind != "pair")
    throw IoError("scene file: kind must be scene, bending or pair");
  if (!j.contains("grid")) throw IoError("scene file: missing 'grid'");
  out.grid = grid_from_json(j["grid"]);

  if (j.contains("catalog")) {
    out.has_catalog = true;
    out.catalog_id = j["catalog"].at("id").get<std::string>();
    if (j["catalog"].contains("params")) out.params = params_from_json(j["catalog"]["params"]);
    return out;
  }
  if (out.kind == "pair") {
    if (!j.contains("beta") || !j.contains("E"))
      throw IoError("pair file: missing 'beta' or 'E'");
    const json& b = j["beta"];
    // shapes are recovered from the nesting: beta is [nodes][n][n][p]
    if (!b.is_array() || b.empty() || !b[0].is_array() || b[0].empty() ||
        !b[0][0].is_array() || b[0][0].empty() || !b[0][0][0].is_array() || b[0][0][0].empty())
      throw IoError("pair file: beta must be a [nodes][n][n][p] array");
    int n = static_cast<int>(b[0].size());
    if (n != out.grid.dim()) throw IoError("pair file: beta tangent rank mismatch");
    int pdim = static_cast<int>(b[0][0][0].size());
    out.beta = field_from_json(out.grid, b, {n, n, pdim}, "beta");
    out.E = field_from_json(out.grid, j["E"], {n, pdim, pdim}, "E");
    return out;
  }
  if (!j.contains("values")) throw IoError("scene file: missing 'values' or 'catalog'");
  const json& vals = j["values"];
  if (!vals.is_array() || vals.empty() || !vals[0].is_array())
    throw IoError("scene file: values must be a [nodes][m] array");
  int m = static_cast<int>(vals[0].size());
  out.values = field_from_json(out.grid, vals, {m}, "values");
  return out;
}

void write_scene(const std::string& path, const ImmersionScene& scene) {
  json j;
  j["kind"] = "scene";
  j["grid"] = grid_to_json(scene.grid);
  j["label"] = scene.label;
  j["values"] = field_to_json(scene.map);
  atomic_write(path, j.dump());
}

void write_bending(const std::string& path, const BendingField& T) {
  json j;
  j["kind"] = "bending";
  j["grid"] = grid_to_json(T.T.grid());
  j["label"] = T.label;
  j["values"] = field_to_json(T.T);
  atomic_write(path, j.dump());
}

void write_pair(const std::string& path, const ChartGrid& grid, const AssociatedPair& pair) {
  json j;
  j["kind"] = "pair";
  j["grid"] = grid_to_json(grid);
  j["beta"] = field_to_json(pair.beta);
  j["E"] = field_to_json(pair.E);
  atomic_write(path, j.dump());
}

ImmersionScene scene_from_input(const SceneInput& in) {
  if (in.kind != "scene") throw IoError("input is not a scene");
  if (in.has_catalog) return scenes::make_scene(in.catalog_id, in.params, in.grid);
  ImmersionScene scene;
  scene.grid = in.grid;
  scene.map = GridField(scene.grid, in.values->shape());
  scene.map.raw() = in.values->raw();
  scene.ambient_dim = in.values->shape()[0];
  scene.label = "ingested";
  return scene;
}

BendingField bending_from_input(const SceneInput& in, const ImmersionScene& scene) {
  if (in.kind != "bending") throw IoError("input is not a bending");
  if (in.has_catalog) return scenes::make_bending(scene, in.catalog_id, in.params);
  if (!in.grid.same_layout(scene.grid))
    throw IoError("bending grid does not match the scene grid");
  if (in.values->shape()[0] != scene.ambient_dim)
    throw IoError("bending ambient dimension does not match the scene");
  BendingField T;
  T.label = "ingested";
  T.T = GridField(scene.grid, in.values->shape());
  T.T.raw() = in.values->raw();
  return T;
}

void Report::check(const std::string& name, double value, double tol) {
  checks.push_back({name, value, tol, value <= tol});
}

void Report::info(const std::string& name, double value) { numbers.emplace_back(name, value); }

void Report::note(const std::string& key, const std::string& value) {
  notes.emplace_back(key, value);
}

bool Report::all_pass() const {
  for (const Check& c : checks)
    if (!c.pass) return false;
  return true;
}

std::string Report::text() const {
  std::ostringstream os;
  os << "== " << command << " ==\n";
  for (const Check& c : checks) {
    os.setf(std::ios::scientific);
    os.precision(3);
    os << (c.pass ? "  pass  " : "  FAIL  ") << c.name << ": " << c.value << " (tol " << c.tol
       << ", margin " << (c.tol > 0 ? c.value / c.tol : 0.0) << ")\n";
  }
  for (const auto& [k, v] : numbers) {
    os << "  " << k << " = " << v << "\n";
  }
  for (const auto& [k, v] : notes) os << "  " << k << ": " << v << "\n";
  os << (all_pass() ? "ALL CHECKS PASSED" : "CHECKS FAILED") << "\n";
  return os.str();
}

std::string Report::json_string() const {
  json j;
  j["command"] = command;
  json cs = json::array();
  for (const Check& c : checks) {
    json cj;
    cj["name"] = c.name;
    cj["residual"] = c.value;
    cj["tolerance"] = c.tol;
    cj["margin"] = c.tol > 0 ? c.value / c.tol : 0.0;
    cj["pass"] = c.pass;
    cs.push_back(cj);
  }
  j["checks"] = cs;
  json extra = json::object();
  for (const auto& [k, v] : numbers) extra[k] = v;
  j["values"] = extra;
  json nts = json::object();
  for (const auto& [k, v] : notes) nts[k] = v;
  j["notes"] = nts;
  j["pass"] = all_pass();
  return j.dump(2);
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp + "'");
    out << content;
    if (!out.good()) throw IoError("short write to '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
}

void write_csv(const std::string& path, const ChartGrid& grid,
               const std::vector<std::pair<std::string, const GridField*>>& fields) {
  std::ostringstream os;
  os.precision(17);
  os << "node_index";
  for (int d = 0; d < grid.dim(); ++d) os << ",coord_" << d;
  for (const auto& [name, field] : fields) {
    if (field->comps() == 1) {
      os << "," << name;
    } else {
      for (std::size_t c = 0; c < field->comps(); ++c) os << "," << name << "_" << c;
    }
  }
  os << "\n";
  std::vector<double> coords;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    os << node;
    grid.coords(node, coords);
    for (double x : coords) os << "," << x;
    for (const auto& [name, field] : fields)
      for (double v : field->at(node)) os << "," << v;
    os << "\n";
  }
  atomic_write(path, os.str());
}

}  // namespace bendkit::io
