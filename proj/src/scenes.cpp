#include "bendkit/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace bendkit::scenes {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kPi = std::numbers::pi;
}  // namespace

double Params::get(const std::string& key, double fallback) const {
  auto it = num.find(key);
  return it == num.end() ? fallback : it->second;
}

int Params::get_int(const std::string& key, int fallback) const {
  return static_cast<int>(std::llround(get(key, fallback)));
}

std::string Params::get_str(const std::string& key, const std::string& fallback) const {
  auto it = str.find(key);
  return it == str.end() ? fallback : it->second;
}

std::pair<std::string, Params> parse_spec(const std::string& spec) {
  std::string id = spec;
  Params params;
  auto colon = spec.find(':');
  if (colon == std::string::npos) return {id, params};
  id = spec.substr(0, colon);
  std::string rest = spec.substr(colon + 1);
  std::size_t pos = 0;
  int positional = 0;
  while (pos < rest.size()) {
    std::size_t comma = rest.find(',', pos);
    std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    pos = comma == std::string::npos ? rest.size() : comma + 1;
    if (tok.empty()) continue;
    auto eq = tok.find('=');
    if (eq != std::string::npos) {
      std::string key = tok.substr(0, eq);
      std::string val = tok.substr(eq + 1);
      try {
        std::size_t used = 0;
        double x = std::stod(val, &used);
        if (used == val.size())
          params.num[key] = x;
        else
          params.str[key] = val;
      } catch (...) {
        params.str[key] = val;
      }
    } else {
      try {
        std::size_t used = 0;
        double x = std::stod(tok, &used);
        if (used == tok.size()) {
          params.num["arg" + std::to_string(positional++)] = x;
          continue;
        }
      } catch (...) {
      }
      params.str["gen"] = tok;
    }
  }
  return {id, params};
}

std::vector<std::string> scene_ids() {
  return {"plane", "circle", "cylinder", "cylinder_r4", "torus", "sphere", "graph", "product"};
}

std::vector<std::string> bending_ids() {
  return {"killing", "circle_fourier", "normal_field", "codazzi_hypersurface"};
}

bool is_scene_id(const std::string& id) {
  auto ids = scene_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

bool is_bending_id(const std::string& id) {
  auto ids = bending_ids();
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

ChartGrid default_grid(const std::string& id, const Params& params, int resolution) {
  const int r = resolution > 0 ? resolution : 32;
  if (id == "plane") {
    int n = params.get_int("n", 2);
    std::vector<std::array<double, 2>> bounds(n, {0.0, 1.0});
    return ChartGrid(bounds, std::vector<int>(n, r), std::vector<bool>(n, false));
  }
  if (id == "circle") return ChartGrid({{0.0, kTwoPi}}, {r}, {true});
  if (id == "cylinder" || id == "cylinder_r4")
    return ChartGrid({{0.0, kTwoPi}, {0.0, 1.0}}, {r, r}, {true, false});
  if (id == "torus") return ChartGrid({{0.0, kTwoPi}, {0.0, kTwoPi}}, {r, r}, {true, true});
  if (id == "sphere")
    return ChartGrid({{0.0, kTwoPi}, {kPi / 6.0, 5.0 * kPi / 6.0}}, {r, r}, {true, false});
  if (id == "graph")
    return ChartGrid({{-1.0, 1.0}, {-1.0, 1.0}}, {r, r}, {false, false});
  throw CatalogError("no default grid for scene id '" + id + "'");
}

ImmersionScene make_scene(const std::string& id, const Params& params, const ChartGrid& grid) {
  ImmersionScene scene;
  scene.grid = grid;
  scene.label = id;
  const std::size_t N = scene.grid.num_nodes();
  std::vector<double> u;

  auto fill = [&](int m, auto&& f) {
    scene.ambient_dim = m;
    scene.map = GridField(scene.grid, {m});
    for (std::size_t node = 0; node < N; ++node) {
      scene.grid.coords(node, u);
      f(u, scene.map.at(node));
    }
  };

  if (id == "plane") {
    int n = grid.dim();
    int m = params.get_int("m", n + 1);
    if (m <= n) throw CatalogError("plane: ambient dimension must exceed chart dimension");
    fill(m, [&](const std::vector<double>& x, std::span<double> out) {
      for (int c = 0; c < m; ++c) out[c] = c < n ? x[c] : 0.0;
    });
  } else if (id == "circle") {
    if (grid.dim() != 1) throw CatalogError("circle: grid must be one-dimensional");
    double r = params.get("arg0", params.get("r", 1.0));
    fill(2, [&](const std::vector<double>& x, std::span<double> out) {
      out[0] = r * std::cos(x[0]);
      out[1] = r * std::sin(x[0]);
    });
  } else if (id == "cylinder" || id == "cylinder_r4") {
    if (grid.dim() != 2) throw CatalogError(id + ": grid must be two-dimensional");
    const int m = id == "cylinder" ? 3 : 4;
    fill(m, [&](const std::vector<double>& x, std::span<double> out) {
      out[0] = std::cos(x[0]);
      out[1] = std::sin(x[0]);
      out[2] = x[1];
      if (m == 4) out[3] = 0.0;
    });
  } else if (id == "torus") {
    if (grid.dim() != 2) throw CatalogError("torus: grid must be two-dimensional");
    fill(4, [&](const std::vector<double>& x, std::span<double> out) {
      out[0] = std::cos(x[0]);
      out[1] = std::sin(x[0]);
      out[2] = std::cos(x[1]);
      out[3] = std::sin(x[1]);
    });
  } else if (id == "sphere") {
    if (grid.dim() != 2) throw CatalogError("sphere: grid must be two-dimensional");
    double r = params.get("arg0", params.get("r", 1.0));
    fill(3, [&](const std::vector<double>& x, std::span<double> out) {
      out[0] = r * std::cos(x[0]) * std::sin(x[1]);
      out[1] = r * std::sin(x[0]) * std::sin(x[1]);
      out[2] = r * std::cos(x[1]);
    });
  } else if (id == "graph") {
    if (grid.dim() != 2) throw CatalogError("graph: grid must be two-dimensional");
    double a = params.get("a", 0.5), b = params.get("b", -0.3), c = params.get("c", 0.2);
    fill(3, [&](const std::vector<double>& x, std::span<double> out) {
      out[0] = x[0];
      out[1] = x[1];
      out[2] = a * x[0] * x[0] + b * x[1] * x[1] + c * x[0] * x[1];
    });
  } else {
    throw CatalogError("unknown scene id '" + id + "'");
  }
  scene.map.require_finite("scene map");
  return scene;
}

ImmersionScene make_scene(const std::string& id, const Params& params, int resolution) {
  return make_scene(id, params, default_grid(id, params, resolution));
}

std::array<double, 2> circle_fourier_tau(double theta, int k, double amp) {
  const double kp = k + 1.0, km = k - 1.0;
  return {amp * 0.5 * (std::sin(kp * theta) / kp + std::sin(km * theta) / km),
          amp * 0.5 * (-std::cos(kp * theta) / kp + std::cos(km * theta) / km)};
}

std::array<double, 2> circle_fourier_tau_prime(double theta, int k, double amp) {
  return {amp * std::cos(k * theta) * std::cos(theta), amp * std::cos(k * theta) * std::sin(theta)};
}

BendingField make_killing(const ImmersionScene& scene, const std::vector<double>& D_rowmajor,
                          const std::vector<double>& v, const std::string& label) {
  const int m = scene.ambient_dim;
  if (static_cast<int>(D_rowmajor.size()) != m * m || static_cast<int>(v.size()) != m)
    throw CatalogError("killing: generator dimensions do not match the scene");
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c)
      if (std::abs(D_rowmajor[r * m + c] + D_rowmajor[c * m + r]) > 1e-12)
        throw CatalogError("killing: generator is not skew-symmetric");
  BendingField out;
  out.label = label;
  out.T = GridField(scene.grid, {m});
  const std::size_t N = scene.grid.num_nodes();
  for (std::size_t node = 0; node < N; ++node) {
    std::span<const double> f = scene.map.at(node);
    std::span<double> t = out.T.at(node);
    for (int r = 0; r < m; ++r) {
      double s = v[r];
      for (int c = 0; c < m; ++c) s += D_rowmajor[r * m + c] * f[c];
      t[r] = s;
    }
  }
  return out;
}

BendingField make_bending(const ImmersionScene& scene, const std::string& id,
                          const Params& params) {
  const int m = scene.ambient_dim;
  const ChartGrid& grid = scene.grid;
  const std::size_t N = grid.num_nodes();

  if (id == "killing") {
    std::string gen = params.get_str("gen", "rot");
    std::vector<double> D(m * m, 0.0), v(m, 0.0);
    if (gen == "rot") {
      int pax = params.get_int("p", 0), qax = params.get_int("q", 1);
      if (pax < 0 || qax < 0 || pax >= m || qax >= m || pax == qax)
        throw CatalogError("killing: rotation plane out of range");
      D[pax * m + qax] = 1.0;
      D[qax * m + pax] = -1.0;
    } else if (gen == "trans") {
      int axis = params.get_int("axis", 0);
      if (axis < 0 || axis >= m) throw CatalogError("killing: translation axis out of range");
      v[axis] = params.get("amp", 1.0);
    } else {
      throw CatalogError("killing: unknown generator '" + gen + "'");
    }
    for (int c = 0; c < m; ++c) {
      auto it = params.num.find("v" + std::to_string(c));
      if (it != params.num.end()) v[c] = it->second;
    }
    return make_killing(scene, D, v, "killing:" + gen);
  }

  if (id == "circle_fourier") {
    const bool ok = scene.label == "circle" || scene.label == "cylinder" ||
                    scene.label == "cylinder_r4" || scene.label == "torus" ||
                    scene.label.rfind("product:circle", 0) == 0;
    if (!ok)
      throw CatalogError("circle_fourier: scene '" + scene.label +
                         "' does not start with a circle factor");
    int k = params.get_int("arg0", params.get_int("k", 2));
    if (k < 2) throw CatalogError("circle_fourier: mode k must be at least 2");
    double amp = params.get("amp", 1.0);
    BendingField out;
    out.label = "circle_fourier:" + std::to_string(k);
    out.T = GridField(grid, {m});
    std::vector<double> u;
    for (std::size_t node = 0; node < N; ++node) {
      grid.coords(node, u);
      auto tau = circle_fourier_tau(u[0], k, amp);
      std::span<double> t = out.T.at(node);
      t[0] = tau[0];
      t[1] = tau[1];
    }
    return out;
  }

  if (id == "normal_field") {
    if (scene.label != "cylinder_r4")
      throw CatalogError("normal_field: only defined on cylinder_r4");
    int k = params.get_int("arg0", params.get_int("k", 1));
    double amp = params.get("amp", 1.0);
    BendingField out;
    out.label = "normal_field:" + std::to_string(k);
    out.T = GridField(grid, {m});
    std::vector<double> u;
    for (std::size_t node = 0; node < N; ++node) {
      grid.coords(node, u);
      out.T.at(node)[3] = amp * std::cos(k * u[0]);
    }
    return out;
  }

  throw CatalogError("unknown bending id '" + id + "'");
}

GridField hypersurface_tensor(const FramedGeometry& geom, const Params& params) {
  if (geom.p != 1) throw CatalogError("codazzi_hypersurface: scene is not a hypersurface");
  const int n = geom.n;
  const std::size_t N = geom.grid().num_nodes();
  std::string which = params.get_str("gen", params.get_str("which", "shape"));
  GridField B(geom.grid(), {n, n});
  for (std::size_t node = 0; node < N; ++node) {
    std::span<const double> Av = geom.A.at(node);
    std::span<double> out = B.at(node);
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j) {
        if (which == "shape")
          out[k * n + j] = Av[k * n + j];
        else if (which == "identity")
          out[k * n + j] = k == j ? 1.0 : 0.0;
        else if (which == "zero")
          out[k * n + j] = 0.0;
        else
          throw CatalogError("codazzi_hypersurface: unknown tensor '" + which + "'");
      }
  }
  return B;
}

}  // namespace bendkit::scenes
