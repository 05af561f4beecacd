#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "bendkit/bending.hpp"

namespace bendkit::scenes {

struct CatalogError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Params {
  std::map<std::string, double> num;
  std::map<std::string, std::string> str;

  double get(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
};

// "id:3" / "id:k=3,amp=0.5" / "id:rot,p=0,q=1"
std::pair<std::string, Params> parse_spec(const std::string& spec);

std::vector<std::string> scene_ids();
std::vector<std::string> bending_ids();
bool is_scene_id(const std::string& id);
bool is_bending_id(const std::string& id);

ChartGrid default_grid(const std::string& id, const Params& params, int resolution = 0);

ImmersionScene make_scene(const std::string& id, const Params& params, const ChartGrid& grid);
ImmersionScene make_scene(const std::string& id, const Params& params = {}, int resolution = 0);

BendingField make_bending(const ImmersionScene& scene, const std::string& id,
                          const Params& params = {});

// Killing field restriction T = D f + v with D skew.
BendingField make_killing(const ImmersionScene& scene, const std::vector<double>& D_rowmajor,
                          const std::vector<double>& v, const std::string& label = "killing");

// Symmetric endomorphism field fed to the hypersurface route; params select
// "shape" (the shape operator), "identity" or "zero".
GridField hypersurface_tensor(const FramedGeometry& geom, const Params& params);

// Closed forms of the circle Fourier bending (quadrature of cos(k t)(cos t, sin t)).
std::array<double, 2> circle_fourier_tau(double theta, int k, double amp);
std::array<double, 2> circle_fourier_tau_prime(double theta, int k, double amp);

}  // namespace bendkit::scenes
