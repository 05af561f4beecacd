#pragma once

#include <string>
#include <vector>

#include "bendkit/grid.hpp"

namespace bendkit {

struct GeometryError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immersion sampled on a chart: map holds f(node) in R^m.
struct ImmersionScene {
  ChartGrid grid;
  GridField map;  // shape {m}
  int ambient_dim = 0;
  std::string label;

  int dim() const { return grid.dim(); }
  int codim() const { return ambient_dim - grid.dim(); }
};

// Per-node extrinsic package of an immersion. Owns a copy of the scene.
struct FramedGeometry {
  ImmersionScene scene;
  int n = 0, m = 0, p = 0;

  GridField e;      // {n, m}   tangent frame e_i
  GridField xi;     // {p, m}   orthonormal normal frame
  GridField g;      // {n, n}   metric
  GridField gInv;   // {n, n}
  GridField Gamma;  // {n, n, n} Gamma[k][i][j]
  GridField alpha;  // {n, n, p} alpha[i][j][a] = <d_i e_j, xi_a>
  GridField omega;  // {n, p, p} omega[i][a][b] = <d_i xi_a, xi_b>
  GridField A;      // {p, n, n} A[a][k][j], shape operators

  // build diagnostics
  std::vector<int> pivot;          // ambient directions seeding the base normal frame
  double min_metric_eigen = 0.0;   // over all nodes
  double frame_orth_residual = 0;  // sup |<e_i,xi_a>|, |<xi_a,xi_b>-delta|
  double seam_residual = 0.0;      // worst normal-frame jump across periodic wraps
  double alpha_asym = 0.0;         // sup |<d_i e_j, xi> - <d_j e_i, xi>| before symmetrizing
  double alpha_inf = 0.0;
  double omega_inf = 0.0;
  double gamma_inf = 0.0;

  const ChartGrid& grid() const { return scene.grid; }
};

struct CurvatureData {
  GridField R;      // {n, n, n, n} R[l][k][i][j]
  GridField Rperp;  // {n, n, p, p} Rperp[i][j][a][b]
};

struct StructureReport {
  double gauss = 0.0;
  double codazzi = 0.0;
  double ricci = 0.0;
};

FramedGeometry build_geometry(const ImmersionScene& scene, Exec mode = default_exec());

CurvatureData curvature(const FramedGeometry& geom, Exec mode = default_exec());

// Sup-norm residuals of the Gauss, Codazzi and Ricci equations of the
// immersion itself; a discretization-quality gauge.
StructureReport structure_residuals(const FramedGeometry& geom, Exec mode = default_exec());

// Rank of the p x n(n+1)/2 matrix of second-fundamental-form coefficients at
// the node (relative singular-value threshold 1e-6). Equals p iff the first
// normal space is full there.
int first_normal_rank(const FramedGeometry& geom, std::size_t node);

// Condition number of the stacked (n+p) x m frame matrix at the node.
double frame_condition(const FramedGeometry& geom, std::size_t node);

double sup_norm_gInv_g_defect(const FramedGeometry& geom);

}  // namespace bendkit
