#pragma once

#include "bendkit/fundsys.hpp"

namespace bendkit {

struct ReconstructError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Ambient endomorphism field obtained by integrating the pair; D(base) = 0.
struct EndoField {
  GridField D;  // {m, m}
  std::size_t base = 0;
};

struct ReconstructOptions {
  std::size_t base = 0;
  double tol_scale = 1.0;
  bool check_system = true;     // run verify before integrating
  bool check_holonomy = true;   // refuse periodic axes with holonomy above tol
  bool check_skewness = true;
  Exec mode = default_exec();
};

struct ReconstructReport {
  SystemReport system;
  double max_cell_loop = 0.0;        // scaled circulation defect over elementary cells
  std::vector<double> holonomy;      // per axis; 0 for non-periodic axes
  double skewness = 0.0;
  double transposed_sweep = 0.0;     // scaled sup |D_forward - D_reversed|
  double bending_residual = 0.0;
};

// Per-node, per-axis slopes of D determined by the pair through the frame.
GridField endo_slopes(const FramedGeometry& geom, const AssociatedPair& pair,
                      Exec mode = default_exec());

EndoField integrate_endo(const FramedGeometry& geom, const AssociatedPair& pair,
                         const ReconstructOptions& opts, ReconstructReport* report = nullptr);

double skewness_residual(const EndoField& D, Exec mode = default_exec());

double tol_skew(const FramedGeometry& geom, double tol_scale = 1.0);

BendingField integrate_bending(const FramedGeometry& geom, const EndoField& D,
                               const ReconstructOptions& opts);

struct ReconstructResult {
  BendingField T;
  EndoField D;
  ReconstructReport report;
};

ReconstructResult reconstruct(const FramedGeometry& geom, const AssociatedPair& pair,
                              const ReconstructOptions& opts = {});

}  // namespace bendkit
