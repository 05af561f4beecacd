#pragma once

#include "bendkit/bending.hpp"

namespace bendkit {

struct ClassifyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct KillingFit {
  std::vector<double> D;  // m x m row-major, skew
  std::vector<double> v;  // m
  double residual = 0.0;  // scaled sup misfit
  bool rank_deficient = false;
};

// Least-squares fit T ~ D f + v with D constrained skew.
KillingFit fit_killing(const ImmersionScene& scene, const BendingField& T,
                       Exec mode = default_exec());

// Evaluates D f + v on the scene.
BendingField killing_field(const ImmersionScene& scene, std::span<const double> D,
                           std::span<const double> v);

struct PairTriviality {
  GridField C;          // {p, p} fitted skew normal endomorphism field
  double res_beta = 0;  // scaled sup |beta - C alpha|
  double res_E = 0;     // scaled sup |E + nabla^perp C|
  bool impossible = false;  // beta != 0 where alpha vanishes

  bool trivial(double tol) const { return !impossible && res_beta <= tol && res_E <= tol; }
};

double tol_trivial(const FramedGeometry& geom, double tol_scale = 1.0);

PairTriviality pair_triviality(const FramedGeometry& geom, const AssociatedPair& pair,
                               Exec mode = default_exec());

// Reconstructs E from beta via the Codazzi equation under full first normal
// spaces; unique by the compatibility constraint.
GridField solve_E_from_beta(const FramedGeometry& geom, const GridField& beta,
                            Exec mode = default_exec());

}  // namespace bendkit
