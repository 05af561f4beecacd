#pragma once

#include <string>

#include "bendkit/geometry.hpp"

namespace bendkit {

// Candidate variational field in ambient coordinates.
struct BendingField {
  GridField T;  // shape {m}
  std::string label;
};

struct DerivedTensors {
  GridField L;  // {n, m}    L_i = d_i T
  GridField B;  // {n, n, m} B_ij = d_i L_j - Gamma^k_ij L_k
};

// Coefficients of the associated pair relative to the frames. Ycal is only
// populated when the pair was extracted from a bending; pairs supplied
// directly carry beta, E and the derived Bop.
struct AssociatedPair {
  GridField beta;  // {n, n, p} beta[i][j][a]
  GridField Bop;   // {p, n, n} (B_a)^k_j
  GridField Ycal;  // {p, n}    (Y_a)^k  (may be empty)
  GridField E;     // {n, p, p} E[i][a][b] = <E(d_i, xi_a), xi_b>

  bool has_Ycal() const { return Ycal.comps() > 0 && !Ycal.raw().empty(); }
};

double bending_scale(const FramedGeometry& geom, const GridField& L);
double pair_scale(const FramedGeometry& geom, const AssociatedPair& pair);

// Scaled sup-norm of <L_i, e_j> + <e_i, L_j>; a field is accepted as an
// infinitesimal bending when this stays below 10 h^2.
double bending_residual(const FramedGeometry& geom, const BendingField& T,
                        Exec mode = default_exec());

double tol_bend(const FramedGeometry& geom, double tol_scale = 1.0);

std::pair<DerivedTensors, AssociatedPair> associated_pair(const FramedGeometry& geom,
                                                          const BendingField& T,
                                                          Exec mode = default_exec());

// Builds the derived operator fields for a pair supplied as raw (beta, E).
AssociatedPair make_pair_from_fields(const FramedGeometry& geom, GridField beta, GridField E,
                                     Exec mode = default_exec());

// Scaled sup-norm of <B_ij, e_k> - <Y alpha(d_i, d_j), e_k>.
double tangential_identity_residual(const FramedGeometry& geom, const DerivedTensors& derived,
                                    const AssociatedPair& pair, Exec mode = default_exec());

// Scaled sup-norm of E^b_ia + E^a_ib.
double compatibility_residual(const FramedGeometry& geom, const AssociatedPair& pair,
                              Exec mode = default_exec());

double b_symmetry_residual(const FramedGeometry& geom, const DerivedTensors& derived,
                           Exec mode = default_exec());

}  // namespace bendkit
