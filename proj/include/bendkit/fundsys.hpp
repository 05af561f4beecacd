#pragma once

#include "bendkit/bending.hpp"

namespace bendkit {

struct FundsysError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SystemReport {
  double gauss = 0.0;
  double codazzi = 0.0;
  double codazzi2 = 0.0;
  double ricci = 0.0;
  double anti = 0.0;
  double tol = 0.0;
  bool pass = false;

  double worst() const { return std::max({gauss, codazzi, codazzi2, ricci, anti}); }
};

double fundsys_tol(const FramedGeometry& geom, double tol_scale = 1.0);

double gauss_residual(const FramedGeometry& geom, const AssociatedPair& pair,
                      Exec mode = default_exec());
double codazzi_residual(const FramedGeometry& geom, const AssociatedPair& pair,
                        Exec mode = default_exec());
double codazzi2_residual(const FramedGeometry& geom, const AssociatedPair& pair,
                         Exec mode = default_exec());
double ricci_residual(const FramedGeometry& geom, const AssociatedPair& pair,
                      Exec mode = default_exec());

SystemReport verify(const FramedGeometry& geom, const AssociatedPair& pair, double tol,
                    Exec mode = default_exec());
SystemReport verify(const FramedGeometry& geom, const AssociatedPair& pair,
                    Exec mode = default_exec());

struct HypersurfaceChecks {
  double symmetry = 0.0;
  double codazzi = 0.0;
  double wedge = 0.0;
};

// Residuals of the corollary's hypotheses for an endomorphism field Bhat
// ({n,n}, Bhat[k][j]) on a hypersurface: symmetry of <Bhat .,.>, the Codazzi
// condition, and Bhat X ^ A Y - Bhat Y ^ A X = 0.
HypersurfaceChecks hypersurface_checks(const FramedGeometry& geom, const GridField& Bhat,
                                       Exec mode = default_exec());

// Pair with beta = <Bhat ., .> N and E = 0; throws when a hypothesis residual
// exceeds tol.
AssociatedPair hypersurface_pair(const FramedGeometry& geom, const GridField& Bhat, double tol,
                                 Exec mode = default_exec());

}  // namespace bendkit
