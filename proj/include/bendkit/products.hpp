#pragma once

#include <cstdint>

#include "bendkit/bending.hpp"

namespace bendkit {

struct ProductError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Extrinsic product bookkeeping: which chart axes and which ambient
// coordinates belong to which factor.
struct ProductStructure {
  std::vector<ImmersionScene> factors;
  std::vector<int> axis_offset;   // size r+1
  std::vector<int> block_offset;  // size r+1

  int num_factors() const { return static_cast<int>(factors.size()); }
  int factor_of_axis(int axis) const;
};

std::pair<ImmersionScene, ProductStructure> extrinsic_product(
    const std::vector<ImmersionScene>& factors);

// Sup-norm of cross-factor beta components, scaled.
double adaptedness_residual(const FramedGeometry& geomP, const AssociatedPair& pair,
                            const ProductStructure& ps, Exec mode = default_exec());

// Same check for the second fundamental form of the product itself.
double cross_alpha_residual(const FramedGeometry& geomP, const ProductStructure& ps,
                            Exec mode = default_exec());

struct SNullityOptions {
  int samples = 2000;
  int refine_steps = 50;
  std::uint64_t seed = 0x5EED;
};

struct SNullity {
  int value = 0;                 // certified lower bound
  int s = 0;
  std::vector<double> subspace;  // s x p row-major certificate
};

SNullity s_nullity(const FramedGeometry& geom, std::size_t node, int s,
                   const SNullityOptions& opts = {});

struct HypothesisCheck {
  int s = 0;
  int nu = 0;  // max over sampled nodes
  bool pass_ns = false;      // nu < n - s
  bool limited_ns = false;   // pass by at most 1 (sampling-limited)
  bool pass_n2s = false;     // nu < n - 2s
  bool limited_n2s = false;
};

struct ProductHypotheses {
  std::vector<HypothesisCheck> checks;
  std::vector<std::size_t> nodes;
  std::vector<std::pair<int, int>> factor_dims;  // (p_i, n_i)
  bool pass_factor_codim = false;                // every p_i < n_i
  bool pass_aggregate_codim = false;             // p < n
  bool pass_ns = false;
  bool pass_n2s = false;
};

ProductHypotheses product_hypotheses(const FramedGeometry& geom, const ProductStructure& ps,
                                     const SNullityOptions& opts = {},
                                     const std::vector<std::size_t>& nodes = {});

// Default node sample: the {first, middle, last} lattice per axis.
std::vector<std::size_t> default_node_sample(const ChartGrid& grid);

struct SplitResult {
  std::vector<BendingField> factors;
  double adaptedness = 0.0;
  double constancy_residual = 0.0;
  std::vector<double> factor_bending_residuals;
  double residual = 0.0;
};

SplitResult split_bending(const FramedGeometry& geomP, const ProductStructure& ps,
                          const BendingField& T, double tol_scale = 1.0,
                          Exec mode = default_exec());

BendingField direct_sum_bending(const ImmersionScene& product, const ProductStructure& ps,
                                const std::vector<BendingField>& factor_bendings);

}  // namespace bendkit
