#include "bendkit/reconstruct.hpp"

#include <Eigen/Dense>
#include <atomic>
#include <cmath>
#include <numeric>

namespace bendkit {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

double tol_skew(const FramedGeometry& geom, double tol_scale) {
  const double h = geom.grid().max_spacing();
  return 20.0 * h * h * tol_scale;
}

GridField endo_slopes(const FramedGeometry& geom, const AssociatedPair& pair, Exec mode) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, m = geom.m, p = geom.p;
  GridField M(grid, {n, m, m});
  std::atomic<long long> bad_node{-1};

  for_each_index(
      grid.num_nodes(),
      [&](std::size_t node) {
        thread_local Eigen::MatrixXd F, Finv, rhs, Mi;
        thread_local Eigen::FullPivLU<Eigen::MatrixXd> lu;
        Eigen::Map<const RowMat> E(geom.e.at(node).data(), n, m);
        Eigen::Map<const RowMat> X(geom.xi.at(node).data(), p, m);
        std::span<const double> be = pair.beta.at(node);
        std::span<const double> Bo = pair.Bop.at(node);
        std::span<const double> Ev = pair.E.at(node);

        F.resize(m, m);  // columns e_1..e_n, xi_1..xi_p
        F.leftCols(n) = E.transpose();
        F.rightCols(p) = X.transpose();
        lu.compute(F);
        if (lu.rcond() < 1e-6) {
          long long expected = -1;
          bad_node.compare_exchange_strong(expected, static_cast<long long>(node));
          return;
        }
        Finv = lu.inverse();

        std::span<double> Mv = M.at(node);
        rhs.resize(m, m);
        for (int i = 0; i < n; ++i) {
          // column for e_j: beta(d_i, d_j); column for xi_a: -B_a d_i + E(d_i, xi_a)
          for (int j = 0; j < n; ++j) {
            rhs.col(j).setZero();
            for (int a = 0; a < p; ++a) rhs.col(j) += be[(i * n + j) * p + a] * X.row(a).transpose();
          }
          for (int a = 0; a < p; ++a) {
            rhs.col(n + a).setZero();
            for (int k = 0; k < n; ++k)
              rhs.col(n + a) -= Bo[(a * n + k) * n + i] * E.row(k).transpose();
            for (int b = 0; b < p; ++b)
              rhs.col(n + a) += Ev[(i * p + a) * p + b] * X.row(b).transpose();
          }
          Mi.resize(m, m);
          Mi.noalias() = rhs * Finv;
          for (int r = 0; r < m; ++r)
            for (int c = 0; c < m; ++c) Mv[(i * m + r) * m + c] = Mi(r, c);
        }
      },
      mode);
  if (bad_node.load() >= 0)
    throw ReconstructError("frame matrix is numerically singular at node " +
                           std::to_string(bad_node.load()));
  return M;
}

namespace {

EdgeRhs slopes_rhs(const GridField& M) {
  const std::size_t block = M.comps() / M.shape()[0];
  return [&M, block](std::size_t node, int axis, std::span<double> out) {
    std::span<const double> v = M.at(node);
    for (std::size_t c = 0; c < block; ++c) out[c] = v[axis * block + c];
  };
}

std::vector<int> forward_order(int n) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  return order;
}

}  // namespace

EndoField integrate_endo(const FramedGeometry& geom, const AssociatedPair& pair,
                         const ReconstructOptions& opts, ReconstructReport* report) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, m = geom.m;
  const double scale = pair_scale(geom, pair);
  const double tol = fundsys_tol(geom, opts.tol_scale);

  ReconstructReport local;
  ReconstructReport& rep = report ? *report : local;

  if (opts.check_system) {
    rep.system = verify(geom, pair, tol, opts.mode);
    if (!rep.system.pass)
      throw ReconstructError("pair fails the fundamental system (worst residual " +
                             std::to_string(rep.system.worst()) + " > tol " +
                             std::to_string(tol) + ")");
  }

  GridField M = endo_slopes(geom, pair, opts.mode);
  EdgeRhs rhs = slopes_rhs(M);

  // holonomy over each periodic loop through the base
  rep.holonomy.assign(n, 0.0);
  for (int axis = 0; axis < n; ++axis) {
    if (!grid.periodic(axis)) continue;
    std::vector<std::size_t> loop;
    std::size_t cur = opts.base;
    loop.push_back(cur);
    for (int t = 0; t < grid.resolution(axis); ++t) {
      cur = grid.neighbor(cur, axis, +1);
      loop.push_back(cur);
    }
    std::vector<double> zero(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> end = line_integrate(grid, rhs, zero, loop);
    double h = 0.0;
    for (double v : end) h = std::max(h, std::abs(v));
    rep.holonomy[axis] = h / scale;
    if (opts.check_holonomy && rep.holonomy[axis] > tol)
      throw ReconstructError("periodic axis " + std::to_string(axis) +
                             " has holonomy " + std::to_string(rep.holonomy[axis]) +
                             " above tol " + std::to_string(tol) +
                             "; the chart is not simply connected");
  }

  std::vector<double> zero(static_cast<std::size_t>(m) * m, 0.0);
  std::vector<int> order = forward_order(n);
  EndoField out;
  out.base = opts.base;
  out.D = sweep_integrate(grid, rhs, {m, m}, zero, opts.base, order, opts.mode);

  // circulation defect around every elementary cell
  rep.max_cell_loop = max_over(
                          grid.num_nodes(),
                          [&](std::size_t node) {
                            double worst = 0.0;
                            std::vector<double> z(static_cast<std::size_t>(m) * m, 0.0);
                            for (int i = 0; i < n; ++i)
                              for (int j = i + 1; j < n; ++j) {
                                if (grid.neighbor(node, i, +1) == ChartGrid::npos) continue;
                                if (grid.neighbor(node, j, +1) == ChartGrid::npos) continue;
                                std::vector<std::size_t> loop = cell_loop(grid, node, i, j);
                                std::vector<double> end = line_integrate(grid, rhs, z, loop);
                                for (double v : end) worst = std::max(worst, std::abs(v));
                              }
                            return worst;
                          },
                          opts.mode) /
                      scale;

  // path independence cross-check: integrate with the axes reversed
  std::vector<int> rev(order.rbegin(), order.rend());
  GridField D2 = sweep_integrate(grid, rhs, {m, m}, zero, opts.base, rev, opts.mode);
  rep.transposed_sweep = max_over(
                             grid.num_nodes(),
                             [&](std::size_t node) {
                               std::span<const double> a = out.D.at(node);
                               std::span<const double> b = D2.at(node);
                               double w = 0.0;
                               for (std::size_t c = 0; c < a.size(); ++c)
                                 w = std::max(w, std::abs(a[c] - b[c]));
                               return w;
                             },
                             opts.mode) /
                         scale;

  rep.skewness = skewness_residual(out, opts.mode);
  return out;
}

double skewness_residual(const EndoField& D, Exec mode) {
  const int m = D.D.shape()[0];
  const double scale = std::max(1.0, D.D.sup_norm());
  return max_over(
             D.D.num_nodes(),
             [&](std::size_t node) {
               std::span<const double> v = D.D.at(node);
               double w = 0.0;
               for (int r = 0; r < m; ++r)
                 for (int c = 0; c < m; ++c)
                   w = std::max(w, std::abs(v[r * m + c] + v[c * m + r]));
               return w;
             },
             mode) /
         scale;
}

BendingField integrate_bending(const FramedGeometry& geom, const EndoField& D,
                               const ReconstructOptions& opts) {
  const ChartGrid& grid = geom.grid();
  const int n = geom.n, m = geom.m;
  if (opts.check_skewness) {
    double skew = skewness_residual(D, opts.mode);
    if (skew > tol_skew(geom, opts.tol_scale))
      throw ReconstructError("integrated endomorphism is not skew (residual " +
                             std::to_string(skew) + ")");
  }
  EdgeRhs rhs = [&](std::size_t node, int axis, std::span<double> out) {
    std::span<const double> Dv = D.D.at(node);
    std::span<const double> ev = geom.e.at(node);
    for (int r = 0; r < m; ++r) {
      double s = 0.0;
      for (int c = 0; c < m; ++c) s += Dv[r * m + c] * ev[axis * m + c];
      out[r] = s;
    }
  };
  std::vector<double> zero(m, 0.0);
  std::vector<int> order = forward_order(n);
  BendingField out;
  out.label = "reconstructed";
  out.T = sweep_integrate(grid, rhs, {m}, zero, D.base, order, opts.mode);
  return out;
}

ReconstructResult reconstruct(const FramedGeometry& geom, const AssociatedPair& pair,
                              const ReconstructOptions& opts) {
  ReconstructResult result;
  result.D = integrate_endo(geom, pair, opts, &result.report);
  result.T = integrate_bending(geom, result.D, opts);
  result.report.bending_residual = bending_residual(geom, result.T, opts.mode);
  return result;
}

}  // namespace bendkit
