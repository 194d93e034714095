#pragma once

// Cone-ordered (block) Toeplitz algebra: the matrix A_{jk} = a_{j-k} generated
// by an admissible convolution vector over a discrete cube Lambda+, its
// triangular inverse B computed constructively by forward substitution along a
// linear extension of the cone order, the coordinate change eta = A omega, and
// the symbol of A. Triangularity here means: nonzero entries only where the
// row index dominates the column index componentwise; both A and B have unit
// diagonal and determinant one.

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "alloylab/errors.hpp"
#include "alloylab/lattice.hpp"
#include "alloylab/model.hpp"

namespace alloylab {

inline constexpr std::int64_t kMaxToeplitzSide = 20000;

// Total order compatible with the cone order: ascending coordinate sum, ties
// broken lexicographically. Returns linear indices into the cube enumeration.
inline std::vector<int> linear_extension(const IndexCube& cube) {
  std::vector<int> order(static_cast<std::size_t>(cube.size()));
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int ia, int ib) {
    const Pt a = cube.point(ia), b = cube.point(ib);
    const int sa = coord_sum(a), sb = coord_sum(b);
    if (sa != sb) return sa < sb;
    return a < b;
  });
  return order;
}

struct ConeToeplitzSystem {
  int d = 1;
  IndexCube lambda_plus;
  std::vector<int> order;  // linear extension used for the substitution
  Eigen::MatrixXd A;       // A_{jk} = a_{j-k}
  Eigen::MatrixXd B;       // A^{-1}, triangular with unit diagonal
  double a_star = 0.0;
};

// Constructive inversion: row by row along a linear extension, using that
// every nonzero A_{jk} has j strictly above k in the cone order.
// Entries B_{jk} with j not dominating k come out as exact zeros because every
// term in their recursion vanishes identically.
inline Eigen::MatrixXd invert_by_substitution(const Eigen::MatrixXd& a_mat, const IndexCube& cube,
                                              const std::vector<int>& order) {
  const int n = static_cast<int>(cube.size());
  if (a_mat.rows() != n || a_mat.cols() != n)
    throw PreconditionError("invert_by_substitution: matrix does not match the index cube");
  if (static_cast<int>(order.size()) != n)
    throw PreconditionError("invert_by_substitution: order does not match the index cube");

  // Contract (33)-(34): unit diagonal, support inside the cone.
  std::vector<Pt> pts(n);
  for (int i = 0; i < n; ++i) pts[i] = cube.point(i);
  for (int j = 0; j < n; ++j) {
    if (a_mat(j, j) != 1.0)
      throw PreconditionError("invert_by_substitution: diagonal entry is not 1");
    for (int k = 0; k < n; ++k)
      if (j != k && a_mat(j, k) != 0.0 && !cone_dominates(pts[j], pts[k]))
        throw PreconditionError("invert_by_substitution: triangularity violated");
  }
  // Verify the order is a linear extension of the cone order.
  {
    std::vector<int> pos(n);
    for (int i = 0; i < n; ++i) pos[order[i]] = i;
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        if (j != k && cone_dominates(pts[j], pts[k]) && pos[j] < pos[k])
          throw PreconditionError("invert_by_substitution: order is not a linear extension");
  }

  // Column by column: B_{jk} = delta_{jk} - sum_{i earlier} A_{ji} B_{ik}.
  // Rows of A are sparse on the cone, so iterate its nonzeros only.
  std::vector<std::vector<std::pair<int, double>>> row_nz(n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (j != k && a_mat(j, k) != 0.0) row_nz[j].push_back({k, a_mat(j, k)});

  Eigen::MatrixXd b_mat = Eigen::MatrixXd::Zero(n, n);
  for (int col = 0; col < n; ++col) {
    for (int oi = 0; oi < n; ++oi) {
      const int j = order[oi];
      double v = (j == col) ? 1.0 : 0.0;
      for (const auto& [i, aji] : row_nz[j]) v -= aji * b_mat(i, col);
      b_mat(j, col) = v;
    }
  }
  return b_mat;
}

inline ConeToeplitzSystem build_system(const SingleSite& site, const IndexCube& lambda_plus_cube) {
  if (!(site.a_star() < 1.0))
    throw PreconditionError("build_system: inadmissible convolution vector, a* >= 1");
  if (lambda_plus_cube.size() > kMaxToeplitzSide)
    throw ResourceError("build_system: Lambda+ exceeds the dense-storage cap");
  ConeToeplitzSystem sys;
  sys.d = lambda_plus_cube.d;
  sys.lambda_plus = lambda_plus_cube;
  sys.order = linear_extension(lambda_plus_cube);
  sys.a_star = site.a_star();
  const int n = static_cast<int>(lambda_plus_cube.size());
  sys.A = Eigen::MatrixXd::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    const Pt pj = lambda_plus_cube.point(j);
    for (int k = 0; k < n; ++k) {
      const Pt pk = lambda_plus_cube.point(k);
      if (!cone_dominates(pj, pk)) continue;
      sys.A(j, k) = site.coeff(pt_minus(pj, pk));
    }
  }
  sys.B = invert_by_substitution(sys.A, lambda_plus_cube, sys.order);
  return sys;
}

inline ConeToeplitzSystem build_system(const ModelConfig& cfg) {
  validate(cfg);
  return build_system(cfg.site, lambda_plus(cfg));
}

// Column sum norm ||B||_1 = max_k sum_j |B_{jk}|.
inline double column_sum_norm(const Eigen::MatrixXd& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

inline Eigen::VectorXd transform(const ConeToeplitzSystem& sys, const Eigen::VectorXd& omega) {
  if (omega.size() != sys.A.rows())
    throw PreconditionError("transform: vector is not indexed by Lambda+");
  return sys.A * omega;
}

inline Eigen::VectorXd inverse_transform(const ConeToeplitzSystem& sys,
                                         const Eigen::VectorXd& eta) {
  if (eta.size() != sys.B.rows())
    throw PreconditionError("inverse_transform: vector is not indexed by Lambda+");
  return sys.B * eta;
}

// Residual of the cell representation V_omega = kappa * sum_j eta_j chi_j on
// the cells of the box: requires the default step bump and r = 1, for which
// the identity is exact up to roundoff.
inline double verify_cell_representation(const ModelConfig& cfg, const DisorderSample& sample) {
  validate(cfg);
  if (!cfg.site.default_bump())
    throw PreconditionError("verify_cell_representation: needs the default step bump");
  if (cfg.r != 1) throw PreconditionError("verify_cell_representation: needs r = 1");
  const ConeToeplitzSystem sys = build_system(cfg);
  const Eigen::VectorXd eta = transform(sys, sample.omega);
  const Eigen::VectorXd v = assemble_potential(cfg, sample);
  const IndexCube cells = lambda_tilde(cfg);
  const IndexCube grid = grid_cube(cfg);
  double residual = 0.0;
  for (int ci = 0; ci < cells.size(); ++ci) {
    const Pt cell = cells.point(ci);
    const double vj = v[grid.linear(cell)];  // r = 1: node index == cell index
    const double ej = cfg.site.kappa * eta[sys.lambda_plus.linear(cell)];
    residual = std::max(residual, std::abs(vj - ej));
  }
  return residual;
}

// Symbol S_A(theta) = sum_k a_k e^{i k.theta}.
inline std::complex<double> symbol_eval(const SingleSite& site, const Eigen::VectorXd& theta) {
  std::complex<double> s = 0.0;
  for (std::size_t i = 0; i < site.gamma.size(); ++i) {
    double phase = 0.0;
    for (int k = 0; k < theta.size() && k < kMaxDim; ++k) phase += site.gamma[i][k] * theta[k];
    s += site.a[i] * std::exp(std::complex<double>(0.0, phase));
  }
  return s;
}

// Smallest singular value of A_{Lambda_l^+} for each requested box side; A is
// non-symmetric in general, so the singular value is the well-posed stand-in
// for the eigenvalue closest to zero.
inline std::vector<double> nu_trend(const SingleSite& site, int d, const std::vector<int>& sides) {
  std::vector<double> out;
  out.reserve(sides.size());
  for (int l : sides) {
    if (l < 1) throw PreconditionError("nu_trend: box sides must be >= 1");
    const IndexCube cube = cube_from_origin(d, -site.cube_side(), l - 1);
    const ConeToeplitzSystem sys = build_system(site, cube);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A);
    out.push_back(svd.singularValues().minCoeff());
  }
  return out;
}

}  // namespace alloylab
