#pragma once

// Measure-theoretic side of the argument: exact volumes of sheared cube
// unions, their decomposition into affine images of the cube, a plain Monte
// Carlo volume oracle, and the factorization of the integration domain
// M = { eta | B eta in [0, omega_+]^L } relative to a pivot site, including
// the eta_j-independent enlargement M_>^+ and its exact volume.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "alloylab/errors.hpp"
#include "alloylab/rng.hpp"
#include "alloylab/stats.hpp"
#include "alloylab/toeplitz.hpp"
#include "alloylab/threads.hpp"

namespace alloylab {

// Union of the cube [0, omega_+]^n sheared along t: S = U_{s in [0, omega_+]} (Q + s t).
struct ShearedUnion {
  int n = 1;
  Eigen::VectorXd t;
  double omega_plus = 1.0;
};

inline void validate(const ShearedUnion& u) {
  if (u.n < 1 || u.t.size() != u.n) throw PreconditionError("sheared union: bad dimension");
  if (!(u.omega_plus > 0.0)) throw PreconditionError("sheared union: omega_plus must be > 0");
}

// vol(S) = (1 + sum_i |t_i|) omega_+^n.
inline double sheared_union_volume(const ShearedUnion& u) {
  validate(u);
  return (1.0 + u.t.cwiseAbs().sum()) * std::pow(u.omega_plus, u.n);
}

// x in S iff some s in [0, omega_+] puts x - s t inside the cube; the feasible
// s form an interval intersection, O(n) per query.
inline bool sheared_union_contains(const ShearedUnion& u, const Eigen::VectorXd& x) {
  double s_lo = 0.0, s_hi = u.omega_plus;
  for (int i = 0; i < u.n; ++i) {
    const double ti = u.t[i];
    if (ti == 0.0) {
      if (x[i] < 0.0 || x[i] > u.omega_plus) return false;
      continue;
    }
    double a = (x[i] - u.omega_plus) / ti, b = x[i] / ti;
    if (a > b) std::swap(a, b);
    s_lo = std::max(s_lo, a);
    s_hi = std::min(s_hi, b);
    if (s_lo > s_hi) return false;
  }
  return true;
}

// One piece of the disjoint decomposition S = Q u U_i T_i(Q): axis < 0 is the
// cube itself, otherwise the affine image T_i(x) = T~_i(x) + shift_i e_i where
// T~_i maps e_i to t and fixes the other axes. The shift places the piece on
// the outflow face of its axis: omega_+ for t_i > 0, zero for t_i < 0 (the
// extrusion leaves through the bottom face there; a top-face shift would fold
// the piece back into the cube and break disjointness).
struct AffinePiece {
  int axis = -1;
  int n = 1;
  Eigen::VectorXd t;
  double omega_plus = 1.0;

  double shift() const { return axis >= 0 && t[axis] > 0.0 ? omega_plus : 0.0; }

  double volume() const {
    const double cube = std::pow(omega_plus, n);
    return axis < 0 ? cube : std::abs(t[axis]) * cube;
  }

  bool contains(const Eigen::VectorXd& x) const {
    if (axis < 0) {
      for (int i = 0; i < n; ++i)
        if (x[i] < 0.0 || x[i] > omega_plus) return false;
      return true;
    }
    // Invert T_i in closed form: z_axis = y_axis / t_axis, z_l = y_l - z_axis t_l.
    const double yi = x[axis] - shift();
    const double zi = yi / t[axis];
    if (zi < 0.0 || zi > omega_plus) return false;
    for (int l = 0; l < n; ++l) {
      if (l == axis) continue;
      const double zl = x[l] - zi * t[l];
      if (zl < 0.0 || zl > omega_plus) return false;
    }
    return true;
  }
};

// Pieces are pairwise disjoint up to null sets and their volumes add up to the
// closed-form value. Degenerate directions (t_i = 0) yield zero-volume pieces
// and are skipped.
inline std::vector<AffinePiece> sheared_union_decomposition(const ShearedUnion& u) {
  validate(u);
  std::vector<AffinePiece> pieces;
  pieces.push_back(AffinePiece{-1, u.n, u.t, u.omega_plus});
  for (int i = 0; i < u.n; ++i) {
    if (u.t[i] == 0.0) continue;
    pieces.push_back(AffinePiece{i, u.n, u.t, u.omega_plus});
  }
  return pieces;
}

struct Box {
  Eigen::VectorXd lo, hi;

  double volume() const {
    double v = 1.0;
    for (int i = 0; i < lo.size(); ++i) v *= hi[i] - lo[i];
    return v;
  }
};

struct McResult {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::uint64_t samples = 0;
  std::uint64_t hits = 0;
};

// Plain Monte Carlo volume with binomial standard error. Points are drawn in
// fixed-size blocks, one substream per block, so the result is independent of
// the worker count.
inline McResult mc_volume(const std::function<bool(const Eigen::VectorXd&)>& member,
                          const Box& bbox, std::uint64_t samples, std::uint64_t seed,
                          int workers = 1) {
  if (samples == 0) throw PreconditionError("mc_volume: samples must be > 0");
  const int n = static_cast<int>(bbox.lo.size());
  constexpr std::uint64_t kBlock = 8192;
  const std::uint64_t n_blocks = (samples + kBlock - 1) / kBlock;
  std::vector<std::uint64_t> block_hits(n_blocks, 0);
  parallel_for_indexed(n_blocks, workers, [&](std::uint64_t b) {
    auto g = make_stream(seed, 0x6d63766f6cULL, b);
    Eigen::VectorXd x(n);
    const std::uint64_t lo = b * kBlock;
    const std::uint64_t hi = std::min(samples, lo + kBlock);
    std::uint64_t h = 0;
    for (std::uint64_t i = lo; i < hi; ++i) {
      for (int k = 0; k < n; ++k) x[k] = uniform_in(g, bbox.lo[k], bbox.hi[k]);
      if (member(x)) ++h;
    }
    block_hits[b] = h;
  });
  std::uint64_t hits = 0;
  for (std::uint64_t h : block_hits) hits += h;
  const double vol = bbox.volume();
  const double p = static_cast<double>(hits) / static_cast<double>(samples);
  McResult r;
  r.samples = samples;
  r.hits = hits;
  r.estimate = p * vol;
  r.stderr_ = vol * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  return r;
}

// ---------------------------------------------------------------------------
// Domain factorization relative to a pivot site j
// ---------------------------------------------------------------------------

// Splits Lambda+ into Lambda_< (sites not dominating j), the pivot, and
// Lambda_> (sites strictly dominating j); carries the B-blocks needed to
// evaluate the three membership predicates and the enlargement M_>^+.
struct DomainFactorization {
  int pivot = 0;                 // linear index of j in the cube enumeration
  std::vector<int> less_idx;     // Lambda_<
  std::vector<int> greater_idx;  // Lambda_>
  double omega_plus = 1.0;

  Eigen::MatrixXd B;             // full inverse, cube enumeration
  Eigen::MatrixXd B_less;        // rows/cols Lambda_<
  Eigen::MatrixXd B_greater;     // rows/cols Lambda_>
  Eigen::MatrixXd A_greater;     // inverse block of B_greater
  Eigen::VectorXd b_row_less;    // B_{j,l}, l in Lambda_<
  Eigen::VectorXd b_col_greater; // B_{n,j}, n in Lambda_>
  Eigen::MatrixXd B_greater_less;// B_{n,l}, n in Lambda_>, l in Lambda_<

  int n_less() const { return static_cast<int>(less_idx.size()); }
  int n_greater() const { return static_cast<int>(greater_idx.size()); }

  Eigen::VectorXd take(const Eigen::VectorXd& eta, const std::vector<int>& idx) const {
    Eigen::VectorXd v(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) v[i] = eta[idx[i]];
    return v;
  }

  // xi(eta_<) = -sum_{l in Lambda_<} B_{jl} eta_l; M_j(eta_<) = [xi, xi + omega_+].
  double xi(const Eigen::VectorXd& eta_less) const { return -b_row_less.dot(eta_less); }

  // Xi(eta_<) over Lambda_>: Xi_n = -sum_{l in Lambda_<} B_{nl} eta_l.
  Eigen::VectorXd Xi(const Eigen::VectorXd& eta_less) const {
    return -(B_greater_less * eta_less);
  }

  bool in_M(const Eigen::VectorXd& eta) const {
    const Eigen::VectorXd w = B * eta;
    return (w.array() >= 0.0).all() && (w.array() <= omega_plus).all();
  }

  bool in_M_less(const Eigen::VectorXd& eta_less) const {
    const Eigen::VectorXd w = B_less * eta_less;
    return (w.array() >= 0.0).all() && (w.array() <= omega_plus).all();
  }

  bool in_M_j(double eta_j, const Eigen::VectorXd& eta_less) const {
    const double lo = xi(eta_less);
    return eta_j >= lo && eta_j <= lo + omega_plus;
  }

  bool in_M_greater(const Eigen::VectorXd& eta_greater, const Eigen::VectorXd& eta_less,
                    double eta_j) const {
    const Eigen::VectorXd w =
        B_greater * eta_greater - Xi(eta_less) + eta_j * b_col_greater;
    return (w.array() >= 0.0).all() && (w.array() <= omega_plus).all();
  }

  // M_>^+(eta_<): union over s in [xi, xi + omega_+] of the M_> slices; the
  // feasible s form an interval intersection as in the sheared union.
  bool in_M_greater_plus(const Eigen::VectorXd& eta_greater,
                         const Eigen::VectorXd& eta_less) const {
    const Eigen::VectorXd base = B_greater * eta_greater - Xi(eta_less);
    const double x0 = xi(eta_less);
    double s_lo = x0, s_hi = x0 + omega_plus;
    for (int n = 0; n < base.size(); ++n) {
      const double bn = b_col_greater[n];
      if (bn == 0.0) {
        if (base[n] < 0.0 || base[n] > omega_plus) return false;
        continue;
      }
      // 0 <= base_n + s b_n <= omega_+
      double a = -base[n] / bn, b = (omega_plus - base[n]) / bn;
      if (a > b) std::swap(a, b);
      s_lo = std::max(s_lo, a);
      s_hi = std::min(s_hi, b);
      if (s_lo > s_hi) return false;
    }
    return true;
  }

  // Direct sampler of M_>(eta_<, eta_j): the slice is the affine image under
  // A_> of the coupling cube shifted by the pivot and eta_< contributions.
  Eigen::VectorXd sample_M_greater(const Eigen::VectorXd& eta_less, double eta_j,
                                   std::mt19937_64& g) const {
    Eigen::VectorXd y(n_greater());
    for (int i = 0; i < y.size(); ++i) y[i] = uniform_in(g, 0.0, omega_plus);
    return A_greater * (y + Xi(eta_less) - eta_j * b_col_greater);
  }
};

inline DomainFactorization factorize_domain(const ConeToeplitzSystem& sys, const Pt& j,
                                            double omega_plus) {
  if (!sys.lambda_plus.contains(j))
    throw PreconditionError("factorize_domain: pivot site is not in Lambda+");
  if (!(omega_plus > 0.0)) throw PreconditionError("factorize_domain: omega_plus must be > 0");
  DomainFactorization f;
  f.pivot = sys.lambda_plus.linear(j);
  f.omega_plus = omega_plus;
  const int n = static_cast<int>(sys.lambda_plus.size());
  for (int i = 0; i < n; ++i) {
    if (i == f.pivot) continue;
    const Pt p = sys.lambda_plus.point(i);
    if (cone_dominates(p, j))
      f.greater_idx.push_back(i);
    else
      f.less_idx.push_back(i);
  }
  f.B = sys.B;
  const int nl = f.n_less(), ng = f.n_greater();
  f.B_less.resize(nl, nl);
  for (int a = 0; a < nl; ++a)
    for (int b = 0; b < nl; ++b) f.B_less(a, b) = sys.B(f.less_idx[a], f.less_idx[b]);
  f.B_greater.resize(ng, ng);
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < ng; ++b) f.B_greater(a, b) = sys.B(f.greater_idx[a], f.greater_idx[b]);
  f.A_greater.resize(ng, ng);
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < ng; ++b) f.A_greater(a, b) = sys.A(f.greater_idx[a], f.greater_idx[b]);
  f.b_row_less.resize(nl);
  for (int b = 0; b < nl; ++b) f.b_row_less[b] = sys.B(f.pivot, f.less_idx[b]);
  f.b_col_greater.resize(ng);
  for (int a = 0; a < ng; ++a) f.b_col_greater[a] = sys.B(f.greater_idx[a], f.pivot);
  f.B_greater_less.resize(ng, nl);
  for (int a = 0; a < ng; ++a)
    for (int b = 0; b < nl; ++b) f.B_greater_less(a, b) = sys.B(f.greater_idx[a], f.less_idx[b]);
  return f;
}

// Samples (eta_j, eta_>) pairs with eta_j in [xi, xi + omega_+] (endpoints
// included deliberately) and eta_> in M_>(eta_<, eta_j), and checks every one
// of them against the enlargement predicate. Contractually always true.
inline bool enclosure_check(const DomainFactorization& f, const Eigen::VectorXd& eta_less,
                            int n_samples, std::uint64_t seed) {
  if (n_samples < 1) throw PreconditionError("enclosure_check: n_samples must be > 0");
  auto g = make_stream(seed, 0x656e636cULL);
  const double x0 = f.xi(eta_less);
  for (int i = 0; i < n_samples; ++i) {
    double eta_j;
    if (i == 0)
      eta_j = x0;
    else if (i == 1)
      eta_j = x0 + f.omega_plus;
    else
      eta_j = uniform_in(g, x0, x0 + f.omega_plus);
    const Eigen::VectorXd eta_g = f.sample_M_greater(eta_less, eta_j, g);
    if (!f.in_M_greater(eta_g, eta_less, eta_j)) return false;  // sampler consistency
    if (!f.in_M_greater_plus(eta_g, eta_less)) return false;
  }
  return true;
}

// Exact volume of M_>^+ from the affine representation: |det A_>| times the
// sheared-cube volume with shear -b_j, i.e. sum_{n in Lambda_> u {j}} |B_{nj}|
// times omega_+^{|Lambda_>|}. det A_> = 1 for cone matrices with unit diagonal,
// but the factor is computed anyway to keep the formula in its stated shape.
inline double enlarged_volume(const DomainFactorization& f) {
  const double det_a = f.n_greater() == 0 ? 1.0 : f.A_greater.determinant();
  double sum = 1.0;  // B_{jj}
  for (int n = 0; n < f.b_col_greater.size(); ++n) sum += std::abs(f.b_col_greater[n]);
  return std::abs(det_a) * sum * std::pow(f.omega_plus, f.n_greater());
}

// Interval-arithmetic bounding box of M_>^+(eta_<) for the MC cross-check.
inline Box enlarged_region_bbox(const DomainFactorization& f, const Eigen::VectorXd& eta_less) {
  const int ng = f.n_greater();
  const Eigen::VectorXd Xi = f.Xi(eta_less);
  const double x0 = f.xi(eta_less);
  Eigen::VectorXd tau_lo(ng), tau_hi(ng);
  for (int n = 0; n < ng; ++n) {
    const double bn = f.b_col_greater[n];
    const double shift_lo = std::min(-x0 * bn, -(x0 + f.omega_plus) * bn);
    const double shift_hi = std::max(-x0 * bn, -(x0 + f.omega_plus) * bn);
    tau_lo[n] = Xi[n] + shift_lo;
    tau_hi[n] = f.omega_plus + Xi[n] + shift_hi;
  }
  Box box;
  box.lo.resize(ng);
  box.hi.resize(ng);
  for (int i = 0; i < ng; ++i) {
    double lo = 0.0, hi = 0.0;
    for (int n = 0; n < ng; ++n) {
      const double c = f.A_greater(i, n);
      lo += c * (c >= 0.0 ? tau_lo[n] : tau_hi[n]);
      hi += c * (c >= 0.0 ? tau_hi[n] : tau_lo[n]);
    }
    box.lo[i] = lo;
    box.hi[i] = hi;
  }
  return box;
}

}  // namespace alloylab
