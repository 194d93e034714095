#pragma once

// Discretized alloy-type operator H_omega = -Laplace_h + V_0 + V_omega on the
// box [0, l]^d. Grid nodes are cell centers with mesh h = 1/r, so the matrix
// dimension is (r*l)^d. For the default step bump with r = 1 the potential is
// constant per unit cell and the cell values coincide with the eta coordinates
// of the toeplitz module.

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <vector>

#include "alloylab/errors.hpp"
#include "alloylab/lattice.hpp"
#include "alloylab/rng.hpp"

namespace alloylab {

using SparseMat = Eigen::SparseMatrix<double>;

enum class Boundary { kDirichlet, kNeumann, kPeriodic };

inline const char* boundary_name(Boundary bc) {
  switch (bc) {
    case Boundary::kDirichlet: return "dirichlet";
    case Boundary::kNeumann: return "neumann";
    case Boundary::kPeriodic: return "periodic";
  }
  return "?";
}

inline Boundary boundary_from_name(const std::string& s) {
  if (s == "dirichlet") return Boundary::kDirichlet;
  if (s == "neumann") return Boundary::kNeumann;
  if (s == "periodic") return Boundary::kPeriodic;
  throw ParseError("unknown boundary condition '" + s + "' (dirichlet|neumann|periodic)");
}

// Generalized step function u = sum_{g in gamma} a_g w(. - g). The base bump w
// is given by cell-averaged samples on one unit cell (r^d values); an empty w
// means the default bump kappa * indicator of [0,1]^d.
struct SingleSite {
  std::vector<Pt> gamma;   // support of the convolution vector, inside the positive cone
  std::vector<double> a;   // coefficients aligned with gamma, a_0 = 1
  double kappa = 1.0;
  std::vector<double> w;   // empty => default bump

  bool default_bump() const { return w.empty(); }

  // a* = sum_{k != 0} |a_k|; admissibility requires a* < a_0 = 1.
  double a_star() const {
    double s = 0.0;
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (gamma[i] != Pt{0, 0, 0}) s += std::abs(a[i]);
    return s;
  }

  // Side g of the enclosing discrete cube [0, g]^d (the support is padded to a
  // cube with zero coefficients; enumeration stays regular that way).
  int cube_side() const {
    int g = 0;
    for (const Pt& p : gamma)
      for (int i = 0; i < kMaxDim; ++i)
        if (p[i] > g) g = p[i];
    return g;
  }

  double coeff(const Pt& p) const {
    for (std::size_t i = 0; i < gamma.size(); ++i)
      if (gamma[i] == p) return a[i];
    return 0.0;
  }

  bool sign_definite() const {
    for (double c : a)
      if (c < 0.0) return false;
    for (double v : w)
      if (v < 0.0) return false;
    return true;
  }
};

struct ModelConfig {
  int d = 1;
  int l = 8;
  Boundary bc = Boundary::kPeriodic;
  int r = 1;                // grid points per unit length, mesh h = 1/r
  std::vector<double> v0;   // periodic background, r^d samples per cell; empty => 0
  SingleSite site;
  double omega_plus = 1.0;
};

inline std::int64_t ipow(std::int64_t b, int e) {
  std::int64_t v = 1;
  while (e-- > 0) v *= b;
  return v;
}

inline void validate(const ModelConfig& cfg) {
  if (cfg.d < 1 || cfg.d > kMaxDim) throw PreconditionError("config: d must be 1, 2 or 3");
  if (cfg.l < 1) throw PreconditionError("config: l must be >= 1");
  if (cfg.r < 1) throw PreconditionError("config: r must be >= 1");
  if (!(cfg.omega_plus > 0.0)) throw PreconditionError("config: omega_plus must be > 0");
  if (cfg.site.gamma.size() != cfg.site.a.size())
    throw PreconditionError("config: gamma and a must have the same length");
  if (cfg.site.gamma.empty()) throw PreconditionError("config: gamma must contain 0");
  bool has_origin = false;
  for (std::size_t i = 0; i < cfg.site.gamma.size(); ++i) {
    const Pt& p = cfg.site.gamma[i];
    if (!cone_dominates(p, Pt{0, 0, 0}))
      throw PreconditionError("config: gamma must lie in the positive cone");
    for (int k = cfg.d; k < kMaxDim; ++k)
      if (p[k] != 0) throw PreconditionError("config: gamma entry exceeds dimension d");
    if (p == Pt{0, 0, 0}) {
      has_origin = true;
      if (cfg.site.a[i] != 1.0) throw PreconditionError("config: a_0 must equal 1");
    }
  }
  if (!has_origin) throw PreconditionError("config: gamma must contain 0");
  if (!(cfg.site.a_star() < 1.0))
    throw PreconditionError("config: inadmissible convolution vector, a* >= 1");
  if (!(cfg.site.kappa > 0.0)) throw PreconditionError("config: kappa must be > 0");
  const std::int64_t cell = ipow(cfg.r, cfg.d);
  if (!cfg.v0.empty() && static_cast<std::int64_t>(cfg.v0.size()) != cell)
    throw PreconditionError("config: v0 needs r^d samples per unit cell");
  if (!cfg.site.w.empty() && static_cast<std::int64_t>(cfg.site.w.size()) != cell)
    throw PreconditionError("config: w needs r^d samples per unit cell");
}

// Lattice cells inside the box: {0, ..., l-1}^d.
inline IndexCube lambda_tilde(const ModelConfig& cfg) {
  return cube_from_origin(cfg.d, 0, cfg.l - 1);
}

// Sites whose coupling influences the potential inside the box,
// Lambda+ = Lambda~ - Gamma padded to the cube {-g, ..., l-1}^d.
inline IndexCube lambda_plus(const ModelConfig& cfg) {
  return cube_from_origin(cfg.d, -cfg.site.cube_side(), cfg.l - 1);
}

// Grid nodes: {0, ..., r*l-1}^d; node n belongs to cell floor(n/r).
inline IndexCube grid_cube(const ModelConfig& cfg) {
  return cube_from_origin(cfg.d, 0, cfg.r * cfg.l - 1);
}

inline int max_matrix_dim() {
  if (const char* env = std::getenv("ALLOYLAB_MAX_DIM")) {
    const long v = std::atol(env);
    if (v > 0) return static_cast<int>(v);
  }
  return 4000;
}

struct DisorderSample {
  IndexCube lambda_plus;
  Eigen::VectorXd omega;   // entries in [0, omega_plus], indexed by lambda_plus
  std::uint64_t seed = 0;
  std::uint64_t index = 0;
};

// I.i.d. uniform couplings on [0, omega_plus]. Each site value comes from a
// stream keyed by (seed, index, packed site), so a sample restricted to a
// smaller nested box reproduces the same field and regeneration is exact.
inline DisorderSample sample_disorder(const ModelConfig& cfg, std::uint64_t seed,
                                      std::uint64_t index) {
  validate(cfg);
  DisorderSample s;
  s.lambda_plus = lambda_plus(cfg);
  s.seed = seed;
  s.index = index;
  const std::int64_t n = s.lambda_plus.size();
  s.omega.resize(n);
  for (std::int64_t i = 0; i < n; ++i) {
    auto g = make_stream(seed, index, pack_pt(s.lambda_plus.point(static_cast<int>(i))));
    s.omega[i] = cfg.omega_plus * uniform01(g);
  }
  return s;
}

// Cell-averaged bump value on subcell s of the unit cell.
inline double bump_value(const ModelConfig& cfg, int subcell) {
  return cfg.site.default_bump() ? cfg.site.kappa : cfg.site.w[subcell];
}

// V_omega(x) = sum_{k in Lambda+} omega_k u(x - k) sampled on the grid.
inline Eigen::VectorXd assemble_potential(const ModelConfig& cfg, const DisorderSample& sample) {
  validate(cfg);
  if (!(sample.lambda_plus == lambda_plus(cfg)))
    throw PreconditionError("assemble_potential: sample is indexed by a different Lambda+");
  const IndexCube plus = sample.lambda_plus;
  const IndexCube cells = lambda_tilde(cfg);
  const IndexCube grid = grid_cube(cfg);
  const IndexCube subcells = cube_from_origin(cfg.d, 0, cfg.r - 1);
  const int n_sub = static_cast<int>(subcells.size());

  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.size());
  for (int ki = 0; ki < plus.size(); ++ki) {
    const Pt k = plus.point(ki);
    const double wk = sample.omega[ki];
    if (wk == 0.0) continue;
    for (std::size_t gi = 0; gi < cfg.site.gamma.size(); ++gi) {
      const Pt cell = pt_plus(k, cfg.site.gamma[gi]);
      if (!cells.contains(cell)) continue;
      const double c = wk * cfg.site.a[gi];
      for (int si = 0; si < n_sub; ++si) {
        const Pt sc = subcells.point(si);
        Pt node{0, 0, 0};
        for (int i = 0; i < cfg.d; ++i) node[i] = cell[i] * cfg.r + sc[i];
        v[grid.linear(node)] += c * bump_value(cfg, si);
      }
    }
  }
  return v;
}

// Background V_0 tiled over the grid (Z^d-periodic, so it only depends on the
// subcell index).
inline Eigen::VectorXd background_potential(const ModelConfig& cfg) {
  const IndexCube grid = grid_cube(cfg);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid.size());
  if (cfg.v0.empty()) return v;
  const IndexCube subcells = cube_from_origin(cfg.d, 0, cfg.r - 1);
  for (int ni = 0; ni < grid.size(); ++ni) {
    const Pt node = grid.point(ni);
    Pt sc{0, 0, 0};
    for (int i = 0; i < cfg.d; ++i) sc[i] = node[i] % cfg.r;
    v[ni] = cfg.v0[subcells.linear(sc)];
  }
  return v;
}

// Second-order finite-difference -Laplace_h with the configured boundary rule.
// Dirichlet drops outside couplings, Neumann mirrors the ghost node onto the
// boundary node, periodic wraps.
inline SparseMat assemble_laplacian(int d, int l, int r, Boundary bc) {
  const IndexCube grid = cube_from_origin(d, 0, r * l - 1);
  const std::int64_t n = grid.size();
  if (n > max_matrix_dim())
    throw ResourceError("assemble_laplacian: matrix dimension " + std::to_string(n) +
                        " exceeds cap " + std::to_string(max_matrix_dim()));
  const double h2 = static_cast<double>(r) * static_cast<double>(r);  // 1/h^2
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(static_cast<std::size_t>(n) * (2 * d + 1));
  const int side = r * l;
  for (int ni = 0; ni < n; ++ni) {
    const Pt node = grid.point(ni);
    double diag = 2.0 * d * h2;
    for (int i = 0; i < d; ++i) {
      for (int dir = -1; dir <= 1; dir += 2) {
        Pt nbr = node;
        nbr[i] += dir;
        if (grid.contains(nbr)) {
          trip.emplace_back(ni, grid.linear(nbr), -h2);
        } else if (bc == Boundary::kPeriodic) {
          nbr[i] = (nbr[i] + side) % side;
          if (grid.linear(nbr) == ni)
            diag -= h2;  // side == 1: the wrapped neighbour is the node itself
          else
            trip.emplace_back(ni, grid.linear(nbr), -h2);
        } else if (bc == Boundary::kNeumann) {
          diag -= h2;    // mirror ghost equals the boundary node
        }
        // Dirichlet: coupling dropped, diagonal unchanged.
      }
    }
    trip.emplace_back(ni, ni, diag);
  }
  SparseMat lap(n, n);
  lap.setFromTriplets(trip.begin(), trip.end());
  lap.makeCompressed();
  return lap;
}

inline SparseMat assemble_hamiltonian(const ModelConfig& cfg, const DisorderSample& sample) {
  validate(cfg);
  SparseMat h = assemble_laplacian(cfg.d, cfg.l, cfg.r, cfg.bc);
  const Eigen::VectorXd v = background_potential(cfg) + assemble_potential(cfg, sample);
  for (int i = 0; i < h.rows(); ++i) h.coeffRef(i, i) += v[i];
  h.makeCompressed();
  return h;
}

// H_0 = -Laplace_h + V_0 (zero disorder).
inline SparseMat assemble_free(const ModelConfig& cfg) {
  validate(cfg);
  DisorderSample zero;
  zero.lambda_plus = lambda_plus(cfg);
  zero.omega = Eigen::VectorXd::Zero(zero.lambda_plus.size());
  return assemble_hamiltonian(cfg, zero);
}

}  // namespace alloylab
