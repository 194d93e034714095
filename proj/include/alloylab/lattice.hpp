#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "alloylab/errors.hpp"

namespace alloylab {

inline constexpr int kMaxDim = 3;

// Lattice point. Coordinates beyond the active dimension stay 0 so that
// comparisons and packing can always run over all kMaxDim slots.
using Pt = std::array<int, kMaxDim>;

inline Pt make_pt(int x, int y = 0, int z = 0) { return Pt{x, y, z}; }

// Componentwise cone (partial) order: true iff j_i >= k_i for every coordinate.
inline bool cone_dominates(const Pt& j, const Pt& k) {
  for (int i = 0; i < kMaxDim; ++i)
    if (j[i] < k[i]) return false;
  return true;
}

inline Pt pt_minus(const Pt& a, const Pt& b) {
  return Pt{a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Pt pt_plus(const Pt& a, const Pt& b) {
  return Pt{a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline int coord_sum(const Pt& p) { return p[0] + p[1] + p[2]; }

// Packs a point into 21-bit fields; used to key per-site RNG streams.
inline std::uint64_t pack_pt(const Pt& p) {
  std::uint64_t key = 0;
  for (int i = 0; i < kMaxDim; ++i)
    key |= (static_cast<std::uint64_t>(p[i] + (1 << 20)) & 0x1fffffULL) << (21 * i);
  return key;
}

// Axis-aligned discrete box [lo, hi]^d (inclusive), enumerated lexicographically
// with coordinate 0 fastest. All index sets in the library (grid nodes, lattice
// cells, the site set influencing the potential) are cubes of this kind.
struct IndexCube {
  int d = 1;
  Pt lo{0, 0, 0};
  Pt hi{0, 0, 0};

  int extent(int i) const { return hi[i] - lo[i] + 1; }

  std::int64_t size() const {
    std::int64_t n = 1;
    for (int i = 0; i < d; ++i) n *= extent(i);
    return n;
  }

  bool contains(const Pt& p) const {
    for (int i = 0; i < d; ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }

  int linear(const Pt& p) const {
    int idx = 0, stride = 1;
    for (int i = 0; i < d; ++i) {
      idx += (p[i] - lo[i]) * stride;
      stride *= extent(i);
    }
    return idx;
  }

  Pt point(int idx) const {
    Pt p{0, 0, 0};
    for (int i = 0; i < d; ++i) {
      p[i] = lo[i] + idx % extent(i);
      idx /= extent(i);
    }
    return p;
  }

  bool operator==(const IndexCube& o) const { return d == o.d && lo == o.lo && hi == o.hi; }
};

inline IndexCube cube_from_origin(int d, int side_lo, int side_hi) {
  IndexCube c;
  c.d = d;
  for (int i = 0; i < d; ++i) {
    c.lo[i] = side_lo;
    c.hi[i] = side_hi;
  }
  return c;
}

}  // namespace alloylab
