#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <cmath>

#include "alloylab/geometry.hpp"
#include "alloylab/rng.hpp"

using namespace alloylab;

namespace {

ShearedUnion make_union(std::initializer_list<double> shear, double omega_plus = 1.0) {
  ShearedUnion u;
  u.n = static_cast<int>(shear.size());
  u.t = Eigen::VectorXd(u.n);
  int i = 0;
  for (double v : shear) u.t[i++] = v;
  u.omega_plus = omega_plus;
  return u;
}

Box union_bbox(const ShearedUnion& u) {
  Box b;
  b.lo.resize(u.n);
  b.hi.resize(u.n);
  for (int i = 0; i < u.n; ++i) {
    b.lo[i] = std::min(0.0, u.omega_plus * u.t[i]);
    b.hi[i] = u.omega_plus + std::max(0.0, u.omega_plus * u.t[i]);
  }
  return b;
}

SingleSite bidiagonal_site() {
  SingleSite s;
  s.gamma = {make_pt(0), make_pt(1)};
  s.a = {1.0, -0.5};
  return s;
}

}  // namespace

TEST_CASE("sheared union volume: known values") {
  REQUIRE(sheared_union_volume(make_union({0.0, 0.0})) == Catch::Approx(1.0));
  REQUIRE(sheared_union_volume(make_union({0.5})) == Catch::Approx(1.5));
  REQUIRE(sheared_union_volume(make_union({0.5, -0.3})) == Catch::Approx(1.8));
  REQUIRE(sheared_union_volume(make_union({0.5, -0.3}, 2.0)) == Catch::Approx(1.8 * 4.0));
}

TEST_CASE("monte carlo volume oracle basics") {
  Box box;
  box.lo = Eigen::VectorXd::Zero(3);
  box.hi = Eigen::VectorXd::Ones(3) * 2.0;
  const McResult full =
      mc_volume([](const Eigen::VectorXd&) { return true; }, box, 10000, 7);
  REQUIRE(full.estimate == Catch::Approx(8.0));
  REQUIRE(full.stderr_ == 0.0);

  // Unit disc as an independent sanity target.
  Box square;
  square.lo = Eigen::VectorXd::Constant(2, -1.0);
  square.hi = Eigen::VectorXd::Constant(2, 1.0);
  const McResult disc = mc_volume(
      [](const Eigen::VectorXd& x) { return x.squaredNorm() <= 1.0; }, square, 1000000, 7);
  REQUIRE(std::abs(disc.estimate - M_PI) <= 3.0 * disc.stderr_);

  REQUIRE_THROWS_AS(mc_volume([](const Eigen::VectorXd&) { return true; }, box, 0, 1),
                    PreconditionError);
}

TEST_CASE("monte carlo volume is independent of the worker count") {
  Box square;
  square.lo = Eigen::VectorXd::Constant(2, -1.0);
  square.hi = Eigen::VectorXd::Constant(2, 1.0);
  auto member = [](const Eigen::VectorXd& x) { return x.squaredNorm() <= 1.0; };
  const McResult a = mc_volume(member, square, 50000, 42, 1);
  const McResult b = mc_volume(member, square, 50000, 42, 4);
  REQUIRE(a.hits == b.hits);
  REQUIRE(a.estimate == b.estimate);
}

TEST_CASE("sheared union against the MC oracle in several dimensions") {
  auto rng = make_stream(53);
  for (int n = 1; n <= 3; ++n) {
    ShearedUnion u;
    u.n = n;
    u.omega_plus = 1.0;
    u.t = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) u.t[i] = uniform_in(rng, -1.2, 1.2);
    const McResult mc =
        mc_volume([&](const Eigen::VectorXd& x) { return sheared_union_contains(u, x); },
                  union_bbox(u), 400000, 1000 + n);
    REQUIRE(std::abs(mc.estimate - sheared_union_volume(u)) <= 3.0 * mc.stderr_);
  }
}

TEST_CASE("decomposition pieces: exact additivity, membership, null overlaps") {
  REQUIRE(sheared_union_decomposition(make_union({0.0, 0.0})).size() == 1);

  const ShearedUnion u1 = make_union({0.5});
  const auto pieces1 = sheared_union_decomposition(u1);
  REQUIRE(pieces1.size() == 2);
  REQUIRE(pieces1[0].volume() == Catch::Approx(1.0));
  REQUIRE(pieces1[1].volume() == Catch::Approx(0.5));

  auto rng = make_stream(8);
  for (int n = 1; n <= 3; ++n) {
    ShearedUnion u;
    u.n = n;
    u.omega_plus = 1.0;
    u.t = Eigen::VectorXd(n);
    for (int i = 0; i < n; ++i) u.t[i] = uniform_in(rng, -1.0, 1.0);
    const auto pieces = sheared_union_decomposition(u);
    double total = 0.0;
    for (const auto& p : pieces) total += p.volume();
    REQUIRE(total == Catch::Approx(sheared_union_volume(u)).epsilon(1e-12));

    // Sampled points: piece membership implies union membership, and overlap
    // hits stay within 3 sigma of the null-set prediction (zero).
    const Box bbox = union_bbox(u);
    auto g = make_stream(100 + n);
    int overlaps = 0;
    const int draws = 20000;
    for (int k = 0; k < draws; ++k) {
      Eigen::VectorXd x(n);
      for (int i = 0; i < n; ++i) x[i] = uniform_in(g, bbox.lo[i], bbox.hi[i]);
      int inside = 0;
      for (const auto& p : pieces) inside += p.contains(x) ? 1 : 0;
      if (inside > 0) REQUIRE(sheared_union_contains(u, x));
      if (inside > 1) ++overlaps;
    }
    REQUIRE(overlaps == 0);
  }
}

TEST_CASE("domain factorization: identity convolution gives independent boxes") {
  SingleSite delta;
  delta.gamma = {make_pt(0)};
  delta.a = {1.0};
  const IndexCube cube = cube_from_origin(1, 0, 4);
  const ConeToeplitzSystem sys = build_system(delta, cube);
  const DomainFactorization fac = factorize_domain(sys, make_pt(2), 1.0);
  REQUIRE(fac.n_less() + fac.n_greater() + 1 == 5);

  auto rng = make_stream(17);
  for (int k = 0; k < 200; ++k) {
    Eigen::VectorXd eta(5);
    for (int i = 0; i < 5; ++i) eta[i] = uniform_in(rng, -0.5, 1.5);
    const bool box_test = (eta.array() >= 0.0).all() && (eta.array() <= 1.0).all();
    REQUIRE(fac.in_M(eta) == box_test);
  }
  const Eigen::VectorXd less0 = Eigen::VectorXd::Zero(fac.n_less());
  REQUIRE(fac.xi(less0) == 0.0);
  REQUIRE(fac.in_M_j(0.0, less0));
  REQUIRE(fac.in_M_j(1.0, less0));
  REQUIRE_FALSE(fac.in_M_j(1.0 + 1e-12, less0));
}

TEST_CASE("factorization is exactly the conjunction of its three predicates") {
  auto rng = make_stream(23);
  for (int d = 1; d <= 2; ++d) {
    SingleSite site;
    if (d == 1) {
      site = bidiagonal_site();
    } else {
      site.gamma = {make_pt(0, 0), make_pt(1, 0), make_pt(0, 1)};
      site.a = {1.0, -0.3, 0.4};
    }
    const IndexCube cube = cube_from_origin(d, -1, d == 1 ? 6 : 2);
    const ConeToeplitzSystem sys = build_system(site, cube);
    const int n = static_cast<int>(cube.size());
    const Pt pivot = cube.point(n / 2);
    const DomainFactorization fac = factorize_domain(sys, pivot, 1.0);
    REQUIRE(fac.n_less() + fac.n_greater() + 1 == n);

    int inside = 0;
    for (int k = 0; k < 10000; ++k) {
      // Forward map: eta = A omega with omega in the coupling box lies in M,
      // and all three predicates must agree.
      Eigen::VectorXd omega(n);
      for (int i = 0; i < n; ++i) omega[i] = uniform01(rng);
      const Eigen::VectorXd eta = sys.A * omega;
      REQUIRE(fac.in_M(eta));
      const Eigen::VectorXd eta_less = fac.take(eta, fac.less_idx);
      const Eigen::VectorXd eta_greater = fac.take(eta, fac.greater_idx);
      REQUIRE(fac.in_M_less(eta_less));
      REQUIRE(fac.in_M_j(eta[fac.pivot], eta_less));
      REQUIRE(fac.in_M_greater(eta_greater, eta_less, eta[fac.pivot]));
      ++inside;
    }
    REQUIRE(inside == 10000);

    // Rejection side: push one coupling outside the box; membership and at
    // least one predicate must fail.
    for (int k = 0; k < 2000; ++k) {
      Eigen::VectorXd omega(n);
      for (int i = 0; i < n; ++i) omega[i] = uniform01(rng);
      const int bad = static_cast<int>(uniform01(rng) * n);
      omega[std::min(bad, n - 1)] = 1.0 + uniform_in(rng, 0.1, 1.0);
      const Eigen::VectorXd eta = sys.A * omega;
      REQUIRE_FALSE(fac.in_M(eta));
      const Eigen::VectorXd eta_less = fac.take(eta, fac.less_idx);
      const Eigen::VectorXd eta_greater = fac.take(eta, fac.greater_idx);
      const bool all_three = fac.in_M_less(eta_less) && fac.in_M_j(eta[fac.pivot], eta_less) &&
                             fac.in_M_greater(eta_greater, eta_less, eta[fac.pivot]);
      REQUIRE_FALSE(all_three);
    }
  }
}

TEST_CASE("enclosure of the eta_j slices in the enlarged domain") {
  // Identity convolution: the enlargement equals the slice for every eta_j.
  SingleSite delta;
  delta.gamma = {make_pt(0)};
  delta.a = {1.0};
  const ConeToeplitzSystem id_sys = build_system(delta, cube_from_origin(1, 0, 3));
  const DomainFactorization id_fac = factorize_domain(id_sys, make_pt(1), 1.0);
  const Eigen::VectorXd id_less = Eigen::VectorXd::Zero(id_fac.n_less());
  REQUIRE(enclosure_check(id_fac, id_less, 500, 3));

  const ConeToeplitzSystem sys = build_system(bidiagonal_site(), cube_from_origin(1, -1, 5));
  const DomainFactorization fac = factorize_domain(sys, make_pt(2), 1.0);
  auto rng = make_stream(31);
  int checked = 0;
  while (checked < 5) {
    // Draw eta_< from the forward image so that it lies in M_<.
    Eigen::VectorXd omega(sys.A.rows());
    for (int i = 0; i < omega.size(); ++i) omega[i] = uniform01(rng);
    const Eigen::VectorXd eta_less = fac.take(sys.A * omega, fac.less_idx);
    if (!fac.in_M_less(eta_less)) continue;
    REQUIRE(enclosure_check(fac, eta_less, 1000, 1000 + checked));
    ++checked;
  }
}

TEST_CASE("enlarged volume: identity case, MC agreement, eta_< independence") {
  SingleSite delta;
  delta.gamma = {make_pt(0)};
  delta.a = {1.0};
  const ConeToeplitzSystem id_sys = build_system(delta, cube_from_origin(1, 0, 4));
  const DomainFactorization id_fac = factorize_domain(id_sys, make_pt(1), 1.0);
  REQUIRE(enlarged_volume(id_fac) == Catch::Approx(1.0));  // omega_+^{|Lambda_>|} with B_nj = 0

  const ConeToeplitzSystem sys = build_system(bidiagonal_site(), cube_from_origin(1, -1, 4));
  const DomainFactorization fac = factorize_domain(sys, make_pt(1), 1.0);
  // Two eta_< choices: the enlargement translates but its volume stays fixed.
  for (int choice = 0; choice < 2; ++choice) {
    Eigen::VectorXd eta_less = Eigen::VectorXd::Zero(fac.n_less());
    if (choice == 1)
      for (int i = 0; i < eta_less.size(); ++i) eta_less[i] = 0.3 + 0.1 * i;
    const Box bbox = enlarged_region_bbox(fac, eta_less);
    const McResult mc = mc_volume(
        [&](const Eigen::VectorXd& x) { return fac.in_M_greater_plus(x, eta_less); }, bbox,
        1000000, 500 + choice);
    REQUIRE(std::abs(mc.estimate - enlarged_volume(fac)) <= 3.0 * mc.stderr_);
  }

  // Inflation factor bound: vol(M_>^+) / omega_+^{|Lambda_>|} <= ||B||_1.
  for (int side : {4, 8, 16}) {
    const ConeToeplitzSystem s = build_system(bidiagonal_site(), cube_from_origin(1, -1, side));
    const DomainFactorization f = factorize_domain(s, make_pt(0), 1.0);
    const double inflation = enlarged_volume(f);
    REQUIRE(inflation <= column_sum_norm(s.B) + 1e-12);
    REQUIRE(inflation <= 1.0 / (1.0 - s.a_star) + 1e-10);
  }
}

TEST_CASE("volume of M itself matches the coupling box volume") {
  // det A = 1, so vol(M) = omega_+^L; checked by MC for a small system.
  const ConeToeplitzSystem sys = build_system(bidiagonal_site(), cube_from_origin(1, 0, 5));
  const int n = static_cast<int>(sys.A.rows());
  const DomainFactorization fac = factorize_domain(sys, make_pt(0), 1.0);
  Box bbox;
  bbox.lo.resize(n);
  bbox.hi.resize(n);
  // Interval image of the coupling box under A.
  for (int i = 0; i < n; ++i) {
    double lo = 0.0, hi = 0.0;
    for (int k = 0; k < n; ++k) {
      lo += std::min(0.0, sys.A(i, k));
      hi += std::max(0.0, sys.A(i, k));
    }
    bbox.lo[i] = lo;
    bbox.hi[i] = hi;
  }
  const McResult mc =
      mc_volume([&](const Eigen::VectorXd& x) { return fac.in_M(x); }, bbox, 2000000, 77);
  REQUIRE(std::abs(mc.estimate - 1.0) <= 3.0 * mc.stderr_);
}
