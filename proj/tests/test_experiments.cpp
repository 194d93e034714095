#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "alloylab/experiments.hpp"
#include "alloylab/model.hpp"

using namespace alloylab;

namespace {

ModelConfig bench_config(int l = 16, Boundary bc = Boundary::kDirichlet) {
  ModelConfig cfg;
  cfg.d = 1;
  cfg.l = l;
  cfg.bc = bc;
  cfg.site.gamma = {make_pt(0), make_pt(1)};
  cfg.site.a = {1.0, -0.5};
  return cfg;
}

// Infinite-volume IDS of the free 1d lattice Laplacian.
double lattice_ids_exact(double e) {
  if (e <= 0.0) return 0.0;
  if (e >= 4.0) return 1.0;
  return std::acos(1.0 - e / 2.0) / M_PI;
}

}  // namespace

TEST_CASE("wegner experiment: empty interval, basic sanity, worker independence") {
  const ModelConfig cfg = bench_config();
  const WegnerResult empty =
      wegner_experiment(cfg, {{1.0, 1.0}}, {8}, 50, 1);
  REQUIRE(empty.rows.size() == 1);
  REQUIRE(empty.rows[0].mean_trace == 0.0);
  REQUIRE(empty.rows[0].ratio == 0.0);

  const WegnerResult a = wegner_experiment(cfg, {{0.72, 0.92}}, {8, 16}, 60, 5, 1);
  const WegnerResult b = wegner_experiment(cfg, {{0.72, 0.92}}, {8, 16}, 60, 5, 4);
  REQUIRE(a.rows.size() == b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    REQUIRE(a.rows[i].mean_trace == b.rows[i].mean_trace);
    REQUIRE(a.rows[i].stderr_ == b.rows[i].stderr_);
    REQUIRE(a.rows[i].mean_trace >= 0.0);
    REQUIRE(a.rows[i].excluded == 0);
  }
}

TEST_CASE("wegner omega_+ normalization in the disorder-dominated regime") {
  // In the regime where the coupling range dominates the kinetic scale the
  // omega_+-normalized ratio stops growing: doubling omega_+ from 4 to 8 must
  // not raise ratio * omega_+ beyond three combined standard errors.
  ModelConfig lo = bench_config();
  lo.omega_plus = 4.0;
  ModelConfig hi = bench_config();
  hi.omega_plus = 8.0;
  const EnergyInterval interval{0.72, 0.92};
  const WegnerResult rlo = wegner_experiment(lo, {interval}, {16}, 500, 31);
  const WegnerResult rhi = wegner_experiment(hi, {interval}, {16}, 500, 32);
  const double denom = interval.length() * 16.0;
  const double a = rlo.rows[0].ratio * 4.0, sa = rlo.rows[0].stderr_ / denom * 4.0;
  const double b = rhi.rows[0].ratio * 8.0, sb = rhi.rows[0].stderr_ / denom * 8.0;
  REQUIRE(b - a <= 3.0 * std::sqrt(sa * sa + sb * sb));
  REQUIRE(rlo.rows[0].c_eq3 == Catch::Approx(a));
}

TEST_CASE("eigenvalue proximity: saturation, empty gap, halving") {
  const ModelConfig cfg = bench_config();
  const ProximityEstimate all = eigenvalue_proximity(cfg, 1.0, 100.0, 40, 2);
  REQUIRE(all.estimate == 1.0);

  // Below the deterministic spectral floor the distance can never be small.
  const ProximityEstimate none = eigenvalue_proximity(cfg, -5.0, 0.1, 40, 2);
  REQUIRE(none.estimate == 0.0);

  // Paired halving with a shared seed: the estimate roughly halves.
  const int n = 600;
  const ProximityEstimate p1 = eigenvalue_proximity(cfg, 0.82, 0.03, n, 77);
  const ProximityEstimate p2 = eigenvalue_proximity(cfg, 0.82, 0.015, n, 77);
  REQUIRE(p1.estimate >= p2.estimate);  // same spectra, smaller window
  const double se = 3.0 * std::sqrt(p1.stderr_ * p1.stderr_ + 4.0 * p2.stderr_ * p2.stderr_);
  REQUIRE(std::abs(p1.estimate - 2.0 * p2.estimate) <= se + 0.02);
}

TEST_CASE("ids estimate: free closed form, monotone table, modulus") {
  // V = 0: finite-volume counting matches the closed-form lattice IDS to 2/l.
  ModelConfig flat = bench_config(24, Boundary::kPeriodic);
  flat.site.a = {1.0, 0.0};
  flat.omega_plus = 1e-12;  // kills the disorder while keeping the model valid
  std::vector<double> grid;
  for (double e = 0.18; e <= 4.2; e += 0.25) grid.push_back(e);
  const IdsTable free_table = ids_estimate(flat, grid, 2, 3);
  for (std::size_t i = 0; i < grid.size(); ++i)
    REQUIRE(std::abs(free_table.mean[i] - lattice_ids_exact(grid[i])) <= 2.0 / flat.l);

  const ModelConfig cfg = bench_config(16);
  std::vector<double> grid2;
  for (double e = -0.5; e <= 4.6; e += 0.1) grid2.push_back(e);
  const IdsTable table = ids_estimate(cfg, grid2, 100, 4);
  for (std::size_t i = 1; i < table.mean.size(); ++i)
    REQUIRE(table.mean[i] >= table.mean[i - 1] - 1e-15);
  const double mod = lipschitz_modulus(table, 0.1);
  REQUIRE(mod > 0.0);
  REQUIRE(std::isfinite(mod));
  REQUIRE_THROWS_AS(lipschitz_modulus(table, 0.0), PreconditionError);
}

TEST_CASE("dirichlet counting monotonicity") {
  ModelConfig cfg = bench_config(8);
  const MonotonicityReport single = dirichlet_monotonicity(cfg, {8}, 1.2, 20, 5);
  REQUIRE(single.monotone);

  // Free operator: counts from the closed form are nondecreasing in l.
  ModelConfig flat = bench_config(8);
  flat.site.a = {1.0, 0.0};
  flat.omega_plus = 1e-9;  // effectively V = 0 while staying a valid model
  const MonotonicityReport free_rep = dirichlet_monotonicity(flat, {4, 8, 12}, 1.7, 5, 6);
  REQUIRE(free_rep.monotone);

  const MonotonicityReport rep = dirichlet_monotonicity(cfg, {8, 12, 16}, 0.9, 30, 7);
  REQUIRE(rep.monotone);
  REQUIRE(rep.violations == 0);

  ModelConfig wrong = bench_config(8, Boundary::kPeriodic);
  REQUIRE_THROWS_AS(dirichlet_monotonicity(wrong, {8, 12}, 1.0, 5, 1), PreconditionError);
}

TEST_CASE("initial scale probability") {
  const ModelConfig cfg = bench_config();
  // Interval covering the whole spectral range.
  const InitialScaleEstimate covering =
      initial_scale_probability(cfg, {-1.0, 10.0}, 16, 0.25, 30, 8);
  REQUIRE(covering.estimate == 1.0);

  // Deep below the deterministic floor min V >= -omega_+ / 2.
  const InitialScaleEstimate far =
      initial_scale_probability(cfg, {-3.0, -2.5}, 16, 0.25, 30, 8);
  REQUIRE(far.estimate == 0.0);

  // Same seed, intervals receding from the spectrum: estimates nonincreasing.
  const InitialScaleEstimate near =
      initial_scale_probability(cfg, {-0.6, -0.3}, 16, 0.25, 200, 9);
  const InitialScaleEstimate mid =
      initial_scale_probability(cfg, {-1.0, -0.7}, 16, 0.25, 200, 9);
  const InitialScaleEstimate deep =
      initial_scale_probability(cfg, {-1.5, -1.2}, 16, 0.25, 200, 9);
  REQUIRE(near.estimate >= mid.estimate);
  REQUIRE(mid.estimate >= deep.estimate);

  REQUIRE_THROWS_AS(initial_scale_probability(cfg, {0.0, 1.0}, 16, 0.3, 5, 1),
                    PreconditionError);
}

TEST_CASE("lifshitz probe: preconditions and qualitative shape") {
  // Sign-indefinite site is refused.
  const ModelConfig indefinite = bench_config();
  REQUIRE_THROWS_AS(lifshitz_probe(indefinite, {1.0}, 5, 1), PreconditionError);

  ModelConfig definite = bench_config(32);
  definite.site.a = {1.0, 0.5};
  const int n = 300;
  // First locate the empirical bottom, then probe offsets above it.
  const LifshitzResult base = lifshitz_probe(definite, {0.0}, n, 11);
  std::vector<double> energies;
  for (double off : {0.15, 0.3, 0.6, 2.0}) energies.push_back(base.e0 + off);
  const LifshitzResult res = lifshitz_probe(definite, energies, n, 11);
  REQUIRE(res.e0 == base.e0);
  REQUIRE(res.points.size() == 4);
  for (const auto& pt : res.points) REQUIRE(pt.kept);

  // Grid points where the counting function degenerates are skipped, not kept.
  const LifshitzResult degenerate = lifshitz_probe(definite, {base.e0}, n, 11);
  REQUIRE(degenerate.skipped == 1);
  REQUIRE_FALSE(degenerate.points[0].kept);
  // Deep points carry strongly negative exponents; far above the edge the
  // exponent is much closer to zero.
  REQUIRE(res.points[0].exponent < -0.6);
  REQUIRE(std::abs(res.points[3].exponent) < std::abs(res.points[0].exponent));
}

TEST_CASE("msa schedule arithmetic") {
  // Strict bracket rule: 9 -> 24 -> 117 -> 1263.
  const MsaSchedule s = msa_schedule(9, 1.5, 1.0, 2.0, 0.0, 0.0, 1.0, 3.0, 3);
  REQUIRE(s.l == std::vector<double>{9, 24, 117, 1263});

  // c1 = c2 = 0: the mass recursion is the closed-form product, bit for bit.
  double m_oracle = 1.0;
  for (std::size_t j = 0; j + 1 < s.l.size(); ++j) {
    m_oracle *= 1.0 - 4.0 * s.l[j] / s.l[j + 1];
    REQUIRE(s.m[j + 1] == m_oracle);
  }

  // steps = 0 returns the seed triple only.
  const MsaSchedule s0 = msa_schedule(9, 1.5, 0.7, 1.0, 0.1, 0.1, 1.0, 1.0, 0);
  REQUIRE(s0.l.size() == 1);
  REQUIRE(s0.m[0] == 0.7);
  REQUIRE(s0.p[0] == std::pow(9.0, -1.0));

  // Replays are bit-exact.
  const MsaSchedule r1 = msa_schedule(300, 1.5, 1.0, 2.0, 0.01, 0.01, 1.0, 3.0, 6);
  const MsaSchedule r2 = msa_schedule(300, 1.5, 1.0, 2.0, 0.01, 0.01, 1.0, 3.0, 6);
  REQUIRE(r1.l == r2.l);
  REQUIRE(r1.m == r2.m);
  REQUIRE(r1.p == r2.p);
  // Benchmark constants keep the mass above m0/2 and improve the bound.
  REQUIRE(r1.m_stays_above_half);
  REQUIRE(r1.prob_improving);

  REQUIRE_THROWS_AS(msa_schedule(3, 1.1, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 2), PreconditionError);
  REQUIRE_THROWS_AS(msa_schedule(10, 1.5, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1), PreconditionError);
  REQUIRE_THROWS_AS(msa_schedule(9, 2.3, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1), PreconditionError);
}

TEST_CASE("regularity survey over hand-built scales") {
  const ModelConfig cfg = bench_config(9);
  MsaSchedule sched;
  sched.l = {9, 12};
  sched.m = {0.1, 0.1};
  sched.p = {0.1, 0.1};
  sched.q = {1.0, 1.0};

  // Energy deep in the lower gap: every sample is regular at every scale.
  const auto deep = regularity_survey(cfg, sched, -2.0, 10, 21);
  REQUIRE(deep.size() == 2);
  for (const auto& row : deep) {
    REQUIRE(row.feasible);
    REQUIRE(row.fraction == 1.0);
  }

  // Absurd mass: threshold below machine floor, nothing passes.
  MsaSchedule absurd = sched;
  absurd.m = {5.0, 5.0};
  const auto none = regularity_survey(cfg, absurd, -2.0, 10, 21);
  for (const auto& row : none) REQUIRE(row.fraction == 0.0);

  // Fraction nonincreasing in m at fixed scale.
  MsaSchedule mild = sched;
  mild.m = {0.05, 0.05};
  const auto loose = regularity_survey(cfg, mild, -2.0, 10, 21);
  for (std::size_t i = 0; i < loose.size(); ++i)
    REQUIRE(loose[i].fraction >= deep[i].fraction);

  // Infeasible scales are reported, not run.
  MsaSchedule big = sched;
  big.l = {9, 2000};
  big.m = {0.1, 0.1};
  const auto rows = regularity_survey(cfg, big, -2.0, 3, 21);
  REQUIRE(rows[1].feasible == false);
}
