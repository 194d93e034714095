#pragma once

// Monte Carlo disorder experiments: Wegner ratios, eigenvalue-proximity
// probabilities, the finite-volume IDS and its Lipschitz modulus, Dirichlet
// counting monotonicity, initial-scale estimates, the Lifshitz-tail probe and
// the MSA scale recursion. Samples are independent work units with seeds
// derived from (experiment seed, sample index); reductions run in index order,
// so results are byte-identical for any worker count. Samples that fail
// numerically are excluded and counted, never resampled.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "alloylab/errors.hpp"
#include "alloylab/model.hpp"
#include "alloylab/spectral.hpp"
#include "alloylab/stats.hpp"
#include "alloylab/threads.hpp"

namespace alloylab {

// ---------------------------------------------------------------------------
// Wegner experiment
// ---------------------------------------------------------------------------

struct WegnerRow {
  int l = 0;
  EnergyInterval interval;
  int n_samples = 0;
  int excluded = 0;
  double mean_trace = 0.0;
  double stderr_ = 0.0;
  double ratio = 0.0;        // mean / (|I| l^d)
  double c_eq3 = 0.0;        // ratio * omega_+   (the (omega_+ - omega_-)^{-1} normalization)
  double c_section3 = 0.0;   // ratio * (1 - a*) / omega_+   (the omega_+/(1-a*) form)
};

struct WegnerResult {
  std::vector<WegnerRow> rows;
};

inline WegnerResult wegner_experiment(const ModelConfig& base,
                                      const std::vector<EnergyInterval>& intervals,
                                      const std::vector<int>& sides, int n_samples,
                                      std::uint64_t seed, int workers = 1) {
  validate(base);
  if (intervals.empty() || sides.empty() || n_samples < 1)
    throw PreconditionError("wegner_experiment: empty grid or no samples");
  WegnerResult result;
  const double a_star = base.site.a_star();
  for (int l : sides) {
    ModelConfig cfg = base;
    cfg.l = l;
    validate(cfg);
    // One spectrum per sample serves every interval of this box size.
    std::vector<std::vector<int>> traces(intervals.size(),
                                         std::vector<int>(n_samples, 0));
    std::vector<char> failed(n_samples, 0);
    parallel_for_indexed(n_samples, workers, [&](std::uint64_t si) {
      try {
        const DisorderSample sample = sample_disorder(cfg, seed, si);
        const SparseMat h = assemble_hamiltonian(cfg, sample);
        for (std::size_t ii = 0; ii < intervals.size(); ++ii)
          traces[ii][si] = trace_projector(h, intervals[ii]);
      } catch (const NumericalError&) {
        failed[si] = 1;
      }
    });
    const double cells = std::pow(static_cast<double>(l), base.d);
    for (std::size_t ii = 0; ii < intervals.size(); ++ii) {
      WegnerRow row;
      row.l = l;
      row.interval = intervals[ii];
      row.n_samples = n_samples;
      std::vector<double> vals;
      vals.reserve(n_samples);
      for (int si = 0; si < n_samples; ++si) {
        if (failed[si])
          ++row.excluded;
        else
          vals.push_back(traces[ii][si]);
      }
      const MeanStderr ms = mean_stderr(vals);
      row.mean_trace = ms.mean;
      row.stderr_ = ms.stderr_;
      const double denom = row.interval.length() * cells;
      row.ratio = denom > 0.0 ? row.mean_trace / denom : 0.0;
      row.c_eq3 = row.ratio * base.omega_plus;
      row.c_section3 = row.ratio * (1.0 - a_star) / base.omega_plus;
      result.rows.push_back(row);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Eigenvalue proximity (H2 form)
// ---------------------------------------------------------------------------

struct ProximityEstimate {
  double energy = 0.0;
  double eps = 0.0;
  int n_samples = 0;
  int excluded = 0;
  int hits = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
  double h2_ratio = 0.0;  // estimate / (eps |Lambda|^2)
};

inline ProximityEstimate eigenvalue_proximity(const ModelConfig& cfg, double energy, double eps,
                                              int n_samples, std::uint64_t seed, int workers = 1) {
  validate(cfg);
  if (!(eps > 0.0)) throw PreconditionError("eigenvalue_proximity: eps must be > 0");
  if (n_samples < 1) throw PreconditionError("eigenvalue_proximity: no samples");
  std::vector<char> hit(n_samples, 0), failed(n_samples, 0);
  parallel_for_indexed(n_samples, workers, [&](std::uint64_t si) {
    try {
      const DisorderSample sample = sample_disorder(cfg, seed, si);
      const SparseMat h = assemble_hamiltonian(cfg, sample);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h), Eigen::EigenvaluesOnly);
      const double dist = (es.eigenvalues().array() - energy).abs().minCoeff();
      hit[si] = dist <= eps ? 1 : 0;
    } catch (const NumericalError&) {
      failed[si] = 1;
    }
  });
  ProximityEstimate est;
  est.energy = energy;
  est.eps = eps;
  est.n_samples = n_samples;
  int used = 0;
  for (int si = 0; si < n_samples; ++si) {
    if (failed[si]) {
      ++est.excluded;
      continue;
    }
    ++used;
    est.hits += hit[si];
  }
  if (used > 0) {
    const double p = static_cast<double>(est.hits) / used;
    est.estimate = p;
    est.stderr_ = std::sqrt(p * (1.0 - p) / used);
  }
  const double volume = std::pow(static_cast<double>(cfg.l), cfg.d);
  est.h2_ratio = est.estimate / (eps * volume * volume);
  return est;
}

// ---------------------------------------------------------------------------
// IDS and Lipschitz modulus
// ---------------------------------------------------------------------------

struct IdsTable {
  int d = 1;
  int l = 0;
  Boundary bc = Boundary::kPeriodic;
  int n_samples = 0;
  int excluded = 0;
  std::vector<double> energies;
  std::vector<double> mean;     // averaged N_omega^l(E) = l^{-d} #{lambda < E}
  std::vector<double> stderr_;
};

inline IdsTable ids_estimate(const ModelConfig& cfg, const std::vector<double>& energies,
                             int n_samples, std::uint64_t seed, int workers = 1) {
  validate(cfg);
  if (energies.empty()) throw PreconditionError("ids_estimate: empty energy grid");
  for (std::size_t i = 1; i < energies.size(); ++i)
    if (!(energies[i - 1] <= energies[i]))
      throw PreconditionError("ids_estimate: energy grid must be sorted");
  if (n_samples < 1) throw PreconditionError("ids_estimate: no samples");
  const double cells = std::pow(static_cast<double>(cfg.l), cfg.d);
  std::vector<std::vector<double>> counts(energies.size(),
                                          std::vector<double>(n_samples, 0.0));
  std::vector<char> failed(n_samples, 0);
  parallel_for_indexed(n_samples, workers, [&](std::uint64_t si) {
    try {
      const DisorderSample sample = sample_disorder(cfg, seed, si);
      const SparseMat h = assemble_hamiltonian(cfg, sample);
      const Eigen::MatrixXd hd = dense(h);
      for (std::size_t ei = 0; ei < energies.size(); ++ei)
        counts[ei][si] = count_below(hd, energies[ei]) / cells;
    } catch (const NumericalError&) {
      failed[si] = 1;
    }
  });
  IdsTable table;
  table.d = cfg.d;
  table.l = cfg.l;
  table.bc = cfg.bc;
  table.n_samples = n_samples;
  table.energies = energies;
  for (std::size_t ei = 0; ei < energies.size(); ++ei) {
    std::vector<double> vals;
    vals.reserve(n_samples);
    for (int si = 0; si < n_samples; ++si)
      if (!failed[si]) vals.push_back(counts[ei][si]);
    const MeanStderr ms = mean_stderr(vals);
    table.mean.push_back(ms.mean);
    table.stderr_.push_back(ms.stderr_);
  }
  for (int si = 0; si < n_samples; ++si)
    if (failed[si]) ++table.excluded;
  return table;
}

// max over the grid of (N(E) - N(E - eps)) / eps, with eps rounded to a whole
// number of grid steps.
inline double lipschitz_modulus(const IdsTable& table, double eps) {
  if (!(eps > 0.0)) throw PreconditionError("lipschitz_modulus: eps must be > 0");
  if (table.energies.size() < 2) throw PreconditionError("lipschitz_modulus: table too small");
  const double step = table.energies[1] - table.energies[0];
  const int k = std::max(1, static_cast<int>(std::lround(eps / step)));
  double modulus = 0.0;
  for (std::size_t i = k; i < table.energies.size(); ++i) {
    const double de = table.energies[i] - table.energies[i - k];
    if (de <= 0.0) continue;
    modulus = std::max(modulus, (table.mean[i] - table.mean[i - k]) / de);
  }
  return modulus;
}

// ---------------------------------------------------------------------------
// Dirichlet counting monotonicity
// ---------------------------------------------------------------------------

struct MonotonicityReport {
  bool monotone = true;
  int violations = 0;
  int n_samples = 0;
  int excluded = 0;
};

// Un-normalized Dirichlet eigenvalue counts below E must be nondecreasing
// under box inclusion; the disorder field is shared across the nested boxes
// because couplings are keyed by lattice site.
inline MonotonicityReport dirichlet_monotonicity(const ModelConfig& base,
                                                 const std::vector<int>& sides, double energy,
                                                 int n_samples, std::uint64_t seed,
                                                 int workers = 1) {
  validate(base);
  if (base.bc != Boundary::kDirichlet)
    throw PreconditionError("dirichlet_monotonicity: config must use Dirichlet bc");
  if (sides.size() < 1) throw PreconditionError("dirichlet_monotonicity: no boxes");
  for (std::size_t i = 1; i < sides.size(); ++i)
    if (sides[i - 1] > sides[i])
      throw PreconditionError("dirichlet_monotonicity: boxes must be nested (ascending)");
  std::vector<int> viol(n_samples, 0);
  std::vector<char> failed(n_samples, 0);
  parallel_for_indexed(n_samples, workers, [&](std::uint64_t si) {
    try {
      int prev = -1;
      for (int l : sides) {
        ModelConfig cfg = base;
        cfg.l = l;
        const DisorderSample sample = sample_disorder(cfg, seed, si);
        const SparseMat h = assemble_hamiltonian(cfg, sample);
        const int count = count_below(h, energy);
        if (prev >= 0 && count < prev) ++viol[si];
        prev = count;
      }
    } catch (const NumericalError&) {
      failed[si] = 1;
    }
  });
  MonotonicityReport rep;
  rep.n_samples = n_samples;
  for (int si = 0; si < n_samples; ++si) {
    if (failed[si]) {
      ++rep.excluded;
      continue;
    }
    rep.violations += viol[si];
  }
  rep.monotone = rep.violations == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Initial length scale estimate
// ---------------------------------------------------------------------------

inline double spectrum_interval_distance(const Eigen::VectorXd& eigenvalues,
                                         const EnergyInterval& interval) {
  double dist = std::numeric_limits<double>::infinity();
  for (int i = 0; i < eigenvalues.size(); ++i) {
    const double lam = eigenvalues[i];
    double d = 0.0;
    if (lam < interval.e1)
      d = interval.e1 - lam;
    else if (lam > interval.e2)
      d = lam - interval.e2;
    dist = std::min(dist, d);
  }
  return dist;
}

struct InitialScaleEstimate {
  double threshold = 0.0;  // l^{-alpha} / 2
  int n_samples = 0;
  int excluded = 0;
  int hits = 0;
  double estimate = 0.0;
  double stderr_ = 0.0;
};

// Empirical P{ dist(sigma(H_omega^l), I) < l^{-alpha}/2 } for alpha in ]0, 1/4].
inline InitialScaleEstimate initial_scale_probability(const ModelConfig& base,
                                                      const EnergyInterval& interval, int l,
                                                      double alpha, int n_samples,
                                                      std::uint64_t seed, int workers = 1) {
  if (!(alpha > 0.0 && alpha <= 0.25))
    throw PreconditionError("initial_scale_probability: alpha must lie in ]0, 1/4]");
  ModelConfig cfg = base;
  cfg.l = l;
  validate(cfg);
  InitialScaleEstimate est;
  est.threshold = 0.5 * std::pow(static_cast<double>(l), -alpha);
  est.n_samples = n_samples;
  std::vector<char> hit(n_samples, 0), failed(n_samples, 0);
  parallel_for_indexed(n_samples, workers, [&](std::uint64_t si) {
    try {
      const DisorderSample sample = sample_disorder(cfg, seed, si);
      const SparseMat h = assemble_hamiltonian(cfg, sample);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h), Eigen::EigenvaluesOnly);
      hit[si] = spectrum_interval_distance(es.eigenvalues(), interval) < est.threshold ? 1 : 0;
    } catch (const NumericalError&) {
      failed[si] = 1;
    }
  });
  int used = 0;
  for (int si = 0; si < n_samples; ++si) {
    if (failed[si]) {
      ++est.excluded;
      continue;
    }
    ++used;
    est.hits += hit[si];
  }
  if (used > 0) {
    const double p = static_cast<double>(est.hits) / used;
    est.estimate = p;
    est.stderr_ = std::sqrt(p * (1.0 - p) / used);
  }
  return est;
}

// ---------------------------------------------------------------------------
// Lifshitz probe
// ---------------------------------------------------------------------------

struct LifshitzPoint {
  double energy = 0.0;
  double ids = 0.0;
  double exponent = 0.0;
  bool kept = false;
};

struct LifshitzResult {
  double e0 = 0.0;  // empirical spectral infimum over all samples
  std::vector<LifshitzPoint> points;
  int skipped = 0;
  int excluded = 0;
};

// Exponent series log|log N(E)| / log|E - E0| near the bottom edge. Requires a
// sign-definite single site (u >= 0); grid points where the averaged counting
// function vanishes (or the logs degenerate) are skipped and counted.
inline LifshitzResult lifshitz_probe(const ModelConfig& cfg, const std::vector<double>& energies,
                                     int n_samples, std::uint64_t seed, int workers = 1) {
  validate(cfg);
  if (!cfg.site.sign_definite())
    throw PreconditionError(
        "lifshitz_probe: sign-indefinite single site; the bottom-edge probe needs u >= 0");
  if (energies.empty()) throw PreconditionError("lifshitz_probe: empty energy grid");
  if (n_samples < 1) throw PreconditionError("lifshitz_probe: no samples");
  const double cells = std::pow(static_cast<double>(cfg.l), cfg.d);
  std::vector<Eigen::VectorXd> spectra(n_samples);
  std::vector<char> failed(n_samples, 0);
  parallel_for_indexed(n_samples, workers, [&](std::uint64_t si) {
    try {
      const DisorderSample sample = sample_disorder(cfg, seed, si);
      const SparseMat h = assemble_hamiltonian(cfg, sample);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h), Eigen::EigenvaluesOnly);
      spectra[si] = es.eigenvalues();
    } catch (const NumericalError&) {
      failed[si] = 1;
    }
  });
  LifshitzResult res;
  res.e0 = std::numeric_limits<double>::infinity();
  for (int si = 0; si < n_samples; ++si) {
    if (failed[si]) {
      ++res.excluded;
      continue;
    }
    res.e0 = std::min(res.e0, spectra[si].minCoeff());
  }
  for (double e : energies) {
    LifshitzPoint pt;
    pt.energy = e;
    double acc = 0.0;
    int used = 0;
    for (int si = 0; si < n_samples; ++si) {
      if (failed[si]) continue;
      ++used;
      int c = 0;
      for (int i = 0; i < spectra[si].size(); ++i)
        if (spectra[si][i] < e) ++c;
      acc += c / cells;
    }
    pt.ids = used > 0 ? acc / used : 0.0;
    const double gap = e - res.e0;
    if (pt.ids > 0.0 && pt.ids != 1.0 && gap > 0.0 && std::abs(std::log(gap)) > 1e-12) {
      pt.exponent = std::log(std::abs(std::log(pt.ids))) / std::log(gap);
      pt.kept = true;
    } else {
      ++res.skipped;
    }
    res.points.push_back(pt);
  }
  return res;
}

// ---------------------------------------------------------------------------
// MSA scale recursion
// ---------------------------------------------------------------------------

struct MsaSchedule {
  double zeta = 1.5;
  double xi = 1.0;
  double c1 = 0.0, c2 = 0.0, c3 = 1.0;
  int d = 1;
  std::vector<double> l;  // length scales, l_{j+1} = [l_j^zeta]_3
  std::vector<double> m;  // decay masses, recursion taken with equality
  std::vector<double> p;  // failure-probability bounds l_j^{-q_j}
  std::vector<double> q;  // exponents
  bool m_stays_above_half = true;
  bool prob_improving = true;
};

// Greatest multiple of 3 strictly less than x.
inline double bracket3(double x) {
  double b = std::floor(x);
  if (b >= x) b -= 1.0;
  b -= std::fmod(b, 3.0);
  return b;
}

inline MsaSchedule msa_schedule(double l0, double zeta, double m0, double q0, double c1, double c2,
                                double c3, double xi, int steps, int d = 1) {
  if (!(zeta > 1.0 && zeta < 2.0))
    throw PreconditionError("msa_schedule: zeta must lie in ]1, 2[");
  if (!(l0 >= 3.0) || std::fmod(l0, 3.0) != 0.0)
    throw PreconditionError("msa_schedule: l0 must be a multiple of 3 with l0 >= 3");
  if (!(m0 > 0.0) || !(q0 > 0.0)) throw PreconditionError("msa_schedule: m0, q0 must be > 0");
  if (c1 < 0.0 || c2 < 0.0 || c3 < 0.0 || !(xi > 0.0) || steps < 0 || d < 1)
    throw PreconditionError("msa_schedule: bad constants");
  MsaSchedule s;
  s.zeta = zeta;
  s.xi = xi;
  s.c1 = c1;
  s.c2 = c2;
  s.c3 = c3;
  s.d = d;
  s.l.push_back(l0);
  s.m.push_back(m0);
  s.q.push_back(q0);
  s.p.push_back(std::pow(l0, -q0));
  for (int j = 0; j < steps; ++j) {
    const double lj = s.l.back();
    const double lnext = bracket3(std::pow(lj, zeta));
    if (!(lnext > lj))
      throw PreconditionError("msa_schedule: scales do not grow (zeta too small for l0)");
    const double mnext =
        s.m.back() * (1.0 - 4.0 * lj / lnext) - c1 / lj - c2 * std::log(lnext) / lnext;
    const double pnext =
        c3 * std::pow(lnext / lj, 2.0 * d) * s.p.back() * s.p.back() +
        0.5 * std::pow(lnext, -xi);
    s.l.push_back(lnext);
    s.m.push_back(mnext);
    s.p.push_back(pnext);
    s.q.push_back(-std::log(pnext) / std::log(lnext));
    if (mnext < m0 / 2.0) s.m_stays_above_half = false;
    if (!(pnext < s.p[s.p.size() - 2])) s.prob_improving = false;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Regularity survey over the MSA scales
// ---------------------------------------------------------------------------

struct RegularitySurveyRow {
  int scale_index = 0;
  double l = 0.0;
  double m = 0.0;
  bool feasible = false;
  int n_samples = 0;
  int excluded = 0;
  int regular_count = 0;
  double fraction = 0.0;
};

inline bool survey_scale_feasible(const ModelConfig& cfg, double l, double m) {
  if (!(m > 0.0)) return false;
  if (l != std::floor(l)) return false;
  const double cap = cfg.d == 1 ? 96.0 : (cfg.d == 2 ? 24.0 : 10.0);
  if (l > cap || l < 7.0) return false;  // 2*delta < l/3 with delta = 1 needs l > 6
  double n = 1.0;
  for (int i = 0; i < cfg.d; ++i) n *= l * cfg.r;
  return n <= static_cast<double>(max_matrix_dim());
}

// Fraction of samples that are m_j-regular at energy E, per feasible scale.
inline std::vector<RegularitySurveyRow> regularity_survey(const ModelConfig& base,
                                                          const MsaSchedule& schedule,
                                                          double energy, int n_samples,
                                                          std::uint64_t seed, int workers = 1,
                                                          double delta = 1.0) {
  validate(base);
  std::vector<RegularitySurveyRow> rows;
  for (std::size_t j = 0; j < schedule.l.size(); ++j) {
    RegularitySurveyRow row;
    row.scale_index = static_cast<int>(j);
    row.l = schedule.l[j];
    row.m = schedule.m[j];
    row.n_samples = n_samples;
    row.feasible = survey_scale_feasible(base, schedule.l[j], schedule.m[j]);
    if (row.feasible) {
      ModelConfig cfg = base;
      cfg.l = static_cast<int>(schedule.l[j]);
      RegularityProbe probe;
      probe.m = schedule.m[j];
      probe.delta = delta;
      std::vector<char> reg(n_samples, 0), failed(n_samples, 0);
      parallel_for_indexed(n_samples, workers, [&](std::uint64_t si) {
        try {
          const DisorderSample sample = sample_disorder(cfg, seed, si);
          const SparseMat h = assemble_hamiltonian(cfg, sample);
          reg[si] = m_regular(cfg, h, energy, probe).regular ? 1 : 0;
        } catch (const NumericalError&) {
          failed[si] = 1;
        }
      });
      int used = 0;
      for (int si = 0; si < n_samples; ++si) {
        if (failed[si]) {
          ++row.excluded;
          continue;
        }
        ++used;
        row.regular_count += reg[si];
      }
      row.fraction = used > 0 ? static_cast<double>(row.regular_count) / used : 0.0;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace alloylab
