// Batch front door: parses a model config, dispatches one experiment
// subcommand, writes CSV tables plus a JSON manifest into --out, and maps
// error categories onto exit codes (parse 2, precondition 3, numerical 4,
// resource cap 5). All runs are deterministic in (config, seed) and
// independent of --workers.

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "alloylab/config_io.hpp"
#include "alloylab/csv.hpp"
#include "alloylab/experiments.hpp"
#include "alloylab/geometry.hpp"
#include "alloylab/manifest.hpp"
#include "alloylab/model.hpp"
#include "alloylab/spectral.hpp"
#include "alloylab/toeplitz.hpp"
#include "alloylab/version.hpp"

namespace fs = std::filesystem;
using namespace alloylab;

namespace {

struct RunContext {
  std::string config_path;
  fs::path out_dir = ".";
  std::uint64_t seed = 1;
  int samples = 0;  // 0 = subcommand default
  int workers = 1;
  std::map<std::string, std::string> model_kv;
  std::map<std::string, std::string> params;
  RunManifest manifest;

  ModelConfig config() const { return config_from_key_values(model_kv); }

  int samples_or(int fallback) {
    const int n = samples > 0 ? samples : fallback;
    manifest.samples = n;
    return n;
  }

  double param_double(const std::string& key, double fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : parse_double(it->second, "--set " + key);
  }

  int param_int(const std::string& key, int fallback) const {
    const auto it = params.find(key);
    return it == params.end() ? fallback : static_cast<int>(parse_int(it->second, "--set " + key));
  }

  std::vector<double> param_doubles(const std::string& key, const std::string& fallback) const {
    const auto it = params.find(key);
    std::string raw = it == params.end() ? fallback : it->second;
    for (char& c : raw)
      if (c == ',') c = ' ';
    return parse_double_list(raw, "--set " + key);
  }

  std::vector<int> param_ints(const std::string& key, const std::string& fallback) const {
    std::vector<int> out;
    for (double v : param_doubles(key, fallback)) out.push_back(static_cast<int>(v));
    return out;
  }

  void note_params(std::initializer_list<std::pair<std::string, std::string>> defaults) {
    for (const auto& [k, v] : defaults)
      if (!params.count(k)) params[k] = v;
  }

  void emit(const fs::path& name, const CsvTable& table) {
    fs::create_directories(out_dir);
    const fs::path path = out_dir / name;
    table.write(path);
    manifest.outputs.push_back({path.string(), table.n_rows()});
  }

  void emit_text(const fs::path& name, const std::string& text, std::size_t rows) {
    fs::create_directories(out_dir);
    const fs::path path = out_dir / name;
    atomic_write_text(path, text);
    manifest.outputs.push_back({path.string(), rows});
  }
};

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

void run_spectrum(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const int index = ctx.param_int("index", 0);
  ctx.note_params({{"index", std::to_string(index)}});
  const DisorderSample sample = sample_disorder(cfg, ctx.seed, index);
  const SparseMat h = assemble_hamiltonian(cfg, sample);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h), Eigen::EigenvaluesOnly);
  CsvTable t;
  t.comment("sorted spectrum of one disorder sample");
  t.header({"index", "eigenvalue"});
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    t.row({fmt(i), fmt(es.eigenvalues()[i])});
  ctx.emit("spectrum.csv", t);
  if (ctx.param_int("export_matrix", 0)) {
    const std::string text = triplet_text(h);
    ctx.emit_text("hamiltonian.csv", text, static_cast<std::size_t>(h.nonZeros()));
  }
}

void run_wegner(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const double center = ctx.param_double("center", 0.82);
  const std::vector<double> widths = ctx.param_doubles("widths", "0.2 0.1 0.05");
  const std::vector<int> sides = ctx.param_ints("sides", "8 16 24");
  const int n = ctx.samples_or(500);
  std::vector<EnergyInterval> intervals;
  for (double w : widths) intervals.push_back({center - w / 2.0, center + w / 2.0});
  const WegnerResult res = wegner_experiment(cfg, intervals, sides, n, ctx.seed, ctx.workers);
  CsvTable t;
  t.comment("ratio = mean / (|I| l^d); constants: c_eq3 = ratio*omega_plus,");
  t.comment("c_section3 = ratio*(1-a*)/omega_plus (reported in the manifest)");
  t.header({"l", "e1", "e2", "n", "mean", "stderr", "ratio"});
  int excluded = 0;
  for (const auto& row : res.rows) {
    t.row({fmt(row.l), fmt(row.interval.e1), fmt(row.interval.e2), fmt(row.n_samples - row.excluded),
           fmt(row.mean_trace), fmt(row.stderr_), fmt(row.ratio)});
    excluded += row.excluded;
  }
  ctx.manifest.exclusions["wegner"] = excluded;
  ctx.emit("wegner.csv", t);
}

void run_ids(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const double emin = ctx.param_double("grid_min", -0.5);
  const double emax = ctx.param_double("grid_max", 4.5);
  const int points = ctx.param_int("grid_points", 51);
  const double eps = ctx.param_double("eps", 0.1);
  const int n = ctx.samples_or(200);
  if (points < 2) throw PreconditionError("ids: grid_points must be >= 2");
  std::vector<double> grid(points);
  for (int i = 0; i < points; ++i) grid[i] = emin + (emax - emin) * i / (points - 1.0);
  const IdsTable table = ids_estimate(cfg, grid, n, ctx.seed, ctx.workers);
  const double modulus = lipschitz_modulus(table, eps);
  CsvTable t;
  t.comment("lipschitz_modulus(eps=" + fmt(eps) + ") = " + fmt(modulus));
  t.header({"energy", "ids_mean", "ids_stderr", "l", "bc"});
  for (std::size_t i = 0; i < table.energies.size(); ++i)
    t.row({fmt(table.energies[i]), fmt(table.mean[i]), fmt(table.stderr_[i]), fmt(table.l),
           boundary_name(table.bc)});
  ctx.manifest.exclusions["ids"] = table.excluded;
  ctx.manifest.params["lipschitz_modulus"] = fmt(modulus);
  ctx.emit("ids.csv", t);
}

void run_proximity(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const double energy = ctx.param_double("energy", 0.82);
  const double eps = ctx.param_double("eps", 0.05);
  const int halvings = ctx.param_int("halvings", 1);
  const int n = ctx.samples_or(500);
  CsvTable t;
  t.header({"energy", "eps", "n", "hits", "estimate", "stderr", "h2_ratio"});
  int excluded = 0;
  double e = eps;
  for (int k = 0; k <= halvings; ++k, e /= 2.0) {
    const ProximityEstimate est = eigenvalue_proximity(cfg, energy, e, n, ctx.seed, ctx.workers);
    t.row({fmt(energy), fmt(e), fmt(est.n_samples - est.excluded), fmt(est.hits),
           fmt(est.estimate), fmt(est.stderr_), fmt(est.h2_ratio)});
    excluded += est.excluded;
  }
  ctx.manifest.exclusions["proximity"] = excluded;
  ctx.emit("proximity.csv", t);
}

void run_combes_thomas(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const std::vector<double> distances = ctx.param_doubles("distances", "0.5 1.0 2.0");
  const std::vector<int> seps = ctx.param_ints("separations", "4 8 12 16 20 24 28 32");
  const DisorderSample sample = sample_disorder(cfg, ctx.seed, ctx.param_int("index", 0));
  const SparseMat h = assemble_hamiltonian(cfg, sample);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h), Eigen::EigenvaluesOnly);
  const double floor = es.eigenvalues().minCoeff();

  const IndexCube cells = lambda_tilde(cfg);
  Pt x_cell{0, 0, 0};  // left edge cell; y runs to the right
  CsvTable t;
  t.comment("spectral floor = " + fmt(floor));
  t.header({"distance", "separation", "log_norm", "fit_prediction"});
  for (double dist : distances) {
    const Cplx z(floor - dist, 0.0);
    std::vector<SeparatedPair> pairs;
    for (int s : seps) {
      Pt y_cell = x_cell;
      y_cell[0] += s;
      if (!cells.contains(y_cell)) continue;
      pairs.push_back({cell_nodes(cfg, x_cell), cell_nodes(cfg, y_cell), static_cast<double>(s)});
    }
    const CombesThomasFit fit = combes_thomas_fit(h, z, pairs);
    for (std::size_t i = 0; i < fit.separations.size(); ++i)
      t.row({fmt(dist), fmt(fit.separations[i]), fmt(fit.log_norms[i]),
             fmt(fit.intercept - fit.rate * fit.separations[i])});
    ctx.manifest.params["rate_dist_" + fmt(dist)] = fmt(fit.rate);
    ctx.manifest.params["r2_dist_" + fmt(dist)] = fmt(fit.r2);
  }
  ctx.emit("combes_thomas.csv", t);
}

void run_averaging(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const int draws = ctx.samples_or(20);
  const IndexCube cells = lambda_tilde(cfg);
  const IndexCube grid = grid_cube(cfg);
  CsvTable t;
  t.header({"draw", "site", "e1", "e2", "t", "xi", "integral", "interval_length", "ratio"});
  for (int k = 0; k < draws; ++k) {
    auto g = make_stream(ctx.seed, 0x617667ULL, k);
    const DisorderSample sample = sample_disorder(cfg, ctx.seed, k);
    const int ji = static_cast<int>(uniform01(g) * cells.size());
    const Pt j_cell = cells.point(std::min<int>(ji, cells.size() - 1));
    Eigen::VectorXd f(grid.size());
    for (int i = 0; i < f.size(); ++i) f[i] = gaussian(g);
    f.normalize();
    double e1 = ctx.param_double("e1", uniform_in(g, -0.5, 4.5));
    double e2 = ctx.param_double("e2", uniform_in(g, -0.5, 4.5));
    if (e1 > e2) std::swap(e1, e2);
    const double tpar = ctx.param_double("t", uniform_in(g, 0.0, 2.0));
    const SpectralAveragingResult res =
        spectral_averaging_check(cfg, sample, j_cell, f, {e1, e2}, tpar);
    const double ratio = res.interval_length > 0 ? res.integral / res.interval_length : 0.0;
    t.row({fmt(k), fmt(cells.linear(j_cell)), fmt(e1), fmt(e2), fmt(tpar), fmt(res.xi),
           fmt(res.integral), fmt(res.interval_length), fmt(ratio)});
  }
  ctx.emit("averaging.csv", t);
}

void run_toeplitz_check(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const std::vector<int> sizes = ctx.param_ints("sizes", "4 8 16 32 64");
  CsvTable t;
  t.header({"size", "ab_residual", "norm_b", "bound", "nu"});
  for (int l : sizes) {
    ModelConfig c = cfg;
    c.l = l;
    const ConeToeplitzSystem sys = build_system(c);
    const int n = static_cast<int>(sys.A.rows());
    const double resid =
        (sys.A * sys.B - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(sys.A);
    t.row({fmt(l), fmt(resid), fmt(column_sum_norm(sys.B)), fmt(1.0 / (1.0 - sys.a_star)),
           fmt(svd.singularValues().minCoeff())});
  }
  ctx.emit("toeplitz.csv", t);

  const int symbol_points = ctx.param_int("symbol_points", 64);
  if (symbol_points > 0) {
    CsvTable s;
    s.comment("symbol sweep along theta * e_axis");
    s.header({"theta", "real", "imag", "modulus"});
    const int axis = ctx.param_int("symbol_axis", 0);
    for (int i = 0; i < symbol_points; ++i) {
      const double theta = -M_PI + 2.0 * M_PI * i / (symbol_points - 1.0);
      Eigen::VectorXd tv = Eigen::VectorXd::Zero(cfg.d);
      tv[std::min(axis, cfg.d - 1)] = theta;
      const Cplx v = symbol_eval(cfg.site, tv);
      s.row({fmt(theta), fmt(v.real()), fmt(v.imag()), fmt(std::abs(v))});
    }
    ctx.emit("symbol.csv", s);
  }
  if (ctx.param_int("export_matrices", 0)) {
    const ConeToeplitzSystem sys = build_system(cfg);
    ctx.emit_text("toeplitz_a.csv", triplet_text(sys.A.sparseView()),
                  static_cast<std::size_t>(sys.A.rows()));
    ctx.emit_text("toeplitz_b.csv", triplet_text(sys.B.sparseView()),
                  static_cast<std::size_t>(sys.B.rows()));
  }
}

void run_volume(RunContext& ctx) {
  const double omega_plus = ctx.param_double("omega_plus", 1.0);
  const int dim = ctx.param_int("n", 3);
  const int shears = ctx.param_int("shears", 5);
  const std::uint64_t mc_samples =
      static_cast<std::uint64_t>(ctx.param_double("mc_samples", 1e6));
  CsvTable t;
  t.header({"region", "exact", "mc_estimate", "stderr", "n_samples"});
  auto g = make_stream(ctx.seed, 0x766f6cULL);
  for (int k = 0; k < shears; ++k) {
    ShearedUnion u;
    u.n = dim;
    u.omega_plus = omega_plus;
    u.t.resize(dim);
    for (int i = 0; i < dim; ++i) u.t[i] = uniform_in(g, -1.5, 1.5);
    Box bbox;
    bbox.lo.resize(dim);
    bbox.hi.resize(dim);
    for (int i = 0; i < dim; ++i) {
      bbox.lo[i] = std::min(0.0, omega_plus * u.t[i]);
      bbox.hi[i] = omega_plus + std::max(0.0, omega_plus * u.t[i]);
    }
    const McResult mc = mc_volume([&](const Eigen::VectorXd& x) { return sheared_union_contains(u, x); },
                                  bbox, mc_samples, mix_seed(ctx.seed, k), ctx.workers);
    t.row({"sheared_union_" + std::to_string(k), fmt(sheared_union_volume(u)), fmt(mc.estimate),
           fmt(mc.stderr_), fmt(static_cast<int>(mc.samples))});
  }
  // Enlarged domain of the config's own system, checked against MC.
  const ModelConfig cfg = ctx.config();
  ModelConfig small = cfg;
  small.l = ctx.param_int("enlarged_l", 3);
  const ConeToeplitzSystem sys = build_system(small);
  const IndexCube cells = lambda_tilde(small);
  const DomainFactorization fac = factorize_domain(sys, cells.point(0), small.omega_plus);
  Eigen::VectorXd eta_less = Eigen::VectorXd::Zero(fac.n_less());
  const Box bbox = enlarged_region_bbox(fac, eta_less);
  const McResult mc = mc_volume(
      [&](const Eigen::VectorXd& x) { return fac.in_M_greater_plus(x, eta_less); }, bbox,
      mc_samples, mix_seed(ctx.seed, 0x333535ULL), ctx.workers);
  t.row({"enlarged_domain", fmt(enlarged_volume(fac)), fmt(mc.estimate), fmt(mc.stderr_),
         fmt(static_cast<int>(mc.samples))});
  ctx.emit("volume.csv", t);
}

void run_birman_schwinger(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const int n = ctx.samples_or(100);
  const SparseMat h0 = assemble_free(cfg);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(h0), Eigen::EigenvaluesOnly);
  const double floor = es.eigenvalues().minCoeff();
  const double energy = ctx.param_double("energy", floor - ctx.param_double("offset", 1.0));
  const double eps = ctx.param_double("eps", 0.5);
  CsvTable t;
  t.comment("energy = " + fmt(energy) + ", inf spec(H_0) = " + fmt(floor));
  t.header({"sample", "dist_h", "resolvent_norm", "lhs39", "rhs39", "equivalent", "gamma_dist",
            "window_trace", "indicator_ok", "identity_residual"});
  for (int k = 0; k < n; ++k) {
    const DisorderSample sample = sample_disorder(cfg, ctx.seed, k);
    const Eigen::VectorXd v = assemble_potential(cfg, sample);
    const BsEquivalenceReport rep = bs_equivalence_check(h0, v, energy, eps);
    t.row({fmt(k), fmt(rep.dist_spectrum), fmt(rep.resolvent_norm), fmt(rep.lhs_39 ? 1 : 0),
           fmt(rep.rhs_39 ? 1 : 0), fmt(rep.equivalent ? 1 : 0), fmt(rep.gamma_dist_minus_one),
           fmt(rep.window_trace), fmt(rep.indicator_consistent ? 1 : 0),
           fmt(rep.resolvent_identity_residual)});
  }
  ctx.emit("birman_schwinger.csv", t);
}

void run_msa(RunContext& ctx) {
  const MsaSchedule s = msa_schedule(
      ctx.param_double("l0", 300.0), ctx.param_double("zeta", 1.5), ctx.param_double("m0", 1.0),
      ctx.param_double("q0", 2.0), ctx.param_double("c1", 0.01), ctx.param_double("c2", 0.01),
      ctx.param_double("c3", 1.0), ctx.param_double("xi", 3.0), ctx.param_int("steps", 6),
      ctx.param_int("dim", 1));
  CsvTable t;
  t.comment(std::string("m_stays_above_half = ") + (s.m_stays_above_half ? "1" : "0") +
            ", prob_improving = " + (s.prob_improving ? "1" : "0"));
  t.header({"j", "l", "m", "q", "p"});
  for (std::size_t j = 0; j < s.l.size(); ++j)
    t.row({fmt(static_cast<int>(j)), fmt(s.l[j]), fmt(s.m[j]), fmt(s.q[j]), fmt(s.p[j])});
  ctx.manifest.params["m_stays_above_half"] = s.m_stays_above_half ? "1" : "0";
  ctx.manifest.params["prob_improving"] = s.prob_improving ? "1" : "0";
  ctx.emit("msa.csv", t);
}

void run_lifshitz(RunContext& ctx) {
  const ModelConfig cfg = ctx.config();
  const int n = ctx.samples_or(600);
  std::vector<double> energies;
  if (ctx.params.count("energies")) {
    energies = ctx.param_doubles("energies", "");
  } else {
    // Pre-pass for the empirical spectral bottom, then offsets above it.
    const std::vector<double> offsets = ctx.param_doubles("offsets", "0.12 0.2 0.3 0.45 0.6");
    double e0 = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      const DisorderSample sample = sample_disorder(cfg, ctx.seed, k);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense(assemble_hamiltonian(cfg, sample)),
                                                        Eigen::EigenvaluesOnly);
      e0 = std::min(e0, es.eigenvalues().minCoeff());
    }
    for (double off : offsets) energies.push_back(e0 + off);
    std::sort(energies.begin(), energies.end());
  }
  const LifshitzResult res = lifshitz_probe(cfg, energies, n, ctx.seed, ctx.workers);
  CsvTable t;
  t.comment("empirical spectral infimum e0 = " + fmt(res.e0));
  t.header({"energy", "ids_mean", "exponent", "kept"});
  for (const auto& pt : res.points)
    t.row({fmt(pt.energy), fmt(pt.ids), fmt(pt.exponent), fmt(pt.kept ? 1 : 0)});
  ctx.manifest.exclusions["lifshitz_skipped_points"] = res.skipped;
  ctx.manifest.exclusions["lifshitz"] = res.excluded;
  ctx.emit("lifshitz.csv", t);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"alloylab: numerical laboratory for alloy-type random Schrodinger operators"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  RunContext ctx;
  std::vector<std::string> overrides;
  app.add_option("--config", ctx.config_path, "model config file (key = value)");
  app.add_option("--out", ctx.out_dir, "output directory")->default_val(".");
  app.add_option("--seed", ctx.seed, "base RNG seed")->default_val(1);
  app.add_option("--samples", ctx.samples, "Monte Carlo sample count (0 = subcommand default)");
  app.add_option("--workers", ctx.workers, "worker threads")->default_val(1);
  app.add_option("--set", overrides, "override key=value (model keys or subcommand parameters)");

  const std::map<std::string, void (*)(RunContext&)> handlers = {
      {"spectrum", run_spectrum},
      {"wegner", run_wegner},
      {"ids", run_ids},
      {"proximity", run_proximity},
      {"combes-thomas", run_combes_thomas},
      {"averaging", run_averaging},
      {"toeplitz-check", run_toeplitz_check},
      {"volume", run_volume},
      {"birman-schwinger", run_birman_schwinger},
      {"msa", run_msa},
      {"lifshitz", run_lifshitz},
  };
  std::map<std::string, CLI::App*> subs;
  for (const auto& [name, fn] : handlers) {
    subs[name] = app.add_subcommand(name);
    subs[name]->fallthrough();  // global flags may follow the subcommand
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 2;
  }

  try {
    // Model config: file (if given) plus --set overrides for model keys;
    // remaining overrides become subcommand parameters.
    if (!ctx.config_path.empty()) {
      std::ifstream in(ctx.config_path);
      if (!in) throw ParseError("cannot open config file '" + ctx.config_path + "'");
      std::ostringstream buf;
      buf << in.rdbuf();
      ctx.model_kv = parse_key_values(buf.str());
    }
    for (const std::string& ov : overrides) {
      const auto eq = ov.find('=');
      if (eq == std::string::npos) throw ParseError("--set expects key=value, got '" + ov + "'");
      const std::string key = trim(ov.substr(0, eq));
      const std::string value = trim(ov.substr(eq + 1));
      if (!apply_model_override(ctx.model_kv, key, value)) ctx.params[key] = value;
    }

    std::string name;
    for (const auto& [n, sub] : subs)
      if (sub->parsed()) name = n;
    ctx.manifest.subcommand = name;
    ctx.manifest.seed = ctx.seed;
    ctx.manifest.workers = ctx.workers;
    ctx.manifest.started_at = iso_timestamp();

    ctx.manifest.samples = ctx.samples;
    handlers.at(name)(ctx);

    if (!ctx.model_kv.empty()) ctx.manifest.config_text = serialize_config(ctx.config());
    ctx.manifest.params.insert(ctx.params.begin(), ctx.params.end());
    ctx.manifest.finished_at = iso_timestamp();
    fs::create_directories(ctx.out_dir);
    ctx.manifest.write(ctx.out_dir);
    return 0;
  } catch (const ParseError& e) {
    std::cerr << "error: parse: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    std::cerr << "error: precondition: " << e.what() << "\n";
    return 3;
  } catch (const NumericalError& e) {
    std::cerr << "error: numerical: " << e.what() << "\n";
    return 4;
  } catch (const ResourceError& e) {
    std::cerr << "error: resource: " << e.what() << "\n";
    return 5;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
