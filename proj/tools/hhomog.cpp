// hhomog: command-line front end for the homogenisation pipelines.
//
//   hhomog <command> [--config cfg.json] [--out path] [--format csv|json]
//                    [--threads k] [--seed s]
//
// Exit status: 0 success, 1 a verdict failed, 2 configuration error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <hhomog/config.hpp>
#include <hhomog/errors.hpp>

using namespace hhomog;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerdict = 1;
constexpr int kExitConfig = 2;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

struct Output {
  std::string text;
  bool ok = true;
};

class Csv {
 public:
  explicit Csv(std::initializer_list<std::string> header) {
    bool first = true;
    for (const auto& h : header) {
      os_ << (first ? "" : ",") << h;
      first = false;
    }
    os_ << '\n';
  }
  template <typename... T>
  void row(const T&... cells) {
    bool first = true;
    ((os_ << (first ? "" : ",") << cell(cells), first = false), ...);
    os_ << '\n';
  }
  std::string str() const { return os_.str(); }

 private:
  static std::string cell(double v) { return num(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::uint64_t v) { return std::to_string(v); }
  static std::string cell(bool v) { return v ? "1" : "0"; }
  static std::string cell(const std::string& v) { return v; }
  std::ostringstream os_;
};

ordered_json header(const RunConfig& cfg) {
  ordered_json j;
  j["schema"] = kConfigSchema;
  j["command"] = cfg.command;
  j["config"] = ordered_json::parse(to_json(cfg));
  return j;
}

ordered_json vec_json(const HorizontalVector& q) { return std::vector<double>(q.values().begin(), q.values().end()); }

HomogConfig homog_config(const RunConfig& cfg) {
  HomogConfig h;
  h.k_list = cfg.k_list;
  h.M = cfg.M;
  h.n = cfg.n;
  h.solver = cfg.solver;
  h.threads = cfg.threads;
  return h;
}

Output run_verify(const RunConfig& cfg) {
  // Exact identities of the group, the tiling and the discrete divergence theorem.
  const int n = cfg.n;
  std::mt19937_64 rng(cfg.stochastic.base_seed);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  std::uniform_real_distribution<double> ts(0.1, 10.0);
  auto point = [&] {
    GroupPoint x(n);
    for (int i = 0; i < x.dim(); ++i) x[i] = u(rng);
    return x;
  };
  auto gap = [](const GroupPoint& a, const GroupPoint& b) {
    double m = 0.0;
    for (int i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(b[i])));
    return m;
  };
  double assoc = 0, inverse = 0, dil = 0, hom = 0, det = 0, norm = 0;
  int tiles_bad = 0;
  const int samples = 2000;
  for (int i = 0; i < samples; ++i) {
    const GroupPoint x = point(), y = point(), z = point();
    const double s = ts(rng), t = ts(rng);
    assoc = std::max(assoc, gap(group_mul(group_mul(x, y), z), group_mul(x, group_mul(y, z))));
    inverse = std::max(inverse, gap(group_mul(x, group_inv(x)), GroupPoint(n)));
    dil = std::max(dil, gap(dilate(s, dilate(t, x)), dilate(s * t, x)));
    hom = std::max(hom, gap(group_mul(dilate(t, x), dilate(t, y)), dilate(t, group_mul(x, y))));
    det = std::max(det, std::abs(sigma_ext(x).determinant() - 1.0));
    const double h = t * homogeneous_norm(x);
    norm = std::max(norm, std::abs(homogeneous_norm(dilate(t, x)) - h) / std::max(1.0, h));
    for (double tt : {1.0, 0.5, 2.0, 3.0}) {
      const LatticeIndex k = tt == 1.0 ? tile_index(x) : tile_index_scaled(tt, x);
      tiles_bad += !in_unit_cell(translate_tau(dilate(tt, (-k).as_point()), x), tt);
    }
  }
  double div = 0.0;
  HorizontalVector q(2 * n);
  for (int i = 0; i < 2 * n; ++i) q[i] = 1.0 - 0.5 * i;
  const BoundaryData bd = BoundaryData::h_affine(q, 0.25);
  for (double t : {1.0, 2.0}) {
    for (int M : {2, 4}) {
      const AnisoGrid g = build_grid(t, M, n);
      for (int trial = 0; trial < 10; ++trial) {
        ScalarField f(g);
        for (double& v : f.values) v = u(rng);
        const HorizontalVector mean = mean_h_gradient(apply_boundary(std::move(f), bd), bd);
        for (int i = 0; i < 2 * n; ++i) div = std::max(div, std::abs(mean[i] - q[i]));
      }
    }
  }

  struct Check {
    std::string name;
    double value;
    double tolerance;
  };
  const std::vector<Check> checks{
      {"associativity", assoc, 1e-12},       {"inverse", inverse, 1e-12},
      {"dilation_composition", dil, 1e-12},  {"dilation_homomorphism", hom, 1e-12},
      {"sigma_ext_determinant", det, 1e-12}, {"norm_homogeneity", norm, 1e-12},
      {"tiling_misplaced", double(tiles_bad), 0.0}, {"divergence_theorem", div, 1e-12},
  };
  Output out;
  Csv csv{"check", "value", "tolerance", "passed"};
  ordered_json j = header(cfg);
  j["checks"] = ordered_json::array();
  for (const Check& c : checks) {
    const bool ok = c.value <= c.tolerance;
    out.ok = out.ok && ok;
    csv.row(c.name, c.value, c.tolerance, ok);
    j["checks"].push_back({{"check", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", ok}});
  }
  j["passed"] = out.ok;
  out.text = cfg.output.format == "json" ? j.dump(2) + "\n" : csv.str();
  return out;
}

Output run_cell(const RunConfig& cfg) {
  const Integrand f = build_integrand(cfg.integrand, cfg.n);
  const HorizontalVector q = to_horizontal(cfg.q);
  const ScaleResult r = energy_density(f, q, cfg.t, cfg.M, cfg.n, cfg.solver);
  Output out;
  out.ok = r.converged;
  if (cfg.output.format == "json") {
    ordered_json j = header(cfg);
    j["t"] = r.scale;
    j["e"] = r.e;
    j["affine_density"] = r.affine_density;
    j["iterations"] = r.iterations;
    j["residual"] = r.residual;
    j["converged"] = r.converged;
    j["wall_time_s"] = r.wall_time_s;
    out.text = j.dump(2) + "\n";
  } else {
    Csv csv{"t", "e", "affine_density", "iterations", "residual", "converged", "wall_time_s"};
    csv.row(r.scale, r.e, r.affine_density, r.iterations, r.residual, r.converged, r.wall_time_s);
    out.text = csv.str();
  }
  return out;
}

Output run_effective(const RunConfig& cfg) {
  const Integrand f = build_integrand(cfg.integrand, cfg.n);
  const HomogReport r = energy_density_sequence(f, to_horizontal(cfg.q), homog_config(cfg));
  Output out;
  out.ok = r.all_converged && r.verdicts.bounds_ok && r.verdicts.monotone_trend_ok;
  if (cfg.output.format == "json") {
    ordered_json j = header(cfg);
    j["q"] = vec_json(r.q);
    j["per_k"] = ordered_json::array();
    for (std::size_t i = 0; i < r.per_k.size(); ++i) {
      const ScaleResult& s = r.per_k[i];
      j["per_k"].push_back({{"k", r.k_list[i]},
                            {"e_k", s.e},
                            {"affine_density", s.affine_density},
                            {"iterations", s.iterations},
                            {"residual", s.residual},
                            {"converged", s.converged},
                            {"wall_time_s", s.wall_time_s}});
    }
    j["f0_estimate"] = r.f0_estimate;
    j["e_last"] = r.e_last;
    j["deltas"] = r.deltas;
    j["verdicts"] = {{"bounds_ok", r.verdicts.bounds_ok}, {"monotone_trend_ok", r.verdicts.monotone_trend_ok}};
    j["failures"] = r.failures;
    out.text = j.dump(2) + "\n";
  } else {
    Csv csv{"k", "e_k", "iterations", "residual", "wall_time_s"};
    for (std::size_t i = 0; i < r.per_k.size(); ++i) {
      const ScaleResult& s = r.per_k[i];
      csv.row(r.k_list[i], s.e, s.iterations, s.residual, s.wall_time_s);
    }
    out.text = csv.str();
  }
  for (const std::string& msg : r.failures) std::cerr << "warning: " << msg << '\n';
  return out;
}

Output run_sweep(const RunConfig& cfg) {
  const Integrand f = build_integrand(cfg.integrand, cfg.n);
  const auto grid = tensor_q_grid(2 * cfg.n, cfg.q_grid.lo, cfg.q_grid.hi, cfg.q_grid.points);
  const EffectiveIntegrandTable t = q_sweep(f, grid, homog_config(cfg));
  bool converged = true;
  for (const HomogReport& r : t.reports) converged = converged && r.all_converged;
  Output out;
  out.ok = converged && t.convexity_ok && t.growth_ok && t.symmetry_ok;
  if (cfg.output.format == "json") {
    ordered_json j = header(cfg);
    j["table"] = ordered_json::array();
    for (std::size_t i = 0; i < t.q.size(); ++i) {
      j["table"].push_back({{"q", vec_json(t.q[i])}, {"f0", t.f0[i]}});
    }
    j["verdicts"] = {{"convexity_ok", t.convexity_ok},
                     {"worst_convexity_violation", t.worst_convexity_violation},
                     {"triples_checked", t.triples_checked},
                     {"growth_ok", t.growth_ok},
                     {"symmetry_ok", t.symmetry_ok},
                     {"worst_symmetry_gap", t.worst_symmetry_gap},
                     {"all_converged", converged}};
    out.text = j.dump(2) + "\n";
  } else {
    std::ostringstream os;
    for (int i = 0; i < 2 * cfg.n; ++i) os << 'q' << i + 1 << ',';
    os << "f0\n";
    for (std::size_t i = 0; i < t.q.size(); ++i) {
      for (int c = 0; c < t.q[i].size(); ++c) os << num(t.q[i][c]) << ',';
      os << num(t.f0[i]) << '\n';
    }
    out.text = os.str();
  }
  return out;
}

Output run_stochastic(const RunConfig& cfg) {
  MonteCarloConfig mc;
  mc.k_list = cfg.stochastic.k_list;
  mc.n_samples = cfg.stochastic.n_samples;
  mc.base_seed = cfg.stochastic.base_seed;
  mc.M = cfg.M;
  mc.n = cfg.n;
  mc.solver = cfg.solver;
  mc.threads = cfg.threads;
  const MonteCarloReport r =
      monte_carlo_effective(cfg.stochastic.law, cfg.integrand.exponent, to_horizontal(cfg.q), mc);
  std::size_t failures = 0;
  for (const MonteCarloScale& s : r.per_k) failures += s.failures;
  Output out;
  out.ok = r.bounds_ok && failures == 0;
  if (cfg.output.format == "json") {
    ordered_json j = header(cfg);
    j["sampling"] = {{"law", ordered_json::parse(to_json(cfg))["stochastic"]["law"]},
                     {"n_samples", mc.n_samples},
                     {"base_seed", mc.base_seed}};
    j["per_k"] = ordered_json::array();
    for (const MonteCarloScale& s : r.per_k) {
      j["per_k"].push_back({{"k", s.k}, {"mean", s.mean}, {"variance", s.variance}, {"count", s.count},
                            {"failures", s.failures}});
    }
    j["bounds_ok"] = r.bounds_ok;
    j["variance_trend_ok"] = r.variance_trend_ok;
    if (r.per_k.size() >= 2 && mc.n_samples >= 8) {
      const ConcentrationReport c = concentration_report(r, cfg.stochastic.delta);
      j["concentration"] = {{"delta", c.delta}, {"pooled", c.pooled}, {"above", c.above},
                            {"below", c.below}, {"inversions", c.inversions}, {"passed", c.passed}};
    }
    out.text = j.dump(2) + "\n";
  } else {
    Csv csv{"seed", "k", "e_k", "iterations"};
    for (const MonteCarloSample& s : r.samples) csv.row(s.seed, s.k, s.e, s.iterations);
    out.text = csv.str();
  }
  return out;
}

Output run_ultimo(const RunConfig& cfg) {
  const Integrand f = build_integrand(cfg.integrand, cfg.n);
  const UltimoReport r = ultimo_check(f, to_horizontal(cfg.q), cfg.t, cfg.rho, cfg.M, cfg.n, cfg.solver);
  Output out;
  out.ok = r.passed;
  if (cfg.output.format == "json") {
    ordered_json j = header(cfg);
    j["t"] = r.t;
    j["rho"] = r.rho;
    j["energy_dilated"] = r.energy_dilated;
    j["energy_rescaled"] = r.energy_rescaled;
    j["scaled_rescaled"] = r.scaled_rescaled;
    j["relative_difference"] = r.relative_difference;
    j["converged"] = r.converged;
    j["passed"] = r.passed;
    out.text = j.dump(2) + "\n";
  } else {
    Csv csv{"t", "rho", "energy_dilated", "energy_rescaled", "scaled_rescaled", "relative_difference", "passed"};
    csv.row(r.t, r.rho, r.energy_dilated, r.energy_rescaled, r.scaled_rescaled, r.relative_difference, r.passed);
    out.text = csv.str();
  }
  return out;
}

Output run_recover(const RunConfig& cfg) {
  const Integrand f = build_integrand(cfg.integrand, cfg.n);
  const RecoveryReport r = recover_integrand_pointwise(f, origin_or(cfg.x0, cfg.n), to_horizontal(cfg.q),
                                                       cfg.rho_list, cfg.M, cfg.n, cfg.solver);
  Output out;
  out.ok = r.all_converged && r.errors_decreasing;
  if (cfg.output.format == "json") {
    ordered_json j = header(cfg);
    j["target"] = r.target;
    j["rho"] = r.rho;
    j["density"] = r.density;
    j["error"] = r.error;
    j["errors_decreasing"] = r.errors_decreasing;
    j["all_converged"] = r.all_converged;
    out.text = j.dump(2) + "\n";
  } else {
    Csv csv{"rho", "density", "target", "error"};
    for (std::size_t i = 0; i < r.rho.size(); ++i) csv.row(r.rho[i], r.density[i], r.target, r.error[i]);
    out.text = csv.str();
  }
  return out;
}

Output dispatch(const RunConfig& cfg) {
  if (cfg.command == "verify") return run_verify(cfg);
  if (cfg.command == "cell") return run_cell(cfg);
  if (cfg.command == "effective") return run_effective(cfg);
  if (cfg.command == "sweep") return run_sweep(cfg);
  if (cfg.command == "stochastic") return run_stochastic(cfg);
  if (cfg.command == "ultimo") return run_ultimo(cfg);
  return run_recover(cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical homogenisation of integral functionals on the Heisenberg group"};
  app.set_version_flag("--version", "hhomog 0.1.0");

  std::string config_path, out_path, format;
  int threads = 0;
  std::uint64_t seed = 0;
  bool dump_config = false;
  app.option_defaults()->always_capture_default();
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", out_path, "output file (default: standard output)");
  app.add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "base seed for stochastic runs and random coefficients");
  app.add_flag("--print-config", dump_config, "print the effective configuration as JSON and exit");

  const std::vector<std::pair<std::string, std::string>> commands{
      {"verify", "exact identities: group algebra, tiling, discrete divergence theorem"},
      {"cell", "one cell problem on the dilated cube of scale t"},
      {"effective", "energy densities along the k ladder and the effective integrand estimate"},
      {"sweep", "effective integrand on a tensor grid of q with convexity, growth and symmetry checks"},
      {"stochastic", "Monte Carlo energy densities for random tile coefficients"},
      {"ultimo", "exact dilation identity between the dilated and rescaled cell problems"},
      {"recover", "pointwise recovery of the integrand on shrinking boxes"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
  app.require_subcommand(0, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  RunConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_run_config(config_path);
    if (!app.get_subcommands().empty()) cfg.command = app.get_subcommands().front()->get_name();
    if (!out_path.empty()) cfg.output.path = out_path;
    if (!format.empty()) cfg.output.format = format;
    if (threads > 0) cfg.threads = threads;
    if (seed_opt->count() > 0) {
      cfg.stochastic.base_seed = seed;
      cfg.integrand.coefficient.seed = seed;
    }
    validate_run_config(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (dump_config) {
    std::cout << to_json(cfg) << '\n';
    return kExitOk;
  }

  Output out;
  try {
    out = dispatch(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitVerdict;
  }

  try {
    if (cfg.output.path.empty()) {
      std::cout << out.text;
      std::cout.flush();
    } else {
      write_file_atomic(cfg.output.path, out.text);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  }
  if (!out.ok) std::cerr << cfg.command << ": verdict failed\n";
  return out.ok ? kExitOk : kExitVerdict;
}
