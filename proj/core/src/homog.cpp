#include "hhomog/homog.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <sstream>

#include "hhomog/errors.hpp"
#include "parallel.hpp"

namespace hhomog {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

double q_power(const Integrand& f, const HorizontalVector& q) {
  return std::pow(q.norm(), f.growth().alpha);
}

int checked_intervals(double value, const char* what) {
  const double r = std::round(value);
  if (r < 1.0 || std::abs(value - r) > 1e-9 * std::max(1.0, value)) {
    std::ostringstream os;
    os << what << " interval count " << value << " is not a positive integer";
    throw ConfigError(os.str());
  }
  return static_cast<int>(r);
}

void check_ladder(const std::vector<int>& ks) {
  if (ks.empty()) throw ConfigError("k_list must not be empty");
  for (std::size_t i = 0; i < ks.size(); ++i) {
    if (ks[i] < 1) throw ConfigError("k_list entries must be >= 1");
    if (i > 0 && ks[i] <= ks[i - 1]) throw ConfigError("k_list must be strictly increasing");
  }
}

void check_q(const HorizontalVector& q, int n) {
  if (q.size() != 2 * n) throw ConfigError("q must have 2n components");
}

}  // namespace

ScaleResult energy_density(const Integrand& f, const HorizontalVector& q, double t, int M, int n,
                           const SolverConfig& cfg, const QuadraticSystem* system) {
  check_q(q, n);
  const auto start = std::chrono::steady_clock::now();
  const AnisoGrid grid = build_grid(t, M, n);
  const CellSolution sol = solve_cell(CellProblem{grid, f, BoundaryData::h_affine(q), cfg}, system);
  ScaleResult r;
  r.scale = t;
  r.e = sol.energy / grid.volume();
  r.affine_density = discrete_energy(h_affine_field(grid, q), f) / grid.volume();
  r.iterations = sol.iterations;
  r.residual = sol.residual;
  r.converged = sol.converged;
  r.wall_time_s = seconds_since(start);
  return r;
}

namespace {

HomogReport assemble_report(const Integrand& f, const HorizontalVector& q, const HomogConfig& cfg,
                            std::vector<ScaleResult> per_k) {
  HomogReport rep;
  rep.q = q;
  rep.k_list = cfg.k_list;
  rep.per_k = std::move(per_k);
  rep.all_converged = true;
  for (std::size_t i = 0; i < rep.per_k.size(); ++i) {
    if (!rep.per_k[i].converged) {
      rep.all_converged = false;
      std::ostringstream os;
      os << "cell solve at k=" << cfg.k_list[i] << " did not converge (residual "
         << rep.per_k[i].residual << " after " << rep.per_k[i].iterations << " iterations)";
      rep.failures.push_back(os.str());
    }
  }
  double mn = std::numeric_limits<double>::infinity();
  for (const auto& r : rep.per_k) mn = std::min(mn, r.e);
  rep.f0_estimate = mn;
  rep.inf_over_k = mn;
  rep.e_last = rep.per_k.back().e;
  for (std::size_t i = 0; i + 1 < rep.per_k.size(); ++i) {
    rep.deltas.push_back(std::abs(rep.per_k[i].e - rep.per_k[i + 1].e));
  }

  const double lo = f.lower_bound(q);
  const double hi = f.upper_bound(q);
  bool bounds = true;
  for (const auto& r : rep.per_k) {
    const double s = cfg.slack * std::max(1.0, std::abs(r.e));
    if (r.e < lo - s || r.e > hi + s || r.e > r.affine_density + s) bounds = false;
  }
  rep.verdicts.bounds_ok = bounds;

  // e_{jk} <= e_k along divisible pairs of the ladder, and the last step no
  // larger than the first.
  bool trend = true;
  for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
    for (std::size_t j = i + 1; j < cfg.k_list.size(); ++j) {
      if (cfg.k_list[j] % cfg.k_list[i] != 0) continue;
      if (rep.per_k[j].e > rep.per_k[i].e + cfg.slack * std::max(1.0, std::abs(rep.per_k[i].e))) {
        trend = false;
      }
    }
  }
  if (rep.deltas.size() >= 2 && rep.deltas.back() > rep.deltas.front() + cfg.slack) trend = false;
  rep.verdicts.monotone_trend_ok = trend;
  return rep;
}

// Pre-assembled systems per ladder scale, shared across q for quadratic f.
using SystemCache = std::vector<std::unique_ptr<QuadraticSystem>>;

SystemCache build_systems(const Integrand& f, const HomogConfig& cfg) {
  SystemCache cache(cfg.k_list.size());
  const bool cg = f.is_quadratic() && (cfg.solver.method == SolverMethod::Auto ||
                                       cfg.solver.method == SolverMethod::CG);
  if (!cg) return cache;
  for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
    cache[i] = std::make_unique<QuadraticSystem>(build_grid(cfg.k_list[i], cfg.M, cfg.n), f,
                                                 cfg.solver.tikhonov);
  }
  return cache;
}

void validate(const Integrand& f, const HorizontalVector& q, const HomogConfig& cfg) {
  check_ladder(cfg.k_list);
  check_q(q, cfg.n);
  if (f.n() != cfg.n) throw ConfigError("integrand n does not match config n");
}

}  // namespace

HomogReport energy_density_sequence(const Integrand& f, const HorizontalVector& q,
                                    const HomogConfig& cfg) {
  validate(f, q, cfg);
  std::vector<ScaleResult> per_k(cfg.k_list.size());
  detail::parallel_for(per_k.size(), cfg.threads, [&](std::size_t i) {
    per_k[i] = energy_density(f, q, cfg.k_list[i], cfg.M, cfg.n, cfg.solver);
  });
  return assemble_report(f, q, cfg, std::move(per_k));
}

double effective_integrand(const Integrand& f, const HorizontalVector& q, const HomogConfig& cfg) {
  const HomogReport rep = energy_density_sequence(f, q, cfg);
  if (!rep.all_converged) throw SolverError(rep.failures.front());
  return rep.f0_estimate;
}

UltimoReport ultimo_check(const Integrand& f, const HorizontalVector& q, double t, double rho,
                          int M, int n, const SolverConfig& cfg, double tolerance) {
  check_q(q, n);
  if (!(t > 0.0)) throw ConfigError("ultimo: t must be positive");
  if (!(rho > 0.0)) throw ConfigError("ultimo: rho must be positive");
  if (M < 1) throw ConfigError("ultimo: M must be >= 1");
  const int ih = checked_intervals(2.0 * t * rho * M, "ultimo: horizontal (2 t rho M)");
  const int iv = checked_intervals(2.0 * t * t * rho * M, "ultimo: vertical (2 t^2 rho M)");
  const GroupPoint origin(n);
  const AnisoGrid big = AnisoGrid::box(origin, t * rho, t * t * rho, ih, iv);
  const AnisoGrid small = AnisoGrid::box(origin, rho, rho, ih, iv);

  const Integrand g = rescale_integrand(f, 1.0 / t);
  const CellSolution a = solve_cell(CellProblem{big, f, BoundaryData::h_affine(q), cfg});
  const CellSolution b = solve_cell(CellProblem{small, g, BoundaryData::h_affine(q), cfg});

  UltimoReport rep;
  rep.t = t;
  rep.rho = rho;
  rep.energy_dilated = a.energy;
  rep.energy_rescaled = b.energy;
  rep.scaled_rescaled = std::pow(t, GroupParams{n}.hdim()) * b.energy;
  const double scale = std::max(std::abs(rep.energy_dilated), std::abs(rep.scaled_rescaled));
  rep.relative_difference =
      scale > 0.0 ? std::abs(rep.energy_dilated - rep.scaled_rescaled) / scale : 0.0;
  rep.converged = a.converged && b.converged;
  rep.passed = rep.converged && rep.relative_difference <= tolerance;
  return rep;
}

RecoveryReport recover_integrand_pointwise(const Integrand& f, const GroupPoint& x0,
                                           const HorizontalVector& q,
                                           const std::vector<double>& rho_list, int M, int n,
                                           const SolverConfig& cfg, double tolerance) {
  check_q(q, n);
  if (x0.n() != n) throw ConfigError("recover: x0 must have 2n+1 coordinates");
  if (rho_list.empty()) throw ConfigError("recover: rho_list must not be empty");
  for (std::size_t i = 0; i < rho_list.size(); ++i) {
    if (!(rho_list[i] > 0.0)) throw ConfigError("recover: rho values must be positive");
    if (i > 0 && !(rho_list[i] < rho_list[i - 1])) {
      throw ConfigError("recover: rho_list must be strictly decreasing");
    }
  }
  if (M < 1) throw ConfigError("recover: M must be >= 1");

  RecoveryReport rep;
  rep.x0 = x0;
  rep.q = q;
  rep.target = f(x0, q);
  rep.all_converged = true;
  for (double rho : rho_list) {
    const AnisoGrid grid = AnisoGrid::box(x0, rho, rho, 2 * M, 2 * M);
    const CellSolution sol = solve_cell(CellProblem{grid, f, BoundaryData::h_affine(q), cfg});
    const double d = sol.energy / grid.volume();
    rep.rho.push_back(rho);
    rep.density.push_back(d);
    rep.error.push_back(std::abs(d - rep.target));
    rep.all_converged = rep.all_converged && sol.converged;
  }
  rep.errors_decreasing = true;
  for (std::size_t i = 1; i < rep.error.size(); ++i) {
    const bool below_tol = rep.error[i] <= tolerance && rep.error[i - 1] <= tolerance;
    if (!(rep.error[i] < rep.error[i - 1]) && !below_tol) rep.errors_decreasing = false;
  }
  return rep;
}

NonIntegerScaleReport noninteger_scale_check(const Integrand& f, const HorizontalVector& q,
                                             const std::vector<double>& t_list, int M, int n,
                                             const SolverConfig& cfg, double slack) {
  check_q(q, n);
  if (t_list.empty()) throw ConfigError("t_list must not be empty");
  const int hdim = GroupParams{n}.hdim();
  const double c = f.growth().c2 * (q_power(f, q) + 1.0);
  NonIntegerScaleReport rep;
  rep.passed = true;
  std::map<int, double> floor_cache;
  for (double t : t_list) {
    if (!(t >= 1.0)) throw ConfigError("non-integer scales must be >= 1");
    NonIntegerScaleEntry e;
    e.t = t;
    e.floor_t = static_cast<int>(std::floor(t));
    const ScaleResult rt = energy_density(f, q, t, M, n, cfg);
    auto it = floor_cache.find(e.floor_t);
    if (it == floor_cache.end()) {
      const ScaleResult rf = energy_density(f, q, e.floor_t, M, n, cfg);
      if (!rf.converged) throw SolverError("cell solve at the integer scale did not converge");
      it = floor_cache.emplace(e.floor_t, rf.e).first;
    }
    if (!rt.converged) throw SolverError("cell solve at a non-integer scale did not converge");
    e.e_t = rt.e;
    e.e_floor = it->second;
    e.bound = c * (1.0 - std::pow(e.floor_t / t, hdim)) + slack;
    e.passed = std::abs(e.e_t - e.e_floor) <= e.bound;
    rep.passed = rep.passed && e.passed;
    rep.entries.push_back(e);
  }
  return rep;
}

std::vector<HorizontalVector> tensor_q_grid(int m, double lo, double hi, int points) {
  if (m < 1) throw ConfigError("q grid dimension must be >= 1");
  if (points < 1) throw ConfigError("q grid needs at least one point per axis");
  if (!(hi >= lo)) throw ConfigError("q grid needs lo <= hi");
  std::vector<double> axis(points);
  for (int i = 0; i < points; ++i) {
    axis[i] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  }
  std::size_t total = 1;
  for (int a = 0; a < m; ++a) total *= static_cast<std::size_t>(points);
  std::vector<HorizontalVector> out;
  out.reserve(total);
  for (std::size_t idx = 0; idx < total; ++idx) {
    HorizontalVector q(m);
    std::size_t rem = idx;
    for (int a = m - 1; a >= 0; --a) {
      q[a] = axis[rem % points];
      rem /= points;
    }
    out.push_back(q);
  }
  return out;
}

EffectiveIntegrandTable q_sweep(const Integrand& f, const std::vector<HorizontalVector>& q_grid,
                                const HomogConfig& cfg, const SweepTolerances& tol) {
  if (q_grid.empty()) throw ConfigError("q grid must not be empty");
  for (const auto& q : q_grid) validate(f, q, cfg);

  const SystemCache systems = build_systems(f, cfg);
  EffectiveIntegrandTable table;
  table.q = q_grid;
  table.reports.resize(q_grid.size());
  detail::parallel_for(q_grid.size(), cfg.threads, [&](std::size_t i) {
    std::vector<ScaleResult> per_k(cfg.k_list.size());
    for (std::size_t j = 0; j < per_k.size(); ++j) {
      per_k[j] = energy_density(f, q_grid[i], cfg.k_list[j], cfg.M, cfg.n, cfg.solver,
                                systems[j].get());
    }
    table.reports[i] = assemble_report(f, q_grid[i], cfg, std::move(per_k));
  });
  for (const auto& r : table.reports) {
    if (!r.all_converged) throw SolverError(r.failures.front());
    table.f0.push_back(r.f0_estimate);
  }

  table.growth_ok = true;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const double v = table.f0[i];
    const double s = 1e-9 * std::max(1.0, std::abs(v));
    if (v < f.lower_bound(q_grid[i]) - s || v > f.upper_bound(q_grid[i]) + s) {
      table.growth_ok = false;
    }
  }

  // Midpoint convexity on every triple (a, mid, c) whose midpoint is a sample.
  auto find = [&](const HorizontalVector& p) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < q_grid.size(); ++i) {
      if ((q_grid[i] - p).norm() <= 1e-12 * std::max(1.0, p.norm())) return i;
    }
    return std::nullopt;
  };
  table.convexity_ok = true;
  table.worst_convexity_violation = -std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < q_grid.size(); ++a) {
    for (std::size_t c = a + 1; c < q_grid.size(); ++c) {
      const auto mid = find(0.5 * (q_grid[a] + q_grid[c]));
      if (!mid) continue;
      ++table.triples_checked;
      const double chord = 0.5 * (table.f0[a] + table.f0[c]);
      const double gap = (table.f0[*mid] - chord) / std::max(std::abs(chord), 1e-300);
      if (chord == 0.0 && table.f0[*mid] == 0.0) continue;
      table.worst_convexity_violation = std::max(table.worst_convexity_violation, gap);
      if (gap > tol.convexity_relative) table.convexity_ok = false;
    }
  }
  if (!std::isfinite(table.worst_convexity_violation)) table.worst_convexity_violation = 0.0;

  table.symmetry_ok = true;
  table.worst_symmetry_gap = 0.0;
  for (std::size_t i = 0; i < q_grid.size(); ++i) {
    const auto j = find(-1.0 * q_grid[i]);
    if (!j || *j <= i) continue;
    const double gap = std::abs(table.f0[i] - table.f0[*j]);
    const double allowed = tol.symmetry_absolute.value_or(
        2.0 * cfg.solver.tol_grad * std::max(1.0, std::abs(table.f0[i])));
    table.worst_symmetry_gap = std::max(table.worst_symmetry_gap, gap);
    if (gap > allowed) table.symmetry_ok = false;
  }
  return table;
}

}  // namespace hhomog
