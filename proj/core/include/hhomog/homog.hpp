#pragma once

// Homogenisation pipeline: energy densities e_k = mu_q(Q^k)/|Q^k| on the
// dilated cubes Q^k = delta_k(Q), the effective integrand estimate
// f0(q) = min_k e_k, the exact dilation identity between the cell problem on
// delta_t(A) and the rescaled problem on A, pointwise recovery of f on
// shrinking boxes, non-integer scales, and sweeps over q.

#include <optional>
#include <string>
#include <vector>

#include "hhomog/solver.hpp"

namespace hhomog {

struct HomogConfig {
  std::vector<int> k_list{1, 2, 3, 4};
  int M = 4;
  int n = 1;
  SolverConfig solver{};
  /// Slack used by the bound and trend verdicts.
  double slack = 1e-6;
  /// Worker threads for independent cell problems (1 = sequential).
  int threads = 1;
};

struct ScaleResult {
  double scale = 0.0;
  double e = 0.0;                ///< mu_q(Q^t) / |Q^t|
  double affine_density = 0.0;   ///< E(l_q) / |Q^t|, the competitor bound
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double wall_time_s = 0.0;
};

struct HomogVerdicts {
  bool bounds_ok = false;
  bool monotone_trend_ok = false;
  std::optional<bool> ultimo_ok;
};

struct HomogReport {
  HorizontalVector q;
  std::vector<int> k_list;
  std::vector<ScaleResult> per_k;
  double f0_estimate = 0.0;
  double inf_over_k = 0.0;
  double e_last = 0.0;
  std::vector<double> deltas;  ///< |e_k - e_{k+1}| along the ladder
  HomogVerdicts verdicts;
  bool all_converged = false;
  std::vector<std::string> failures;
};

/// One cell solve on delta_t(Q) with physical spacing 1/M.
ScaleResult energy_density(const Integrand& f, const HorizontalVector& q, double t, int M, int n,
                           const SolverConfig& cfg, const QuadraticSystem* system = nullptr);

HomogReport energy_density_sequence(const Integrand& f, const HorizontalVector& q,
                                    const HomogConfig& cfg);

/// f0(q) from the ladder of cfg. Throws SolverError when a solve fails.
double effective_integrand(const Integrand& f, const HorizontalVector& q, const HomogConfig& cfg);

struct UltimoReport {
  double t = 1.0;
  double rho = 1.0;
  double energy_dilated = 0.0;    ///< mu_q(delta_t(A_rho))
  double energy_rescaled = 0.0;   ///< m(F_{1/t}, l_q, A_rho)
  double scaled_rescaled = 0.0;   ///< t^Q * energy_rescaled
  double relative_difference = 0.0;
  bool converged = false;
  bool passed = false;
};

/// Checks mu_q(delta_t(A_rho)) = t^Q m(F_{1/t}, l_q, A_rho) on node-wise
/// corresponding grids (the second grid is the delta_{1/t} image of the first).
UltimoReport ultimo_check(const Integrand& f, const HorizontalVector& q, double t, double rho,
                          int M, int n, const SolverConfig& cfg = {}, double tolerance = 1e-10);

struct RecoveryReport {
  GroupPoint x0;
  HorizontalVector q;
  double target = 0.0;  ///< f(x0, q)
  std::vector<double> rho;
  std::vector<double> density;  ///< m(F, l_q, A_rho) / |A_rho|
  std::vector<double> error;
  bool errors_decreasing = false;
  bool all_converged = false;
};

/// A_rho = x0 + [-rho, rho]^N (Euclidean shift), sampled with 2M intervals per
/// axis so that every box is resolved alike.
RecoveryReport recover_integrand_pointwise(const Integrand& f, const GroupPoint& x0,
                                           const HorizontalVector& q,
                                           const std::vector<double>& rho_list, int M, int n,
                                           const SolverConfig& cfg = {},
                                           double tolerance = 1e-9);

struct NonIntegerScaleEntry {
  double t = 0.0;
  int floor_t = 0;
  double e_t = 0.0;
  double e_floor = 0.0;
  double bound = 0.0;
  bool passed = false;
};

struct NonIntegerScaleReport {
  std::vector<NonIntegerScaleEntry> entries;
  bool passed = false;
};

/// |e_t - e_floor(t)| <= C2(|q|^alpha + 1)(1 - floor(t)^Q / t^Q) + slack.
NonIntegerScaleReport noninteger_scale_check(const Integrand& f, const HorizontalVector& q,
                                             const std::vector<double>& t_list, int M, int n,
                                             const SolverConfig& cfg = {}, double slack = 1e-6);

struct EffectiveIntegrandTable {
  std::vector<HorizontalVector> q;
  std::vector<double> f0;
  std::vector<HomogReport> reports;
  bool convexity_ok = false;
  double worst_convexity_violation = 0.0;  ///< relative, <= 0 when convex
  std::size_t triples_checked = 0;
  bool growth_ok = false;
  bool symmetry_ok = false;
  double worst_symmetry_gap = 0.0;
};

/// Tensor grid of q values: `points` samples per axis over [lo, hi].
std::vector<HorizontalVector> tensor_q_grid(int m, double lo, double hi, int points);

struct SweepTolerances {
  double convexity_relative = 1e-3;
  /// Allowed |f0(q) - f0(-q)|; defaults to twice the solver tolerance.
  std::optional<double> symmetry_absolute;
};

EffectiveIntegrandTable q_sweep(const Integrand& f, const std::vector<HorizontalVector>& q_grid,
                                const HomogConfig& cfg, const SweepTolerances& tol = {});

}  // namespace hhomog
