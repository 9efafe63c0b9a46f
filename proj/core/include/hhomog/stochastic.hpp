#pragma once

// Random tile-block coefficients a_omega(x) = value(seed, tile_index(x)) and
// Monte Carlo estimates of the effective energy density.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hhomog/homog.hpp"

namespace hhomog {

struct ValueLaw {
  enum class Kind { Uniform, TwoPoint };
  Kind kind = Kind::Uniform;
  double a = 1.0;     ///< uniform: lower end; two_point: first value
  double b = 1.0;     ///< uniform: upper end; two_point: second value
  double prob = 0.5;  ///< two_point: probability of `a`

  static ValueLaw uniform(double a_min, double a_max);
  static ValueLaw two_point(double a, double b, double prob);

  double support_min() const { return std::min(a, b); }
  double support_max() const { return std::max(a, b); }
  /// Maps u in [0, 1) to a value of the law.
  double quantile(double u) const;
  std::string describe() const;
};

/// Uniform double in [0, 1) from a counter-based hash of (seed, k); a pure
/// function of its arguments.
double tile_uniform(std::uint64_t seed, const LatticeIndex& k);

class RandomTileField {
 public:
  RandomTileField(std::uint64_t seed, ValueLaw law, int n);

  std::uint64_t seed() const { return seed_; }
  const ValueLaw& law() const { return law_; }
  int n() const { return n_; }

  double value(const LatticeIndex& k) const { return law_.quantile(tile_uniform(seed_, k)); }
  double operator()(const GroupPoint& x) const { return value(tile_index(x)); }

  /// Tile values for every tile containing a cell centre of `grid`.
  std::map<LatticeIndex, double> realize(const AnisoGrid& grid) const;
  /// Coefficient at each cell centre of `grid`.
  std::vector<double> cell_coefficients(const AnisoGrid& grid) const;

  CoefficientField coefficient() const;

 private:
  std::uint64_t seed_;
  ValueLaw law_;
  int n_;
};

/// f(x, omega, q) = a_omega(x) |q|^alpha with C1, C2 from the law's support.
Integrand sample_random_integrand(std::uint64_t seed, const ValueLaw& law, double alpha, int n = 1);

/// Seed of sample `index` derived from `base_seed`.
std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index);

struct MonteCarloSample {
  std::uint64_t seed = 0;
  int k = 0;
  double e = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

struct MonteCarloScale {
  int k = 0;
  double mean = 0.0;
  double variance = 0.0;  ///< unbiased sample variance
  std::size_t count = 0;
  std::size_t failures = 0;
};

struct MonteCarloReport {
  ValueLaw law;
  double alpha = 2.0;
  HorizontalVector q;
  std::vector<int> k_list;
  std::uint64_t base_seed = 0;
  std::vector<MonteCarloSample> samples;  ///< seed-major, then k
  std::vector<MonteCarloScale> per_k;
  bool bounds_ok = false;
  bool variance_trend_ok = false;
};

struct MonteCarloConfig {
  std::vector<int> k_list{1, 2, 3};
  int n_samples = 16;
  std::uint64_t base_seed = 1;
  int M = 4;
  int n = 1;
  SolverConfig solver{};
  int threads = 1;
};

MonteCarloReport monte_carlo_effective(const ValueLaw& law, double alpha,
                                       const HorizontalVector& q, const MonteCarloConfig& cfg);

struct ConcentrationReport {
  double delta = 0.0;
  double pooled = 0.0;  ///< mean at the largest k
  std::vector<int> k_list;
  std::vector<double> above;  ///< fraction with e_k > pooled + delta
  std::vector<double> below;  ///< fraction with e_k < pooled - delta
  int inversions = 0;
  bool passed = false;
};

ConcentrationReport concentration_report(const MonteCarloReport& mc, double delta);

}  // namespace hhomog
