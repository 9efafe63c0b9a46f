#include "hhomog/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hhomog/errors.hpp"
#include "parallel.hpp"

namespace hhomog {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace

ValueLaw ValueLaw::uniform(double a_min, double a_max) {
  if (!(a_min > 0.0) || !std::isfinite(a_max) || !(a_max >= a_min)) {
    throw ConfigError("uniform law needs 0 < a_min <= a_max");
  }
  return ValueLaw{Kind::Uniform, a_min, a_max, 0.5};
}

ValueLaw ValueLaw::two_point(double a, double b, double prob) {
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ConfigError("two_point law needs positive finite values");
  }
  if (!(prob >= 0.0 && prob <= 1.0)) throw ConfigError("two_point law needs prob in [0, 1]");
  return ValueLaw{Kind::TwoPoint, a, b, prob};
}

double ValueLaw::quantile(double u) const {
  if (kind == Kind::Uniform) return a + (b - a) * u;
  return u < prob ? a : b;
}

std::string ValueLaw::describe() const {
  std::ostringstream os;
  os.precision(12);
  if (kind == Kind::Uniform) {
    os << "uniform(" << a << "," << b << ")";
  } else {
    os << "two_point(" << a << "," << b << "," << prob << ")";
  }
  return os.str();
}

double tile_uniform(std::uint64_t seed, const LatticeIndex& k) {
  std::uint64_t h = splitmix64(seed);
  for (int i = 0; i < k.dim(); ++i) h = splitmix64(h ^ static_cast<std::uint64_t>(k[i]));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

RandomTileField::RandomTileField(std::uint64_t seed, ValueLaw law, int n)
    : seed_(seed), law_(law), n_(GroupParams::checked(n).n) {
  if (!(law_.support_min() > 0.0)) throw ConfigError("random coefficient law must be positive");
}

std::map<LatticeIndex, double> RandomTileField::realize(const AnisoGrid& grid) const {
  if (grid.n() != n_) throw ContractViolation("grid and random field differ in n");
  std::map<LatticeIndex, double> out;
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    const LatticeIndex k = tile_index(grid.cell_center(c));
    if (out.find(k) == out.end()) out.emplace(k, value(k));
  }
  return out;
}

std::vector<double> RandomTileField::cell_coefficients(const AnisoGrid& grid) const {
  if (grid.n() != n_) throw ContractViolation("grid and random field differ in n");
  std::vector<double> out(grid.num_cells());
  for (std::size_t c = 0; c < grid.num_cells(); ++c) out[c] = (*this)(grid.cell_center(c));
  return out;
}

CoefficientField RandomTileField::coefficient() const {
  const RandomTileField self = *this;
  std::ostringstream os;
  os << "random_tiles(seed=" << seed_ << "," << law_.describe() << ")";
  return CoefficientField::custom([self](const GroupPoint& x) { return self(x); },
                                  law_.support_min(), law_.support_max(), false,
                                  CoefficientField::Kind::RandomTiles, os.str());
}

Integrand sample_random_integrand(std::uint64_t seed, const ValueLaw& law, double alpha, int n) {
  return power_integrand(RandomTileField(seed, law, n).coefficient(), alpha, n);
}

std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t index) {
  return splitmix64(splitmix64(base_seed) ^ splitmix64(index + 0x2545f4914f6cdd1dULL));
}

MonteCarloReport monte_carlo_effective(const ValueLaw& law, double alpha,
                                       const HorizontalVector& q, const MonteCarloConfig& cfg) {
  if (cfg.n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (q.size() != 2 * cfg.n) throw ConfigError("q must have 2n components");
  if (cfg.k_list.empty()) throw ConfigError("k_list must not be empty");
  for (std::size_t i = 0; i < cfg.k_list.size(); ++i) {
    if (cfg.k_list[i] < 1 || (i > 0 && cfg.k_list[i] <= cfg.k_list[i - 1])) {
      throw ConfigError("k_list must be strictly increasing and >= 1");
    }
  }
  // Validates the law and alpha up front.
  (void)sample_random_integrand(0, law, alpha, cfg.n);

  MonteCarloReport rep;
  rep.law = law;
  rep.alpha = alpha;
  rep.q = q;
  rep.k_list = cfg.k_list;
  rep.base_seed = cfg.base_seed;
  const std::size_t nk = cfg.k_list.size();
  rep.samples.resize(static_cast<std::size_t>(cfg.n_samples) * nk);

  detail::parallel_for(rep.samples.size(), cfg.threads, [&](std::size_t idx) {
    const std::size_t s = idx / nk;
    const std::size_t j = idx % nk;
    const std::uint64_t seed = derive_seed(cfg.base_seed, s);
    const Integrand f = sample_random_integrand(seed, law, alpha, cfg.n);
    MonteCarloSample& out = rep.samples[idx];
    out.seed = seed;
    out.k = cfg.k_list[j];
    try {
      const ScaleResult r = energy_density(f, q, cfg.k_list[j], cfg.M, cfg.n, cfg.solver);
      out.e = r.e;
      out.iterations = r.iterations;
      out.residual = r.residual;
      out.converged = r.converged;
    } catch (const SolverError&) {
      out.converged = false;
    }
  });

  const double lo = law.support_min() * std::pow(q.norm(), alpha);
  const double hi = law.support_max() * (std::pow(q.norm(), alpha) + 1.0);
  rep.bounds_ok = true;
  for (std::size_t j = 0; j < nk; ++j) {
    MonteCarloScale sc;
    sc.k = cfg.k_list[j];
    double sum = 0.0;
    for (int s = 0; s < cfg.n_samples; ++s) {
      const MonteCarloSample& smp = rep.samples[s * nk + j];
      if (!smp.converged) {
        ++sc.failures;
        continue;
      }
      ++sc.count;
      sum += smp.e;
      const double slack = 1e-9 * std::max(1.0, std::abs(smp.e));
      if (smp.e < lo - slack || smp.e > hi + slack) rep.bounds_ok = false;
    }
    if (sc.count > 0) sc.mean = sum / static_cast<double>(sc.count);
    if (sc.count > 1) {
      double ss = 0.0;
      for (int s = 0; s < cfg.n_samples; ++s) {
        const MonteCarloSample& smp = rep.samples[s * nk + j];
        if (smp.converged) ss += (smp.e - sc.mean) * (smp.e - sc.mean);
      }
      sc.variance = ss / static_cast<double>(sc.count - 1);
    }
    rep.per_k.push_back(sc);
  }
  int inversions = 0;
  for (std::size_t j = 1; j < nk; ++j) {
    if (rep.per_k[j].variance > rep.per_k[j - 1].variance) ++inversions;
  }
  rep.variance_trend_ok = inversions <= 1;
  return rep;
}

ConcentrationReport concentration_report(const MonteCarloReport& mc, double delta) {
  if (mc.per_k.size() < 2) throw ConfigError("concentration report needs at least 2 scales");
  for (const auto& sc : mc.per_k) {
    if (sc.count < 8) throw ConfigError("concentration report needs >= 8 samples per scale");
  }
  if (!(delta >= 0.0)) throw ConfigError("delta must be non-negative");
  ConcentrationReport rep;
  rep.delta = delta;
  rep.pooled = mc.per_k.back().mean;
  rep.k_list = mc.k_list;
  const std::size_t nk = mc.k_list.size();
  const std::size_t ns = mc.samples.size() / nk;
  std::vector<double> total;
  for (std::size_t j = 0; j < nk; ++j) {
    std::size_t up = 0;
    std::size_t down = 0;
    for (std::size_t s = 0; s < ns; ++s) {
      const MonteCarloSample& smp = mc.samples[s * nk + j];
      if (!smp.converged) continue;
      if (smp.e > rep.pooled + delta) ++up;
      if (smp.e < rep.pooled - delta) ++down;
    }
    const double count = static_cast<double>(mc.per_k[j].count);
    rep.above.push_back(up / count);
    rep.below.push_back(down / count);
    total.push_back((up + down) / count);
  }
  for (std::size_t j = 1; j < nk; ++j) {
    if (total[j] > total[j - 1]) ++rep.inversions;
  }
  rep.passed = rep.inversions <= 1;
  return rep;
}

}  // namespace hhomog
