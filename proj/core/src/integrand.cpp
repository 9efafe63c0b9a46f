#include "hhomog/integrand.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "hhomog/errors.hpp"

namespace hhomog {

namespace {

// Coordinates are snapped to multiples of 2^-32 before a periodic lookup so
// that points which agree up to a few ulps (e.g. delta_t(delta_{1/t}(x)) and x)
// resolve to the same sub-cell. Dyadic grid coordinates are left unchanged.
constexpr double kSnapScale = 4294967296.0;  // 2^32

double snap(double v) {
  if (std::abs(v) >= 1048576.0) return v;
  return std::nearbyint(v * kSnapScale) / kSnapScale;
}

std::string fmt(double v) {
  std::string s = std::to_string(v);
  while (s.size() > 1 && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace

// ---- CoefficientField -------------------------------------------------------

CoefficientField::CoefficientField(Fn fn, double a_min, double a_max, bool periodic, Kind kind,
                                   std::string desc)
    : fn_(std::move(fn)), a_min_(a_min), a_max_(a_max), h_periodic_(periodic), kind_(kind),
      description_(std::move(desc)) {
  if (!(a_min > 0.0)) {
    throw ConfigError("coefficient lower bound must be strictly positive, got " + fmt(a_min));
  }
  if (!(a_max >= a_min)) throw ConfigError("coefficient bounds must satisfy a_min <= a_max");
}

CoefficientField CoefficientField::constant(double a0) {
  return CoefficientField([a0](const GroupPoint&) { return a0; }, a0, a0, true, Kind::Constant,
                          "constant(" + fmt(a0) + ")");
}

std::size_t periodic_cell_index(const GroupPoint& x, int divisions) {
  GroupPoint xs(x.n());
  for (int a = 0; a < x.dim(); ++a) xs[a] = snap(x[a]);
  const LatticeIndex k = tile_index(xs);
  const GroupPoint y = translate_tau(-k, xs);
  std::size_t idx = 0;
  for (int a = 0; a < y.dim(); ++a) {
    int s = static_cast<int>(std::floor((y[a] + 1.0) * 0.5 * divisions));
    s = std::clamp(s, 0, divisions - 1);
    idx = idx * static_cast<std::size_t>(divisions) + static_cast<std::size_t>(s);
  }
  return idx;
}

CoefficientField CoefficientField::cell_table(int n, int divisions, std::vector<double> values) {
  if (divisions < 1) throw ConfigError("cell_table needs at least one division per axis");
  const int N = 2 * GroupParams::checked(n).n + 1;
  std::size_t expected = 1;
  for (int a = 0; a < N; ++a) expected *= static_cast<std::size_t>(divisions);
  if (values.size() != expected) {
    throw ConfigError("cell_table expects " + std::to_string(expected) + " values, got " +
                      std::to_string(values.size()));
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double a_min = *lo;
  const double a_max = *hi;
  auto table = std::make_shared<const std::vector<double>>(std::move(values));
  return CoefficientField(
      [table, divisions](const GroupPoint& x) { return (*table)[periodic_cell_index(x, divisions)]; },
      a_min, a_max, true, Kind::CellTable,
      "cell_table(" + std::to_string(divisions) + "^" + std::to_string(N) + ")");
}

CoefficientField CoefficientField::checkerboard(int n, double even, double odd) {
  const int N = 2 * GroupParams::checked(n).n + 1;
  std::vector<double> values(std::size_t{1} << N);
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = (std::popcount(i) % 2 == 0) ? even : odd;
  }
  CoefficientField c = cell_table(n, 2, std::move(values));
  c.description_ = "checkerboard(" + fmt(even) + "," + fmt(odd) + ")";
  return c;
}

CoefficientField CoefficientField::smooth(Fn fn, double a_min, double a_max,
                                          std::string description) {
  return CoefficientField(std::move(fn), a_min, a_max, false, Kind::Smooth,
                          std::move(description));
}

CoefficientField CoefficientField::custom(Fn fn, double a_min, double a_max, bool h_periodic,
                                          Kind kind, std::string description) {
  return CoefficientField(std::move(fn), a_min, a_max, h_periodic, kind, std::move(description));
}

// ---- MatrixField ------------------------------------------------------------

std::vector<double> symmetric_eigenvalues(const SmallMatrix& a) {
  const int size = a.rows();
  if (size != a.cols()) throw ContractViolation("eigenvalues of a non-square matrix");
  SmallMatrix w = a;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < size; ++p)
      for (int q = p + 1; q < size; ++q) off += w(p, q) * w(p, q);
    if (off < 1e-30) break;
    for (int p = 0; p < size; ++p) {
      for (int q = p + 1; q < size; ++q) {
        if (w(p, q) == 0.0) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * w(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < size; ++k) {
          const double wkp = w(k, p);
          const double wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (int k = 0; k < size; ++k) {
          const double wpk = w(p, k);
          const double wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
      }
    }
  }
  std::vector<double> ev(size);
  for (int i = 0; i < size; ++i) ev[i] = w(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

namespace {

void require_symmetric_pd(const SmallMatrix& a, double& lmin, double& lmax) {
  if (a.rows() != a.cols()) throw ConfigError("matrix field must be square");
  for (int r = 0; r < a.rows(); ++r)
    for (int c = 0; c < r; ++c)
      if (a(r, c) != a(c, r)) throw ConfigError("matrix field must be exactly symmetric");
  const auto ev = symmetric_eigenvalues(a);
  lmin = ev.front();
  lmax = ev.back();
  if (!(lmin > 0.0)) throw ConfigError("matrix field must be positive definite");
}

}  // namespace

MatrixField MatrixField::constant(const SmallMatrix& a) {
  double lmin = 0.0, lmax = 0.0;
  require_symmetric_pd(a, lmin, lmax);
  return MatrixField([a](const GroupPoint&) { return a; }, lmin, lmax, true, true, a.rows());
}

MatrixField MatrixField::scaled(const CoefficientField& c, const SmallMatrix& a0) {
  double lmin = 0.0, lmax = 0.0;
  require_symmetric_pd(a0, lmin, lmax);
  auto fn = [c, a0](const GroupPoint& x) {
    SmallMatrix r = a0;
    const double s = c(x);
    for (int i = 0; i < r.rows(); ++i)
      for (int j = 0; j < r.cols(); ++j) r(i, j) *= s;
    return r;
  };
  return MatrixField(fn, c.a_min() * lmin, c.a_max() * lmax, c.h_periodic(), c.is_constant(),
                     a0.rows());
}

// ---- Integrand --------------------------------------------------------------

Integrand::Integrand(int n, EvalFn eval, GradFn grad, GrowthConstants growth, IntegrandFlags flags,
                     std::string description, QuadFn quadratic)
    : n_(GroupParams::checked(n).n), eval_(std::move(eval)), grad_(std::move(grad)),
      growth_(growth), flags_(flags), description_(std::move(description)),
      quad_(std::move(quadratic)) {
  if (!eval_) throw ConfigError("integrand needs an evaluator");
}

HorizontalVector Integrand::grad_q(const GroupPoint& x, const HorizontalVector& q) const {
  if (grad_) return grad_(x, q);
  HorizontalVector g(q.size());
  for (int i = 0; i < q.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(q[i]));
    HorizontalVector qp = q, qm = q;
    qp[i] += h;
    qm[i] -= h;
    g[i] = (eval_(x, qp) - eval_(x, qm)) / (2.0 * h);
  }
  return g;
}

SmallMatrix Integrand::quadratic_form(const GroupPoint& x) const {
  if (!quad_) throw ContractViolation("integrand '" + description_ + "' is not quadratic");
  return quad_(x);
}

double Integrand::lower_bound(const HorizontalVector& q) const {
  return growth_.c1 * std::pow(q.norm(), growth_.alpha);
}

double Integrand::upper_bound(const HorizontalVector& q) const {
  return growth_.c2 * (std::pow(q.norm(), growth_.alpha) + 1.0);
}

Integrand power_integrand(const CoefficientField& a, double alpha, int n) {
  if (!(alpha > 1.0)) {
    throw ConfigError("power integrand requires alpha > 1 (growth condition C1|q|^alpha <= f), got " +
                      fmt(alpha));
  }
  const int m = 2 * n;
  auto eval = [a, alpha](const GroupPoint& x, const HorizontalVector& q) {
    const double r2 = q.dot(q);
    const double mag = alpha == 2.0 ? r2 : std::pow(r2, 0.5 * alpha);
    return a(x) * mag;
  };
  auto grad = [a, alpha](const GroupPoint& x, const HorizontalVector& q) {
    const double r = q.norm();
    HorizontalVector g = q;
    const double s = r > 0.0 ? alpha * a(x) * std::pow(r, alpha - 2.0) : 0.0;
    g *= s;
    return g;
  };
  Integrand::QuadFn quad;
  if (alpha == 2.0) {
    quad = [a, m](const GroupPoint& x) {
      SmallMatrix k = SmallMatrix::identity(m);
      const double v = a(x);
      for (int i = 0; i < m; ++i) k(i, i) = v;
      return k;
    };
  }
  IntegrandFlags flags;
  flags.convex_in_q = true;
  flags.h_periodic = a.h_periodic();
  flags.x_independent = a.is_constant();
  flags.random = a.kind() == CoefficientField::Kind::RandomTiles;
  return Integrand(n, eval, grad, GrowthConstants{alpha, a.a_min(), a.a_max()}, flags,
                   a.description() + "*|q|^" + fmt(alpha), quad);
}

Integrand matrix_p_integrand(const MatrixField& a, double p, int n) {
  if (!(p > 1.0) || !std::isfinite(p)) {
    throw ConfigError("matrix_p integrand requires 1 < p < inf (growth condition), got " + fmt(p));
  }
  if (a.size() != 2 * n) throw ConfigError("matrix field must be 2n x 2n");
  auto eval = [a, p](const GroupPoint& x, const HorizontalVector& q) {
    const HorizontalVector aq = a(x) * q;
    const double r2 = aq.dot(aq);
    return p == 2.0 ? r2 : std::pow(r2, 0.5 * p);
  };
  auto grad = [a, p](const GroupPoint& x, const HorizontalVector& q) {
    const SmallMatrix ax = a(x);
    const HorizontalVector aq = ax * q;
    const double r = aq.norm();
    HorizontalVector g = ax.transpose() * aq;
    g *= r > 0.0 ? p * std::pow(r, p - 2.0) : 0.0;
    return g;
  };
  Integrand::QuadFn quad;
  if (p == 2.0) {
    quad = [a](const GroupPoint& x) {
      const SmallMatrix ax = a(x);
      return ax.transpose() * ax;
    };
  }
  IntegrandFlags flags;
  flags.convex_in_q = true;
  flags.h_periodic = a.h_periodic();
  flags.x_independent = a.is_constant();
  return Integrand(n, eval, grad,
                   GrowthConstants{p, std::pow(a.lambda_min(), p), std::pow(a.lambda_max(), p)},
                   flags, "|A(x)q|^" + fmt(p), quad);
}

Integrand rescale_integrand(const Integrand& f, double eps) {
  if (!(eps > 0.0)) throw DomainError("rescale_integrand: eps must be positive");
  const double t = 1.0 / eps;
  auto eval = [f, t](const GroupPoint& x, const HorizontalVector& q) { return f(dilate(t, x), q); };
  Integrand::GradFn grad;
  if (f.grad_fn()) {
    grad = [f, t](const GroupPoint& x, const HorizontalVector& q) { return f.grad_q(dilate(t, x), q); };
  }
  Integrand::QuadFn quad;
  if (f.is_quadratic()) {
    quad = [f, t](const GroupPoint& x) { return f.quadratic_form(dilate(t, x)); };
  }
  IntegrandFlags flags = f.flags();
  flags.h_periodic = false;
  return Integrand(f.n(), eval, grad, f.growth(), flags,
                   f.description() + " rescaled by eps=" + fmt(eps), quad);
}

Integrand translate_integrand(const Integrand& f, const GroupPoint& z) {
  if (z.n() != f.n()) throw ContractViolation("translate_integrand: dimension mismatch");
  auto eval = [f, z](const GroupPoint& x, const HorizontalVector& q) {
    return f(group_mul(z, x), q);
  };
  Integrand::GradFn grad;
  if (f.grad_fn()) {
    grad = [f, z](const GroupPoint& x, const HorizontalVector& q) {
      return f.grad_q(group_mul(z, x), q);
    };
  }
  Integrand::QuadFn quad;
  if (f.is_quadratic()) {
    quad = [f, z](const GroupPoint& x) { return f.quadratic_form(group_mul(z, x)); };
  }
  return Integrand(f.n(), eval, grad, f.growth(), f.flags(), f.description() + " translated", quad);
}

// ---- verify_assumptions -----------------------------------------------------

AssumptionReport verify_assumptions(const Integrand& f, const AssumptionSampling& cfg) {
  AssumptionReport rep;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> ux(-cfg.x_range, cfg.x_range);
  std::uniform_real_distribution<double> logr(std::log(cfg.q_min), std::log(cfg.q_max));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_int_distribution<int> uk(-5, 5);
  const int n = f.n();
  const int m = 2 * n;

  auto random_point = [&] {
    GroupPoint x(n);
    for (int a = 0; a < x.dim(); ++a) x[a] = ux(rng);
    return x;
  };
  auto random_q = [&] {
    HorizontalVector q(m);
    double r2 = 0.0;
    for (int i = 0; i < m; ++i) {
      q[i] = gauss(rng);
      r2 += q[i] * q[i];
    }
    q *= std::exp(logr(rng)) / std::sqrt(std::max(r2, 1e-300));
    return q;
  };
  // Margins are clamped at zero from above; a witness exists only once some
  // sample has negative slack.
  auto record = [](AssumptionCheck& c, double margin, const GroupPoint& x,
                   const HorizontalVector& q) {
    if (margin < c.worst_margin) {
      c.worst_margin = margin;
      c.witness_x = x;
      c.witness_q = q;
    }
  };

  rep.growth.checked = true;
  for (std::size_t s = 0; s < cfg.samples; ++s) {
    const GroupPoint x = random_point();
    const HorizontalVector q = random_q();
    const double v = f(x, q);
    const double lo = f.lower_bound(q);
    const double hi = f.upper_bound(q);
    // Relative slack of the tighter side.
    const double margin = std::min((v - lo) / std::max(1.0, std::abs(lo)),
                                   (hi - v) / std::max(1.0, std::abs(hi)));
    record(rep.growth, margin, x, q);
    if (margin < -1e-12) rep.growth.ok = false;
    ++rep.growth.samples;
  }

  if (f.flags().convex_in_q) {
    rep.convexity.checked = true;
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      const GroupPoint x = random_point();
      const HorizontalVector q1 = random_q();
      const HorizontalVector q2 = random_q();
      const HorizontalVector mid = 0.5 * (q1 + q2);
      const double f1 = f(x, q1);
      const double f2 = f(x, q2);
      const double gap = 0.5 * (f1 + f2) - f(x, mid);
      const double margin = gap / std::max(1.0, std::abs(f1) + std::abs(f2));
      record(rep.convexity, margin, x, mid);
      if (margin < -1e-10) rep.convexity.ok = false;
      ++rep.convexity.samples;
    }
  }

  if (f.flags().h_periodic) {
    rep.periodicity.checked = true;
    for (std::size_t s = 0; s < cfg.samples; ++s) {
      const GroupPoint x = random_point();
      const HorizontalVector q = random_q();
      LatticeIndex k(n);
      for (int a = 0; a < k.dim(); ++a) k[a] = uk(rng);
      const double diff = std::abs(f(translate_tau(k, x), q) - f(x, q));
      record(rep.periodicity, -diff, x, q);
      if (diff != 0.0) rep.periodicity.ok = false;
      ++rep.periodicity.samples;
    }
  }
  return rep;
}

}  // namespace hhomog
