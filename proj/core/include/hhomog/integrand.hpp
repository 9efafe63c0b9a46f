#pragma once

// Energy densities f(x, q) for the horizontal-gradient functional
// F(u, A) = int_A f(x, grad_X u) dx, together with their structural data:
// growth exponent and constants C1 |q|^alpha <= f <= C2 (|q|^alpha + 1),
// convexity in q, and H-periodicity f(tau_k(x), q) = f(x, q).

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hhomog/heisenberg.hpp"

namespace hhomog {

struct GrowthConstants {
  double alpha = 2.0;
  double c1 = 1.0;
  double c2 = 1.0;
};

struct IntegrandFlags {
  bool convex_in_q = true;
  bool h_periodic = false;
  bool x_independent = false;
  bool random = false;
};

/// Scalar coefficient a(x) with a positive lower bound.
class CoefficientField {
 public:
  using Fn = std::function<double(const GroupPoint&)>;

  enum class Kind { Constant, CellTable, Smooth, RandomTiles, Custom };

  static CoefficientField constant(double a0);
  /// H-periodic, piecewise constant on a uniform sub-grid of Q with
  /// `divisions` cells per axis; `values` is row-major over (2n+1) axes with
  /// the vertical axis fastest. Lookups pull the point back into Q through the
  /// tiling, so a(tau_k(x)) == a(x) exactly.
  static CoefficientField cell_table(int n, int divisions, std::vector<double> values);
  /// cell_table with two sub-cells per axis; `even` on sub-cells whose index
  /// sum is even, `odd` elsewhere.
  static CoefficientField checkerboard(int n, double even, double odd);
  static CoefficientField smooth(Fn fn, double a_min, double a_max, std::string description);
  static CoefficientField custom(Fn fn, double a_min, double a_max, bool h_periodic, Kind kind,
                                 std::string description);

  double operator()(const GroupPoint& x) const { return fn_(x); }
  double a_min() const { return a_min_; }
  double a_max() const { return a_max_; }
  bool h_periodic() const { return h_periodic_; }
  bool is_constant() const { return kind_ == Kind::Constant; }
  Kind kind() const { return kind_; }
  const std::string& description() const { return description_; }

 private:
  CoefficientField(Fn fn, double a_min, double a_max, bool periodic, Kind kind, std::string desc);

  Fn fn_;
  double a_min_;
  double a_max_;
  bool h_periodic_;
  Kind kind_;
  std::string description_;
};

/// Periodic cell-table lookup used by CoefficientField::cell_table. Exposed for
/// tests: returns the flat table index for x.
std::size_t periodic_cell_index(const GroupPoint& x, int divisions);

/// Symmetric m x m matrix field A(x) with spectral bounds [lambda_min, lambda_max].
class MatrixField {
 public:
  using Fn = std::function<SmallMatrix(const GroupPoint&)>;

  static MatrixField constant(const SmallMatrix& a);
  /// A(x) = c(x) * a0 with a0 symmetric positive definite.
  static MatrixField scaled(const CoefficientField& c, const SmallMatrix& a0);

  SmallMatrix operator()(const GroupPoint& x) const { return fn_(x); }
  double lambda_min() const { return lambda_min_; }
  double lambda_max() const { return lambda_max_; }
  bool h_periodic() const { return h_periodic_; }
  bool is_constant() const { return constant_; }
  int size() const { return size_; }

 private:
  MatrixField(Fn fn, double lmin, double lmax, bool periodic, bool constant, int size)
      : fn_(std::move(fn)), lambda_min_(lmin), lambda_max_(lmax), h_periodic_(periodic),
        constant_(constant), size_(size) {}

  Fn fn_;
  double lambda_min_;
  double lambda_max_;
  bool h_periodic_;
  bool constant_;
  int size_;
};

/// Eigenvalues of a symmetric matrix (cyclic Jacobi), ascending.
std::vector<double> symmetric_eigenvalues(const SmallMatrix& a);

class Integrand {
 public:
  using EvalFn = std::function<double(const GroupPoint&, const HorizontalVector&)>;
  using GradFn = std::function<HorizontalVector(const GroupPoint&, const HorizontalVector&)>;
  /// For integrands of the form f(x, q) = q^T K(x) q.
  using QuadFn = std::function<SmallMatrix(const GroupPoint&)>;

  /// `grad` may be empty, in which case central differences are used.
  Integrand(int n, EvalFn eval, GradFn grad, GrowthConstants growth, IntegrandFlags flags,
            std::string description, QuadFn quadratic = {});

  double operator()(const GroupPoint& x, const HorizontalVector& q) const { return eval_(x, q); }
  HorizontalVector grad_q(const GroupPoint& x, const HorizontalVector& q) const;

  bool is_quadratic() const { return static_cast<bool>(quad_); }
  SmallMatrix quadratic_form(const GroupPoint& x) const;

  int n() const { return n_; }
  const GrowthConstants& growth() const { return growth_; }
  const IntegrandFlags& flags() const { return flags_; }
  const std::string& description() const { return description_; }

  const EvalFn& eval_fn() const { return eval_; }
  const GradFn& grad_fn() const { return grad_; }
  const QuadFn& quad_fn() const { return quad_; }

  /// C1 |q|^alpha and C2 (|q|^alpha + 1).
  double lower_bound(const HorizontalVector& q) const;
  double upper_bound(const HorizontalVector& q) const;

 private:
  int n_;
  EvalFn eval_;
  GradFn grad_;
  GrowthConstants growth_;
  IntegrandFlags flags_;
  std::string description_;
  QuadFn quad_;
};

/// f(x, q) = a(x) |q|^alpha with C1 = a_min, C2 = a_max.
Integrand power_integrand(const CoefficientField& a, double alpha, int n);

/// f(x, q) = |A(x) q|^p with C1 = lambda_min^p, C2 = lambda_max^p.
Integrand matrix_p_integrand(const MatrixField& a, double p, int n);

/// (x, q) -> f(delta_{1/eps}(x), q). Clears the h_periodic flag.
Integrand rescale_integrand(const Integrand& f, double eps);

/// (x, q) -> f(z * x, q).
Integrand translate_integrand(const Integrand& f, const GroupPoint& z);

struct AssumptionCheck {
  bool ok = true;
  bool checked = false;
  /// Smallest slack observed (negative when violated).
  double worst_margin = 0.0;
  std::optional<GroupPoint> witness_x;
  std::optional<HorizontalVector> witness_q;
  std::size_t samples = 0;
};

struct AssumptionReport {
  AssumptionCheck growth;
  AssumptionCheck convexity;
  AssumptionCheck periodicity;

  bool all_ok() const { return growth.ok && convexity.ok && periodicity.ok; }
};

struct AssumptionSampling {
  std::size_t samples = 10000;
  std::uint64_t seed = 20240601;
  /// Points are drawn from [-x_range, x_range]^N.
  double x_range = 10.0;
  /// |q| is log-uniform in [q_min, q_max].
  double q_min = 1e-3;
  double q_max = 1e3;
};

/// Sampled check of growth, midpoint convexity (when flagged) and exact
/// periodicity (when flagged). Violations are reported, never thrown.
AssumptionReport verify_assumptions(const Integrand& f, const AssumptionSampling& cfg = {});

}  // namespace hhomog
