#pragma once

// Multivariate polynomials on R^(2n+1) with exact differentiation. Used as the
// closed-form function class for exact horizontal gradients and for checking
// left invariance of the vector fields symbolically.

#include <array>
#include <map>
#include <string>

#include "hhomog/heisenberg.hpp"

namespace hhomog {

class Polynomial {
 public:
  using Exponents = std::array<int, kMaxDim>;

  explicit Polynomial(int n = 1) : n_(n) {}

  static Polynomial constant(int n, double c);
  /// The coordinate function x -> x[axis].
  static Polynomial coordinate(int n, int axis);
  /// l_q(x) + a = q . pi_m(x) + a.
  static Polynomial h_affine(const HorizontalVector& q, double a);

  int n() const { return n_; }
  const std::map<Exponents, double>& terms() const { return terms_; }
  void add_term(double coef, const Exponents& e);

  double operator()(const GroupPoint& x) const;
  /// Euclidean gradient (length 2n+1), exact.
  std::array<double, kMaxDim> gradient(const GroupPoint& x) const;
  Polynomial derivative(int axis) const;

  /// The polynomial x -> u(z * x).
  Polynomial compose_left_translation(const GroupPoint& z) const;

  Polynomial& operator+=(const Polynomial& o);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
  friend Polynomial operator*(double s, Polynomial a);
  Polynomial pow(int e) const;

 private:
  int n_;
  std::map<Exponents, double> terms_;
};

/// sigma(x)^T grad u(x).
HorizontalVector h_gradient_exact(const Polynomial& u, const GroupPoint& x);

}  // namespace hhomog
