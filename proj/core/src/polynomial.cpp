#include "hhomog/polynomial.hpp"

#include <cmath>

#include "hhomog/errors.hpp"

namespace hhomog {

Polynomial Polynomial::constant(int n, double c) {
  Polynomial p(n);
  p.add_term(c, Exponents{});
  return p;
}

Polynomial Polynomial::coordinate(int n, int axis) {
  Polynomial p(n);
  Exponents e{};
  e[axis] = 1;
  p.add_term(1.0, e);
  return p;
}

Polynomial Polynomial::h_affine(const HorizontalVector& q, double a) {
  const int n = q.size() / 2;
  Polynomial p = constant(n, a);
  for (int i = 0; i < q.size(); ++i) p += q[i] * coordinate(n, i);
  return p;
}

void Polynomial::add_term(double coef, const Exponents& e) {
  if (coef == 0.0) return;
  auto [it, inserted] = terms_.emplace(e, coef);
  if (!inserted) {
    it->second += coef;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::operator()(const GroupPoint& x) const {
  if (x.n() != n_) throw ContractViolation("Polynomial evaluated at a point of another H^n");
  double s = 0.0;
  for (const auto& [e, c] : terms_) {
    double v = c;
    for (int i = 0; i < x.dim(); ++i)
      for (int p = 0; p < e[i]; ++p) v *= x[i];
    s += v;
  }
  return s;
}

Polynomial Polynomial::derivative(int axis) const {
  Polynomial d(n_);
  for (const auto& [e, c] : terms_) {
    if (e[axis] == 0) continue;
    Exponents de = e;
    de[axis] -= 1;
    d.add_term(c * e[axis], de);
  }
  return d;
}

std::array<double, kMaxDim> Polynomial::gradient(const GroupPoint& x) const {
  std::array<double, kMaxDim> g{};
  for (int i = 0; i < x.dim(); ++i) g[i] = derivative(i)(x);
  return g;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  if (o.n_ != n_) throw ContractViolation("Polynomial sum across different H^n");
  for (const auto& [e, c] : o.terms_) add_term(c, e);
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.n_ != b.n_) throw ContractViolation("Polynomial product across different H^n");
  Polynomial p(a.n_);
  for (const auto& [ea, ca] : a.terms_)
    for (const auto& [eb, cb] : b.terms_) {
      Polynomial::Exponents e{};
      for (int i = 0; i < kMaxDim; ++i) e[i] = ea[i] + eb[i];
      p.add_term(ca * cb, e);
    }
  return p;
}

Polynomial operator*(double s, Polynomial a) {
  for (auto& [e, c] : a.terms_) c *= s;
  return a;
}

Polynomial Polynomial::pow(int e) const {
  Polynomial r = constant(n_, 1.0);
  for (int i = 0; i < e; ++i) r = r * *this;
  return r;
}

Polynomial Polynomial::compose_left_translation(const GroupPoint& z) const {
  if (z.n() != n_) throw ContractViolation("translation by a point of another H^n");
  const int dim = 2 * n_ + 1;
  // Components of z * x as polynomials in x.
  std::array<Polynomial, kMaxDim> image;
  for (int i = 0; i < 2 * n_; ++i) image[i] = constant(n_, z[i]) + coordinate(n_, i);
  Polynomial third = constant(n_, z.x3()) + coordinate(n_, 2 * n_);
  for (int j = 0; j < n_; ++j) {
    third += (0.5 * z.x1(j)) * coordinate(n_, n_ + j);
    third += (-0.5 * z.x2(j)) * coordinate(n_, j);
  }
  image[2 * n_] = third;

  Polynomial result(n_);
  for (const auto& [e, c] : terms_) {
    Polynomial term = constant(n_, c);
    for (int i = 0; i < dim; ++i)
      if (e[i] > 0) term = term * image[i].pow(e[i]);
    result += term;
  }
  return result;
}

HorizontalVector h_gradient_exact(const Polynomial& u, const GroupPoint& x) {
  const auto g = u.gradient(x);
  const SmallMatrix s = sigma(x);
  HorizontalVector r(2 * x.n());
  for (int c = 0; c < s.cols(); ++c) {
    double v = 0.0;
    for (int row = 0; row < s.rows(); ++row) v += s(row, c) * g[row];
    r[c] = v;
  }
  return r;
}

}  // namespace hhomog
