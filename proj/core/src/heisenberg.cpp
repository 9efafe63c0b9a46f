#include "hhomog/heisenberg.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "hhomog/errors.hpp"

namespace hhomog {

namespace {

void require_n(int n) {
  if (n < 1 || n > kMaxN) {
    throw ConfigError("Heisenberg index n must be in [1, " + std::to_string(kMaxN) + "], got " +
                      std::to_string(n));
  }
}

void require_same_n(int a, int b, const char* what) {
  if (a != b) {
    throw ContractViolation(std::string(what) + ": dimension mismatch (n=" + std::to_string(a) +
                            " vs n=" + std::to_string(b) + ")");
  }
}

std::int64_t floor_to_int(double v) { return static_cast<std::int64_t>(std::floor(v)); }

}  // namespace

GroupParams GroupParams::checked(int n) {
  require_n(n);
  return GroupParams{n};
}

// ---- GroupPoint -------------------------------------------------------------

GroupPoint::GroupPoint(int n) : n_(n) { require_n(n); }

GroupPoint::GroupPoint(double x1, double x2, double x3) : n_(1) {
  c_[0] = x1;
  c_[1] = x2;
  c_[2] = x3;
}

GroupPoint GroupPoint::from_coords(std::span<const double> coords) {
  if (coords.size() < 3 || coords.size() % 2 == 0) {
    throw ContractViolation("GroupPoint needs 2n+1 coordinates, got " +
                            std::to_string(coords.size()));
  }
  GroupPoint p(static_cast<int>(coords.size() - 1) / 2);
  std::copy(coords.begin(), coords.end(), p.c_.begin());
  return p;
}

GroupPoint GroupPoint::from_coords(std::initializer_list<double> coords) {
  return from_coords(std::span<const double>(coords.begin(), coords.size()));
}

bool GroupPoint::is_finite() const {
  return std::all_of(c_.begin(), c_.begin() + dim(), [](double v) { return std::isfinite(v); });
}

bool operator==(const GroupPoint& a, const GroupPoint& b) {
  return a.n_ == b.n_ && std::equal(a.c_.begin(), a.c_.begin() + a.dim(), b.c_.begin());
}

// ---- HorizontalVector -------------------------------------------------------

HorizontalVector::HorizontalVector(int m) : m_(m) {
  if (m < 2 || m > kMaxHorizontal || m % 2 != 0) {
    throw ContractViolation("horizontal dimension must be even and in [2, " +
                            std::to_string(kMaxHorizontal) + "], got " + std::to_string(m));
  }
}

HorizontalVector::HorizontalVector(std::initializer_list<double> q)
    : HorizontalVector(static_cast<int>(q.size())) {
  std::copy(q.begin(), q.end(), v_.begin());
}

HorizontalVector HorizontalVector::from_span(std::span<const double> q) {
  HorizontalVector v(static_cast<int>(q.size()));
  std::copy(q.begin(), q.end(), v.v_.begin());
  return v;
}

double HorizontalVector::dot(const HorizontalVector& o) const {
  require_same_n(m_, o.m_, "HorizontalVector::dot");
  double s = 0.0;
  for (int i = 0; i < m_; ++i) s += v_[i] * o.v_[i];
  return s;
}

double HorizontalVector::norm() const { return std::sqrt(dot(*this)); }

bool HorizontalVector::is_finite() const {
  return std::all_of(v_.begin(), v_.begin() + m_, [](double v) { return std::isfinite(v); });
}

HorizontalVector& HorizontalVector::operator+=(const HorizontalVector& o) {
  require_same_n(m_, o.m_, "HorizontalVector::operator+=");
  for (int i = 0; i < m_; ++i) v_[i] += o.v_[i];
  return *this;
}

HorizontalVector& HorizontalVector::operator-=(const HorizontalVector& o) {
  require_same_n(m_, o.m_, "HorizontalVector::operator-=");
  for (int i = 0; i < m_; ++i) v_[i] -= o.v_[i];
  return *this;
}

HorizontalVector& HorizontalVector::operator*=(double s) {
  for (int i = 0; i < m_; ++i) v_[i] *= s;
  return *this;
}

bool operator==(const HorizontalVector& a, const HorizontalVector& b) {
  return a.m_ == b.m_ && std::equal(a.v_.begin(), a.v_.begin() + a.m_, b.v_.begin());
}

// ---- LatticeIndex -----------------------------------------------------------

LatticeIndex::LatticeIndex(int n) : n_(n) { require_n(n); }

LatticeIndex::LatticeIndex(std::int64_t k1, std::int64_t k2, std::int64_t k3) : n_(1) {
  k_[0] = k1;
  k_[1] = k2;
  k_[2] = k3;
}

LatticeIndex LatticeIndex::from_coords(std::span<const std::int64_t> k) {
  if (k.size() < 3 || k.size() % 2 == 0) {
    throw ContractViolation("LatticeIndex needs 2n+1 entries, got " + std::to_string(k.size()));
  }
  LatticeIndex idx(static_cast<int>(k.size() - 1) / 2);
  std::copy(k.begin(), k.end(), idx.k_.begin());
  return idx;
}

LatticeIndex LatticeIndex::from_coords(std::initializer_list<std::int64_t> k) {
  return from_coords(std::span<const std::int64_t>(k.begin(), k.size()));
}

GroupPoint LatticeIndex::as_point() const {
  GroupPoint p(n_);
  for (int i = 0; i < dim(); ++i) p[i] = static_cast<double>(k_[i]);
  return p;
}

LatticeIndex LatticeIndex::operator-() const {
  LatticeIndex r(n_);
  for (int i = 0; i < dim(); ++i) r.k_[i] = -k_[i];
  return r;
}

bool operator==(const LatticeIndex& a, const LatticeIndex& b) {
  return a.n_ == b.n_ && std::equal(a.k_.begin(), a.k_.begin() + a.dim(), b.k_.begin());
}

bool operator<(const LatticeIndex& a, const LatticeIndex& b) {
  if (a.n_ != b.n_) return a.n_ < b.n_;
  return std::lexicographical_compare(a.k_.begin(), a.k_.begin() + a.dim(), b.k_.begin(),
                                      b.k_.begin() + b.dim());
}

// ---- SmallMatrix ------------------------------------------------------------

SmallMatrix::SmallMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0 || rows > kMaxDim || cols > kMaxDim) {
    throw ContractViolation("SmallMatrix dimensions out of range");
  }
}

SmallMatrix SmallMatrix::identity(int size) {
  SmallMatrix m(size, size);
  for (int i = 0; i < size; ++i) m(i, i) = 1.0;
  return m;
}

SmallMatrix SmallMatrix::transpose() const {
  SmallMatrix t(cols_, rows_);
  for (int r = 0; r < rows_; ++r)
    for (int c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

SmallMatrix operator*(const SmallMatrix& a, const SmallMatrix& b) {
  if (a.cols_ != b.rows_) throw ContractViolation("SmallMatrix product: shape mismatch");
  SmallMatrix p(a.rows_, b.cols_);
  for (int r = 0; r < a.rows_; ++r)
    for (int c = 0; c < b.cols_; ++c) {
      double s = 0.0;
      for (int k = 0; k < a.cols_; ++k) s += a(r, k) * b(k, c);
      p(r, c) = s;
    }
  return p;
}

bool operator==(const SmallMatrix& a, const SmallMatrix& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
  for (int r = 0; r < a.rows_; ++r)
    for (int c = 0; c < a.cols_; ++c)
      if (a(r, c) != b(r, c)) return false;
  return true;
}

double SmallMatrix::determinant() const {
  if (rows_ != cols_) throw ContractViolation("determinant of a non-square matrix");
  SmallMatrix w = *this;
  const int size = rows_;
  double det = 1.0;
  for (int col = 0; col < size; ++col) {
    int pivot = col;
    for (int r = col + 1; r < size; ++r)
      if (std::abs(w(r, col)) > std::abs(w(pivot, col))) pivot = r;
    if (w(pivot, col) == 0.0) return 0.0;
    if (pivot != col) {
      for (int c = 0; c < size; ++c) std::swap(w(pivot, c), w(col, c));
      det = -det;
    }
    det *= w(col, col);
    for (int r = col + 1; r < size; ++r) {
      const double f = w(r, col) / w(col, col);
      for (int c = col; c < size; ++c) w(r, c) -= f * w(col, c);
    }
  }
  return det;
}

HorizontalVector operator*(const SmallMatrix& a, const HorizontalVector& q) {
  if (a.cols() != q.size()) throw ContractViolation("matrix-vector product: shape mismatch");
  HorizontalVector r(a.rows());
  for (int i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * q[j];
    r[i] = s;
  }
  return r;
}

// ---- group structure --------------------------------------------------------

GroupPoint group_mul(const GroupPoint& x, const GroupPoint& y) {
  require_same_n(x.n(), y.n(), "group_mul");
  const int n = x.n();
  GroupPoint r(n);
  double shear = 0.0;
  for (int j = 0; j < n; ++j) {
    r[j] = x.x1(j) + y.x1(j);
    r[n + j] = x.x2(j) + y.x2(j);
    shear += x.x1(j) * y.x2(j) - x.x2(j) * y.x1(j);
  }
  r.x3() = x.x3() + y.x3() + 0.5 * shear;
  return r;
}

GroupPoint group_inv(const GroupPoint& x) {
  GroupPoint r(x.n());
  for (int i = 0; i < x.dim(); ++i) r[i] = -x[i];
  return r;
}

GroupPoint dilate(double t, const GroupPoint& x) {
  if (!(t > 0.0)) throw DomainError("dilation factor must be positive, got " + std::to_string(t));
  GroupPoint r(x.n());
  for (int i = 0; i < 2 * x.n(); ++i) r[i] = t * x[i];
  r.x3() = t * t * x.x3();
  return r;
}

GroupPoint translate_tau(const GroupPoint& k, const GroupPoint& x) {
  GroupPoint twice_k(k.n());
  for (int i = 0; i < k.dim(); ++i) twice_k[i] = 2.0 * k[i];
  return group_mul(twice_k, x);
}

GroupPoint translate_tau(const LatticeIndex& k, const GroupPoint& x) {
  return translate_tau(k.as_point(), x);
}

LatticeIndex compose_translations(const LatticeIndex& k, const LatticeIndex& h) {
  require_same_n(k.n(), h.n(), "compose_translations");
  const int n = k.n();
  LatticeIndex z(n);
  std::int64_t mixed = 0;
  for (int j = 0; j < n; ++j) {
    z[j] = k[j] + h[j];
    z[n + j] = k[n + j] + h[n + j];
    mixed += k[j] * h[n + j] - k[n + j] * h[j];
  }
  z[2 * n] = k[2 * n] + h[2 * n] + mixed;
  return z;
}

SmallMatrix sigma(const GroupPoint& x) {
  const int n = x.n();
  SmallMatrix s(2 * n + 1, 2 * n);
  for (int j = 0; j < n; ++j) {
    s(j, j) = 1.0;
    s(n + j, n + j) = 1.0;
    s(2 * n, j) = -0.5 * x.x2(j);
    s(2 * n, n + j) = 0.5 * x.x1(j);
  }
  return s;
}

SmallMatrix sigma_ext(const GroupPoint& x) {
  const int n = x.n();
  const SmallMatrix s = sigma(x);
  SmallMatrix e(2 * n + 1, 2 * n + 1);
  for (int r = 0; r < 2 * n + 1; ++r)
    for (int c = 0; c < 2 * n; ++c) e(r, c) = s(r, c);
  e(2 * n, 2 * n) = 1.0;
  return e;
}

HorizontalVector project_horizontal(const GroupPoint& x) {
  HorizontalVector q(2 * x.n());
  for (int i = 0; i < 2 * x.n(); ++i) q[i] = x[i];
  return q;
}

LatticeIndex tile_index(const GroupPoint& x) {
  const int n = x.n();
  LatticeIndex k(n);
  // Horizontal components first: the shear of the third coordinate depends on
  // them only. The floor of the halved value can round across an integer, so
  // the semiopen convention is settled on the pulled-back value itself.
  for (int i = 0; i < 2 * n; ++i) {
    std::int64_t ki = floor_to_int((x[i] + 1.0) * 0.5);
    const double y = x[i] - 2.0 * static_cast<double>(ki);
    if (y >= 1.0) {
      ++ki;
    } else if (y < -1.0) {
      --ki;
    }
    k[i] = ki;
  }
  // tau_k^{-1}(x) = (-2k) * x has third coordinate x3 - 2 k3 + (k2.x1 - k1.x2).
  double shear = 0.0;
  for (int j = 0; j < n; ++j) {
    shear += static_cast<double>(k[n + j]) * x.x1(j) - static_cast<double>(k[j]) * x.x2(j);
  }
  k[2 * n] = floor_to_int((x.x3() + shear + 1.0) * 0.5);
  for (int attempt = 0; attempt < 4; ++attempt) {
    const double y3 = translate_tau(-k, x).x3();
    if (y3 >= 1.0) {
      ++k[2 * n];
    } else if (y3 < -1.0) {
      --k[2 * n];
    } else {
      break;
    }
  }
  return k;
}

LatticeIndex tile_index_scaled(double t, const GroupPoint& x) {
  return tile_index(dilate(1.0 / t, x));
}

bool in_unit_cell(const GroupPoint& x, double t) {
  for (int i = 0; i < 2 * x.n(); ++i)
    if (!(x[i] >= -t && x[i] < t)) return false;
  const double v = t * t;
  return x.x3() >= -v && x.x3() < v;
}

double homogeneous_norm(const GroupPoint& x) {
  double r2 = 0.0;
  for (int i = 0; i < 2 * x.n(); ++i) r2 += x[i] * x[i];
  return std::pow(r2 * r2 + x.x3() * x.x3(), 0.25);
}

double homogeneous_distance(const GroupPoint& x, const GroupPoint& y) {
  return homogeneous_norm(group_mul(group_inv(y), x));
}

}  // namespace hhomog
