#pragma once

// Algebra of the Heisenberg group H^n realised on R^(2n+1):
// group law, anisotropic dilations, period-2 left translations, the matrix of
// left-invariant horizontal vector fields and the index of the H-periodic
// tiling by translates of the unit cell Q = [-1,1)^N.
//
// Coordinates are stored as (x1_1..x1_n, x2_1..x2_n, x3). Everything here is a
// closed-form polynomial map on doubles; no tolerances are used internally.

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>

namespace hhomog {

/// Largest supported Heisenberg index. Points live in fixed-size storage so
/// that hot loops never allocate.
inline constexpr int kMaxN = 4;
inline constexpr int kMaxDim = 2 * kMaxN + 1;
inline constexpr int kMaxHorizontal = 2 * kMaxN;

/// Dimension bookkeeping for H^n.
struct GroupParams {
  int n = 1;

  constexpr int N() const { return 2 * n + 1; }     ///< ambient dimension
  constexpr int m() const { return 2 * n; }         ///< horizontal dimension
  constexpr int hdim() const { return 2 * n + 2; }  ///< homogeneous dimension

  static GroupParams checked(int n);
};

class GroupPoint {
 public:
  GroupPoint() : GroupPoint(1) {}
  explicit GroupPoint(int n);

  /// n = 1 shorthand.
  GroupPoint(double x1, double x2, double x3);

  /// Builds a point from its 2n+1 coordinates.
  static GroupPoint from_coords(std::span<const double> coords);
  static GroupPoint from_coords(std::initializer_list<double> coords);

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 1; }

  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  double x1(int j) const { return c_[j]; }
  double x2(int j) const { return c_[n_ + j]; }
  double x3() const { return c_[2 * n_]; }
  double& x3() { return c_[2 * n_]; }

  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim())}; }
  std::span<double> coords() { return {c_.data(), static_cast<std::size_t>(dim())}; }

  bool is_finite() const;

  friend bool operator==(const GroupPoint& a, const GroupPoint& b);

 private:
  int n_;
  std::array<double, kMaxDim> c_{};
};

/// A vector of R^(2n): the range of the horizontal gradient.
class HorizontalVector {
 public:
  HorizontalVector() : HorizontalVector(2) {}
  explicit HorizontalVector(int m);
  HorizontalVector(std::initializer_list<double> q);
  static HorizontalVector from_span(std::span<const double> q);

  int size() const { return m_; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }
  std::span<const double> values() const { return {v_.data(), static_cast<std::size_t>(m_)}; }

  double dot(const HorizontalVector& o) const;
  double norm() const;
  bool is_finite() const;

  HorizontalVector& operator+=(const HorizontalVector& o);
  HorizontalVector& operator-=(const HorizontalVector& o);
  HorizontalVector& operator*=(double s);
  friend HorizontalVector operator+(HorizontalVector a, const HorizontalVector& b) { return a += b; }
  friend HorizontalVector operator-(HorizontalVector a, const HorizontalVector& b) { return a -= b; }
  friend HorizontalVector operator*(double s, HorizontalVector a) { return a *= s; }
  friend HorizontalVector operator-(HorizontalVector a) { return a *= -1.0; }
  friend bool operator==(const HorizontalVector& a, const HorizontalVector& b);

 private:
  int m_;
  std::array<double, kMaxHorizontal> v_{};
};

/// Integer index k in Z^N of a period-2 left translation.
class LatticeIndex {
 public:
  LatticeIndex() : LatticeIndex(1) {}
  explicit LatticeIndex(int n);
  LatticeIndex(std::int64_t k1, std::int64_t k2, std::int64_t k3);
  static LatticeIndex from_coords(std::span<const std::int64_t> k);
  static LatticeIndex from_coords(std::initializer_list<std::int64_t> k);

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 1; }
  std::int64_t& operator[](int i) { return k_[i]; }
  std::int64_t operator[](int i) const { return k_[i]; }
  std::span<const std::int64_t> coords() const { return {k_.data(), static_cast<std::size_t>(dim())}; }

  /// k as a real point of R^N (no scaling).
  GroupPoint as_point() const;
  LatticeIndex operator-() const;

  friend bool operator==(const LatticeIndex& a, const LatticeIndex& b);
  friend bool operator<(const LatticeIndex& a, const LatticeIndex& b);

 private:
  int n_;
  std::array<std::int64_t, kMaxDim> k_{};
};

/// Small dense row-major matrix used for sigma, sigma_ext and quadratic forms.
class SmallMatrix {
 public:
  SmallMatrix() : SmallMatrix(0, 0) {}
  SmallMatrix(int rows, int cols);
  static SmallMatrix identity(int size);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double& operator()(int r, int c) { return a_[r * kMaxDim + c]; }
  double operator()(int r, int c) const { return a_[r * kMaxDim + c]; }

  SmallMatrix transpose() const;
  friend SmallMatrix operator*(const SmallMatrix& a, const SmallMatrix& b);
  friend bool operator==(const SmallMatrix& a, const SmallMatrix& b);

  /// Determinant by partial-pivot elimination (square matrices only).
  double determinant() const;

 private:
  int rows_;
  int cols_;
  std::array<double, kMaxDim * kMaxDim> a_{};
};

HorizontalVector operator*(const SmallMatrix& a, const HorizontalVector& q);

// ---- group structure -------------------------------------------------------

/// x * y = (x1+y1, x2+y2, x3+y3+(x1.y2 - x2.y1)/2).
GroupPoint group_mul(const GroupPoint& x, const GroupPoint& y);
GroupPoint group_inv(const GroupPoint& x);
/// delta_t(x) = (t x1, t x2, t^2 x3); throws DomainError for t <= 0.
GroupPoint dilate(double t, const GroupPoint& x);

/// tau_k(x) = 2k * x.
GroupPoint translate_tau(const LatticeIndex& k, const GroupPoint& x);
GroupPoint translate_tau(const GroupPoint& k, const GroupPoint& x);

/// Index z with tau_k o tau_h = tau_z. For integer k, h the result is integer:
/// z = (k_ + h_, k3 + h3 + k1.h2 - k2.h1).
LatticeIndex compose_translations(const LatticeIndex& k, const LatticeIndex& h);

/// The N x 2n matrix whose columns are X_1(x), ..., X_2n(x).
SmallMatrix sigma(const GroupPoint& x);
/// sigma(x) with X_{2n+1} = e_{2n+1} appended; det == 1.
SmallMatrix sigma_ext(const GroupPoint& x);

/// Projection onto the horizontal coordinates (x1, x2).
HorizontalVector project_horizontal(const GroupPoint& x);

/// Unique k with x in tau_k(Q), Q = [-1,1)^N.
LatticeIndex tile_index(const GroupPoint& x);
/// Index in the dilated tiling {tau_{delta_t(k)}(delta_t(Q))}.
LatticeIndex tile_index_scaled(double t, const GroupPoint& x);

/// True when every coordinate of x lies in the semiopen cell [-1,1)^{2n} x [-1,1),
/// dilated by t when t != 1.
bool in_unit_cell(const GroupPoint& x, double t = 1.0);

/// |x|_h = ((|x1|^2 + |x2|^2)^2 + x3^2)^(1/4).
double homogeneous_norm(const GroupPoint& x);
/// d_h(x, y) = |y^{-1} * x|_h.
double homogeneous_distance(const GroupPoint& x, const GroupPoint& y);

}  // namespace hhomog
