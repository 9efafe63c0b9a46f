#pragma once

// Finite-difference discretisation of boxes in H^n.
//
// A grid samples a closed box [c - w_h, c + w_h]^{2n} x [c3 - w_v, c3 + w_v] at
// uniform spacing along each axis. Scalar fields live on nodes; horizontal
// gradients live on cells. The cell stencil averages the forward difference
// over the 2^(N-1) edges parallel to each axis and freezes the shear
// coefficients of X_i at the cell centre, which makes the mean horizontal
// gradient depend on boundary values only.

#include <cstddef>
#include <iosfwd>
#include <span>
#include <variant>
#include <vector>

#include "hhomog/heisenberg.hpp"

namespace hhomog {

class AnisoGrid {
 public:
  /// Grid of delta_t([-1,1]^N) with M subdivisions per unit horizontal length.
  /// Horizontal axes get 2tM intervals (must be integral), the vertical axis
  /// ceil(2t^2 M) intervals with the spacing stretched to fit the box exactly.
  static AnisoGrid build(double t, int M, int n);

  /// Generic box with its own centre, half-widths and interval counts.
  static AnisoGrid box(const GroupPoint& center, double half_horizontal, double half_vertical,
                       int intervals_horizontal, int intervals_vertical);

  int n() const { return n_; }
  int dim() const { return 2 * n_ + 1; }
  int m() const { return 2 * n_; }
  int vertical_axis() const { return 2 * n_; }

  /// Dilation scale and resolution the grid was built with (box(): t = 0, M = 0).
  double t() const { return t_; }
  int M() const { return M_; }

  int intervals(int axis) const { return axis == vertical_axis() ? iv_ : ih_; }
  int nodes_along(int axis) const { return intervals(axis) + 1; }
  double spacing(int axis) const { return axis == vertical_axis() ? hv_ : hh_; }
  double lower(int axis) const { return lower_[axis]; }
  double upper(int axis) const;
  double half_width(int axis) const { return axis == vertical_axis() ? wv_ : wh_; }

  double node_coord(int axis, int i) const { return lower_[axis] + i * spacing(axis); }
  double cell_center_coord(int axis, int i) const {
    return lower_[axis] + (i + 0.5) * spacing(axis);
  }

  std::size_t num_nodes() const { return num_nodes_; }
  std::size_t num_cells() const { return num_cells_; }
  std::size_t num_interior_nodes() const;

  double cell_volume() const;
  /// Exact box volume (2 w_h)^{2n} (2 w_v).
  double volume() const;

  std::size_t node_stride(int axis) const { return node_stride_[axis]; }
  std::size_t cell_stride(int axis) const { return cell_stride_[axis]; }

  /// Node multi-index along `axis`.
  int node_axis_index(std::size_t node, int axis) const {
    return static_cast<int>((node / node_stride_[axis]) % nodes_along(axis));
  }
  int cell_axis_index(std::size_t cell, int axis) const {
    return static_cast<int>((cell / cell_stride_[axis]) % intervals(axis));
  }

  bool is_boundary_node(std::size_t node) const;
  GroupPoint node_point(std::size_t node) const;
  GroupPoint cell_center(std::size_t cell) const;

  /// Index of the lowest-corner node of a cell.
  std::size_t cell_base_node(std::size_t cell) const;
  /// Offsets (relative to the base node) of the 2^N corners; bit a of the
  /// corner number selects the upper node along axis a.
  const std::vector<std::size_t>& corner_offsets() const { return corner_offsets_; }

  friend bool operator==(const AnisoGrid& a, const AnisoGrid& b);

 private:
  AnisoGrid(const GroupPoint& center, double wh, double wv, int ih, int iv);

  int n_;
  double t_ = 0.0;
  int M_ = 0;
  double wh_, wv_;
  int ih_, iv_;
  double hh_, hv_;
  std::array<double, kMaxDim> lower_{};
  std::array<std::size_t, kMaxDim> node_stride_{};
  std::array<std::size_t, kMaxDim> cell_stride_{};
  std::size_t num_nodes_ = 0;
  std::size_t num_cells_ = 0;
  std::vector<std::size_t> corner_offsets_;
};

/// Convenience alias of AnisoGrid::build.
AnisoGrid build_grid(double t, int M, int n);

/// Node-valued function on a grid.
struct ScalarField {
  AnisoGrid grid;
  std::vector<double> values;

  explicit ScalarField(AnisoGrid g);
  ScalarField(AnisoGrid g, std::vector<double> v);
};

/// Cell-valued horizontal gradient, m values per cell.
struct HGradField {
  AnisoGrid grid;
  std::vector<double> values;

  HorizontalVector at(std::size_t cell) const;
};

struct HAffineData {
  HorizontalVector q;
  double a = 0.0;
};

/// Trace values indexed by node; interior entries are ignored.
struct ExplicitTrace {
  std::vector<double> values;
};

struct BoundaryData {
  std::variant<HAffineData, ExplicitTrace> kind;

  static BoundaryData h_affine(const HorizontalVector& q, double a = 0.0) {
    return BoundaryData{HAffineData{q, a}};
  }
  static BoundaryData explicit_trace(std::vector<double> values) {
    return BoundaryData{ExplicitTrace{std::move(values)}};
  }

  bool is_h_affine() const { return std::holds_alternative<HAffineData>(kind); }
  /// Trace value at a (boundary) node of `grid`.
  double value_at(const AnisoGrid& grid, std::size_t node) const;
};

/// Cell-gradient stencil. Precomputes the per-corner weights of the axis
/// differences; evaluation is allocation-free.
class HGradStencil {
 public:
  explicit HGradStencil(const AnisoGrid& grid);

  int corners() const { return corners_; }
  /// Weight of corner b in the averaged difference along `axis`.
  double axis_weight(int axis, int b) const { return w_[axis * corners_ + b]; }

  /// Horizontal gradient of nodal values `u` on `cell`.
  void apply(std::span<const double> u, std::size_t cell, std::span<double> out) const;

  /// Dense m x 2^N matrix G_c with (G_c u_corners) = horizontal gradient on the cell.
  void cell_matrix(std::size_t cell, std::span<double> out) const;

  const AnisoGrid& grid() const { return grid_; }

 private:
  AnisoGrid grid_;
  int corners_;
  std::vector<double> w_;
};

HorizontalVector h_gradient_on_cell(const ScalarField& u, std::size_t cell);
HGradField discrete_h_gradient(const ScalarField& u);

/// sum_c g_c * |cell|.
double integrate_cells(std::span<const double> g, const AnisoGrid& grid);

/// (1/|A|) sum_c grad_X u(c) |cell|. Checks that u carries the trace of `bd`.
HorizontalVector mean_h_gradient(const ScalarField& u, const BoundaryData& bd);

/// Overwrites boundary nodes with the trace of `bd`.
ScalarField apply_boundary(ScalarField u, const BoundaryData& bd);

/// The field x -> q . pi_m(x) + a sampled on every node.
ScalarField h_affine_field(const AnisoGrid& grid, const HorizontalVector& q, double a = 0.0);

/// Debug dump: a '#' header with n, t, M and the axis sizes, then one CSV row
/// per node (coordinates, value) in row-major order.
void write_field_csv(const ScalarField& u, std::ostream& os);

}  // namespace hhomog
