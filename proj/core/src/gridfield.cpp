#include "hhomog/gridfield.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <string>

#include "hhomog/errors.hpp"

namespace hhomog {

namespace {

bool near_integer(double v) { return std::abs(v - std::round(v)) <= 1e-9 * std::max(1.0, v); }

constexpr double kTraceTolerance = 1e-12;

}  // namespace

// ---- AnisoGrid --------------------------------------------------------------

AnisoGrid::AnisoGrid(const GroupPoint& center, double wh, double wv, int ih, int iv)
    : n_(center.n()), wh_(wh), wv_(wv), ih_(ih), iv_(iv) {
  if (!(wh > 0.0) || !(wv > 0.0)) throw ConfigError("grid half-widths must be positive");
  if (ih < 1 || iv < 1) throw ConfigError("grid needs at least one interval per axis");
  hh_ = 2.0 * wh / ih;
  hv_ = 2.0 * wv / iv;
  const int N = dim();
  for (int a = 0; a < N; ++a) lower_[a] = center[a] - (a == vertical_axis() ? wv : wh);

  std::size_t ns = 1;
  std::size_t cs = 1;
  for (int a = N - 1; a >= 0; --a) {
    node_stride_[a] = ns;
    cell_stride_[a] = cs;
    ns *= static_cast<std::size_t>(nodes_along(a));
    cs *= static_cast<std::size_t>(intervals(a));
  }
  num_nodes_ = ns;
  num_cells_ = cs;

  corner_offsets_.resize(std::size_t{1} << N);
  for (std::size_t b = 0; b < corner_offsets_.size(); ++b) {
    std::size_t off = 0;
    for (int a = 0; a < N; ++a)
      if (b & (std::size_t{1} << a)) off += node_stride_[a];
    corner_offsets_[b] = off;
  }
}

AnisoGrid AnisoGrid::build(double t, int M, int n) {
  if (!(t > 0.0)) throw ConfigError("grid scale t must be positive, got " + std::to_string(t));
  if (M < 1) throw ConfigError("grid resolution M must be >= 1, got " + std::to_string(M));
  const double horiz = 2.0 * t * M;
  if (!near_integer(horiz)) {
    int valid = 0;
    for (int cand = 1; cand <= 1000000; ++cand) {
      if (near_integer(2.0 * t * cand)) {
        valid = cand;
        break;
      }
    }
    std::string msg = "2*t*M = " + std::to_string(horiz) + " is not an integer for t=" +
                      std::to_string(t) + ", M=" + std::to_string(M);
    msg += valid > 0 ? "; smallest valid M is " + std::to_string(valid)
                     : "; no M <= 1e6 makes it integral";
    throw ConfigError(msg);
  }
  const double vert = 2.0 * t * t * M;
  const int iv = near_integer(vert) ? static_cast<int>(std::llround(vert))
                                    : static_cast<int>(std::ceil(vert));
  AnisoGrid g(GroupPoint(GroupParams::checked(n).n), t, t * t,
              static_cast<int>(std::llround(horiz)), iv);
  g.t_ = t;
  g.M_ = M;
  return g;
}

AnisoGrid AnisoGrid::box(const GroupPoint& center, double half_horizontal, double half_vertical,
                         int intervals_horizontal, int intervals_vertical) {
  return AnisoGrid(center, half_horizontal, half_vertical, intervals_horizontal,
                   intervals_vertical);
}

double AnisoGrid::upper(int axis) const { return lower_[axis] + 2.0 * half_width(axis); }

std::size_t AnisoGrid::num_interior_nodes() const {
  std::size_t count = 1;
  for (int a = 0; a < dim(); ++a) count *= static_cast<std::size_t>(std::max(0, intervals(a) - 1));
  return count;
}

double AnisoGrid::cell_volume() const {
  double v = hv_;
  for (int a = 0; a < m(); ++a) v *= hh_;
  return v;
}

double AnisoGrid::volume() const {
  double v = 2.0 * wv_;
  for (int a = 0; a < m(); ++a) v *= 2.0 * wh_;
  return v;
}

bool AnisoGrid::is_boundary_node(std::size_t node) const {
  for (int a = 0; a < dim(); ++a) {
    const int i = node_axis_index(node, a);
    if (i == 0 || i == intervals(a)) return true;
  }
  return false;
}

GroupPoint AnisoGrid::node_point(std::size_t node) const {
  GroupPoint p(n_);
  for (int a = 0; a < dim(); ++a) p[a] = node_coord(a, node_axis_index(node, a));
  return p;
}

GroupPoint AnisoGrid::cell_center(std::size_t cell) const {
  GroupPoint p(n_);
  for (int a = 0; a < dim(); ++a) p[a] = cell_center_coord(a, cell_axis_index(cell, a));
  return p;
}

std::size_t AnisoGrid::cell_base_node(std::size_t cell) const {
  std::size_t node = 0;
  for (int a = 0; a < dim(); ++a) {
    node += static_cast<std::size_t>(cell_axis_index(cell, a)) * node_stride_[a];
  }
  return node;
}

bool operator==(const AnisoGrid& a, const AnisoGrid& b) {
  return a.n_ == b.n_ && a.wh_ == b.wh_ && a.wv_ == b.wv_ && a.ih_ == b.ih_ && a.iv_ == b.iv_ &&
         a.lower_ == b.lower_;
}

AnisoGrid build_grid(double t, int M, int n) { return AnisoGrid::build(t, M, n); }

// ---- fields -----------------------------------------------------------------

ScalarField::ScalarField(AnisoGrid g) : grid(std::move(g)), values(grid.num_nodes(), 0.0) {}

ScalarField::ScalarField(AnisoGrid g, std::vector<double> v)
    : grid(std::move(g)), values(std::move(v)) {
  if (values.size() != grid.num_nodes()) {
    throw ContractViolation("ScalarField: value count " + std::to_string(values.size()) +
                            " does not match node count " + std::to_string(grid.num_nodes()));
  }
}

HorizontalVector HGradField::at(std::size_t cell) const {
  const int m = grid.m();
  return HorizontalVector::from_span(
      std::span<const double>(values).subspan(cell * static_cast<std::size_t>(m), m));
}

double BoundaryData::value_at(const AnisoGrid& grid, std::size_t node) const {
  if (const auto* aff = std::get_if<HAffineData>(&kind)) {
    double v = aff->a;
    for (int i = 0; i < grid.m(); ++i) v += aff->q[i] * grid.node_coord(i, grid.node_axis_index(node, i));
    return v;
  }
  const auto& tr = std::get<ExplicitTrace>(kind);
  if (tr.values.size() != grid.num_nodes()) {
    throw ContractViolation("explicit trace size does not match the grid node count");
  }
  return tr.values[node];
}

// ---- stencil ----------------------------------------------------------------

HGradStencil::HGradStencil(const AnisoGrid& grid)
    : grid_(grid), corners_(1 << grid.dim()), w_(static_cast<std::size_t>(grid.dim() * corners_)) {
  const int N = grid.dim();
  const double edges = static_cast<double>(corners_ / 2);
  for (int a = 0; a < N; ++a) {
    const double scale = 1.0 / (edges * grid.spacing(a));
    for (int b = 0; b < corners_; ++b) w_[a * corners_ + b] = (b & (1 << a)) ? scale : -scale;
  }
}

void HGradStencil::apply(std::span<const double> u, std::size_t cell, std::span<double> out) const {
  const int n = grid_.n();
  const int N = grid_.dim();
  const std::size_t base = grid_.cell_base_node(cell);
  const auto& offs = grid_.corner_offsets();
  std::array<double, kMaxDim> d{};
  for (int b = 0; b < corners_; ++b) {
    const double ub = u[base + offs[b]];
    for (int a = 0; a < N; ++a) d[a] += w_[a * corners_ + b] * ub;
  }
  const double d3 = d[2 * n];
  for (int j = 0; j < n; ++j) {
    const double x1c = grid_.cell_center_coord(j, grid_.cell_axis_index(cell, j));
    const double x2c = grid_.cell_center_coord(n + j, grid_.cell_axis_index(cell, n + j));
    out[j] = d[j] - 0.5 * x2c * d3;
    out[n + j] = d[n + j] + 0.5 * x1c * d3;
  }
}

void HGradStencil::cell_matrix(std::size_t cell, std::span<double> out) const {
  const int n = grid_.n();
  const int v = 2 * n;
  for (int j = 0; j < n; ++j) {
    const double x1c = grid_.cell_center_coord(j, grid_.cell_axis_index(cell, j));
    const double x2c = grid_.cell_center_coord(n + j, grid_.cell_axis_index(cell, n + j));
    for (int b = 0; b < corners_; ++b) {
      out[j * corners_ + b] = axis_weight(j, b) - 0.5 * x2c * axis_weight(v, b);
      out[(n + j) * corners_ + b] = axis_weight(n + j, b) + 0.5 * x1c * axis_weight(v, b);
    }
  }
}

HorizontalVector h_gradient_on_cell(const ScalarField& u, std::size_t cell) {
  HGradStencil st(u.grid);
  HorizontalVector g(u.grid.m());
  std::array<double, kMaxHorizontal> buf{};
  st.apply(u.values, cell, std::span<double>(buf.data(), static_cast<std::size_t>(u.grid.m())));
  for (int i = 0; i < u.grid.m(); ++i) g[i] = buf[i];
  return g;
}

HGradField discrete_h_gradient(const ScalarField& u) {
  const HGradStencil st(u.grid);
  const std::size_t m = static_cast<std::size_t>(u.grid.m());
  HGradField out{u.grid, std::vector<double>(u.grid.num_cells() * m)};
  for (std::size_t c = 0; c < u.grid.num_cells(); ++c) {
    st.apply(u.values, c, std::span<double>(out.values).subspan(c * m, m));
  }
  return out;
}

double integrate_cells(std::span<const double> g, const AnisoGrid& grid) {
  if (g.size() != grid.num_cells()) {
    throw ContractViolation("integrate_cells: one value per cell expected");
  }
  double s = 0.0;
  for (double v : g) s += v;
  return s * grid.cell_volume();
}

HorizontalVector mean_h_gradient(const ScalarField& u, const BoundaryData& bd) {
  const AnisoGrid& grid = u.grid;
  double scale = 1.0;
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    if (!grid.is_boundary_node(node)) continue;
    const double expected = bd.value_at(grid, node);
    scale = std::max(scale, std::abs(expected));
    if (std::abs(u.values[node] - expected) > kTraceTolerance * scale) {
      throw ContractViolation("mean_h_gradient: boundary trace mismatch at node " +
                              std::to_string(node));
    }
  }
  const HGradField g = discrete_h_gradient(u);
  const int m = grid.m();
  HorizontalVector mean(m);
  for (std::size_t c = 0; c < grid.num_cells(); ++c)
    for (int i = 0; i < m; ++i) mean[i] += g.values[c * m + i];
  mean *= grid.cell_volume() / grid.volume();
  return mean;
}

ScalarField apply_boundary(ScalarField u, const BoundaryData& bd) {
  for (std::size_t node = 0; node < u.grid.num_nodes(); ++node) {
    if (u.grid.is_boundary_node(node)) u.values[node] = bd.value_at(u.grid, node);
  }
  return u;
}

ScalarField h_affine_field(const AnisoGrid& grid, const HorizontalVector& q, double a) {
  if (q.size() != grid.m()) throw ContractViolation("h_affine_field: q has the wrong dimension");
  ScalarField u(grid);
  const BoundaryData bd = BoundaryData::h_affine(q, a);
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) u.values[node] = bd.value_at(grid, node);
  return u;
}

void write_field_csv(const ScalarField& u, std::ostream& os) {
  const AnisoGrid& g = u.grid;
  os << "# n=" << g.n() << " t=" << g.t() << " M=" << g.M() << " sizes=";
  for (int a = 0; a < g.dim(); ++a) os << (a ? "x" : "") << g.nodes_along(a);
  os << '\n';
  for (int a = 0; a < g.dim(); ++a) os << 'c' << a << ',';
  os << "value\n";
  os << std::setprecision(17);
  for (std::size_t node = 0; node < g.num_nodes(); ++node) {
    const GroupPoint p = g.node_point(node);
    for (int a = 0; a < g.dim(); ++a) os << p[a] << ',';
    os << u.values[node] << '\n';
  }
}

}  // namespace hhomog
