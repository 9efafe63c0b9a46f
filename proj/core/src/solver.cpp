#include "hhomog/solver.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <random>
#include <sstream>

#include "hhomog/errors.hpp"

namespace hhomog {

std::string to_string(SolverMethod m) {
  switch (m) {
    case SolverMethod::Auto: return "auto";
    case SolverMethod::CG: return "cg";
    case SolverMethod::LBFGS: return "lbfgs";
    case SolverMethod::FirstOrder: return "first_order";
  }
  return "auto";
}

SolverMethod solver_method_from_string(const std::string& s) {
  if (s == "auto") return SolverMethod::Auto;
  if (s == "cg") return SolverMethod::CG;
  if (s == "lbfgs") return SolverMethod::LBFGS;
  if (s == "first_order") return SolverMethod::FirstOrder;
  throw ConfigError("unknown solver method '" + s + "' (expected auto|cg|lbfgs|first_order)");
}

// ---- QuadraticSystem --------------------------------------------------------

QuadraticSystem::QuadraticSystem(const AnisoGrid& grid, const Integrand& f, double tikhonov)
    : grid_(grid) {
  if (!f.is_quadratic()) {
    throw ConfigError("quadratic system requested for non-quadratic integrand '" +
                      f.description() + "'");
  }
  if (f.n() != grid.n()) throw ContractViolation("integrand and grid live on different H^n");
  const int N = grid.dim();
  const int m = grid.m();

  stencil_ = 1;
  for (int a = 0; a < N; ++a) stencil_ *= 3;
  center_ = (stencil_ - 1) / 2;
  offsets_.resize(stencil_);
  for (int o = 0; o < stencil_; ++o) {
    std::ptrdiff_t off = 0;
    int rest = o;
    for (int a = 0; a < N; ++a) {
      const int d = rest % 3 - 1;
      rest /= 3;
      off += d * static_cast<std::ptrdiff_t>(grid.node_stride(a));
    }
    offsets_[o] = off;
  }

  std::vector<std::int64_t> row_of(grid.num_nodes(), -1);
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    if (!grid.is_boundary_node(node)) {
      row_of[node] = static_cast<std::int64_t>(interior_.size());
      interior_.push_back(node);
    }
  }
  values_.assign(interior_.size() * static_cast<std::size_t>(stencil_), 0.0);

  const HGradStencil st(grid);
  const int C = st.corners();
  // Stencil slot of corner b as seen from corner a.
  std::vector<int> slot(static_cast<std::size_t>(C * C));
  for (int a = 0; a < C; ++a)
    for (int b = 0; b < C; ++b) {
      int idx = 0;
      int pow3 = 1;
      for (int ax = 0; ax < N; ++ax) {
        const int d = ((b >> ax) & 1) - ((a >> ax) & 1);
        idx += (d + 1) * pow3;
        pow3 *= 3;
      }
      slot[a * C + b] = idx;
    }

  const double vol = grid.cell_volume();
  const auto& corner = grid.corner_offsets();
  std::vector<double> g(static_cast<std::size_t>(m * C));
  std::vector<double> kg(static_cast<std::size_t>(m * C));
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    st.cell_matrix(c, g);
    const SmallMatrix k = f.quadratic_form(grid.cell_center(c));
    // kg = K G
    for (int i = 0; i < m; ++i)
      for (int b = 0; b < C; ++b) {
        double s = 0.0;
        for (int j = 0; j < m; ++j) s += k(i, j) * g[j * C + b];
        kg[i * C + b] = s;
      }
    const std::size_t base = grid.cell_base_node(c);
    for (int a = 0; a < C; ++a) {
      const std::int64_t row = row_of[base + corner[a]];
      if (row < 0) continue;
      double* rv = &values_[static_cast<std::size_t>(row) * stencil_];
      for (int b = 0; b < C; ++b) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += g[i * C + a] * kg[i * C + b];
        rv[slot[a * C + b]] += vol * s;
      }
    }
  }
  if (tikhonov > 0.0) {
    for (std::size_t r = 0; r < interior_.size(); ++r) values_[r * stencil_ + center_] += tikhonov;
  }
}

void QuadraticSystem::apply(const std::vector<double>& x, std::vector<double>& y) const {
  const std::size_t rows = interior_.size();
  for (std::size_t r = 0; r < rows; ++r) {
    const std::size_t node = interior_[r];
    const double* rv = &values_[r * stencil_];
    double s = 0.0;
    for (int o = 0; o < stencil_; ++o) s += rv[o] * x[node + offsets_[o]];
    y[node] = s;
  }
}

std::vector<double> QuadraticSystem::rhs(const std::vector<double>& u) const {
  std::vector<double> boundary_only = u;
  for (std::size_t node : interior_) boundary_only[node] = 0.0;
  std::vector<double> b(u.size(), 0.0);
  apply(boundary_only, b);
  for (std::size_t node : interior_) b[node] = -b[node];
  return b;
}

double QuadraticSystem::entry(std::size_t row, std::size_t col_node) const {
  const auto diff = static_cast<std::ptrdiff_t>(col_node) - static_cast<std::ptrdiff_t>(interior_[row]);
  for (int o = 0; o < stencil_; ++o)
    if (offsets_[o] == diff) return values_[row * stencil_ + o];
  return 0.0;
}

int QuadraticSystem::solve(std::vector<double>& u, double tol, int max_iter, double& residual,
                           std::vector<double>* history) const {
  const std::size_t total = u.size();
  const std::vector<double> b = rhs(u);
  double bnorm2 = 0.0;
  for (std::size_t node : interior_) bnorm2 += b[node] * b[node];
  const double denom = bnorm2 > 0.0 ? std::sqrt(bnorm2) : 1.0;

  std::vector<double> r(total, 0.0), z(total, 0.0), p(total, 0.0), ap(total, 0.0);
  // r = b - A_II x_I = -(A u)_I.
  apply(u, ap);
  double rz = 0.0;
  double rnorm2 = 0.0;
  for (std::size_t row = 0; row < interior_.size(); ++row) {
    const std::size_t node = interior_[row];
    const double d = diagonal(row);
    if (!(d > 0.0)) {
      std::ostringstream os;
      os << "assembled system has non-positive diagonal " << d << " at node " << node;
      throw SolverError(os.str());
    }
    r[node] = -ap[node];
    z[node] = r[node] / d;
    p[node] = z[node];
    rz += r[node] * z[node];
    rnorm2 += r[node] * r[node];
  }
  residual = std::sqrt(rnorm2) / denom;
  int it = 0;
  while (residual > tol && it < max_iter) {
    apply(p, ap);
    double pap = 0.0;
    double pp = 0.0;
    for (std::size_t node : interior_) {
      pap += p[node] * ap[node];
      pp += p[node] * p[node];
    }
    if (pap <= 0.0) {
      if (pap < -1e-12 * pp * diagonal(0)) {
        std::ostringstream os;
        os << "assembled system is indefinite: p^T A p = " << pap << " at CG iteration " << it
           << " (|p|^2 = " << pp << ")";
        throw SolverError(os.str());
      }
      break;  // search direction in the kernel; nothing left to reduce
    }
    const double alpha = rz / pap;
    double rz_new = 0.0;
    rnorm2 = 0.0;
    for (std::size_t row = 0; row < interior_.size(); ++row) {
      const std::size_t node = interior_[row];
      u[node] += alpha * p[node];
      r[node] -= alpha * ap[node];
      z[node] = r[node] / diagonal(row);
      rz_new += r[node] * z[node];
      rnorm2 += r[node] * r[node];
    }
    if (history && !history->empty()) history->push_back(history->back() - alpha * rz);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t node : interior_) p[node] = z[node] + beta * p[node];
    residual = std::sqrt(rnorm2) / denom;
    ++it;
  }
  return it;
}

// ---- energy -----------------------------------------------------------------

namespace {

double energy_impl(const AnisoGrid& grid, const HGradStencil& st, const Integrand& f,
                   std::span<const double> u, std::vector<double>* grad) {
  const int m = grid.m();
  const int C = st.corners();
  const auto& corner = grid.corner_offsets();
  std::array<double, kMaxHorizontal> gbuf{};
  std::vector<double> gm;
  if (grad) {
    grad->assign(u.size(), 0.0);
    gm.resize(static_cast<std::size_t>(m * C));
  }
  double e = 0.0;
  for (std::size_t c = 0; c < grid.num_cells(); ++c) {
    st.apply(u, c, std::span<double>(gbuf.data(), static_cast<std::size_t>(m)));
    HorizontalVector q(m);
    for (int i = 0; i < m; ++i) q[i] = gbuf[i];
    const GroupPoint xc = grid.cell_center(c);
    e += f(xc, q);
    if (grad) {
      const HorizontalVector df = f.grad_q(xc, q);
      st.cell_matrix(c, gm);
      const std::size_t base = grid.cell_base_node(c);
      for (int b = 0; b < C; ++b) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += gm[i * C + b] * df[i];
        (*grad)[base + corner[b]] += s;
      }
    }
  }
  const double vol = grid.cell_volume();
  if (grad) {
    for (double& v : *grad) v *= vol;
  }
  return e * vol;
}

struct DescentResult {
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

// Shared bookkeeping of the descent methods: energy/gradient over the interior
// unknowns, windowed energy-decrease test and relative gradient norm.
class InteriorProblem {
 public:
  InteriorProblem(const AnisoGrid& grid, const Integrand& f, std::vector<double>& u,
                  double tikhonov)
      : grid_(grid), st_(grid), f_(f), u_(u), tikhonov_(tikhonov) {
    for (std::size_t node = 0; node < grid.num_nodes(); ++node)
      if (!grid.is_boundary_node(node)) interior_.push_back(node);
  }

  std::size_t size() const { return interior_.size(); }

  std::vector<double> gather() const {
    std::vector<double> x(interior_.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = u_[interior_[i]];
    return x;
  }

  double value_grad(const std::vector<double>& x, std::vector<double>* g) {
    for (std::size_t i = 0; i < x.size(); ++i) u_[interior_[i]] = x[i];
    std::vector<double> full;
    double e = energy_impl(grid_, st_, f_, u_, g ? &full : nullptr);
    double reg = 0.0;
    for (double v : x) reg += v * v;
    e += tikhonov_ * reg;
    if (g) {
      g->resize(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) (*g)[i] = full[interior_[i]] + 2.0 * tikhonov_ * x[i];
    }
    return e;
  }

  /// Gradient norm of the boundary-only extension: the natural load scale.
  double load_scale() {
    std::vector<double> zero(interior_.size(), 0.0), g;
    const std::vector<double> keep = gather();
    value_grad(zero, &g);
    for (std::size_t i = 0; i < keep.size(); ++i) u_[interior_[i]] = keep[i];
    return norm(g);
  }

  static double norm(const std::vector<double>& v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
  }

 private:
  const AnisoGrid& grid_;
  HGradStencil st_;
  const Integrand& f_;
  std::vector<double>& u_;
  double tikhonov_;
  std::vector<std::size_t> interior_;
};

constexpr double kArmijo = 1e-4;
constexpr int kWindow = 10;
constexpr int kMaxHalvings = 60;

bool window_converged(const std::deque<double>& energies, double tol) {
  if (energies.size() < 2) return false;
  const double drop = energies.front() - energies.back();
  return drop <= tol * std::max(std::abs(energies.back()), 1e-300);
}

void push_window(std::deque<double>& w, double e) {
  w.push_back(e);
  if (static_cast<int>(w.size()) > kWindow + 1) w.pop_front();
}

DescentResult run_lbfgs(InteriorProblem& prob, const SolverConfig& cfg,
                        std::vector<double>* history) {
  constexpr int kMemory = 10;
  DescentResult res;
  std::vector<double> x = prob.gather();
  std::vector<double> g;
  double e = prob.value_grad(x, &g);
  const double gref = std::max(InteriorProblem::norm(g), prob.load_scale());
  if (history) history->push_back(e);
  res.residual = gref > 0.0 ? InteriorProblem::norm(g) / gref : 0.0;
  if (gref == 0.0 || res.residual == 0.0) {
    res.converged = true;
    return res;
  }
  std::deque<std::vector<double>> S, Y;
  std::deque<double> rho;
  std::deque<double> window{e};
  const std::size_t nvar = x.size();
  std::vector<double> d(nvar), xn(nvar), gn;

  for (int it = 0; it < cfg.max_iter; ++it) {
    // Two-loop recursion.
    d = g;
    std::vector<double> alpha(S.size());
    for (int i = static_cast<int>(S.size()) - 1; i >= 0; --i) {
      alpha[i] = rho[i] * std::inner_product(S[i].begin(), S[i].end(), d.begin(), 0.0);
      for (std::size_t j = 0; j < nvar; ++j) d[j] -= alpha[i] * Y[i][j];
    }
    double gamma = 1.0;
    if (!S.empty()) {
      const auto& s = S.back();
      const auto& y = Y.back();
      gamma = std::inner_product(s.begin(), s.end(), y.begin(), 0.0) /
              std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
    } else {
      gamma = 1.0 / std::max(InteriorProblem::norm(g), 1e-300);
    }
    for (double& v : d) v *= gamma;
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double beta = rho[i] * std::inner_product(Y[i].begin(), Y[i].end(), d.begin(), 0.0);
      for (std::size_t j = 0; j < nvar; ++j) d[j] += S[i][j] * (alpha[i] - beta);
    }
    for (double& v : d) v = -v;
    double slope = std::inner_product(g.begin(), g.end(), d.begin(), 0.0);
    if (!(slope < 0.0)) {
      // Lost descent; fall back to steepest descent and drop the memory.
      S.clear();
      Y.clear();
      rho.clear();
      const double gn2 = InteriorProblem::norm(g);
      for (std::size_t j = 0; j < nvar; ++j) d[j] = -g[j] / gn2;
      slope = -gn2;
    }

    double step = 1.0;
    double en = 0.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      for (std::size_t j = 0; j < nvar; ++j) xn[j] = x[j] + step * d[j];
      en = prob.value_grad(xn, &gn);
      if (en <= e + kArmijo * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      prob.value_grad(x, nullptr);
      res.iterations = it;
      return res;
    }
    std::vector<double> s(nvar), y(nvar);
    for (std::size_t j = 0; j < nvar; ++j) {
      s[j] = xn[j] - x[j];
      y[j] = gn[j] - g[j];
    }
    const double sy = std::inner_product(s.begin(), s.end(), y.begin(), 0.0);
    if (sy > 1e-300) {
      S.push_back(std::move(s));
      Y.push_back(std::move(y));
      rho.push_back(1.0 / sy);
      if (static_cast<int>(S.size()) > kMemory) {
        S.pop_front();
        Y.pop_front();
        rho.pop_front();
      }
    }
    x.swap(xn);
    g.swap(gn);
    e = en;
    if (history) history->push_back(e);
    push_window(window, e);
    res.iterations = it + 1;
    res.residual = InteriorProblem::norm(g) / gref;
    if (res.residual <= cfg.tol_grad && window_converged(window, cfg.tol_rel_energy)) {
      res.converged = true;
      break;
    }
  }
  prob.value_grad(x, nullptr);
  return res;
}

DescentResult run_first_order(InteriorProblem& prob, const SolverConfig& cfg,
                              std::vector<double>* history) {
  DescentResult res;
  std::vector<double> x = prob.gather();
  std::vector<double> g;
  double e = prob.value_grad(x, &g);
  const double gref = std::max(InteriorProblem::norm(g), prob.load_scale());
  if (history) history->push_back(e);
  res.residual = gref > 0.0 ? InteriorProblem::norm(g) / gref : 0.0;
  if (gref == 0.0 || res.residual == 0.0) {
    res.converged = true;
    return res;
  }
  const std::size_t nvar = x.size();
  std::vector<double> y = x, gy = g, xn(nvar), gx;
  double ey = e;
  double momentum = 1.0;
  double step = 1.0 / std::max(InteriorProblem::norm(g), 1e-300);
  std::deque<double> window{e};

  for (int it = 0; it < cfg.max_iter; ++it) {
    const double gy2 = std::inner_product(gy.begin(), gy.end(), gy.begin(), 0.0);
    double en = 0.0;
    bool accepted = false;
    for (int h = 0; h < kMaxHalvings; ++h) {
      for (std::size_t j = 0; j < nvar; ++j) xn[j] = y[j] - step * gy[j];
      en = prob.value_grad(xn, nullptr);
      if (en <= ey - kArmijo * step * gy2) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted || en > e) {
      // Non-monotone step: restart the momentum from the last iterate.
      if (y == x) {
        if (!accepted) break;
      }
      y = x;
      ey = e;
      gy = g;
      momentum = 1.0;
      continue;
    }
    const double mom_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
    const double beta = (momentum - 1.0) / mom_next;
    for (std::size_t j = 0; j < nvar; ++j) y[j] = xn[j] + beta * (xn[j] - x[j]);
    momentum = mom_next;
    x = xn;
    e = prob.value_grad(x, &g);
    ey = prob.value_grad(y, &gy);
    step *= 1.25;
    if (history) history->push_back(e);
    push_window(window, e);
    res.iterations = it + 1;
    res.residual = InteriorProblem::norm(g) / gref;
    if (res.residual <= cfg.tol_grad && window_converged(window, cfg.tol_rel_energy)) {
      res.converged = true;
      break;
    }
  }
  prob.value_grad(x, nullptr);
  return res;
}

std::vector<double> initial_nodal_guess(const CellProblem& p) {
  const AnisoGrid& grid = p.grid;
  std::vector<double> u(grid.num_nodes(), 0.0);
  if (p.initial_guess) {
    if (p.initial_guess->size() != grid.num_nodes()) {
      throw ContractViolation("initial guess size does not match the grid");
    }
    u = *p.initial_guess;
  } else if (const auto* aff = std::get_if<HAffineData>(&p.boundary.kind)) {
    u = h_affine_field(grid, aff->q, aff->a).values;
  } else {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
      if (grid.is_boundary_node(node)) {
        sum += p.boundary.value_at(grid, node);
        ++count;
      }
    }
    std::fill(u.begin(), u.end(), count ? sum / static_cast<double>(count) : 0.0);
  }
  for (std::size_t node = 0; node < grid.num_nodes(); ++node) {
    if (grid.is_boundary_node(node)) u[node] = p.boundary.value_at(grid, node);
  }
  return u;
}

CellSolution solve_once(const CellProblem& p, const QuadraticSystem* system) {
  if (!p.integrand.flags().convex_in_q) {
    throw ConfigError("cell solver requires an integrand convex in q");
  }
  if (p.integrand.n() != p.grid.n()) throw ContractViolation("integrand and grid differ in n");
  const SolverConfig& cfg = p.config;
  if (!(cfg.tol_grad > 0.0) || !(cfg.tol_rel_energy > 0.0) || cfg.max_iter < 0) {
    throw ConfigError("solver tolerances must be positive and max_iter non-negative");
  }
  SolverMethod method = cfg.method;
  if (method == SolverMethod::Auto) {
    method = p.integrand.is_quadratic() ? SolverMethod::CG : SolverMethod::LBFGS;
  }
  if (method == SolverMethod::CG && !p.integrand.is_quadratic()) {
    throw ConfigError("method=cg requires a quadratic integrand (power alpha=2 or matrix_p p=2)");
  }

  CellSolution sol{ScalarField(p.grid, initial_nodal_guess(p)), 0.0, 0, 0.0, false,
                   SolverMethod::Auto, {}, false, 0.0};
  sol.method = method;
  std::vector<double>* hist = cfg.record_history ? &sol.energy_history : nullptr;

  if (method == SolverMethod::CG) {
    std::optional<QuadraticSystem> local;
    if (!system || !(system->grid() == p.grid)) {
      local.emplace(p.grid, p.integrand, cfg.tikhonov);
      system = &*local;
    }
    if (hist) hist->push_back(discrete_energy(sol.u, p.integrand));
    sol.iterations = system->solve(sol.u.values, cfg.tol_grad, cfg.max_iter, sol.residual, hist);
    sol.converged = sol.residual <= cfg.tol_grad;
  } else {
    InteriorProblem prob(p.grid, p.integrand, sol.u.values, cfg.tikhonov);
    const DescentResult r = method == SolverMethod::LBFGS ? run_lbfgs(prob, cfg, hist)
                                                          : run_first_order(prob, cfg, hist);
    sol.iterations = r.iterations;
    sol.residual = r.residual;
    sol.converged = r.converged;
  }
  sol.energy = discrete_energy(sol.u, p.integrand);
  return sol;
}

}  // namespace

double discrete_energy(const ScalarField& u, const Integrand& f) {
  return discrete_energy(u, f, u.grid);
}

double discrete_energy(const ScalarField& u, const Integrand& f, const AnisoGrid& grid) {
  if (!(u.grid == grid)) throw ContractViolation("discrete_energy: field lives on another grid");
  if (f.n() != grid.n()) throw ContractViolation("discrete_energy: integrand dimension mismatch");
  const HGradStencil st(grid);
  return energy_impl(grid, st, f, u.values, nullptr);
}

std::vector<double> discrete_energy_gradient(const ScalarField& u, const Integrand& f) {
  const HGradStencil st(u.grid);
  std::vector<double> g;
  energy_impl(u.grid, st, f, u.values, &g);
  return g;
}

CellSolution solve_cell(const CellProblem& problem, const QuadraticSystem* system) {
  CellSolution sol = solve_once(problem, system);
  if (!problem.config.kernel_probe) return sol;

  // Restart from the trace plus a random interior perturbation; a convex
  // problem with a trivial kernel must land on the same minimum.
  CellProblem probe = problem;
  probe.config.kernel_probe = false;
  probe.config.record_history = false;
  std::vector<double> start = sol.u.values;
  double scale = 1.0;
  for (std::size_t node = 0; node < start.size(); ++node) {
    if (problem.grid.is_boundary_node(node)) scale = std::max(scale, std::abs(start[node]));
  }
  std::mt19937_64 rng(problem.config.probe_seed);
  std::uniform_real_distribution<double> unif(-scale, scale);
  for (std::size_t node = 0; node < start.size(); ++node) {
    if (!problem.grid.is_boundary_node(node)) start[node] = unif(rng);
  }
  probe.initial_guess = std::move(start);
  const CellSolution other = solve_once(probe, system);
  sol.kernel_probe_gap = std::abs(other.energy - sol.energy) / std::max(1.0, std::abs(sol.energy));
  sol.kernel_warning = sol.kernel_probe_gap > std::max(1e-8, 100.0 * problem.config.tol_rel_energy);
  return sol;
}

CellSolution mu_q(const Integrand& f, const HorizontalVector& q, double t, int M, int n,
                  const SolverConfig& cfg) {
  if (q.size() != 2 * n) throw ConfigError("q must have 2n components");
  CellProblem p{build_grid(t, M, n), f, BoundaryData::h_affine(q, 0.0), cfg};
  return solve_cell(p);
}

TranslationReport check_translation_invariance(const Integrand& f, const HorizontalVector& q,
                                               const LatticeIndex& z, double t, int M, int n,
                                               const SolverConfig& cfg, double energy_tolerance) {
  if (!f.flags().h_periodic) {
    throw ConfigError("translation invariance check needs an H-periodic integrand");
  }
  GroupPoint shift(n);
  for (int a = 0; a < shift.dim(); ++a) shift[a] = 2.0 * static_cast<double>(z[a]);
  const Integrand g = translate_integrand(f, shift);
  TranslationReport rep;
  const AnisoGrid grid = build_grid(t, M, n);
  const int m = grid.m();
  std::vector<HorizontalVector> probes;
  for (int i = 0; i < m; ++i) {
    HorizontalVector e(m);
    e[i] = 1.0;
    probes.push_back(e);
  }
  probes.push_back(q);
  rep.coefficients_identical = true;
  for (std::size_t c = 0; c < grid.num_cells() && rep.coefficients_identical; ++c) {
    const GroupPoint xc = grid.cell_center(c);
    for (const auto& pr : probes) {
      if (f(xc, pr) != g(xc, pr)) {
        rep.coefficients_identical = false;
        rep.witness_cell = c;
        break;
      }
    }
  }
  const CellSolution a = solve_cell(CellProblem{grid, f, BoundaryData::h_affine(q), cfg});
  const CellSolution b = solve_cell(CellProblem{grid, g, BoundaryData::h_affine(q), cfg});
  rep.energy = a.energy;
  rep.energy_translated = b.energy;
  rep.relative_difference =
      std::abs(a.energy - b.energy) / std::max(std::abs(a.energy), 1e-300);
  if (a.energy == 0.0 && b.energy == 0.0) rep.relative_difference = 0.0;
  rep.passed = rep.coefficients_identical && rep.relative_difference <= energy_tolerance &&
               a.converged && b.converged;
  return rep;
}

}  // namespace hhomog
