#pragma once

// Minimisation of the discrete energy
//   E(u) = sum_cells f(x_c, grad_X u(c)) |cell|
// over the interior nodal values, with the boundary trace held fixed.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hhomog/gridfield.hpp"
#include "hhomog/integrand.hpp"

namespace hhomog {

enum class SolverMethod { Auto, CG, LBFGS, FirstOrder };

std::string to_string(SolverMethod m);
SolverMethod solver_method_from_string(const std::string& s);

struct SolverConfig {
  double tol_rel_energy = 1e-10;
  /// Relative residual (CG) or relative projected-gradient norm (descent).
  double tol_grad = 1e-8;
  int max_iter = 100000;
  SolverMethod method = SolverMethod::Auto;
  double tikhonov = 0.0;
  /// Re-solve from a perturbed start and compare energies.
  bool kernel_probe = false;
  std::uint64_t probe_seed = 0x5eed;
  bool record_history = false;
};

struct CellProblem {
  AnisoGrid grid;
  Integrand integrand;
  BoundaryData boundary;
  SolverConfig config{};
  /// Full nodal start vector; boundary entries are overwritten by the trace.
  std::optional<std::vector<double>> initial_guess{};
};

struct CellSolution {
  ScalarField u;
  double energy = 0.0;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  SolverMethod method = SolverMethod::Auto;
  /// Objective after every accepted step (only when record_history is set).
  std::vector<double> energy_history;
  bool kernel_warning = false;
  double kernel_probe_gap = 0.0;
};

/// Assembled quadratic energy u^T A u for integrands f = q^T K(x) q, stored as
/// a (3^N)-point stencil per interior node. Reusable across boundary data.
class QuadraticSystem {
 public:
  QuadraticSystem(const AnisoGrid& grid, const Integrand& f, double tikhonov = 0.0);

  const AnisoGrid& grid() const { return grid_; }
  std::size_t unknowns() const { return interior_.size(); }
  const std::vector<std::size_t>& interior_nodes() const { return interior_; }

  /// y = A x over interior rows; x and y are full nodal vectors, boundary
  /// entries of y are left untouched.
  void apply(const std::vector<double>& x, std::vector<double>& y) const;
  /// b = -A_IB u_B for the boundary entries of `u`.
  std::vector<double> rhs(const std::vector<double>& u) const;
  double diagonal(std::size_t row) const { return values_[row * stencil_ + center_]; }
  /// Entry of A between two interior nodes (0 if not neighbours).
  double entry(std::size_t row, std::size_t col_node) const;

  /// Jacobi-preconditioned CG on the interior values of `u`. Returns
  /// iterations; sets `residual` to the final relative residual.
  int solve(std::vector<double>& u, double tol, int max_iter, double& residual,
            std::vector<double>* history) const;

 private:
  AnisoGrid grid_;
  int stencil_;
  int center_;
  std::vector<std::ptrdiff_t> offsets_;
  std::vector<std::size_t> interior_;
  std::vector<double> values_;
};

double discrete_energy(const ScalarField& u, const Integrand& f);
double discrete_energy(const ScalarField& u, const Integrand& f, const AnisoGrid& grid);

/// Gradient of discrete_energy with respect to every nodal value.
std::vector<double> discrete_energy_gradient(const ScalarField& u, const Integrand& f);

/// `system` may carry a pre-assembled quadratic system for this grid and integrand.
CellSolution solve_cell(const CellProblem& problem, const QuadraticSystem* system = nullptr);

/// Cell problem on delta_t(Q) with boundary datum l_q.
CellSolution mu_q(const Integrand& f, const HorizontalVector& q, double t, int M, int n,
                  const SolverConfig& cfg = {});

struct TranslationReport {
  bool coefficients_identical = false;
  std::optional<std::size_t> witness_cell;
  double energy = 0.0;
  double energy_translated = 0.0;
  double relative_difference = 0.0;
  bool passed = false;
};

/// Solves the cell problem on delta_t(Q) for f and for f translated by 2z and
/// compares coefficients cell by cell (bitwise) and the two minima.
TranslationReport check_translation_invariance(const Integrand& f, const HorizontalVector& q,
                                               const LatticeIndex& z, double t, int M, int n,
                                               const SolverConfig& cfg = {},
                                               double energy_tolerance = 1e-10);

}  // namespace hhomog
