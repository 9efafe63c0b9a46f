#pragma once

// Dense reference solver for quadratic cell problems. The Hessian and linear
// term are recovered by polarization of discrete_energy, so the oracle shares
// no assembly code with the iterative path.

#include <vector>

#include <hhomog/solver.hpp>

namespace hhomog::testing {

struct DenseSolution {
  double energy = 0.0;
  std::vector<double> u;  ///< full nodal vector
  double min_eigenvalue = 0.0;
};

DenseSolution dense_quadratic_solve(const AnisoGrid& grid, const Integrand& f,
                                    const BoundaryData& bd);

}  // namespace hhomog::testing
