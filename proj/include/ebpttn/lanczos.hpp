#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace ebpttn {

using MatVec = std::function<void(std::span<const double>, std::span<double>)>;

struct LanczosOptions {
  int max_krylov = 200;    // Krylov dimension per cycle
  int max_restarts = 50;   // cycles, each restarted from the current Ritz vector
  double tolerance = 1e-11;  // on ||H x - theta x||
};

struct LanczosResult {
  double value = 0.0;
  std::vector<double> vector;  // normalized
  double residual = 0.0;
  double gap = 0.0;  // second minus first Ritz value of the largest Krylov space seen
  bool converged = false;
  int matvecs = 0;
};

/// Lowest eigenpair of a real symmetric operator. Lanczos with full
/// reorthogonalization, restarted from the Ritz vector until the residual
/// drops below the tolerance. `start` need not be normalized but must be nonzero.
LanczosResult lanczos_lowest(std::size_t dim, const MatVec& apply, std::span<const double> start,
                             const LanczosOptions& options = {});

/// Lowest eigenpair, dense for small dimensions and Lanczos otherwise.
LanczosResult lowest_eigenpair(std::size_t dim, const MatVec& apply,
                               std::span<const double> start, const LanczosOptions& options = {},
                               std::size_t dense_limit = 64);

}  // namespace ebpttn
