#include "ebpttn/lanczos.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "ebpttn/errors.hpp"

namespace ebpttn {

namespace {

using Eigen::Map;
using Eigen::VectorXd;

double residual_norm(const MatVec& apply, const VectorXd& x, double theta, int& matvecs) {
  VectorXd hx(x.size());
  apply({x.data(), static_cast<std::size_t>(x.size())},
        {hx.data(), static_cast<std::size_t>(hx.size())});
  ++matvecs;
  return (hx - theta * x).norm();
}

}  // namespace

LanczosResult lanczos_lowest(std::size_t dim, const MatVec& apply, std::span<const double> start,
                             const LanczosOptions& options) {
  if (start.size() != dim) throw ConfigError("lanczos: start vector has wrong length");
  LanczosResult result;
  VectorXd x = Map<const VectorXd>(start.data(), static_cast<Eigen::Index>(dim));
  double nrm = x.norm();
  if (!(nrm > 0.0)) throw ConfigError("lanczos: zero start vector");
  x /= nrm;

  const int kmax = static_cast<int>(std::min<std::size_t>(options.max_krylov, dim));
  int best_krylov = 0;
  double theta = 0.0;
  for (int cycle = 0; cycle < options.max_restarts; ++cycle) {
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(dim), kmax);
    std::vector<double> alpha;
    std::vector<double> beta;
    basis.col(0) = x;
    VectorXd w(static_cast<Eigen::Index>(dim));
    int m = 0;
    for (int j = 0; j < kmax; ++j) {
      apply({basis.col(j).data(), dim}, {w.data(), dim});
      ++result.matvecs;
      const double a = basis.col(j).dot(w);
      alpha.push_back(a);
      m = j + 1;
      // Full reorthogonalization, applied twice for stability.
      for (int pass = 0; pass < 2; ++pass) {
        const VectorXd coeff = basis.leftCols(m).transpose() * w;
        w.noalias() -= basis.leftCols(m) * coeff;
      }
      const double b = w.norm();
      if (j + 1 == kmax) break;
      if (b < 1e-13 * std::max(1.0, std::abs(a))) break;  // invariant subspace
      beta.push_back(b);
      basis.col(j + 1) = w / b;
    }

    Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(m, m);
    for (int j = 0; j < m; ++j) tri(j, j) = alpha[j];
    for (int j = 0; j + 1 < m; ++j) tri(j, j + 1) = tri(j + 1, j) = beta[j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
    theta = es.eigenvalues()(0);
    if (m > best_krylov && m >= 2) {
      best_krylov = m;
      result.gap = es.eigenvalues()(1) - es.eigenvalues()(0);
    }
    x = basis.leftCols(m) * es.eigenvectors().col(0);
    x.normalize();

    result.residual = residual_norm(apply, x, theta, result.matvecs);
    if (!std::isfinite(result.residual)) break;
    if (result.residual <= options.tolerance) {
      result.converged = true;
      break;
    }
  }
  if (best_krylov < 2) result.gap = std::numeric_limits<double>::infinity();
  result.value = theta;
  result.vector.assign(x.data(), x.data() + x.size());
  return result;
}

LanczosResult lowest_eigenpair(std::size_t dim, const MatVec& apply,
                               std::span<const double> start, const LanczosOptions& options,
                               std::size_t dense_limit) {
  if (dim > dense_limit) return lanczos_lowest(dim, apply, start, options);
  const auto n = static_cast<Eigen::Index>(dim);
  Eigen::MatrixXd h(n, n);
  VectorXd e = VectorXd::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    e.setZero();
    e(k) = 1.0;
    apply({e.data(), dim}, {h.col(k).data(), dim});
  }
  h = 0.5 * (h + h.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  LanczosResult result;
  result.value = es.eigenvalues()(0);
  result.gap = n > 1 ? es.eigenvalues()(1) - es.eigenvalues()(0)
                     : std::numeric_limits<double>::infinity();
  VectorXd x = es.eigenvectors().col(0);
  // Align with the start vector so repeated solves keep a consistent sign.
  if (Map<const VectorXd>(start.data(), n).dot(x) < 0.0) x = -x;
  result.vector.assign(x.data(), x.data() + n);
  result.residual = (h * x - result.value * x).norm();
  result.converged = true;
  result.matvecs = static_cast<int>(n);
  return result;
}

}  // namespace ebpttn
