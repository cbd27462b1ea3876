#pragma once

// Independent reference implementations used only by the tests.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "ebpttn/eigensolver.hpp"
#include "ebpttn/lattice.hpp"

namespace oracle {

inline Eigen::MatrixXd site_operator(int n, int site, const Eigen::Matrix2d& op) {
  // Kronecker chain with site 0 as the least significant factor.
  Eigen::MatrixXd out = Eigen::MatrixXd::Identity(1, 1);
  for (int k = n - 1; k >= 0; --k) {
    const Eigen::Matrix2d f = k == site ? op : Eigen::Matrix2d::Identity();
    Eigen::MatrixXd next(out.rows() * 2, out.cols() * 2);
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    out = next;
  }
  return out;
}

/// H = sum J (Sz Sz + (S+ S- + S- S+) / 2), assembled term by term.
inline Eigen::MatrixXd dense_hamiltonian(const ebpttn::BondList& bonds, int n) {
  Eigen::Matrix2d sz, sp;
  sz << 0.5, 0.0, 0.0, -0.5;
  sp << 0.0, 1.0, 0.0, 0.0;
  const Eigen::Matrix2d sm = sp.transpose();
  const Eigen::Index dim = Eigen::Index{1} << n;
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& b : bonds) {
    h += b.coupling * site_operator(n, b.i, sz) * site_operator(n, b.j, sz);
    h += 0.5 * b.coupling * site_operator(n, b.i, sp) * site_operator(n, b.j, sm);
    h += 0.5 * b.coupling * site_operator(n, b.i, sm) * site_operator(n, b.j, sp);
  }
  return h;
}

inline std::vector<double> random_vector(std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> v(dim);
  for (double& x : v) x = normal(rng);
  return v;
}

inline ebpttn::Wavefunction random_state(int n, std::uint64_t seed) {
  ebpttn::Wavefunction psi(n, random_vector(std::size_t{1} << n, seed));
  psi.normalize();
  return psi;
}

/// Entropy from the singular values of the reshaped amplitude matrix.
inline double dense_entropy(const ebpttn::Wavefunction& psi, std::uint64_t subset) {
  const int n = psi.n_sites();
  std::vector<int> in, out;
  for (int k = 0; k < n; ++k) (subset >> k & 1u ? in : out).push_back(k);
  Eigen::MatrixXd m(Eigen::Index{1} << in.size(), Eigen::Index{1} << out.size());
  for (std::uint64_t s = 0; s < psi.dim(); ++s) {
    std::uint64_t r = 0, c = 0;
    for (std::size_t k = 0; k < in.size(); ++k) r |= (s >> in[k] & 1u) << k;
    for (std::size_t k = 0; k < out.size(); ++k) c |= (s >> out[k] & 1u) << k;
    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = psi[s];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  double e = 0.0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double p = svd.singularValues()(k) * svd.singularValues()(k);
    if (p > 1e-300) e -= p * std::log(p);
  }
  return e;
}

inline double dense_expectation(const Eigen::MatrixXd& h, const ebpttn::Wavefunction& psi) {
  const Eigen::Map<const Eigen::VectorXd> v(psi.amplitudes().data(),
                                            static_cast<Eigen::Index>(psi.dim()));
  return v.dot(h * v);
}

}  // namespace oracle
