#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ebpttn/lattice.hpp"

namespace ebpttn {

/// Real amplitudes over the full 2^n basis; bit k of the index is site k (1 = down).
class Wavefunction {
 public:
  Wavefunction() = default;
  Wavefunction(int n_sites, std::vector<double> amplitudes);

  int n_sites() const { return n_sites_; }
  std::size_t dim() const { return amplitudes_.size(); }
  const std::vector<double>& amplitudes() const { return amplitudes_; }
  double operator[](std::size_t k) const { return amplitudes_[k]; }

  double norm() const;
  void normalize();

  /// Product state with the given down-spin pattern.
  static Wavefunction basis_state(int n_sites, std::uint64_t index);

 private:
  int n_sites_ = 0;
  std::vector<double> amplitudes_;
};

/// Binary dump: "EBPWAVE1", u32 n_sites, u32 reserved, then 2^n little-endian f64.
void write_wavefunction(std::ostream& os, const Wavefunction& psi);
Wavefunction read_wavefunction(std::istream& is);

struct GroundStateResult {
  double energy = 0.0;
  Wavefunction wavefunction;
  double residual = 0.0;
  double gap_estimate = 0.0;
  int matvecs = 0;
};

inline constexpr std::uint64_t kDefaultLanczosSeed = 20220817;

/// Lowest state of the S^z = 0 sector by Lanczos. The wavefunction is
/// embedded into the full basis with its largest-magnitude amplitude positive.
GroundStateResult ground_state(const BondList& bonds, int n_sites,
                               std::uint64_t seed = kDefaultLanczosSeed);

/// <psi|H|psi> evaluated matrix free in the full basis.
double expectation(const BondList& bonds, const Wavefunction& psi);

}  // namespace ebpttn
