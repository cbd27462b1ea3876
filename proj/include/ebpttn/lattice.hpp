#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ebpttn/errors.hpp"

namespace ebpttn {

enum class Geometry { chain, square };
enum class Boundary { open, periodic };

std::string to_string(Geometry g);
std::string to_string(Boundary b);
Geometry parse_geometry(const std::string& s);
Boundary parse_boundary(const std::string& s);

/// Spin-1/2 Heisenberg model on a chain or an open square lattice.
/// Square lattices use row-major site numbering: site = y * width + x.
struct LatticeSpec {
  Geometry geometry = Geometry::chain;
  int n_sites = 0;
  int width = 0;   // square only
  int height = 0;  // square only
  Boundary boundary = Boundary::open;
  double coupling = 1.0;

  static LatticeSpec chain(int n, Boundary b, double j = 1.0);
  static LatticeSpec square(int w, int h, double j = 1.0);

  /// Throws ConfigError on an inconsistent description.
  void validate() const;
};

struct Bond {
  int i;
  int j;
  double coupling;
};

using BondList = std::vector<Bond>;

BondList build_bonds(const LatticeSpec& spec);

/// Checks 0 <= i < j < n, no duplicate pairs, every site covered.
void validate_bonds(const BondList& bonds, int n_sites);

/// Basis states with a fixed number of down spins (bit k set = site k down).
class SectorBasis {
 public:
  SectorBasis(int n_sites, int n_down);

  int n_sites() const { return n_sites_; }
  int n_down() const { return n_down_; }
  std::size_t size() const { return states_.size(); }
  std::uint64_t state(std::size_t k) const { return states_[k]; }
  const std::vector<std::uint64_t>& states() const { return states_; }
  /// Position of a full-basis index in the sector, or -1.
  std::int64_t index_of(std::uint64_t s) const { return lookup_[s]; }

 private:
  int n_sites_;
  int n_down_;
  std::vector<std::uint64_t> states_;
  std::vector<std::int64_t> lookup_;
};

/// out = H * in over the full 2^n basis. Matrix free.
void apply_hamiltonian(const BondList& bonds, int n_sites, std::span<const double> in,
                       std::span<double> out);

/// out = H * in restricted to a magnetization sector.
void apply_hamiltonian(const BondList& bonds, const SectorBasis& basis,
                       std::span<const double> in, std::span<double> out);

}  // namespace ebpttn
