#include "ebpttn/lattice.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <utility>

namespace ebpttn {

std::string to_string(Geometry g) { return g == Geometry::chain ? "chain" : "square"; }
std::string to_string(Boundary b) { return b == Boundary::open ? "open" : "periodic"; }

Geometry parse_geometry(const std::string& s) {
  if (s == "chain") return Geometry::chain;
  if (s == "square") return Geometry::square;
  throw ConfigError("unknown lattice geometry '" + s + "' (expected chain|square)");
}

Boundary parse_boundary(const std::string& s) {
  if (s == "open" || s == "obc") return Boundary::open;
  if (s == "periodic" || s == "pbc") return Boundary::periodic;
  throw ConfigError("unknown boundary '" + s + "' (expected open|periodic)");
}

LatticeSpec LatticeSpec::chain(int n, Boundary b, double j) {
  LatticeSpec s;
  s.geometry = Geometry::chain;
  s.n_sites = n;
  s.boundary = b;
  s.coupling = j;
  return s;
}

LatticeSpec LatticeSpec::square(int w, int h, double j) {
  LatticeSpec s;
  s.geometry = Geometry::square;
  s.n_sites = w * h;
  s.width = w;
  s.height = h;
  s.boundary = Boundary::open;
  s.coupling = j;
  return s;
}

void LatticeSpec::validate() const {
  if (n_sites < 2 || n_sites > 64)
    throw ConfigError("n_sites must lie in [2, 64], got " + std::to_string(n_sites));
  if (geometry == Geometry::chain) {
    if (boundary == Boundary::periodic && n_sites < 3)
      throw ConfigError("periodic chain needs at least 3 sites");
    return;
  }
  if (boundary == Boundary::periodic)
    throw ConfigError("periodic square lattices are not supported");
  if (width < 2 || height < 2)
    throw ConfigError("square lattice needs width >= 2 and height >= 2");
  if (width * height != n_sites)
    throw ConfigError("square lattice: n_sites != width * height");
}

BondList build_bonds(const LatticeSpec& spec) {
  spec.validate();
  BondList bonds;
  const double j = spec.coupling;
  if (spec.geometry == Geometry::chain) {
    for (int i = 0; i + 1 < spec.n_sites; ++i) bonds.push_back({i, i + 1, j});
    if (spec.boundary == Boundary::periodic) bonds.push_back({0, spec.n_sites - 1, j});
    return bonds;
  }
  const int w = spec.width;
  const int h = spec.height;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int s = y * w + x;
      if (x + 1 < w) bonds.push_back({s, s + 1, j});
      if (y + 1 < h) bonds.push_back({s, s + w, j});
    }
  }
  return bonds;
}

void validate_bonds(const BondList& bonds, int n_sites) {
  std::set<std::pair<int, int>> seen;
  std::uint64_t covered = 0;
  for (const auto& b : bonds) {
    if (b.i < 0 || b.i >= b.j || b.j >= n_sites)
      throw ConfigError("bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                        ") violates 0 <= i < j < n");
    if (!seen.emplace(b.i, b.j).second)
      throw ConfigError("duplicate bond (" + std::to_string(b.i) + "," + std::to_string(b.j) +
                        ")");
    covered |= (std::uint64_t{1} << b.i) | (std::uint64_t{1} << b.j);
  }
  const std::uint64_t full =
      n_sites == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_sites) - 1;
  if (covered != full) throw ConfigError("some site is not covered by any bond");
}

SectorBasis::SectorBasis(int n_sites, int n_down) : n_sites_(n_sites), n_down_(n_down) {
  if (n_sites < 1 || n_sites > 24) throw ConfigError("sector basis supports 1..24 sites");
  if (n_down < 0 || n_down > n_sites) throw ConfigError("invalid number of down spins");
  const std::uint64_t dim = std::uint64_t{1} << n_sites;
  lookup_.assign(dim, -1);
  for (std::uint64_t s = 0; s < dim; ++s) {
    if (std::popcount(s) == n_down) {
      lookup_[s] = static_cast<std::int64_t>(states_.size());
      states_.push_back(s);
    }
  }
}

namespace {

// Heisenberg exchange on one basis state: diagonal +-J/4, J/2 for the flipped pair.
template <class Emit>
void bond_action(std::uint64_t s, const Bond& b, double amp, Emit&& emit, double& diag) {
  const std::uint64_t mi = std::uint64_t{1} << b.i;
  const std::uint64_t mj = std::uint64_t{1} << b.j;
  const bool same = ((s & mi) != 0) == ((s & mj) != 0);
  if (same) {
    diag += 0.25 * b.coupling;
  } else {
    diag -= 0.25 * b.coupling;
    emit(s ^ mi ^ mj, 0.5 * b.coupling * amp);
  }
}

}  // namespace

void apply_hamiltonian(const BondList& bonds, int n_sites, std::span<const double> in,
                       std::span<double> out) {
  const std::size_t dim = std::size_t{1} << n_sites;
  if (in.size() != dim || out.size() != dim)
    throw ConfigError("apply_hamiltonian: vector length does not match 2^n_sites");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::uint64_t s = 0; s < dim; ++s) {
    const double a = in[s];
    if (a == 0.0) continue;
    double diag = 0.0;
    for (const auto& b : bonds)
      bond_action(s, b, a, [&](std::uint64_t t, double v) { out[t] += v; }, diag);
    out[s] += diag * a;
  }
}

void apply_hamiltonian(const BondList& bonds, const SectorBasis& basis,
                       std::span<const double> in, std::span<double> out) {
  const std::size_t dim = basis.size();
  if (in.size() != dim || out.size() != dim)
    throw ConfigError("apply_hamiltonian: vector length does not match sector dimension");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    const double a = in[k];
    if (a == 0.0) continue;
    const std::uint64_t s = basis.state(k);
    double diag = 0.0;
    for (const auto& b : bonds)
      bond_action(
          s, b, a,
          [&](std::uint64_t t, double v) { out[static_cast<std::size_t>(basis.index_of(t))] += v; },
          diag);
    out[k] += diag * a;
  }
}

}  // namespace ebpttn
