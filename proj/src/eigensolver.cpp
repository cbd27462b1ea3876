#include "ebpttn/eigensolver.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include "ebpttn/lanczos.hpp"

namespace ebpttn {

static_assert(std::endian::native == std::endian::little,
              "wavefunction dumps assume a little-endian host");

Wavefunction::Wavefunction(int n_sites, std::vector<double> amplitudes)
    : n_sites_(n_sites), amplitudes_(std::move(amplitudes)) {
  if (n_sites < 1 || n_sites > 24) throw ConfigError("wavefunction supports 1..24 sites");
  if (amplitudes_.size() != (std::size_t{1} << n_sites))
    throw ConfigError("wavefunction length must be 2^n_sites");
}

double Wavefunction::norm() const {
  return std::sqrt(std::inner_product(amplitudes_.begin(), amplitudes_.end(),
                                      amplitudes_.begin(), 0.0));
}

void Wavefunction::normalize() {
  const double n = norm();
  if (!(n > 0.0)) throw NumericalError("cannot normalize a zero wavefunction");
  for (double& a : amplitudes_) a /= n;
}

Wavefunction Wavefunction::basis_state(int n_sites, std::uint64_t index) {
  std::vector<double> amp(std::size_t{1} << n_sites, 0.0);
  amp.at(index) = 1.0;
  return {n_sites, std::move(amp)};
}

namespace {
constexpr std::array<char, 8> kMagic = {'E', 'B', 'P', 'W', 'A', 'V', 'E', '1'};
}

void write_wavefunction(std::ostream& os, const Wavefunction& psi) {
  os.write(kMagic.data(), kMagic.size());
  const std::uint32_t header[2] = {static_cast<std::uint32_t>(psi.n_sites()), 0u};
  os.write(reinterpret_cast<const char*>(header), sizeof(header));
  os.write(reinterpret_cast<const char*>(psi.amplitudes().data()),
           static_cast<std::streamsize>(psi.dim() * sizeof(double)));
  if (!os) throw ConfigError("failed to write wavefunction");
}

Wavefunction read_wavefunction(std::istream& is) {
  std::array<char, 8> magic{};
  is.read(magic.data(), magic.size());
  if (!is || magic != kMagic) throw ConfigError("not an EBPWAVE1 file");
  std::uint32_t header[2] = {0, 0};
  is.read(reinterpret_cast<char*>(header), sizeof(header));
  if (!is || header[0] < 1 || header[0] > 24) throw ConfigError("bad wavefunction header");
  std::vector<double> amp(std::size_t{1} << header[0]);
  is.read(reinterpret_cast<char*>(amp.data()),
          static_cast<std::streamsize>(amp.size() * sizeof(double)));
  if (!is) throw ConfigError("truncated wavefunction file");
  return {static_cast<int>(header[0]), std::move(amp)};
}

GroundStateResult ground_state(const BondList& bonds, int n_sites, std::uint64_t seed) {
  if (n_sites < 2 || n_sites > 16 || n_sites % 2 != 0)
    throw ConfigError("ground_state needs an even number of sites in [2, 16]");
  validate_bonds(bonds, n_sites);

  const SectorBasis basis(n_sites, n_sites / 2);
  const std::size_t dim = basis.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  std::vector<double> start(dim);
  for (double& v : start) v = uni(rng);

  const MatVec apply = [&](std::span<const double> in, std::span<double> out) {
    apply_hamiltonian(bonds, basis, in, out);
  };
  LanczosOptions opts;
  opts.max_krylov = 200;
  opts.max_restarts = 20;
  opts.tolerance = 1e-11;
  const LanczosResult lr = lowest_eigenpair(dim, apply, start, opts, 64);
  if (!lr.converged)
    throw NumericalError("Lanczos did not converge (residual " + std::to_string(lr.residual) + ")",
                         lr.residual);
  if (lr.gap < 1e-10)
    throw NumericalError("near-degenerate ground state; entanglement entropies are ill defined");

  std::vector<double> full(std::size_t{1} << n_sites, 0.0);
  for (std::size_t k = 0; k < dim; ++k) full[basis.state(k)] = lr.vector[k];
  // Largest-magnitude amplitude positive; the first one wins ties.
  const auto it = std::max_element(full.begin(), full.end(), [](double a, double b) {
    return std::abs(a) + 1e-14 < std::abs(b);
  });
  if (*it < 0.0)
    for (double& a : full) a = -a;

  GroundStateResult r;
  r.energy = lr.value;
  r.wavefunction = Wavefunction(n_sites, std::move(full));
  r.wavefunction.normalize();
  r.residual = lr.residual;
  r.gap_estimate = lr.gap;
  r.matvecs = lr.matvecs;
  return r;
}

double expectation(const BondList& bonds, const Wavefunction& psi) {
  std::vector<double> h(psi.dim());
  apply_hamiltonian(bonds, psi.n_sites(), psi.amplitudes(), h);
  return std::inner_product(h.begin(), h.end(), psi.amplitudes().begin(), 0.0);
}

}  // namespace ebpttn
