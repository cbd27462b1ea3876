#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "ebpttn/eigensolver.hpp"

namespace ebpttn {

/// Bitmask over sites; bit k set means site k belongs to the set.
using SiteSet = std::uint64_t;

inline SiteSet full_set(int n) {
  return n >= 64 ? ~SiteSet{0} : (SiteSet{1} << n) - 1;
}

/// Von Neumann entropy (nats) of the reduced state on `subset`.
/// Throws ConfigError for empty or full subsets.
double entanglement_entropy(const Wavefunction& psi, SiteSet subset);

/// Entropies of all 2^(n-1) - 1 nontrivial bipartitions. Entries are stored
/// under the representative that contains site 0; lookups accept either side.
class EntropyTable {
 public:
  EntropyTable() = default;
  EntropyTable(int n_sites, std::vector<double> canonical_entries);

  int n_sites() const { return n_sites_; }
  std::size_t size() const { return entries_.size(); }
  bool complete() const;

  /// S(G) = S(complement of G); S(empty) = S(full) = 0.
  double operator()(SiteSet g) const;

  /// Raw storage: entry k belongs to mask (k << 1) | 1.
  const std::vector<double>& canonical_entries() const { return entries_; }

 private:
  int n_sites_ = 0;
  std::vector<double> entries_;
};

/// threads <= 0 means one worker per hardware thread.
EntropyTable entropy_table(const Wavefunction& psi, int threads = 0);

/// S(a) + S(b) - S(a | b). Throws ConfigError unless a, b are disjoint and nonempty.
double mutual_information(const EntropyTable& table, SiteSet a, SiteSet b);

/// CSV: mask (hex), size, entropy (17 significant digits), one row per canonical entry.
void write_entropy_csv(std::ostream& os, const EntropyTable& table);

}  // namespace ebpttn
