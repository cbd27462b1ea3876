#include "ebpttn/entropy.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <thread>

#include "ebpttn/errors.hpp"

namespace ebpttn {

namespace {

constexpr double kEigenvalueFloor = 1e-14;

// Bit gather (pext) through per-byte lookup tables built once per mask.
class BitGather {
 public:
  BitGather(SiteSet mask, int n_bytes) : n_bytes_(n_bytes) {
    int offset = 0;
    for (int p = 0; p < n_bytes; ++p) {
      const auto sub = static_cast<unsigned>((mask >> (8 * p)) & 0xFFu);
      offset_[p] = offset;
      for (unsigned byte = 0; byte < 256; ++byte) {
        unsigned out = 0;
        int bit = 0;
        for (int b = 0; b < 8; ++b) {
          if (sub & (1u << b)) {
            if (byte & (1u << b)) out |= 1u << bit;
            ++bit;
          }
        }
        table_[p][byte] = static_cast<std::uint8_t>(out);
      }
      offset += std::popcount(sub);
    }
  }

  std::uint32_t operator()(std::uint64_t idx) const {
    std::uint32_t out = 0;
    for (int p = 0; p < n_bytes_; ++p)
      out |= static_cast<std::uint32_t>(table_[p][(idx >> (8 * p)) & 0xFFu]) << offset_[p];
    return out;
  }

 private:
  int n_bytes_;
  std::array<int, 3> offset_{};
  std::array<std::array<std::uint8_t, 256>, 3> table_{};
};

double entropy_of(const Eigen::MatrixXd& rho) {
  if (rho.rows() == 0) return 0.0;
  if (rho.rows() == 1) {
    const double l = rho(0, 0);
    return l > kEigenvalueFloor ? -l * std::log(l) : 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
    const double l = es.eigenvalues()(k);
    if (l > kEigenvalueFloor) s -= l * std::log(l);
  }
  return s;
}

// Read-only view of a wavefunction with the precomputation shared by all masks.
class EntropyEngine {
 public:
  explicit EntropyEngine(const Wavefunction& psi) : psi_(psi), n_(psi.n_sites()) {
    const auto& amp = psi.amplitudes();
    int popcount = -1;
    sector_ = true;
    for (std::uint64_t s = 0; s < amp.size(); ++s) {
      if (amp[s] == 0.0) continue;
      support_.push_back(s);
      const int pc = std::popcount(s);
      if (popcount < 0) popcount = pc;
      if (pc != popcount) sector_ = false;
    }
    if (support_.empty()) throw NumericalError("entropy of a zero wavefunction");
    n_down_ = popcount;
    n_bytes_ = (n_ + 7) / 8;
    if (sector_) {
      rank_.resize(n_ + 1);
      for (int b = 0; b <= n_; ++b) {
        rank_[b].resize(std::size_t{1} << b);
        std::vector<std::uint32_t> counter(b + 1, 0);
        for (std::uint32_t x = 0; x < (1u << b); ++x) rank_[b][x] = counter[std::popcount(x)]++;
      }
      for (int a = 0; a <= n_; ++a) {
        binom_[a][0] = 1;
        for (int b = 1; b <= a; ++b)
          binom_[a][b] = binom_[a - 1][b - 1] + (b <= a - 1 ? binom_[a - 1][b] : 0);
      }
    }
  }

  struct Scratch {
    std::vector<Eigen::MatrixXd> blocks;
    Eigen::MatrixXd rho;
  };

  double operator()(SiteSet subset, Scratch& scratch) const {
    const SiteSet full = full_set(n_);
    if (subset == 0 || (subset & full) == full || (subset & ~full) != 0)
      throw ConfigError("entanglement entropy needs a nonempty proper subset");
    SiteSet rows = subset;
    if (2 * std::popcount(rows) > n_) rows = full & ~rows;
    const SiteSet cols = full & ~rows;
    const int k = std::popcount(rows);
    const BitGather gr(rows, n_bytes_);
    const BitGather gc(cols, n_bytes_);
    const auto& amp = psi_.amplitudes();

    if (!sector_) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Zero(Eigen::Index{1} << k, Eigen::Index{1} << (n_ - k));
      for (std::uint64_t s : support_) m(gr(s), gc(s)) = amp[s];
      scratch.rho.noalias() = m * m.transpose();
      return entropy_of(scratch.rho);
    }

    // Fixed magnetization: the reduced density matrix is block diagonal in the
    // number of down spins on the row side.
    auto& blocks = scratch.blocks;
    blocks.resize(k + 1);
    const int ck = n_ - k;
    for (int m = 0; m <= k; ++m) {
      const int mc = n_down_ - m;
      if (mc < 0 || mc > ck) {
        blocks[m].resize(0, 0);
        continue;
      }
      blocks[m].setZero(binom_[k][m], binom_[ck][mc]);
    }
    const auto& rr = rank_[k];
    const auto& rc = rank_[ck];
    for (std::uint64_t s : support_) {
      const std::uint32_t r = gr(s);
      const std::uint32_t c = gc(s);
      blocks[std::popcount(r)](rr[r], rc[c]) = amp[s];
    }
    double total = 0.0;
    for (int m = 0; m <= k; ++m) {
      if (blocks[m].size() == 0) continue;
      scratch.rho.noalias() = blocks[m] * blocks[m].transpose();
      total += entropy_of(scratch.rho);
    }
    return total;
  }

  int n_sites() const { return n_; }

 private:
  const Wavefunction& psi_;
  int n_;
  int n_bytes_ = 1;
  bool sector_ = false;
  int n_down_ = 0;
  std::vector<std::uint64_t> support_;
  std::vector<std::vector<std::uint32_t>> rank_;
  std::array<std::array<Eigen::Index, 25>, 25> binom_{};
};

}  // namespace

double entanglement_entropy(const Wavefunction& psi, SiteSet subset) {
  EntropyEngine engine(psi);
  EntropyEngine::Scratch scratch;
  return engine(subset, scratch);
}

EntropyTable::EntropyTable(int n_sites, std::vector<double> canonical_entries)
    : n_sites_(n_sites), entries_(std::move(canonical_entries)) {
  if (n_sites < 2 || n_sites > 24) throw ConfigError("entropy table supports 2..24 sites");
  if (entries_.size() != (std::size_t{1} << (n_sites - 1)))
    throw ConfigError("entropy table must hold 2^(n-1) entries");
}

bool EntropyTable::complete() const {
  if (entries_.empty()) return false;
  // The last slot is the full set, which is trivially zero.
  return std::all_of(entries_.begin(), entries_.end() - 1,
                     [](double s) { return std::isfinite(s); });
}

double EntropyTable::operator()(SiteSet g) const {
  const SiteSet full = full_set(n_sites_);
  if ((g & ~full) != 0) throw ConfigError("site set exceeds the system size");
  if (g == 0 || g == full) return 0.0;
  if ((g & 1u) == 0) g = full & ~g;
  return entries_[g >> 1];
}

EntropyTable entropy_table(const Wavefunction& psi, int threads) {
  const int n = psi.n_sites();
  if (n < 2 || n > 16) throw ConfigError("entropy_table supports 2..16 sites");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw ConfigError("entropy_table needs a normalized state");
  const EntropyEngine engine(psi);
  const std::size_t count = std::size_t{1} << (n - 1);
  std::vector<double> entries(count, std::numeric_limits<double>::quiet_NaN());
  entries[count - 1] = 0.0;

  if (threads <= 0) threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 64;
  auto worker = [&] {
    EntropyEngine::Scratch scratch;
    for (;;) {
      const std::size_t begin = next.fetch_add(kChunk);
      if (begin >= count - 1) break;
      const std::size_t end = std::min(begin + kChunk, count - 1);
      for (std::size_t k = begin; k < end; ++k) entries[k] = engine((k << 1) | 1u, scratch);
    }
  };
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return {n, std::move(entries)};
}

double mutual_information(const EntropyTable& table, SiteSet a, SiteSet b) {
  if (a == 0 || b == 0) throw ConfigError("mutual information needs nonempty sets");
  if ((a & b) != 0) throw ConfigError("mutual information needs disjoint sets");
  return table(a) + table(b) - table(a | b);
}

void write_entropy_csv(std::ostream& os, const EntropyTable& table) {
  const auto& e = table.canonical_entries();
  os << "mask,size,entropy\n";
  const auto flags = os.flags();
  const auto prec = os.precision();
  for (std::size_t k = 0; k + 1 < e.size(); ++k) {
    const SiteSet mask = (SiteSet{k} << 1) | 1u;
    os << "0x" << std::hex << mask << std::dec << ',' << std::popcount(mask) << ','
       << std::setprecision(17) << e[k] << '\n';
  }
  os.flags(flags);
  os.precision(prec);
}

}  // namespace ebpttn
