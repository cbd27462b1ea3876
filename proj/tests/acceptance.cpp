// Acceptance run: one PASS/FAIL line per criterion. Pass criterion numbers as
// arguments to run a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ebpttn/ebp.hpp"
#include "ebpttn/eigensolver.hpp"
#include "ebpttn/entropy.hpp"
#include "ebpttn/lattice.hpp"
#include "ebpttn/networks.hpp"
#include "ebpttn/optimizer.hpp"

using namespace ebpttn;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [fail]");
  }
};

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

BondList chain16(Boundary b) { return build_bonds(LatticeSpec::chain(16, b)); }
BondList square(int w, int h) { return build_bonds(LatticeSpec::square(w, h)); }

EntropyTable table_for(const BondList& bonds, int n) {
  return entropy_table(ground_state(bonds, n).wavefunction);
}

double best_energy(const TtnTopology& t, const BondList& bonds, int chi, int restarts,
                   std::optional<double> exact = std::nullopt) {
  OptimizeOptions o;
  o.chi = chi;
  o.restarts = restarts;
  o.max_sweeps = 200;
  o.exact_energy = exact;
  return optimize(t, bonds, o).report.energy;
}

// Checks each energy against its reference and the exact lower bound.
void check_table(Outcome& out, const std::vector<std::pair<std::string, double>>& refs,
                 const std::map<std::string, double>& got, double tol, double exact) {
  for (const auto& [name, ref] : refs) {
    const double e = got.at(name);
    out.require(std::abs(e - ref) <= tol && e >= exact - 1e-9,
                name + " " + fmt("%.9f", e) + " vs " + fmt("%.9f", ref));
  }
}

Outcome criterion_1() {
  Outcome out;
  const std::vector<std::tuple<std::string, BondList, double>> cases = {
      {"chain OBC", chain16(Boundary::open), -6.911737146},
      {"chain PBC", chain16(Boundary::periodic), -7.142296361},
      {"4x4 OBC", square(4, 4), -9.189207},
  };
  for (const auto& [name, bonds, ref] : cases) {
    const auto t0 = Clock::now();
    const double e = ground_state(bonds, 16).energy;
    out.require(std::abs(e - ref) <= 1e-6,
                name + " " + fmt("%.9f", e) + " (" + fmt("%.1fs", seconds_since(t0)) + ")");
  }
  return out;
}

Outcome criterion_2() {
  Outcome out;
  const auto t0 = Clock::now();
  const EntropyTable table = table_for(chain16(Boundary::open), 16);
  for (Objective obj : {Objective::mmi, Objective::mmx}) {
    const TtnTopology t = topology_from_tree(run_ebp(table, obj));
    out.require(labeled_isomorphic(t, dimer_mps(16)), to_string(obj) + " tree is the dimer MPS");
  }
  const double elapsed = seconds_since(t0);
  out.require(elapsed < 60.0, "runtime " + fmt("%.1fs", elapsed));
  return out;
}

Outcome criterion_3() {
  Outcome out;
  const EntropyTable table = table_for(chain16(Boundary::periodic), 16);
  const TtnTopology mmi = topology_from_tree(run_ebp(table, Objective::mmi));
  out.require(is_caterpillar(mmi) && labeled_isomorphic(mmi, uniform_mps(16)),
              "mmi tree is the uniform MPS");
  const TtnTopology mmx = topology_from_tree(run_ebp(table, Objective::mmx));
  out.detail += std::string("; info: mmx tree caterpillar=") + (is_caterpillar(mmx) ? "yes" : "no") +
                " uniform=" + (labeled_isomorphic(mmx, uniform_mps(16)) ? "yes" : "no");
  return out;
}

Outcome criterion_4() {
  Outcome out;
  const EntropyTable table = table_for(square(4, 4), 16);
  const double mmx = max_cut_entropy(run_ebp(table, Objective::mmx));
  const double mmi = max_cut_entropy(run_ebp(table, Objective::mmi));
  out.require(std::abs(mmx - 1.111) <= 5e-4, "mmx S_max " + fmt("%.6f", mmx));
  out.require(std::abs(mmi - 1.378) <= 5e-4, "mmi S_max " + fmt("%.6f", mmi));
  return out;
}

Outcome criterion_5() {
  Outcome out;
  const BondList b = chain16(Boundary::open);
  const double exact = ground_state(b, 16).energy;
  std::map<std::string, double> got;
  got["dimer"] = best_energy(dimer_mps(16), b, 8, 10, exact);
  got["uniform"] = best_energy(uniform_mps(16), b, 8, 10, exact);
  got["pbttn"] = best_energy(pbttn_1d(16), b, 8, 10, exact);
  check_table(out, {{"dimer", -6.911614696}, {"uniform", -6.911558558}, {"pbttn", -6.891960394}}, got,
              1e-4, exact);
  return out;
}

Outcome criterion_6() {
  Outcome out;
  const BondList b = chain16(Boundary::periodic);
  const double exact = ground_state(b, 16).energy;
  std::map<std::string, double> got;
  got["dimer"] = best_energy(dimer_mps(16), b, 8, 10, exact);
  got["uniform"] = best_energy(uniform_mps(16), b, 8, 10, exact);
  got["pbttn"] = best_energy(pbttn_1d(16), b, 8, 10, exact);
  check_table(out, {{"dimer", -7.106850777}, {"uniform", -7.095822585}, {"pbttn", -7.109020051}}, got,
              2e-4, exact);
  out.require(got["pbttn"] < got["dimer"] && got["pbttn"] < got["uniform"], "pbttn lowest");
  return out;
}

Outcome criterion_7() {
  Outcome out;
  const BondList b = square(4, 4);
  const GroundStateResult gs = ground_state(b, 16);
  const EntropyTable table = entropy_table(gs.wavefunction);
  std::map<std::string, double> got;
  got["mmx"] = best_energy(topology_from_tree(run_ebp(table, Objective::mmx)), b, 8, 10, gs.energy);
  got["mmi"] = best_energy(topology_from_tree(run_ebp(table, Objective::mmi)), b, 8, 10, gs.energy);
  got["pbttn"] = best_energy(pbttn_2d(4, 4), b, 8, 10, gs.energy);
  got["snake"] = best_energy(snake_mps(4, 4), b, 8, 10, gs.energy);
  check_table(out,
              {{"mmx", -9.052564}, {"mmi", -8.980623}, {"pbttn", -9.052564}, {"snake", -8.760211}},
              got, 5e-4, gs.energy);
  const double gap = std::abs(got["mmx"] - got["pbttn"]);
  out.require(gap <= 1e-5, "|mmx - pbttn| " + fmt("%.2e", gap));
  return out;
}

Outcome criterion_8() {
  Outcome out;
  const BondList b = square(8, 8);
  for (const auto& [chi, restarts] : std::vector<std::pair<int, int>>{{8, 10}, {16, 3}}) {
    const auto t0 = Clock::now();
    const double mmx = best_energy(extended_mmx_64(), b, chi, restarts);
    const double pb = best_energy(pbttn_2d(8, 8), b, chi, restarts);
    const double snake = best_energy(snake_mps(8, 8), b, chi, restarts);
    out.require(mmx < pb - 1e-3 && pb < snake - 1e-3,
                "chi=" + std::to_string(chi) + " mmx " + fmt("%.6f", mmx) + " < pbttn " + fmt("%.6f", pb) +
                    " < snake " + fmt("%.6f", snake) + " (" + fmt("%.0fs", seconds_since(t0)) + ")");
  }
  return out;
}

Outcome criterion_9() {
  Outcome out;
  out.require(count_rooted(16) == TreeCount("6190283353629375"),
              "Omega_16 = " + count_rooted(16).str());
  std::vector<TreeCount> omega(13);
  omega[1] = 1;
  bool ok = true;
  for (int m = 2; m <= 12; ++m) {
    for (int k = 1; k <= m / 2; ++k) {
      TreeCount c = 1;
      for (int j = 1; j <= k; ++j) c = c * (m - k + j) / j;
      TreeCount term = c * omega[k] * omega[m - k];
      if (2 * k == m) term /= 2;
      omega[m] += term;
    }
    ok = ok && omega[m] == count_rooted(m);
  }
  out.require(ok, "recursion n <= 12");
  return out;
}

Outcome criterion_10() {
  Outcome out;
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> normal;

  // Entropy symmetries on random states.
  bool symmetric = true, mi_ok = true;
  for (int n : {6, 8, 10}) {
    std::vector<double> a(std::size_t{1} << n);
    for (double& x : a) x = normal(rng);
    Wavefunction psi(n, a);
    psi.normalize();
    const EntropyTable t = entropy_table(psi);
    const SiteSet full = full_set(n);
    for (SiteSet g = 1; g < full; ++g) {
      symmetric = symmetric && std::abs(entanglement_entropy(psi, g) - entanglement_entropy(psi, full & ~g)) < 1e-10;
      const SiteSet h = full & ~g & static_cast<SiteSet>(rng());
      if (h != 0) mi_ok = mi_ok && mutual_information(t, g, h) >= -1e-12;
    }
  }
  out.require(symmetric, "complement symmetry");
  out.require(mi_ok, "mutual information >= 0");

  const BondList c8 = build_bonds(LatticeSpec::chain(8, Boundary::periodic));
  const double exact8 = ground_state(c8, 8).energy;
  const std::vector<TtnTopology> nets = {uniform_mps(8), dimer_mps(8), pbttn_1d(8),
                                         topology_from_nested(8, "((0,(5,2)),((1,7),(3,(4,6))))")};

  // Full bond dimension reproduces the exact energy.
  double worst_exact = 0.0;
  for (const auto& t : nets) worst_exact = std::max(worst_exact, std::abs(best_energy(t, c8, 16, 2) - exact8));
  out.require(worst_exact <= 1e-9, "full-rank error " + fmt("%.1e", worst_exact));

  // Optimized energy does not depend on where the root edge sits.
  {
    OptimizeOptions o;
    o.chi = 4;
    o.restarts = 4;
    o.max_sweeps = 400;
    o.tol = 1e-13;
    const TtnTopology t = pbttn_1d(8);
    const double ref = optimize(t, c8, o).report.energy;
    double spread = 0.0;
    for (int e = 0; e < t.n_edges(); ++e)
      spread = std::max(spread, std::abs(optimize(reroot(t, e), c8, o).report.energy - ref));
    out.require(spread <= 1e-7, "reroot spread over " + std::to_string(t.n_edges()) + " edges " + fmt("%.1e", spread));
  }

  // Environment against a central finite difference of the dense energy.
  {
    const BondList b = build_bonds(LatticeSpec::chain(4, Boundary::periodic));
    const double shift = energy_shift(b);
    auto shifted = [&](const TtnState& s) {
      const Wavefunction psi = to_dense(s);
      return expectation(b, psi) - shift * psi.norm() * psi.norm();
    };
    double worst = 0.0;
    const TtnState s = init_random(uniform_mps(4), 2, 5);
    for (int v = 4; v < s.topology.n_vertices(); ++v) {
      const Tensor3 env = environment(s, b, v);
      for (std::size_t k = 0; k < env.data.size(); ++k) {
        TtnState p = s, m = s;
        p.tensor(v).data[k] += 1e-5;
        m.tensor(v).data[k] -= 1e-5;
        worst = std::max(worst, std::abs((shifted(p) - shifted(m)) / 2e-5 - 2.0 * env.data[k]));
      }
    }
    out.require(worst <= 1e-6, "gradient error " + fmt("%.1e", worst));
  }

  // Isometry residual after every sweep.
  {
    OptimizeOptions o;
    o.chi = 8;
    o.restarts = 2;
    o.max_sweeps = 50;
    double worst = 0.0;
    o.on_sweep = [&](const TtnState& s, int, int, double) { worst = std::max(worst, isometry_residual(s)); };
    optimize(mmx_4x4(), square(4, 4), o);
    out.require(worst <= 1e-12, "isometry residual " + fmt("%.1e", worst));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
      criterion_6, criterion_7, criterion_8, criterion_9, criterion_10,
  };
  std::vector<int> selected;
  for (int k = 1; k < argc; ++k) selected.push_back(std::stoi(argv[k]));
  if (selected.empty())
    for (int k = 1; k <= 10; ++k) selected.push_back(k);

  int failed = 0;
  for (int k : selected) {
    if (k < 1 || k > 10) {
      std::fprintf(stderr, "no criterion %d\n", k);
      return 2;
    }
    Outcome o;
    try {
      o = criteria[k - 1]();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
