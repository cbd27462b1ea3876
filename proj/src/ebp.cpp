#include "ebpttn/ebp.hpp"

#include <algorithm>
#include <bit>
#include <functional>
#include <limits>
#include <random>

#include "ebpttn/errors.hpp"

namespace ebpttn {

std::string to_string(Objective o) { return o == Objective::mmi ? "mmi" : "mmx"; }

Objective parse_objective(const std::string& s) {
  if (s == "mmi" || s == "MMI") return Objective::mmi;
  if (s == "mmx" || s == "MMX") return Objective::mmx;
  throw ConfigError("unknown objective '" + s + "' (expected mmi|mmx)");
}

std::vector<int> site_list(SiteSet s) {
  std::vector<int> out;
  while (s != 0) {
    out.push_back(std::countr_zero(s));
    s &= s - 1;
  }
  return out;
}

double score(const EntropyTable& table, Objective objective, SiteSet a, SiteSet b) {
  if (a == 0 || b == 0) throw ConfigError("score needs nonempty parts");
  if ((a & b) != 0) throw ConfigError("score needs disjoint parts");
  if (objective == Objective::mmi) return table(a) + table(b) - table(a | b);
  return std::max(table(a), table(b));
}

void BipartitionTree::validate() const {
  if (n_sites < 1 || nodes.empty()) throw ConfigError("empty bipartition tree");
  if (root().sites != full_set(n_sites)) throw ConfigError("root must hold every site");
  int internal = 0;
  int leaves = 0;
  std::vector<int> seen(nodes.size(), 0);
  std::function<void(int)> walk = [&](int k) {
    if (k < 0 || k >= static_cast<int>(nodes.size()) || seen[k]++)
      throw ConfigError("bipartition tree has a dangling or shared node");
    const auto& nd = nodes[k];
    if (nd.is_leaf()) {
      if (nd.children[1] >= 0) throw ConfigError("node with a single child");
      if (std::popcount(nd.sites) != 1) throw ConfigError("leaf must hold a single site");
      ++leaves;
      return;
    }
    ++internal;
    const auto& a = nodes.at(nd.children[0]);
    const auto& b = nodes.at(nd.children[1]);
    if ((a.sites & b.sites) != 0 || (a.sites | b.sites) != nd.sites || a.sites == 0 ||
        b.sites == 0)
      throw ConfigError("children do not partition node '" + nd.id + "'");
    walk(nd.children[0]);
    walk(nd.children[1]);
  };
  walk(0);
  if (leaves != n_sites || internal != n_sites - 1)
    throw ConfigError("bipartition tree has the wrong number of nodes");
  if (std::count(seen.begin(), seen.end(), 0) != 0)
    throw ConfigError("bipartition tree has unreachable nodes");
}

namespace {

// Sorted-site-list order on masks.
bool site_list_less(SiteSet a, SiteSet b) {
  while (a != 0 && b != 0) {
    const int la = std::countr_zero(a);
    const int lb = std::countr_zero(b);
    if (la != lb) return la < lb;
    a &= a - 1;
    b &= b - 1;
  }
  return a == 0 && b != 0;
}

}  // namespace

BipartitionTree run_ebp(const EntropyTable& table, Objective objective, TieRule tie_rule,
                        std::uint64_t seed) {
  if (!table.complete()) throw ConfigError("run_ebp needs a complete entropy table");
  const int n = table.n_sites();
  BipartitionTree tree;
  tree.n_sites = n;
  tree.objective = objective;
  std::mt19937_64 rng(seed);

  std::function<int(SiteSet, std::string, int)> build = [&](SiteSet q, std::string id,
                                                            int generation) -> int {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back({id, q, table(q), {-1, -1}, generation});
    if (std::popcount(q) == 1) return index;

    const SiteSet low = q & (~q + 1);
    const SiteSet rest = q & ~low;
    double best = std::numeric_limits<double>::infinity();
    std::vector<SiteSet> ties;
    // Every part A holds the lowest site of q; sub runs over proper subsets of rest.
    for (SiteSet sub = (rest - 1) & rest;; sub = (sub - 1) & rest) {
      const SiteSet a = low | sub;
      const double f = score(table, objective, a, q & ~a);
      if (f < best - kTieEpsilon) {
        best = f;
        ties.assign(1, a);
      } else if (f <= best + kTieEpsilon) {
        ties.push_back(a);
        best = std::min(best, f);
      }
      if (sub == 0) break;
    }
    // Drop entries that fell out of the window after `best` moved down.
    std::erase_if(ties, [&](SiteSet a) {
      return score(table, objective, a, q & ~a) > best + kTieEpsilon;
    });
    SiteSet chosen;
    if (tie_rule == TieRule::random && ties.size() > 1) {
      std::sort(ties.begin(), ties.end(), site_list_less);
      chosen = ties[std::uniform_int_distribution<std::size_t>(0, ties.size() - 1)(rng)];
    } else {
      chosen = *std::min_element(ties.begin(), ties.end(), site_list_less);
    }
    const int a_index = build(chosen, id + "A", generation + 1);
    const int b_index = build(q & ~chosen, id + "B", generation + 1);
    tree.nodes[index].children[0] = a_index;
    tree.nodes[index].children[1] = b_index;
    return index;
  };

  build(full_set(n), "", 0);
  tree.nodes[0].ee = 0.0;
  return tree;
}

double max_cut_entropy(const BipartitionTree& tree) {
  double m = 0.0;
  for (std::size_t k = 1; k < tree.nodes.size(); ++k) m = std::max(m, tree.nodes[k].ee);
  return m;
}

}  // namespace ebpttn
