#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ebpttn/entropy.hpp"

namespace ebpttn {

enum class Objective { mmi, mmx };
enum class TieRule { lexicographic, random };

std::string to_string(Objective o);
Objective parse_objective(const std::string& s);

/// Degenerate-score window for split selection.
inline constexpr double kTieEpsilon = 1e-10;

/// Node of a rooted bipartition tree. `id` is the A/B path from the root
/// (the root has the empty id); children are indices into the node list.
struct BipartitionNode {
  std::string id;
  SiteSet sites = 0;
  double ee = 0.0;
  int children[2] = {-1, -1};
  int generation = 0;

  bool is_leaf() const { return children[0] < 0; }
};

/// Rooted binary tree of site sets. Node 0 is the root and nodes are stored
/// in preorder (A subtree before B subtree).
struct BipartitionTree {
  int n_sites = 0;
  Objective objective = Objective::mmx;
  std::vector<BipartitionNode> nodes;

  const BipartitionNode& root() const { return nodes.front(); }

  /// Structural checks: partitions, single-site leaves, N-1 internal nodes.
  void validate() const;
};

/// MMI: S(a) + S(b) - S(a|b).  MMX: max(S(a), S(b)).
double score(const EntropyTable& table, Objective objective, SiteSet a, SiteSet b);

/// Top-down exhaustive bipartitioning. Scores within kTieEpsilon of the minimum
/// are degenerate; `lexicographic` picks the part A (which always holds the
/// lowest site of the parent) with the smallest sorted site list, `random`
/// picks uniformly with the given seed.
BipartitionTree run_ebp(const EntropyTable& table, Objective objective,
                        TieRule tie_rule = TieRule::lexicographic, std::uint64_t seed = 0);

/// Largest ee over the non-root nodes.
double max_cut_entropy(const BipartitionTree& tree);

/// Sorted site list of a mask.
std::vector<int> site_list(SiteSet s);

}  // namespace ebpttn
