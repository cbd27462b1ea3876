#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "ebpttn/ebp.hpp"

namespace ebpttn {

/// Unrooted binary tree over N labeled leaves with a designated root edge.
/// Vertices 0..N-1 are the leaves (vertex k is site k); internal vertices are
/// numbered N..2N-3. Internal adjacency is ordered [child A, child B, parent]
/// relative to the rooting the topology was built from.
class TtnTopology {
 public:
  TtnTopology() = default;

  int n_sites() const { return n_sites_; }
  int n_vertices() const { return static_cast<int>(adj_.size()); }
  int n_internal() const { return n_vertices() - n_sites_; }
  int n_edges() const { return static_cast<int>(edges_.size()); }
  bool is_leaf(int v) const { return v < n_sites_; }

  const std::vector<int>& neighbors(int v) const { return adj_.at(v); }
  const std::array<int, 2>& edge(int e) const { return edges_.at(e); }
  /// Edge index joining u and v, or -1.
  int edge_between(int u, int v) const;
  int root_edge() const { return root_edge_; }

  /// Sites on u's side of the edge {u, v}.
  SiteSet side(int u, int v) const;

  const std::string& name() const { return name_; }
  void set_name(std::string name) { name_ = std::move(name); }

  /// Leg dimension of an edge: min(chi, 2^|G|, 2^(N-|G|)) for the cut G.
  int edge_dimension(int e, int chi) const;

  /// Throws ConfigError unless connected, acyclic, degrees 1/3, 2N-3 edges.
  void validate() const;

  /// Rooted view from the root edge, in the bipartition-tree layout (ee = NaN).
  BipartitionTree rooted() const;

  friend TtnTopology topology_from_tree(const BipartitionTree& tree);
  friend TtnTopology reroot(const TtnTopology& topology, int edge);

 private:
  void add_edge(int u, int v);
  void compute_sides();

  int n_sites_ = 0;
  std::vector<std::vector<int>> adj_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<std::array<SiteSet, 2>> sides_;  // [e][0] = side of edges_[e][0]
  int root_edge_ = -1;
  std::string name_;
};

/// Isometries go on every non-root internal node; the root's two children are
/// joined by the root edge.
TtnTopology topology_from_tree(const BipartitionTree& tree);

/// Same tree, root edge moved. Throws ConfigError for an unknown edge.
TtnTopology reroot(const TtnTopology& topology, int edge);
TtnTopology reroot(const TtnTopology& topology, int u, int v);

// Baseline networks. Caterpillars are rooted at their central bond.
TtnTopology uniform_mps(int n);
TtnTopology dimer_mps(int n);
TtnTopology pbttn_1d(int n);
TtnTopology pbttn_2d(int width, int height);
TtnTopology snake_mps(int width, int height);
/// Caterpillar along an arbitrary site order.
TtnTopology mps_along(const std::vector<int>& order);

/// The 4x4 MMX template: the tree found by bipartitioning the open 4x4
/// Heisenberg ground state with the MMX objective and lexicographic ties.
TtnTopology mmx_4x4();

/// 64-site network on the 8x8 lattice built self-similarly from mmx_4x4():
/// each 4x4 quadrant carries the template rerooted at the edge of its 2x2
/// unit nearest the lattice centre, and the quadrants are linked the way the
/// template links its units (left/right pairs, then top/bottom).
TtnTopology extended_mmx_64();

/// Boustrophedon order of a width x height grid (row-major site numbers).
std::vector<int> snake_order(int width, int height);

/// Leaf-labelled canonical form; equal strings iff the labelled trees are isomorphic.
std::string labeled_canonical_form(const TtnTopology& t);
bool labeled_isomorphic(const TtnTopology& a, const TtnTopology& b);
/// Shape-only canonical form (leaf labels ignored).
std::string shape_canonical_form(const TtnTopology& t);
bool shape_isomorphic(const TtnTopology& a, const TtnTopology& b);

/// True when every internal vertex touches at most two internal vertices and
/// the internal vertices form a path.
bool is_caterpillar(const TtnTopology& t);

/// Subtree spanned by the given sites, relabelled in increasing site order,
/// with degree-2 vertices suppressed. Root edge is arbitrary.
TtnTopology induced_subtree(const TtnTopology& t, const std::vector<int>& sites);

/// Parses nested pairs such as "((0,1),(2,3))" into a topology rooted at the
/// outermost pair.
TtnTopology topology_from_nested(int n_sites, const std::string& nested);
/// Inverse of topology_from_nested for the current rooting.
std::string nested_string(const TtnTopology& t);

using TreeCount = boost::multiprecision::cpp_int;

/// Rooted binary trees on n labelled leaves: (2n-3)!!, n >= 1.
TreeCount count_rooted(int n);
/// Unrooted binary trees on n labelled leaves: (2n-5)!!, with count_unrooted(2) = 1.
TreeCount count_unrooted(int n);

}  // namespace ebpttn
