#include <doctest.h>

#include <bit>
#include <cctype>
#include <set>

#include "ebpttn/networks.hpp"
#include "ebpttn/serialization.hpp"
#include "oracles.hpp"

using namespace ebpttn;

namespace {

void check_invariants(const TtnTopology& t) {
  const int n = t.n_sites();
  CHECK_NOTHROW(t.validate());
  CHECK(t.n_internal() == n - 2);
  CHECK(t.n_edges() == 2 * n - 3);
  for (int v = 0; v < t.n_vertices(); ++v)
    CHECK(t.neighbors(v).size() == (t.is_leaf(v) ? 1u : (n == 2 ? 1u : 3u)));
  for (int e = 0; e < t.n_edges(); ++e) {
    const auto& ed = t.edge(e);
    const SiteSet a = t.side(ed[0], ed[1]);
    const SiteSet b = t.side(ed[1], ed[0]);
    CHECK((a & b) == 0);
    CHECK((a | b) == full_set(n));
  }
}

int depth(const BipartitionTree& tree, int k = 0) {
  const auto& nd = tree.nodes[k];
  if (nd.is_leaf()) return 0;
  return 1 + std::max(depth(tree, nd.children[0]), depth(tree, nd.children[1]));
}

TreeCount binomial(int n, int k) {
  TreeCount r = 1;
  for (int j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

std::vector<int> quadrant_sites(int qx, int qy) {
  std::vector<int> s;
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) s.push_back((4 * qy + y) * 8 + 4 * qx + x);
  return s;
}

}  // namespace

TEST_CASE("constructors satisfy the tree invariants") {
  for (int n : {2, 3, 4, 7, 16, 64}) check_invariants(uniform_mps(n));
  for (int n : {2, 4, 16}) check_invariants(dimer_mps(n));
  for (int n : {2, 4, 8, 16, 64}) check_invariants(pbttn_1d(n));
  check_invariants(pbttn_2d(4, 4));
  check_invariants(pbttn_2d(8, 8));
  check_invariants(pbttn_2d(4, 2));
  check_invariants(snake_mps(4, 4));
  check_invariants(snake_mps(8, 8));
  check_invariants(mmx_4x4());
  check_invariants(extended_mmx_64());
}

TEST_CASE("constructor shapes") {
  const TtnTopology u4 = uniform_mps(4);
  CHECK(u4.n_internal() == 2);
  CHECK(is_caterpillar(u4));
  CHECK(is_caterpillar(uniform_mps(16)));
  CHECK(depth(pbttn_1d(16).rooted()) == 4);
  CHECK(pbttn_1d(16).n_internal() == 14);
  CHECK(!is_caterpillar(pbttn_1d(16)));
  CHECK(snake_order(4, 4) == std::vector<int>{0, 1, 2, 3, 7, 6, 5, 4, 8, 9, 10, 11, 15, 14, 13, 12});
  CHECK(labeled_isomorphic(snake_mps(4, 4), mps_along(snake_order(4, 4))));
  // Each dimer is joined by one vertex.
  const TtnTopology d = dimer_mps(16);
  for (int k = 0; k < 16; k += 2) CHECK(d.neighbors(k)[0] == d.neighbors(k + 1)[0]);
  // pbttn_2d pairs horizontally first, then vertically.
  const TtnTopology p = pbttn_2d(4, 4);
  CHECK(p.neighbors(0)[0] == p.neighbors(1)[0]);
  const int pair01 = p.neighbors(0)[0];
  const int pair45 = p.neighbors(4)[0];
  CHECK(p.edge_between(pair01, pair45) < 0);
  bool plaquette = false;
  for (int v : p.neighbors(pair01))
    if (!p.is_leaf(v) && p.edge_between(v, pair45) >= 0) plaquette = true;
  CHECK(plaquette);

  CHECK_THROWS_AS(pbttn_1d(12), ConfigError);
  CHECK_THROWS_AS(pbttn_2d(3, 4), ConfigError);
  CHECK_THROWS_AS(dimer_mps(7), ConfigError);
  CHECK_THROWS_AS(uniform_mps(1), ConfigError);
}

TEST_CASE("topology from a bipartition tree") {
  BipartitionTree two;
  two.n_sites = 2;
  two.nodes = {{"", 0b11, 0.0, {1, 2}, 0}, {"A", 0b01, 0.0, {-1, -1}, 1}, {"B", 0b10, 0.0, {-1, -1}, 1}};
  const TtnTopology t2 = topology_from_tree(two);
  CHECK(t2.n_internal() == 0);
  CHECK(t2.n_edges() == 1);
  CHECK(t2.root_edge() == 0);

  // Eight sites split into halves, quarters and pairs: six internal vertices.
  const TtnTopology t8 = topology_from_nested(8, "(((0,1),(2,3)),((4,5),(6,7)))");
  CHECK(t8.n_internal() == 6);
  CHECK(labeled_isomorphic(t8, pbttn_1d(8)));
  const auto& re = t8.edge(t8.root_edge());
  CHECK(t8.side(re[0], re[1]) == 0x0F);

  BipartitionTree broken = two;
  broken.nodes[2].sites = 0b01;
  CHECK_THROWS_AS(topology_from_tree(broken), ConfigError);
}

TEST_CASE("rooted view round trip") {
  for (const auto& t : {mmx_4x4(), snake_mps(4, 4), dimer_mps(8)}) {
    const TtnTopology back = topology_from_tree(t.rooted());
    CHECK(nested_string(back) == nested_string(t));
    CHECK(labeled_canonical_form(back) == labeled_canonical_form(t));
  }
}

TEST_CASE("reroot") {
  const TtnTopology t = mmx_4x4();
  CHECK(nested_string(reroot(t, t.root_edge())) == nested_string(t));
  for (int e = 0; e < t.n_edges(); ++e) {
    const TtnTopology r = reroot(t, e);
    CHECK(r.root_edge() == e);
    CHECK(labeled_isomorphic(r, t));
    CHECK(nested_string(reroot(r, t.root_edge())) == nested_string(t));
    check_invariants(topology_from_tree(r.rooted()));
  }
  const TtnTopology two = uniform_mps(2);
  CHECK(nested_string(reroot(two, 0)) == nested_string(two));
  CHECK_THROWS_AS(reroot(t, t.n_edges()), ConfigError);
  CHECK_THROWS_AS(reroot(t, 0, 1), ConfigError);
}

TEST_CASE("isomorphism") {
  const TtnTopology a = topology_from_nested(4, "((0,1),(2,3))");
  const TtnTopology b = topology_from_nested(4, "((3,2),(1,0))");
  const TtnTopology c = topology_from_nested(4, "((0,2),(1,3))");
  const TtnTopology d = topology_from_nested(4, "(0,(1,(2,3)))");
  CHECK(labeled_isomorphic(a, b));
  CHECK(!labeled_isomorphic(a, c));
  CHECK(shape_isomorphic(a, c));
  // All 4-leaf unrooted trees have the same shape.
  CHECK(shape_isomorphic(a, d));
  CHECK(labeled_isomorphic(a, d));
  CHECK(!shape_isomorphic(pbttn_1d(16), uniform_mps(16)));
  CHECK(!shape_isomorphic(dimer_mps(16), uniform_mps(16)));
  CHECK(!labeled_isomorphic(uniform_mps(16), snake_mps(4, 4)));
  CHECK(shape_isomorphic(uniform_mps(16), snake_mps(4, 4)));
}

TEST_CASE("induced subtree") {
  const TtnTopology t = uniform_mps(8);
  const TtnTopology sub = induced_subtree(t, {2, 3, 4, 5});
  CHECK(sub.n_sites() == 4);
  CHECK(labeled_isomorphic(sub, uniform_mps(4)));
  CHECK(labeled_isomorphic(induced_subtree(pbttn_1d(8), {0, 1, 4, 5}), pbttn_1d(4)));
  CHECK(labeled_isomorphic(induced_subtree(t, {0, 1, 2, 3, 4, 5, 6, 7}), t));
  CHECK_THROWS_AS(induced_subtree(t, {3}), ConfigError);
}

TEST_CASE("nested strings") {
  const std::string s = "((0,(1,2)),(3,4))";
  CHECK(nested_string(topology_from_nested(5, s)) == s);
  CHECK(nested_string(topology_from_nested(5, " ( (0, (1,2)) ,(3,4) ) ")) == s);
  CHECK_THROWS_AS(topology_from_nested(5, "((0,1),(2,3))"), ConfigError);
  CHECK_THROWS_AS(topology_from_nested(4, "((0,1),(2,2))"), ConfigError);
  CHECK_THROWS_AS(topology_from_nested(4, "((0,1),(2,3)"), ConfigError);
  CHECK_THROWS_AS(topology_from_nested(4, "((0,1),(2,9))"), ConfigError);
  CHECK_THROWS_AS(topology_from_nested(4, "((0,1),(2,3)))"), ConfigError);
}

TEST_CASE("leg dimensions follow the min rule") {
  const TtnTopology d = dimer_mps(16);
  for (int e = 0; e < d.n_edges(); ++e) {
    const auto& ed = d.edge(e);
    const int g = std::popcount(d.side(ed[0], ed[1]));
    const int k = std::min(g, 16 - g);
    CHECK(d.edge_dimension(e, 8) == std::min(8, 1 << k));
  }
  const TtnTopology u = uniform_mps(6);
  CHECK(u.edge_dimension(u.root_edge(), 64) == 8);
}

TEST_CASE("4x4 template is the MMX bipartitioning tree") {
  const auto gs = ground_state(build_bonds(LatticeSpec::square(4, 4)), 16);
  const EntropyTable table = entropy_table(gs.wavefunction);
  const BipartitionTree tree = run_ebp(table, Objective::mmx);
  CHECK(labeled_isomorphic(topology_from_tree(tree), mmx_4x4()));
  CHECK(nested_string(topology_from_tree(tree)) == nested_string(mmx_4x4()));
  CHECK(std::abs(max_cut_entropy(tree) - 1.111) < 5e-4);
}

TEST_CASE("64-site extension") {
  const TtnTopology t = extended_mmx_64();
  CHECK(t.n_sites() == 64);
  CHECK(t.n_internal() == 62);
  CHECK(t.n_edges() == 125);
  const TtnTopology unit = mmx_4x4();
  std::vector<SiteSet> quadrants;
  for (int qy = 0; qy < 2; ++qy)
    for (int qx = 0; qx < 2; ++qx) {
      const auto sites = quadrant_sites(qx, qy);
      CHECK(labeled_isomorphic(induced_subtree(t, sites), unit));
      SiteSet m = 0;
      for (int s : sites) m |= SiteSet{1} << s;
      quadrants.push_back(m);
    }
  // Every quadrant hangs off a single edge, and the left/right pairs are cut
  // from each other by the root edge.
  for (SiteSet q : quadrants) {
    bool found = false;
    for (int e = 0; e < t.n_edges(); ++e) {
      const auto& ed = t.edge(e);
      found = found || t.side(ed[0], ed[1]) == q || t.side(ed[1], ed[0]) == q;
    }
    CHECK(found);
  }
  const auto& re = t.edge(t.root_edge());
  const SiteSet top = quadrants[0] | quadrants[1];
  CHECK((t.side(re[0], re[1]) == top || t.side(re[1], re[0]) == top));
  // The template links its four 2x2 units the same way.
  SiteSet tl_tr = 0;
  for (int s : {0, 1, 4, 5, 2, 3, 6, 7}) tl_tr |= SiteSet{1} << s;
  bool pairs = false;
  for (int e = 0; e < unit.n_edges(); ++e) {
    const auto& ed = unit.edge(e);
    pairs = pairs || unit.side(ed[0], ed[1]) == tl_tr || unit.side(ed[1], ed[0]) == tl_tr;
  }
  CHECK(pairs);
  CHECK(nested_string(extended_mmx_64()) == nested_string(t));
}

TEST_CASE("tree counts") {
  CHECK(count_rooted(1) == 1);
  CHECK(count_rooted(3) == 3);
  CHECK(count_rooted(16) == TreeCount("6190283353629375"));
  CHECK(count_unrooted(2) == 1);
  CHECK(count_unrooted(3) == 1);
  CHECK(count_unrooted(4) == 3);
  for (int n = 2; n <= 40; ++n) CHECK(count_rooted(n) == (2 * n - 3) * count_unrooted(n));
  for (int n = 2; n <= 40; ++n) CHECK(count_rooted(n) == (2 * n - 3) * count_rooted(n - 1));
  CHECK_THROWS_AS(count_rooted(0), ConfigError);
  CHECK_THROWS_AS(count_unrooted(1), ConfigError);
}

TEST_CASE("tree counts agree with the splitting recursion") {
  // Omega_M = sum_{k <= M/2} C(M, k) Omega_k Omega_{M-k} / (1 + [k == M - k]).
  std::vector<TreeCount> omega(13);
  omega[1] = 1;
  for (int m = 2; m <= 12; ++m) {
    TreeCount sum = 0;
    for (int k = 1; k <= m / 2; ++k) {
      TreeCount term = binomial(m, k) * omega[k] * omega[m - k];
      if (2 * k == m) term /= 2;
      sum += term;
    }
    omega[m] = sum;
  }
  for (int n = 1; n <= 12; ++n) CHECK(count_rooted(n) == omega[n]);
}

TEST_CASE("brute-force enumeration of small unrooted trees") {
  // Grow every rooted tree by grafting the next leaf above each subtree.
  std::vector<std::string> current = {"(0,1)"};
  for (int leaf = 2; leaf < 6; ++leaf) {
    std::vector<std::string> next;
    for (const auto& s : current) {
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == ',' || s[i] == ')') continue;
        std::size_t j = i;
        if (s[i] == '(') {
          int open = 0;
          for (; j < s.size(); ++j) {
            open += s[j] == '(' ? 1 : s[j] == ')' ? -1 : 0;
            if (open == 0) break;
          }
        } else {
          while (j + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[j + 1]))) ++j;
          if (i > 0 && std::isdigit(static_cast<unsigned char>(s[i - 1]))) continue;
        }
        next.push_back(s.substr(0, i) + "(" + s.substr(i, j - i + 1) + "," + std::to_string(leaf) +
                       ")" + s.substr(j + 1));
      }
    }
    current = next;
    std::set<std::string> rooted(current.begin(), current.end());
    std::set<std::string> unrooted;
    for (const auto& s : current) unrooted.insert(labeled_canonical_form(topology_from_nested(leaf + 1, s)));
    CHECK(TreeCount(rooted.size()) == count_rooted(leaf + 1));
    CHECK(TreeCount(unrooted.size()) == count_unrooted(leaf + 1));
  }
}

TEST_CASE("topology json round trip and dot") {
  for (const auto& t : {mmx_4x4(), extended_mmx_64(), uniform_mps(2)}) {
    const std::string text = dump_json(topology_to_json(t));
    const TtnTopology back = topology_from_json(parse_json(text));
    CHECK(dump_json(topology_to_json(back)) == text);
    CHECK(labeled_isomorphic(back, t));
    CHECK(back.name() == t.name());
  }
  const auto psi = oracle::random_state(4, 2);
  const EntropyTable table = entropy_table(psi, 1);
  const TtnTopology t = uniform_mps(4);
  const std::string with_ee = dump_json(topology_to_json(t, &table));
  CHECK(dump_json(topology_to_json(topology_from_json(parse_json(with_ee)), &table)) == with_ee);
  const Json j = parse_json(with_ee);
  CHECK(j["root_edge"] == Json::array({"A", "B"}));
  CHECK(j["network"] == "uniform-mps");

  Json bad = j;
  bad["root_edge"] = Json::array({"A", "AA"});
  CHECK_THROWS_AS(topology_from_json(bad), ConfigError);

  const std::string dot = topology_to_dot(t, &table);
  CHECK(dot.find("color=orange") != std::string::npos);
  CHECK(dot.find("label=\"0\"") != std::string::npos);
}
