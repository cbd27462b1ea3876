#include "ebpttn/networks.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <functional>
#include <limits>

#include "ebpttn/errors.hpp"

namespace ebpttn {

namespace {

// Rooted binary shape used by the constructors: a leaf carries a site index,
// an internal node exactly two children.
struct Shape {
  int site = -1;
  std::vector<Shape> kids;

  static Shape leaf(int s) { return Shape{s, {}}; }
  static Shape join(Shape a, Shape b) {
    Shape s;
    s.kids.push_back(std::move(a));
    s.kids.push_back(std::move(b));
    return s;
  }
  SiteSet mask() const {
    if (site >= 0) return SiteSet{1} << site;
    return kids[0].mask() | kids[1].mask();
  }
};

BipartitionTree tree_from_shape(int n, const Shape& shape) {
  BipartitionTree tree;
  tree.n_sites = n;
  std::function<int(const Shape&, const std::string&, int)> add =
      [&](const Shape& s, const std::string& id, int gen) -> int {
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(
        {id, s.mask(), std::numeric_limits<double>::quiet_NaN(), {-1, -1}, gen});
    if (s.site < 0) {
      const int a = add(s.kids[0], id + "A", gen + 1);
      const int b = add(s.kids[1], id + "B", gen + 1);
      tree.nodes[index].children[0] = a;
      tree.nodes[index].children[1] = b;
    }
    return index;
  };
  add(shape, "", 0);
  return tree;
}

TtnTopology topology_from_shape(int n, const Shape& shape, const std::string& name) {
  if (shape.site >= 0) throw ConfigError("a topology needs at least two sites");
  TtnTopology t = topology_from_tree(tree_from_shape(n, shape));
  t.set_name(name);
  return t;
}

// Caterpillar over units, rooted at the central bond. Each half peels the unit
// adjacent to the root edge first.
Shape caterpillar(const std::vector<Shape>& units) {
  if (units.empty()) throw ConfigError("empty caterpillar");
  if (units.size() == 1) return units.front();
  const std::size_t m = units.size() / 2;
  std::function<Shape(std::size_t, std::size_t)> left = [&](std::size_t l, std::size_t r) {
    if (r - l == 1) return units[l];
    return Shape::join(left(l, r - 1), units[r - 1]);
  };
  std::function<Shape(std::size_t, std::size_t)> right = [&](std::size_t l, std::size_t r) {
    if (r - l == 1) return units[l];
    return Shape::join(units[l], right(l + 1, r));
  };
  return Shape::join(left(0, m), right(m, units.size()));
}

Shape balanced(const std::vector<Shape>& units, std::size_t l, std::size_t r) {
  if (r - l == 1) return units[l];
  const std::size_t m = l + (r - l) / 2;
  return Shape::join(balanced(units, l, m), balanced(units, m, r));
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

Shape rooted_shape(const TtnTopology& t) {
  std::function<Shape(int, int)> from = [&](int v, int parent) -> Shape {
    if (t.is_leaf(v)) return Shape::leaf(v);
    std::vector<Shape> kids;
    for (int w : t.neighbors(v))
      if (w != parent) kids.push_back(from(w, v));
    return Shape::join(std::move(kids[0]), std::move(kids[1]));
  };
  const auto& e = t.edge(t.root_edge());
  return Shape::join(from(e[0], e[1]), from(e[1], e[0]));
}

Shape relabel(const Shape& s, const std::function<int(int)>& map) {
  if (s.site >= 0) return Shape::leaf(map(s.site));
  return Shape::join(relabel(s.kids[0], map), relabel(s.kids[1], map));
}

}  // namespace

int TtnTopology::edge_between(int u, int v) const {
  for (int e = 0; e < n_edges(); ++e) {
    const auto& ed = edges_[e];
    if ((ed[0] == u && ed[1] == v) || (ed[0] == v && ed[1] == u)) return e;
  }
  return -1;
}

SiteSet TtnTopology::side(int u, int v) const {
  const int e = edge_between(u, v);
  if (e < 0) throw ConfigError("side(): vertices are not adjacent");
  return edges_[e][0] == u ? sides_[e][0] : sides_[e][1];
}

int TtnTopology::edge_dimension(int e, int chi) const {
  const int g = std::popcount(sides_.at(e)[0]);
  const int k = std::min(g, n_sites_ - g);
  if (k >= 30) return chi;
  return static_cast<int>(std::min<long long>(chi, 1LL << k));
}

void TtnTopology::add_edge(int u, int v) {
  edges_.push_back({u, v});
  adj_[u].push_back(v);
  adj_[v].push_back(u);
}

void TtnTopology::compute_sides() {
  sides_.assign(edges_.size(), {0, 0});
  std::function<SiteSet(int, int)> collect = [&](int v, int parent) -> SiteSet {
    if (is_leaf(v)) return SiteSet{1} << v;
    SiteSet m = 0;
    for (int w : adj_[v])
      if (w != parent) m |= collect(w, v);
    return m;
  };
  for (std::size_t e = 0; e < edges_.size(); ++e) {
    sides_[e][0] = collect(edges_[e][0], edges_[e][1]);
    sides_[e][1] = full_set(n_sites_) & ~sides_[e][0];
  }
}

void TtnTopology::validate() const {
  const int n = n_sites_;
  if (n < 2) throw ConfigError("topology needs at least two sites");
  if (n_vertices() != 2 * n - 2) throw ConfigError("topology must have 2N-2 vertices");
  if (n_edges() != 2 * n - 3) throw ConfigError("topology must have 2N-3 edges");
  for (int v = 0; v < n_vertices(); ++v) {
    const std::size_t want = is_leaf(v) ? 1 : 3;
    if (n == 2) {
      if (adj_[v].size() != 1) throw ConfigError("two-site topology is a single edge");
    } else if (adj_[v].size() != want) {
      throw ConfigError("vertex " + std::to_string(v) + " has the wrong degree");
    }
  }
  std::vector<char> seen(n_vertices(), 0);
  std::vector<int> stack = {0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj_[v])
      if (!seen[w]) {
        seen[w] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  // Connected with |V| - 1 edges implies acyclic.
  if (reached != n_vertices()) throw ConfigError("topology is not connected");
  if (root_edge_ < 0 || root_edge_ >= n_edges()) throw ConfigError("topology has no root edge");
}

BipartitionTree TtnTopology::rooted() const {
  BipartitionTree tree = tree_from_shape(n_sites_, rooted_shape(*this));
  return tree;
}

TtnTopology topology_from_tree(const BipartitionTree& tree) {
  tree.validate();
  const int n = tree.n_sites;
  if (n < 2) throw ConfigError("a topology needs at least two sites");
  TtnTopology t;
  t.n_sites_ = n;
  t.adj_.assign(n, {});
  std::function<int(int)> make = [&](int k) -> int {
    const auto& nd = tree.nodes[k];
    if (nd.is_leaf()) return std::countr_zero(nd.sites);
    const int id = static_cast<int>(t.adj_.size());
    t.adj_.emplace_back();
    const int a = make(nd.children[0]);
    t.add_edge(id, a);
    const int b = make(nd.children[1]);
    t.add_edge(id, b);
    return id;
  };
  const auto& root = tree.nodes[0];
  const int a = make(root.children[0]);
  const int b = make(root.children[1]);
  t.add_edge(a, b);
  t.root_edge_ = t.n_edges() - 1;
  t.compute_sides();
  t.validate();
  return t;
}

TtnTopology reroot(const TtnTopology& topology, int edge) {
  if (edge < 0 || edge >= topology.n_edges()) throw ConfigError("reroot: unknown edge");
  TtnTopology t = topology;
  t.root_edge_ = edge;
  return t;
}

TtnTopology reroot(const TtnTopology& topology, int u, int v) {
  const int e = topology.edge_between(u, v);
  if (e < 0) throw ConfigError("reroot: vertices are not adjacent");
  return reroot(topology, e);
}

TtnTopology mps_along(const std::vector<int>& order) {
  const int n = static_cast<int>(order.size());
  if (n < 2) throw ConfigError("an MPS needs at least two sites");
  std::vector<Shape> units;
  for (int s : order) units.push_back(Shape::leaf(s));
  return topology_from_shape(n, caterpillar(units), "mps");
}

TtnTopology uniform_mps(int n) {
  if (n < 2) throw ConfigError("uniform_mps needs n >= 2");
  std::vector<int> order(n);
  for (int k = 0; k < n; ++k) order[k] = k;
  TtnTopology t = mps_along(order);
  t.set_name("uniform-mps");
  return t;
}

TtnTopology dimer_mps(int n) {
  if (n < 2 || n % 2 != 0) throw ConfigError("dimer_mps needs an even n >= 2");
  std::vector<Shape> units;
  for (int k = 0; k < n; k += 2) units.push_back(Shape::join(Shape::leaf(k), Shape::leaf(k + 1)));
  return topology_from_shape(n, caterpillar(units), "dimer-mps");
}

TtnTopology pbttn_1d(int n) {
  if (n < 2 || !is_power_of_two(n)) throw ConfigError("pbttn_1d needs a power of two n >= 2");
  std::vector<Shape> units;
  for (int k = 0; k < n; ++k) units.push_back(Shape::leaf(k));
  return topology_from_shape(n, balanced(units, 0, units.size()), "pbttn");
}

TtnTopology pbttn_2d(int width, int height) {
  if (!is_power_of_two(width) || !is_power_of_two(height) || width * height < 2)
    throw ConfigError("pbttn_2d needs power-of-two width and height");
  // Bottom-up merge directions: horizontal first, then alternating.
  std::vector<bool> horizontal;
  int bw = 1;
  int bh = 1;
  bool next_h = true;
  while (bw < width || bh < height) {
    const bool h = next_h ? bw < width : !(bh < height);
    horizontal.push_back(h);
    (h ? bw : bh) *= 2;
    next_h = !h;
  }
  std::function<Shape(int, int, int, int, int)> split = [&](int x0, int y0, int w, int h,
                                                            int level) -> Shape {
    if (w == 1 && h == 1) return Shape::leaf(y0 * width + x0);
    if (horizontal[level])
      return Shape::join(split(x0, y0, w / 2, h, level - 1),
                         split(x0 + w / 2, y0, w / 2, h, level - 1));
    return Shape::join(split(x0, y0, w, h / 2, level - 1),
                       split(x0, y0 + h / 2, w, h / 2, level - 1));
  };
  const int top = static_cast<int>(horizontal.size()) - 1;
  return topology_from_shape(width * height, split(0, 0, width, height, top), "pbttn");
}

std::vector<int> snake_order(int width, int height) {
  if (width < 1 || height < 1) throw ConfigError("snake order needs a nonempty grid");
  std::vector<int> order;
  for (int y = 0; y < height; ++y)
    for (int k = 0; k < width; ++k) order.push_back(y * width + (y % 2 == 0 ? k : width - 1 - k));
  return order;
}

TtnTopology snake_mps(int width, int height) {
  if (width * height < 2) throw ConfigError("snake_mps needs at least two sites");
  TtnTopology t = mps_along(snake_order(width, height));
  t.set_name("snake-mps");
  return t;
}

TtnTopology mmx_4x4() {
  TtnTopology t = topology_from_nested(
      16, "(0,(1,(((((2,(3,7)),6),(((8,(12,13)),9),(10,(11,(14,15))))),5),4)))");
  t.set_name("mmx-4x4");
  return t;
}

TtnTopology extended_mmx_64() {
  const TtnTopology unit_template = mmx_4x4();
  auto plaquette = [](int px, int py) {
    SiteSet m = 0;
    for (int j = 0; j < 2; ++j)
      for (int i = 0; i < 2; ++i) m |= SiteSet{1} << ((2 * py + j) * 4 + 2 * px + i);
    return m;
  };
  auto quadrant = [&](int qx, int qy) {
    const SiteSet inner = plaquette(1 - qx, 1 - qy);
    int edge = -1;
    for (int e = 0; e < unit_template.n_edges(); ++e) {
      const auto& ed = unit_template.edge(e);
      if (unit_template.side(ed[0], ed[1]) == inner || unit_template.side(ed[1], ed[0]) == inner)
        edge = e;
    }
    if (edge < 0) throw ConfigError("4x4 template lacks a 2x2 unit edge");
    const Shape local = rooted_shape(reroot(unit_template, edge));
    return relabel(local, [&](int s) { return (4 * qy + s / 4) * 8 + 4 * qx + s % 4; });
  };
  const Shape top = Shape::join(quadrant(0, 0), quadrant(1, 0));
  const Shape bottom = Shape::join(quadrant(0, 1), quadrant(1, 1));
  return topology_from_shape(64, Shape::join(top, bottom), "extended-mmx-64");
}

std::string labeled_canonical_form(const TtnTopology& t) {
  std::function<std::string(int, int)> enc = [&](int v, int parent) -> std::string {
    if (t.is_leaf(v)) return std::to_string(v);
    std::vector<std::string> parts;
    for (int w : t.neighbors(v))
      if (w != parent) parts.push_back(enc(w, v));
    std::sort(parts.begin(), parts.end());
    return "(" + parts[0] + "," + parts[1] + ")";
  };
  return "0:" + enc(t.neighbors(0).front(), 0);
}

bool labeled_isomorphic(const TtnTopology& a, const TtnTopology& b) {
  return a.n_sites() == b.n_sites() && labeled_canonical_form(a) == labeled_canonical_form(b);
}

std::string shape_canonical_form(const TtnTopology& t) {
  std::function<std::string(int, int)> enc = [&](int v, int parent) -> std::string {
    if (t.is_leaf(v)) return "x";
    std::vector<std::string> parts;
    for (int w : t.neighbors(v))
      if (w != parent) parts.push_back(enc(w, v));
    std::sort(parts.begin(), parts.end());
    std::string s = "(";
    for (const auto& p : parts) s += p;
    return s + ")";
  };
  // Locate the centre by peeling leaves layer by layer.
  const int nv = t.n_vertices();
  std::vector<int> degree(nv);
  std::vector<int> layer;
  for (int v = 0; v < nv; ++v) {
    degree[v] = static_cast<int>(t.neighbors(v).size());
    if (degree[v] <= 1) layer.push_back(v);
  }
  int remaining = nv;
  while (remaining > 2) {
    remaining -= static_cast<int>(layer.size());
    std::vector<int> next;
    for (int v : layer)
      for (int w : t.neighbors(v))
        if (--degree[w] == 1) next.push_back(w);
    layer = std::move(next);
  }
  if (layer.size() == 1) return enc(layer[0], -1);
  std::string a = enc(layer[0], layer[1]);
  std::string b = enc(layer[1], layer[0]);
  if (b < a) std::swap(a, b);
  return "[" + a + b + "]";
}

bool shape_isomorphic(const TtnTopology& a, const TtnTopology& b) {
  return a.n_sites() == b.n_sites() && shape_canonical_form(a) == shape_canonical_form(b);
}

bool is_caterpillar(const TtnTopology& t) {
  for (int v = t.n_sites(); v < t.n_vertices(); ++v) {
    int internal = 0;
    for (int w : t.neighbors(v))
      if (!t.is_leaf(w)) ++internal;
    if (internal > 2) return false;
  }
  return true;
}

TtnTopology induced_subtree(const TtnTopology& t, const std::vector<int>& sites) {
  if (sites.size() < 2) throw ConfigError("induced subtree needs two or more sites");
  std::vector<int> sorted = sites;
  std::sort(sorted.begin(), sorted.end());
  std::vector<int> rank(t.n_sites(), -1);
  for (std::size_t k = 0; k < sorted.size(); ++k) rank.at(sorted[k]) = static_cast<int>(k);

  const int nv = t.n_vertices();
  std::vector<char> kept(nv, 1);
  std::vector<int> degree(nv);
  std::vector<int> queue;
  for (int v = 0; v < nv; ++v) {
    degree[v] = static_cast<int>(t.neighbors(v).size());
    if (degree[v] == 1 && (!t.is_leaf(v) || rank[v] < 0)) queue.push_back(v);
  }
  while (!queue.empty()) {
    const int v = queue.back();
    queue.pop_back();
    kept[v] = 0;
    for (int w : t.neighbors(v))
      if (kept[w] && --degree[w] == 1 && (!t.is_leaf(w) || rank[w] < 0)) queue.push_back(w);
  }

  std::function<Shape(int, int)> build = [&](int v, int parent) -> Shape {
    if (t.is_leaf(v)) return Shape::leaf(rank[v]);
    std::vector<Shape> kids;
    for (int w : t.neighbors(v))
      if (w != parent && kept[w]) kids.push_back(build(w, v));
    if (kids.size() == 1) return kids[0];
    return Shape::join(std::move(kids[0]), std::move(kids[1]));
  };
  const int s0 = sorted.front();
  const Shape rest = build(t.neighbors(s0).front(), s0);
  return topology_from_shape(static_cast<int>(sorted.size()),
                             Shape::join(Shape::leaf(0), rest), "induced");
}

TtnTopology topology_from_nested(int n_sites, const std::string& nested) {
  std::size_t pos = 0;
  auto skip = [&] {
    while (pos < nested.size() && std::isspace(static_cast<unsigned char>(nested[pos]))) ++pos;
  };
  std::function<Shape()> parse = [&]() -> Shape {
    skip();
    if (pos >= nested.size()) throw ConfigError("nested topology: unexpected end");
    if (nested[pos] == '(') {
      ++pos;
      Shape a = parse();
      skip();
      if (pos >= nested.size() || nested[pos] != ',') throw ConfigError("nested topology: expected ','");
      ++pos;
      Shape b = parse();
      skip();
      if (pos >= nested.size() || nested[pos] != ')') throw ConfigError("nested topology: expected ')'");
      ++pos;
      return Shape::join(std::move(a), std::move(b));
    }
    std::size_t end = pos;
    while (end < nested.size() && std::isdigit(static_cast<unsigned char>(nested[end]))) ++end;
    if (end == pos) throw ConfigError("nested topology: expected a site index");
    const int s = std::stoi(nested.substr(pos, end - pos));
    if (s < 0 || s >= n_sites) throw ConfigError("nested topology: site out of range");
    pos = end;
    return Shape::leaf(s);
  };
  const Shape s = parse();
  skip();
  if (pos != nested.size()) throw ConfigError("nested topology: trailing characters");
  if (s.mask() != full_set(n_sites) || std::popcount(s.mask()) != n_sites)
    throw ConfigError("nested topology must use every site exactly once");
  return topology_from_shape(n_sites, s, "nested");
}

std::string nested_string(const TtnTopology& t) {
  std::function<std::string(const Shape&)> str = [&](const Shape& s) -> std::string {
    if (s.site >= 0) return std::to_string(s.site);
    return "(" + str(s.kids[0]) + "," + str(s.kids[1]) + ")";
  };
  return str(rooted_shape(t));
}

namespace {
TreeCount double_factorial(int k) {
  TreeCount r = 1;
  for (int j = k; j > 1; j -= 2) r *= j;
  return r;
}
}  // namespace

TreeCount count_rooted(int n) {
  if (n < 1) throw ConfigError("count_rooted needs n >= 1");
  return double_factorial(2 * n - 3);
}

TreeCount count_unrooted(int n) {
  if (n < 2) throw ConfigError("count_unrooted needs n >= 2");
  return double_factorial(2 * n - 5);
}

}  // namespace ebpttn
