#include "ebpttn/serialization.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <functional>
#include <map>
#include <sstream>

#include "ebpttn/errors.hpp"

namespace ebpttn {

namespace {

Json sites_json(SiteSet s) {
  Json out = Json::array();
  for (int k : site_list(s)) out.push_back(k);
  return out;
}

std::string sites_label(SiteSet s) {
  std::string out;
  for (int k : site_list(s)) out += (out.empty() ? "" : ",") + std::to_string(k);
  return "{" + out + "}";
}

std::string four_decimals(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f", x);
  return buf;
}

Json nodes_json(const BipartitionTree& tree) {
  Json nodes = Json::array();
  for (const auto& nd : tree.nodes) {
    Json n;
    n["id"] = nd.id;
    n["sites"] = sites_json(nd.sites);
    n["ee"] = std::isfinite(nd.ee) ? Json(nd.ee) : Json(nullptr);
    if (nd.is_leaf())
      n["children"] = nullptr;
    else
      n["children"] = Json::array({tree.nodes[nd.children[0]].id, tree.nodes[nd.children[1]].id});
    nodes.push_back(std::move(n));
  }
  return nodes;
}

template <typename T>
T field(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string("missing JSON field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad JSON field '") + key + "': " + e.what());
  }
}

}  // namespace

Json tree_to_json(const BipartitionTree& tree) {
  Json j;
  j["n_sites"] = tree.n_sites;
  j["objective"] = to_string(tree.objective);
  j["nodes"] = nodes_json(tree);
  return j;
}

BipartitionTree tree_from_json(const Json& j) {
  BipartitionTree tree;
  tree.n_sites = field<int>(j, "n_sites");
  if (tree.n_sites < 1 || tree.n_sites > 64) throw ConfigError("n_sites out of range");
  if (j.contains("objective")) tree.objective = parse_objective(field<std::string>(j, "objective"));
  const Json& nodes = j.at("nodes");
  if (!nodes.is_array()) throw ConfigError("'nodes' must be an array");

  std::map<std::string, const Json*> by_id;
  for (const auto& n : nodes) {
    const auto id = field<std::string>(n, "id");
    if (!by_id.emplace(id, &n).second) throw ConfigError("duplicate node id '" + id + "'");
  }
  if (!by_id.count("")) throw ConfigError("tree has no root node (id \"\")");

  std::function<int(const std::string&, int)> add = [&](const std::string& id, int gen) -> int {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw ConfigError("unknown child id '" + id + "'");
    if (gen > tree.n_sites) throw ConfigError("tree is deeper than its site count allows");
    const Json& n = *it->second;
    BipartitionNode nd;
    nd.id = id;
    nd.generation = gen;
    for (const auto& s : n.at("sites")) {
      const int k = s.get<int>();
      if (k < 0 || k >= tree.n_sites) throw ConfigError("site index out of range");
      if (nd.sites & (SiteSet{1} << k)) throw ConfigError("repeated site in node '" + id + "'");
      nd.sites |= SiteSet{1} << k;
    }
    nd.ee = n.contains("ee") && !n.at("ee").is_null() ? n.at("ee").get<double>()
                                                      : std::numeric_limits<double>::quiet_NaN();
    const int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(nd);
    const Json& ch = n.contains("children") ? n.at("children") : Json(nullptr);
    if (!ch.is_null()) {
      if (!ch.is_array() || ch.size() != 2) throw ConfigError("children must be null or a pair");
      const int a = add(ch[0].get<std::string>(), gen + 1);
      const int b = add(ch[1].get<std::string>(), gen + 1);
      tree.nodes[index].children[0] = a;
      tree.nodes[index].children[1] = b;
    }
    return index;
  };
  add("", 0);
  if (tree.nodes.size() != nodes.size()) throw ConfigError("tree has unreachable or shared nodes");
  tree.validate();
  return tree;
}

Json topology_to_json(const TtnTopology& t, const EntropyTable* table) {
  BipartitionTree tree = t.rooted();
  if (table != nullptr) {
    if (table->n_sites() != t.n_sites()) throw ConfigError("entropy table size does not match topology");
    for (auto& nd : tree.nodes) nd.ee = (*table)(nd.sites);
  }
  const auto& root = tree.root();
  Json j;
  j["n_sites"] = t.n_sites();
  j["network"] = t.name();
  j["nodes"] = nodes_json(tree);
  j["root_edge"] =
      Json::array({tree.nodes[root.children[0]].id, tree.nodes[root.children[1]].id});
  return j;
}

TtnTopology topology_from_json(const Json& j) {
  const BipartitionTree tree = tree_from_json(j);
  if (tree.n_sites < 2) throw ConfigError("a topology needs at least two sites");
  if (j.contains("root_edge")) {
    const auto edge = field<std::vector<std::string>>(j, "root_edge");
    const auto& root = tree.root();
    if (edge.size() != 2 || edge[0] != tree.nodes[root.children[0]].id ||
        edge[1] != tree.nodes[root.children[1]].id)
      throw ConfigError("root_edge must join the two children of the root node");
  }
  TtnTopology t = topology_from_tree(tree);
  t.set_name(j.contains("network") ? field<std::string>(j, "network") : "from-file");
  return t;
}

std::string tree_to_dot(const BipartitionTree& tree) {
  std::ostringstream os;
  os << "graph bipartition {\n  node [shape=box];\n";
  for (std::size_t k = 0; k < tree.nodes.size(); ++k)
    os << "  n" << k << " [label=\"" << sites_label(tree.nodes[k].sites) << "\"];\n";
  for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
    const auto& nd = tree.nodes[k];
    if (nd.is_leaf()) continue;
    for (int c : nd.children) {
      os << "  n" << k << " -- n" << c;
      if (std::isfinite(tree.nodes[c].ee))
        os << " [label=\"" << four_decimals(tree.nodes[c].ee) << "\"]";
      os << ";\n";
    }
  }
  os << "}\n";
  return os.str();
}

std::string topology_to_dot(const TtnTopology& t, const EntropyTable* table) {
  std::ostringstream os;
  os << "graph ttn {\n";
  for (int v = 0; v < t.n_vertices(); ++v) {
    if (t.is_leaf(v))
      os << "  v" << v << " [shape=circle,label=\"" << v << "\"];\n";
    else
      os << "  v" << v << " [shape=triangle,label=\"\"];\n";
  }
  for (int e = 0; e < t.n_edges(); ++e) {
    const auto& ed = t.edge(e);
    os << "  v" << ed[0] << " -- v" << ed[1];
    std::string attrs;
    if (table != nullptr) attrs = "label=\"" + four_decimals((*table)(t.side(ed[0], ed[1]))) + "\"";
    if (e == t.root_edge()) attrs += std::string(attrs.empty() ? "" : ",") + "color=orange,penwidth=3";
    if (!attrs.empty()) os << " [" << attrs << "]";
    os << ";\n";
  }
  os << "}\n";
  return os.str();
}

Json report_to_json(const OptimizeReport& report) {
  auto number = [](double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); };
  Json j;
  j["network"] = report.network;
  j["chi"] = report.chi;
  j["seed"] = report.seed;
  j["best_restart"] = report.best_restart;
  j["energy"] = number(report.energy);
  j["exact_energy"] = report.exact_energy ? Json(*report.exact_energy) : Json(nullptr);
  j["delta_e"] = number(report.delta_e);
  j["sweeps"] = report.sweeps;
  j["converged"] = report.converged;
  Json runs = Json::array();
  for (const auto& r : report.restarts) {
    Json rj;
    rj["restart"] = r.restart;
    rj["seed"] = r.seed;
    rj["sweeps"] = r.sweeps;
    rj["energy"] = number(r.energy);
    rj["converged"] = r.converged;
    if (r.failed) rj["error"] = r.error;
    rj["trace"] = r.trace;
    runs.push_back(std::move(rj));
  }
  j["restarts"] = std::move(runs);
  return j;
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_json(ss.str());
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace ebpttn
