#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ebpttn/ebp.hpp"
#include "ebpttn/networks.hpp"
#include "ebpttn/optimizer.hpp"

namespace ebpttn {

using Json = nlohmann::ordered_json;

// Tree schema: {"n_sites", "objective", "nodes": [{"id", "sites", "ee",
// "children"}]}, nodes in preorder. A NaN ee is written as null.
Json tree_to_json(const BipartitionTree& tree);
BipartitionTree tree_from_json(const Json& j);

// Topology schema: the rooted view in the tree layout plus "network" (name)
// and "root_edge" (ids of the two nodes joined by the root edge). When a
// table is given, ee holds the entropy of each node's site set.
Json topology_to_json(const TtnTopology& t, const EntropyTable* table = nullptr);
/// Accepts both the topology and the plain tree schema.
TtnTopology topology_from_json(const Json& j);

/// Node labels are site lists, edge labels are entropies with 4 decimals.
std::string tree_to_dot(const BipartitionTree& tree);
std::string topology_to_dot(const TtnTopology& t, const EntropyTable* table = nullptr);

/// Summary fields plus every restart with its per-sweep energy trace.
Json report_to_json(const OptimizeReport& report);

/// Two-space indented dump followed by a newline.
std::string dump_json(const Json& j);
Json parse_json(const std::string& text);
Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace ebpttn
