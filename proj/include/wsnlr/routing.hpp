#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "wsnlr/energy.hpp"
#include "wsnlr/scenario.hpp"
#include "wsnlr/types.hpp"

namespace wsnlr {

inline constexpr PathId kNoPath = -1;

/// One forwarding-table row. `pid` is the id of the sensor adjacent to the
/// sink on this path.
struct PathTableEntry {
  PathId pid = kNoPath;
  bool in_use = false;
  NodeId next_node = kNoNode;
  double quality = 0.0;  // bottleneck residual energy, joules
  double rate = 0.0;     // bit/s, meaningful at sources only
  int hops = 0;          // hops to the sink along this path

  friend bool operator==(const PathTableEntry&, const PathTableEntry&) = default;
};

using PathTable = std::vector<PathTableEntry>;

/// Quality order: quality desc, hops asc, pid asc.
bool better_path(const PathTableEntry& a, const PathTableEntry& b);

/// Per-node forwarding tables, indexed by node id. Rows a source drops for
/// sharing a next hop with a better row stay in `shadowed`: the source no
/// longer sends on them but still relays other sources' packets along them.
struct PathTables {
  std::vector<PathTable> by_node;
  std::vector<PathTable> shadowed;
  NodeId sink_id = 0;

  const PathTable& table(NodeId node) const { return by_node.at(static_cast<std::size_t>(node)); }
  PathTable& table(NodeId node) { return by_node.at(static_cast<std::size_t>(node)); }
  const PathTableEntry* find(NodeId node, PathId pid) const;
  PathTableEntry* find(NodeId node, PathId pid);
  /// Looks in the table first, then in the shadowed rows.
  const PathTableEntry* find_forwarding(NodeId node, PathId pid) const;
};

struct RouteRequest {
  PathId pid = kNoPath;  // unset on the sink's own transmissions
  int hop_count = 0;
  double quality_so_far = 0.0;
  NodeId sender = kNoNode;
};

/// Flooding-time view of one node.
struct FloodNode {
  NodeId id = kNoNode;
  double energy = 0.0;
  std::map<PathId, PathTableEntry> entries;
};

enum class QualityMetric {
  ResidualEnergy,  // min residual energy along the path, joules
  Lifetime,        // min over hops of residual energy / per-packet cost, packets
};

struct RoutingConfig {
  QualityMetric metric = QualityMetric::ResidualEnergy;
  RadioEnergyModel energy;
  int packet_bits = 4000;
};

/// A node's own contribution to the bottleneck when it forwards to `next`.
double hop_quality(const Topology& topology, NodeId node, NodeId next, const RoutingConfig& config);

/// Receiver side of the flood. Records the request's path when it is new or
/// strictly better than the stored one and, in that case, returns the
/// request to rebroadcast to every neighbor except the sender (the caller
/// fans it out). Otherwise returns nothing.
std::vector<RouteRequest> handle_request(FloodNode& node, const RouteRequest& request,
                                         std::span<const NodeId> neighbors);
/// As above with an explicit per-hop quality in place of the node's energy.
std::vector<RouteRequest> handle_request(FloodNode& node, const RouteRequest& request,
                                         std::span<const NodeId> neighbors, double own_quality);

/// Sink-initiated flood over the whole topology. Every table comes back
/// sorted in quality order; source tables keep one entry per next hop.
/// Throws Error("unreachable: ...") naming sources left without a path.
PathTables build_paths(const Topology& topology, std::span<const NodeId> sources, const RoutingConfig& config = {});

/// Lifetime proxy of a path: the minimum residual energy among its sensors.
double path_quality(std::span<const NodeId> path_nodes, const std::map<NodeId, double>& energies);

/// Packets the path can carry before its first sensor runs dry.
double path_lifetime(const Topology& topology, std::span<const NodeId> path_nodes, const RadioEnergyModel& energy,
                     int packet_bits);

/// Walks next-node pointers for `pid` from `start` to the sink (inclusive).
/// Throws Error("broken path ...") or Error("loop ...").
std::vector<NodeId> path_trace(const PathTables& tables, NodeId start, PathId pid);

/// One line per entry: node pid next quality in_use rate.
void dump_tables(std::ostream& out, const PathTables& tables);

}  // namespace wsnlr
