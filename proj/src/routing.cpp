#include "wsnlr/routing.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <utility>

namespace wsnlr {

bool better_path(const PathTableEntry& a, const PathTableEntry& b) {
  if (a.quality != b.quality) return a.quality > b.quality;
  if (a.hops != b.hops) return a.hops < b.hops;
  return a.pid < b.pid;
}

const PathTableEntry* PathTables::find(NodeId node, PathId pid) const {
  if (node < 0 || static_cast<std::size_t>(node) >= by_node.size()) return nullptr;
  for (const auto& e : by_node[static_cast<std::size_t>(node)])
    if (e.pid == pid) return &e;
  return nullptr;
}

PathTableEntry* PathTables::find(NodeId node, PathId pid) {
  return const_cast<PathTableEntry*>(std::as_const(*this).find(node, pid));
}

const PathTableEntry* PathTables::find_forwarding(NodeId node, PathId pid) const {
  if (const PathTableEntry* e = find(node, pid)) return e;
  if (node < 0 || static_cast<std::size_t>(node) >= shadowed.size()) return nullptr;
  for (const auto& e : shadowed[static_cast<std::size_t>(node)])
    if (e.pid == pid) return &e;
  return nullptr;
}

double hop_quality(const Topology& topology, NodeId node, NodeId next, const RoutingConfig& config) {
  const double energy = topology.node(node).initial_energy;
  if (config.metric == QualityMetric::ResidualEnergy) return energy;
  const double bits = config.packet_bits;
  const double cost = config.energy.tx(bits, topology.link_length(node, next)) + config.energy.rx(bits);
  return cost > 0.0 ? energy / cost : std::numeric_limits<double>::infinity();
}

std::vector<RouteRequest> handle_request(FloodNode& node, const RouteRequest& request,
                                         std::span<const NodeId> neighbors) {
  return handle_request(node, request, neighbors, node.energy);
}

std::vector<RouteRequest> handle_request(FloodNode& node, const RouteRequest& request,
                                         std::span<const NodeId> neighbors, double own_quality) {
  PathTableEntry candidate;
  candidate.pid = request.pid == kNoPath ? node.id : request.pid;
  candidate.next_node = request.sender;
  candidate.quality = std::min(request.quality_so_far, own_quality);
  candidate.hops = request.hop_count + 1;

  auto it = node.entries.find(candidate.pid);
  if (it != node.entries.end() && !(candidate.quality > it->second.quality)) return {};
  node.entries[candidate.pid] = candidate;

  // Nobody to rebroadcast to when the sender is the only neighbor.
  bool has_other = std::any_of(neighbors.begin(), neighbors.end(), [&](NodeId n) { return n != request.sender; });
  if (!has_other) return {};
  return {RouteRequest{candidate.pid, candidate.hops, candidate.quality, node.id}};
}

PathTables build_paths(const Topology& topology, std::span<const NodeId> sources, const RoutingConfig& config) {
  const auto adj = topology.adjacency();
  std::vector<FloodNode> flood(topology.size());
  for (const auto& n : topology.nodes) flood[static_cast<std::size_t>(n.id)] = {n.id, n.initial_energy, {}};

  // FIFO delivery of (receiver, request) pairs; the sink originates and
  // never records.
  std::deque<std::pair<NodeId, RouteRequest>> inbox;
  const RouteRequest from_sink{kNoPath, 0, std::numeric_limits<double>::infinity(), topology.sink_id};
  for (NodeId n : adj[static_cast<std::size_t>(topology.sink_id)]) inbox.emplace_back(n, from_sink);

  while (!inbox.empty()) {
    auto [receiver, request] = inbox.front();
    inbox.pop_front();
    if (receiver == topology.sink_id) continue;
    const auto& neighbors = adj[static_cast<std::size_t>(receiver)];
    const double own = hop_quality(topology, receiver, request.sender, config);
    for (const RouteRequest& out : handle_request(flood[static_cast<std::size_t>(receiver)], request, neighbors, own)) {
      for (NodeId n : neighbors)
        if (n != request.sender) inbox.emplace_back(n, out);
    }
  }

  PathTables tables;
  tables.sink_id = topology.sink_id;
  tables.by_node.resize(topology.size());
  tables.shadowed.resize(topology.size());
  for (const auto& fn : flood) {
    if (fn.id == topology.sink_id) continue;
    auto& table = tables.table(fn.id);
    for (const auto& [pid, entry] : fn.entries) table.push_back(entry);
    std::sort(table.begin(), table.end(), better_path);
  }

  // A source keeps a single path per distinct next hop: the best one.
  std::vector<NodeId> unreachable;
  for (NodeId s : sources) {
    auto& table = tables.table(s);
    std::set<NodeId> seen_next;
    PathTable kept;
    for (const auto& e : table) {
      if (seen_next.insert(e.next_node).second)
        kept.push_back(e);
      else
        tables.shadowed[static_cast<std::size_t>(s)].push_back(e);
    }
    table = std::move(kept);
    if (table.empty()) unreachable.push_back(s);
  }
  if (!unreachable.empty()) {
    std::string msg = "unreachable: sources without a path:";
    for (NodeId s : unreachable) msg += " " + std::to_string(s);
    throw Error(msg);
  }
  return tables;
}

double path_quality(std::span<const NodeId> path_nodes, const std::map<NodeId, double>& energies) {
  double q = std::numeric_limits<double>::infinity();
  for (NodeId n : path_nodes) q = std::min(q, energies.at(n));
  return q;
}

double path_lifetime(const Topology& topology, std::span<const NodeId> path_nodes, const RadioEnergyModel& energy,
                     int packet_bits) {
  RoutingConfig cfg{QualityMetric::Lifetime, energy, packet_bits};
  double q = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < path_nodes.size(); ++i)
    q = std::min(q, hop_quality(topology, path_nodes[i], path_nodes[i + 1], cfg));
  return q;
}

std::vector<NodeId> path_trace(const PathTables& tables, NodeId start, PathId pid) {
  std::vector<NodeId> path{start};
  std::vector<char> visited(tables.by_node.size(), 0);
  NodeId current = start;
  while (current != tables.sink_id) {
    if (current < 0 || static_cast<std::size_t>(current) >= visited.size())
      throw Error("broken path: node " + std::to_string(current) + " unknown");
    if (visited[static_cast<std::size_t>(current)])
      throw Error("loop: node " + std::to_string(current) + " repeats on pid " + std::to_string(pid));
    visited[static_cast<std::size_t>(current)] = 1;
    const PathTableEntry* e = tables.find_forwarding(current, pid);
    if (!e) throw Error("broken path: node " + std::to_string(current) + " has no entry for pid " + std::to_string(pid));
    current = e->next_node;
    path.push_back(current);
  }
  return path;
}

void dump_tables(std::ostream& out, const PathTables& tables) {
  char buf[160];
  for (std::size_t n = 0; n < tables.by_node.size(); ++n) {
    for (const auto& e : tables.by_node[n]) {
      std::snprintf(buf, sizeof buf, "%zu %d %d %.9g %d %.9g\n", n, e.pid, e.next_node, e.quality, e.in_use ? 1 : 0,
                    e.rate);
      out << buf;
    }
  }
}

}  // namespace wsnlr
