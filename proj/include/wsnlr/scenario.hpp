#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <vector>

#include "wsnlr/types.hpp"

namespace wsnlr {

struct SensorNode {
  NodeId id = kNoNode;
  Point position;
  double initial_energy = 0.0;  // joules; +inf for the sink
};

/// A deployed field. `nodes[i].id == i`; the sink is one of the nodes and
/// carries infinite energy.
struct Topology {
  std::vector<SensorNode> nodes;
  NodeId sink_id = 0;
  double radio_range = 400.0;
  double field_width = 1000.0;
  double field_height = 1000.0;

  std::size_t size() const { return nodes.size(); }
  const SensorNode& node(NodeId id) const { return nodes.at(static_cast<std::size_t>(id)); }
  bool is_sink(NodeId id) const { return id == sink_id; }
  bool in_range(NodeId a, NodeId b) const {
    return a != b && distance(node(a).position, node(b).position) <= radio_range;
  }
  double link_length(NodeId a, NodeId b) const { return distance(node(a).position, node(b).position); }

  /// Radio neighbors of every node, each list sorted by id.
  std::vector<std::vector<NodeId>> adjacency() const;

  /// Throws Error if any structural invariant is violated.
  void validate() const;
};

struct ScenarioConfig {
  int n_nodes = 50;
  double radio_range = 400.0;
  double field_width = 1000.0;
  double field_height = 1000.0;
  Point sink_position{1000.0, 1000.0};
  Point event_position{250.0, 250.0};
  double event_radius = 150.0;
  double source_rate_bps = 100e3;
  double energy_min = 0.0;
  double energy_max = 0.4;
  std::uint64_t seed = 1;
  Mode mode = Mode::SinglePath;
  double duration = 30.0;
  int connect_retries = 100;

  void validate() const;
};

/// Uniform random deployment, resampled until every selected source can
/// reach the sink. Throws Error("unconnectable ...") when the retry budget
/// runs out.
Topology generate_topology(const ScenarioConfig& config);

/// Sensors strictly inside the event disc, sorted by id; falls back to the
/// single sensor nearest the event when the disc is empty.
std::vector<NodeId> select_sources(const Topology& topology, const ScenarioConfig& config);

/// True when every listed node has a multi-hop radio route to the sink.
bool sources_connected(const Topology& topology, const std::vector<NodeId>& sources);

// -- canonical 15-node example ------------------------------------------------

struct FixtureSource {
  NodeId id = kNoNode;
  double base_rate_bps = 0.0;
  std::vector<PathId> known_paths;  // decreasing quality
  PathId initial_active = 0;
};

/// Source Si of the canonical example carries node id kFixtureSourceBase + i,
/// keeping source ids apart from the relay ids 2, 3, 4, 5 and 10.
inline constexpr NodeId kFixtureSourceBase = 100;

/// Path-membership view of the hand-worked four-source example: sources
/// S1..S4, three paths, and the relays observed on each path.
struct CanonicalFixture {
  std::vector<FixtureSource> sources;
  /// observer node -> path ids it relays
  std::map<NodeId, std::vector<PathId>> observers;

  double total_base_rate() const;
  const FixtureSource& source(int index_1based) const { return sources.at(static_cast<std::size_t>(index_1based - 1)); }
};

CanonicalFixture canonical_fixture();

}  // namespace wsnlr
