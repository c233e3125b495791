#include "wsnlr/scenario.hpp"

#include <algorithm>
#include <deque>
#include <random>
#include <string>

namespace wsnlr {

std::vector<std::vector<NodeId>> Topology::adjacency() const {
  std::vector<std::vector<NodeId>> adj(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      if (in_range(static_cast<NodeId>(a), static_cast<NodeId>(b))) {
        adj[a].push_back(static_cast<NodeId>(b));
        adj[b].push_back(static_cast<NodeId>(a));
      }
    }
  }
  for (auto& list : adj) std::sort(list.begin(), list.end());
  return adj;
}

void Topology::validate() const {
  if (nodes.empty()) throw Error("topology: no nodes");
  if (sink_id < 0 || static_cast<std::size_t>(sink_id) >= nodes.size()) throw Error("topology: sink missing");
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.id != static_cast<NodeId>(i)) throw Error("topology: node ids must be dense and unique");
    if (n.position.x < 0 || n.position.x > field_width || n.position.y < 0 || n.position.y > field_height)
      throw Error("topology: node " + std::to_string(n.id) + " outside field");
    if (n.id != sink_id && !(n.initial_energy >= 0.0)) throw Error("topology: negative energy");
  }
}

void ScenarioConfig::validate() const {
  if (n_nodes < 1) throw Error("config invalid: n_nodes must be >= 1");
  if (!(radio_range > 0)) throw Error("config invalid: radio_range must be > 0");
  if (!(field_width > 0) || !(field_height > 0)) throw Error("config invalid: field must be nonempty");
  if (!(energy_min >= 0) || !(energy_max >= energy_min)) throw Error("config invalid: energy interval");
  if (!(source_rate_bps >= 0)) throw Error("config invalid: source rate");
  if (!(event_radius >= 0)) throw Error("config invalid: event radius");
  if (!(duration >= 0)) throw Error("config invalid: duration");
  if (connect_retries < 1) throw Error("config invalid: connect_retries");
  mode_from_int(to_int(mode));
}

namespace {

Topology sample_once(const ScenarioConfig& config, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ux(0.0, config.field_width);
  std::uniform_real_distribution<double> uy(0.0, config.field_height);
  std::uniform_real_distribution<double> ue(config.energy_min, config.energy_max);

  Topology topo;
  topo.radio_range = config.radio_range;
  topo.field_width = config.field_width;
  topo.field_height = config.field_height;
  topo.sink_id = 0;
  topo.nodes.push_back({0, config.sink_position, std::numeric_limits<double>::infinity()});
  for (int i = 1; i <= config.n_nodes; ++i) {
    // Evaluation order of the three draws is fixed for reproducibility.
    double x = ux(rng);
    double y = uy(rng);
    double e = config.energy_max > config.energy_min ? ue(rng) : config.energy_min;
    topo.nodes.push_back({i, {x, y}, e});
  }
  return topo;
}

}  // namespace

bool sources_connected(const Topology& topology, const std::vector<NodeId>& sources) {
  auto adj = topology.adjacency();
  std::vector<char> seen(topology.size(), 0);
  std::deque<NodeId> frontier{topology.sink_id};
  seen[static_cast<std::size_t>(topology.sink_id)] = 1;
  while (!frontier.empty()) {
    NodeId u = frontier.front();
    frontier.pop_front();
    for (NodeId v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        frontier.push_back(v);
      }
    }
  }
  return std::all_of(sources.begin(), sources.end(),
                     [&](NodeId s) { return seen[static_cast<std::size_t>(s)] != 0; });
}

Topology generate_topology(const ScenarioConfig& config) {
  config.validate();
  if (config.sink_position.x < 0 || config.sink_position.x > config.field_width || config.sink_position.y < 0 ||
      config.sink_position.y > config.field_height)
    throw Error("config invalid: sink outside field");

  std::mt19937_64 rng(config.seed);
  for (int attempt = 0; attempt < config.connect_retries; ++attempt) {
    Topology topo = sample_once(config, rng);
    if (sources_connected(topo, select_sources(topo, config))) return topo;
  }
  throw Error("unconnectable: no connected topology after " + std::to_string(config.connect_retries) +
              " samples (seed " + std::to_string(config.seed) + ")");
}

std::vector<NodeId> select_sources(const Topology& topology, const ScenarioConfig& config) {
  std::vector<NodeId> inside;
  NodeId nearest = kNoNode;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (const auto& n : topology.nodes) {
    if (n.id == topology.sink_id) continue;
    double d = distance(n.position, config.event_position);
    if (d < config.event_radius) inside.push_back(n.id);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = n.id;
    }
  }
  if (inside.empty() && nearest != kNoNode) inside.push_back(nearest);
  std::sort(inside.begin(), inside.end());
  return inside;
}

double CanonicalFixture::total_base_rate() const {
  double sum = 0.0;
  for (const auto& s : sources) sum += s.base_rate_bps;
  return sum;
}

CanonicalFixture canonical_fixture() {
  CanonicalFixture f;
  // S1/S2 default to path 1, S3/S4 to path 2; the default path leads the
  // quality order.
  f.sources = {
      {kFixtureSourceBase + 1, 50e3, {1, 2}, 1},
      {kFixtureSourceBase + 2, 50e3, {1, 2}, 1},
      {kFixtureSourceBase + 3, 90e3, {2, 1, 3}, 2},
      {kFixtureSourceBase + 4, 90e3, {2, 1, 3}, 2},
  };
  f.observers = {
      {5, {1, 2}},
      {2, {2}},
      {3, {3}},
      {4, {3}},
      {10, {3}},
  };
  return f;
}

}  // namespace wsnlr
