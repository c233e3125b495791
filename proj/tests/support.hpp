#pragma once

// Test-only helpers: hand-built topologies, random generators and
// independent oracles. Nothing here calls into the code paths it checks.

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "wsnlr/congestion.hpp"
#include "wsnlr/engine.hpp"
#include "wsnlr/routing.hpp"
#include "wsnlr/scenario.hpp"

namespace wsnlr::testing {

/// Node 0 is the sink at `positions[0]`; sensor i gets `energies[i - 1]`.
Topology make_topology(const std::vector<Point>& positions, const std::vector<double>& energies, double range);

/// Sink plus `sensors` nodes placed uniformly in a square field.
Topology random_topology(std::mt19937_64& rng, int sensors, double field, double range, double energy_max = 0.4);

/// Best bottleneck residual energy from `start` to the sink for each pid,
/// found by enumerating simple paths. Intended for graphs of <= 8 nodes.
std::map<PathId, double> widest_paths_oracle(const Topology& topology, NodeId start);

/// Mode-3 reaction replayed path by path on a plain array indexed like
/// `known`: the congested path's rate is removed, then handed out in P equal
/// shares one path at a time.
std::vector<double> mode3_step_oracle(const std::vector<PathId>& known, std::vector<double> rates, PathId congested);

/// (sum v)^2 / (N sum v^2), evaluated in long double.
double jain_oracle(const std::vector<double>& v);

bool close_rel(double a, double b, double rel);

/// Outcome of a property suite: number of generated cases and the first
/// counterexample, if any.
struct PropertyResult {
  int cases = 0;
  std::string failure;
  bool ok() const { return failure.empty(); }
};

PropertyResult prop_rate_conservation(std::uint64_t seed, int cases);
PropertyResult prop_mode2_monotone(std::uint64_t seed, int cases);
PropertyResult prop_mode3_closed_form(std::uint64_t seed, int cases);
PropertyResult prop_mode3_convergence(std::uint64_t seed, int cases);
PropertyResult prop_jain(std::uint64_t seed, int cases);
PropertyResult prop_routing_acyclic(std::uint64_t seed, int cases);
PropertyResult prop_routing_widest(std::uint64_t seed, int cases);
PropertyResult prop_run_conservation(std::uint64_t seed, int cases);

}  // namespace wsnlr::testing
