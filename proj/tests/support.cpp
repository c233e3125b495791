#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "wsnlr/experiment.hpp"
#include "wsnlr/metrics.hpp"

namespace wsnlr::testing {

Topology make_topology(const std::vector<Point>& positions, const std::vector<double>& energies, double range) {
  Topology t;
  t.radio_range = range;
  t.sink_id = 0;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    const double e = i == 0 ? std::numeric_limits<double>::infinity() : energies.at(i - 1);
    t.nodes.push_back({static_cast<NodeId>(i), positions[i], e});
  }
  double w = 0.0, h = 0.0;
  for (const auto& p : positions) {
    w = std::max(w, p.x);
    h = std::max(h, p.y);
  }
  t.field_width = std::max(w, 1.0);
  t.field_height = std::max(h, 1.0);
  return t;
}

Topology random_topology(std::mt19937_64& rng, int sensors, double field, double range, double energy_max) {
  std::uniform_real_distribution<double> pos(0.0, field);
  std::uniform_real_distribution<double> en(0.0, energy_max);
  std::vector<Point> pts{{field, field}};
  std::vector<double> energies;
  for (int i = 0; i < sensors; ++i) {
    pts.push_back({pos(rng), pos(rng)});
    energies.push_back(en(rng));
  }
  Topology t = make_topology(pts, energies, range);
  t.field_width = field;
  t.field_height = field;
  return t;
}

std::map<PathId, double> widest_paths_oracle(const Topology& topology, NodeId start) {
  const auto n = static_cast<NodeId>(topology.size());
  auto linked = [&](NodeId a, NodeId b) {
    return a != b && distance(topology.node(a).position, topology.node(b).position) <= topology.radio_range;
  };
  std::map<PathId, double> best;
  std::vector<char> on_path(topology.size(), 0);
  std::function<void(NodeId, double)> dfs = [&](NodeId at, double bottleneck) {
    bottleneck = std::min(bottleneck, topology.node(at).initial_energy);
    if (linked(at, topology.sink_id)) {
      auto [it, fresh] = best.try_emplace(at, bottleneck);
      if (!fresh) it->second = std::max(it->second, bottleneck);
    }
    on_path[static_cast<std::size_t>(at)] = 1;
    for (NodeId next = 0; next < n; ++next)
      if (next != topology.sink_id && !on_path[static_cast<std::size_t>(next)] && linked(at, next)) dfs(next, bottleneck);
    on_path[static_cast<std::size_t>(at)] = 0;
  };
  dfs(start, std::numeric_limits<double>::infinity());
  return best;
}

std::vector<double> mode3_step_oracle(const std::vector<PathId>& known, std::vector<double> rates, PathId congested) {
  std::size_t at = known.size();
  for (std::size_t i = 0; i < known.size(); ++i)
    if (known[i] == congested) at = i;
  if (at == known.size() || rates[at] == 0.0) return rates;
  const double moved = rates[at];
  rates[at] = 0.0;
  const double share = moved / static_cast<double>(known.size());
  for (std::size_t i = 0; i < known.size(); ++i) rates[i] += share;
  return rates;
}

double jain_oracle(const std::vector<double>& v) {
  long double s = 0.0L, s2 = 0.0L;
  for (double x : v) {
    s += x;
    s2 += static_cast<long double>(x) * x;
  }
  return static_cast<double>((s * s) / (static_cast<long double>(v.size()) * s2));
}

bool close_rel(double a, double b, double rel) {
  if (a == b) return true;
  return std::abs(a - b) <= rel * std::max(std::abs(a), std::abs(b));
}

namespace {

template <class... Args>
std::string describe(Args&&... args) {
  std::ostringstream os;
  (os << ... << args);
  return os.str();
}

/// 1..5 distinct pids drawn from 1..20, in random order.
std::vector<PathId> random_known(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> count(1, 5);
  std::vector<PathId> pool(20);
  for (int i = 0; i < 20; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
  std::shuffle(pool.begin(), pool.end(), rng);
  pool.resize(static_cast<std::size_t>(count(rng)));
  return pool;
}

SourceState random_source(std::mt19937_64& rng, Mode mode) {
  SourceState s;
  s.source_id = 99;
  s.base_rate = std::uniform_real_distribution<double>(1e3, 1e6)(rng);
  s.known_paths = random_known(rng);
  s.mode = mode;
  s.allocation = init_allocation(s);
  return s;
}

/// A known pid most of the time, otherwise one no source knows.
PathId random_cn_pid(std::mt19937_64& rng, const SourceState& s) {
  if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) return 21 + std::uniform_int_distribution<int>(0, 5)(rng);
  return s.known_paths[std::uniform_int_distribution<std::size_t>(0, s.known_paths.size() - 1)(rng)];
}

std::string alloc_str(const RateAllocation& a) {
  std::ostringstream os;
  os << '{';
  for (const auto& [p, r] : a.rates) os << p << ':' << r << ' ';
  os << '}';
  return os.str();
}

}  // namespace

PropertyResult prop_rate_conservation(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  for (; res.cases < cases; ++res.cases) {
    const Mode mode = mode_from_int(std::uniform_int_distribution<int>(0, 3)(rng));
    SourceState s = random_source(rng, mode);
    const int steps = std::uniform_int_distribution<int>(0, 20)(rng);
    for (int k = 0; k < steps; ++k) {
      std::vector<CongestionNotification> batch{{5, random_cn_pid(rng, s)}};
      if (std::uniform_int_distribution<int>(0, 2)(rng) == 0) batch.push_back({5, random_cn_pid(rng, s)});
      react_to_batch(s, batch);
      if (!close_rel(s.allocation.total(), s.base_rate, 1e-9))
        return res.failure = describe("case ", res.cases, ": total ", s.allocation.total(), " != base ", s.base_rate), res;
      for (const auto& [pid, r] : s.allocation.rates)
        if (!s.knows(pid) || !(r > 0.0))
          return res.failure = describe("case ", res.cases, ": bad entry in ", alloc_str(s.allocation)), res;
    }
  }
  return res;
}

PropertyResult prop_mode2_monotone(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  for (; res.cases < cases; ++res.cases) {
    SourceState s = random_source(rng, Mode::Incremental);
    const int steps = std::uniform_int_distribution<int>(0, 20)(rng);
    for (int k = 0; k < steps; ++k) {
      const RateAllocation before = s.allocation;
      const CongestionNotification cn{5, random_cn_pid(rng, s)};
      react_to_batch(s, std::span(&cn, 1));
      for (const auto& [pid, r] : before.rates)
        if (!s.allocation.active(pid))
          return res.failure = describe("case ", res.cases, ": pid ", pid, " deactivated"), res;
      const double first = s.allocation.rates.begin()->second;
      for (const auto& [pid, r] : s.allocation.rates)
        if (!close_rel(r, first, 1e-12))
          return res.failure = describe("case ", res.cases, ": unequal split ", alloc_str(s.allocation)), res;
      const bool reacts = s.knows(cn.pid) && before.active_count() < s.known_paths.size();
      const std::size_t expected = before.active_count() + (reacts ? 1 : 0);
      if (s.allocation.active_count() != expected)
        return res.failure = describe("case ", res.cases, ": active count ", s.allocation.active_count(), " want ",
                                      expected),
               res;
    }
  }
  return res;
}

PropertyResult prop_mode3_closed_form(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  for (; res.cases < cases; ++res.cases) {
    SourceState s = random_source(rng, Mode::Rebalance);
    std::vector<double> oracle(s.known_paths.size(), 0.0);
    oracle[0] = s.base_rate;
    const int steps = std::uniform_int_distribution<int>(1, 20)(rng);
    for (int k = 0; k < steps; ++k) {
      const CongestionNotification cn{5, random_cn_pid(rng, s)};
      s.allocation = apply_cn_mode3(s, cn);
      oracle = mode3_step_oracle(s.known_paths, oracle, cn.pid);
      for (std::size_t i = 0; i < oracle.size(); ++i) {
        const PathId pid = s.known_paths[i];
        if (s.allocation.active(pid) != (oracle[i] > 0.0) ||
            !close_rel(s.allocation.rate(pid), oracle[i], 1e-9))
          return res.failure = describe("case ", res.cases, " step ", k, ": pid ", pid, " got ",
                                        s.allocation.rate(pid), " want ", oracle[i]),
                 res;
      }
    }
  }
  return res;
}

PropertyResult prop_mode3_convergence(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  for (; res.cases < cases; ++res.cases) {
    SourceState s = random_source(rng, Mode::Rebalance);
    const PathId p = s.known_paths.front();
    const double paths = static_cast<double>(s.known_paths.size());
    const int k = std::uniform_int_distribution<int>(1, 30)(rng);
    for (int i = 0; i < k; ++i) s.allocation = apply_cn_mode3(s, {5, p});
    const double bound = s.base_rate / paths + s.base_rate * std::pow(1.0 - 1.0 / paths, k);
    if (s.allocation.rate(p) > bound * (1.0 + 1e-12))
      return res.failure = describe("case ", res.cases, ": rate ", s.allocation.rate(p), " above bound ", bound), res;
  }
  return res;
}

PropertyResult prop_jain(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  for (; res.cases < cases; ++res.cases) {
    const int n = std::uniform_int_distribution<int>(1, 50)(rng);
    std::vector<double> v;
    for (int i = 0; i < n; ++i)
      v.push_back(std::uniform_int_distribution<int>(0, 3)(rng) == 0 ? 0.0
                                                                      : std::uniform_real_distribution<double>(0, 1e6)(rng));
    v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)] = 1.0 + std::uniform_real_distribution<double>(0, 1e6)(rng);
    const double j = jain_index(v);
    if (j < 1.0 / n - 1e-12 || j > 1.0 + 1e-12)
      return res.failure = describe("case ", res.cases, ": index ", j, " outside [1/", n, ", 1]"), res;
    if (!close_rel(j, jain_oracle(v), 1e-12))
      return res.failure = describe("case ", res.cases, ": index ", j, " oracle ", jain_oracle(v)), res;
    const double c = std::exp(std::uniform_real_distribution<double>(-7.0, 7.0)(rng));
    std::vector<double> scaled = v;
    for (double& x : scaled) x *= c;
    if (!close_rel(jain_index(scaled), j, 1e-12))
      return res.failure = describe("case ", res.cases, ": scale ", c, " changed index"), res;
  }
  return res;
}

PropertyResult prop_routing_acyclic(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  for (; res.cases < cases; ++res.cases) {
    const int n = std::uniform_int_distribution<int>(1, 200)(rng);
    const double range = std::uniform_real_distribution<double>(150.0, 600.0)(rng);
    Topology topo = random_topology(rng, n, 1000.0, range);
    std::vector<NodeId> candidates;
    for (NodeId id = 1; id <= n; ++id)
      if (sources_connected(topo, {id})) candidates.push_back(id);
    std::shuffle(candidates.begin(), candidates.end(), rng);
    candidates.resize(std::min<std::size_t>(candidates.size(), 5));
    std::sort(candidates.begin(), candidates.end());
    RoutingConfig cfg;
    cfg.metric = std::uniform_int_distribution<int>(0, 1)(rng) ? QualityMetric::Lifetime : QualityMetric::ResidualEnergy;
    const PathTables tables = build_paths(topo, candidates, cfg);

    for (NodeId v = 1; v <= n; ++v) {
      std::vector<PathId> pids;
      for (const auto& e : tables.table(v)) pids.push_back(e.pid);
      for (const auto& e : tables.shadowed[static_cast<std::size_t>(v)]) pids.push_back(e.pid);
      for (PathId pid : pids) {
        std::vector<NodeId> trace;
        try {
          trace = path_trace(tables, v, pid);
        } catch (const Error& e) {
          return res.failure = describe("case ", res.cases, ": node ", v, " pid ", pid, ": ", e.what()), res;
        }
        if (trace.size() < 2 || trace.back() != topo.sink_id || trace[trace.size() - 2] != pid)
          return res.failure = describe("case ", res.cases, ": node ", v, " pid ", pid, " does not end at the sink via pid"),
                 res;
      }
    }
    for (NodeId s : candidates) {
      std::set<NodeId> next;
      for (const auto& e : tables.table(s))
        if (!next.insert(e.next_node).second)
          return res.failure = describe("case ", res.cases, ": source ", s, " keeps two paths via ", e.next_node), res;
    }
  }
  return res;
}

PropertyResult prop_routing_widest(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  for (; res.cases < cases; ++res.cases) {
    const int n = std::uniform_int_distribution<int>(1, 7)(rng);
    Topology topo = random_topology(rng, n, 600.0, 300.0);
    const PathTables tables = build_paths(topo, {});
    for (NodeId v = 1; v <= n; ++v) {
      const auto want = widest_paths_oracle(topo, v);
      std::map<PathId, double> got;
      for (const auto& e : tables.table(v)) got[e.pid] = e.quality;
      if (got != want) {
        std::ostringstream os;
        os << "case " << res.cases << ": node " << v << " got";
        for (auto [p, q] : got) os << ' ' << p << '=' << q;
        os << " want";
        for (auto [p, q] : want) os << ' ' << p << '=' << q;
        return res.failure = os.str(), res;
      }
    }
  }
  return res;
}

PropertyResult prop_run_conservation(std::uint64_t seed, int cases) {
  std::mt19937_64 rng(seed);
  PropertyResult res;
  while (res.cases < cases) {
    RunConfig cfg;
    cfg.scenario.n_nodes = std::uniform_int_distribution<int>(20, 60)(rng);
    cfg.scenario.seed = rng();
    cfg.scenario.mode = mode_from_int(std::uniform_int_distribution<int>(0, 3)(rng));
    cfg.scenario.duration = std::uniform_real_distribution<double>(0.0, 3.0)(rng);
    cfg.scenario.source_rate_bps = std::uniform_real_distribution<double>(20e3, 300e3)(rng);
    cfg.engine.queue_capacity = std::uniform_int_distribution<int>(1, 64)(rng);
    if (std::uniform_int_distribution<int>(0, 1)(rng)) cfg.engine.energy = RadioEnergyModel{50e-9, 100e-12};
    cfg.engine.analytic_cn = std::uniform_int_distribution<int>(0, 4)(rng) == 0;
    Experiment ex;
    try {
      ex = run_experiment(cfg);
    } catch (const Error& e) {
      if (std::string(e.what()).starts_with("unconnectable")) continue;
      return res.failure = describe("case ", res.cases, ": ", e.what()), res;
    }
    const RunResult& r = ex.result;

    std::uint64_t generated = 0, delivered = 0, lost = 0, queued = 0;
    for (const auto& s : r.sources) {
      generated += s.generated;
      delivered += s.delivered;
    }
    double spent = 0.0;
    for (const auto& n : r.nodes) {
      lost += n.counters.dropped + n.counters.energy_dropped + n.counters.broken_dropped;
      queued += static_cast<std::uint64_t>(n.queued_data);
      if (n.queued_data > cfg.engine.queue_capacity)
        return res.failure = describe("case ", res.cases, ": node ", n.id, " holds ", n.queued_data, " packets"), res;
      if (n.id == r.sink_id) continue;
      const double initial = ex.topology.node(n.id).initial_energy;
      if (n.residual_energy < 0.0 || n.residual_energy > initial)
        return res.failure = describe("case ", res.cases, ": node ", n.id, " residual ", n.residual_energy), res;
      spent += initial - n.residual_energy;
    }
    if (generated != delivered + lost + queued)
      return res.failure = describe("case ", res.cases, ": generated ", generated, " != delivered ", delivered,
                                    " + lost ", lost, " + queued ", queued),
             res;
    if (!(close_rel(spent, r.energy_charged, 1e-9) || std::abs(spent - r.energy_charged) < 1e-15))
      return res.failure = describe("case ", res.cases, ": energy spent ", spent, " != charged ", r.energy_charged), res;
    ++res.cases;
  }
  return res;
}

}  // namespace wsnlr::testing
