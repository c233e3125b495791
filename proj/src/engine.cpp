#include "wsnlr/engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <queue>
#include <set>
#include <string>

namespace wsnlr {

void EngineConfig::validate() const {
  if (queue_capacity < 1) throw Error("config invalid: queue capacity must be >= 1");
  if (!(threshold > 0.0 && threshold <= 1.0)) throw Error("config invalid: threshold must be in (0, 1]");
  if (packet_bits < 1 || cn_packet_bits < 1) throw Error("config invalid: packet sizes must be positive");
  if (!(capacity_bps > 0.0)) throw Error("config invalid: capacity must be positive");
  if (!(cn_cooldown >= 0.0)) throw Error("config invalid: cn cooldown");
  if (!(generation_tick > 0.0)) throw Error("config invalid: generation tick");
  if (!(energy.e_elec >= 0.0 && energy.eps_amp >= 0.0)) throw Error("config invalid: energy constants");
}

Admission enqueue(NodeState& node, const Packet& packet, int capacity) {
  ++node.counters.enqueue_attempts;
  if (node.queued_data >= capacity) {
    ++node.counters.dropped;
    return Admission::Dropped;
  }
  node.queue.push_back(packet);
  ++node.queued_data;
  ++node.counters.enqueued;
  return Admission::Accepted;
}

std::vector<Packet> PacketGenerator::generate(const RateAllocation& allocation, double dt, double now) {
  std::vector<Packet> out;
  for (const auto& [pid, rate] : allocation.rates) {
    double& carry = carry_bits_[pid];
    carry += rate * dt;
    while (carry >= static_cast<double>(packet_bits_)) {
      carry -= static_cast<double>(packet_bits_);
      out.push_back({PacketKind::Data, source_, pid, packet_bits_, seq_++, now});
    }
  }
  return out;
}

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Generated: return "generated";
    case Outcome::Enqueued: return "enqueued";
    case Outcome::QueueDrop: return "queue_drop";
    case Outcome::EnergyDrop: return "energy_drop";
    case Outcome::BrokenDrop: return "broken_drop";
    case Outcome::Sent: return "sent";
    case Outcome::Delivered: return "delivered";
    case Outcome::CnEmit: return "cn_emit";
    case Outcome::CnRecv: return "cn_recv";
  }
  return "?";
}

void dump_log(std::ostream& out, std::span<const LogRecord> log) {
  char buf[160];
  for (const auto& r : log) {
    std::snprintf(buf, sizeof buf, "%.9f %s %d %d %llu %d\n", r.time, to_string(r.outcome), r.node, r.source,
                  static_cast<unsigned long long>(r.packet), r.pid);
    out << buf;
  }
}

std::uint64_t RunResult::in_flight() const {
  std::uint64_t n = 0;
  for (const auto& node : nodes) n += static_cast<std::uint64_t>(node.queued_data);
  return n;
}

namespace {

/// Reverse-path fan-out for CNs: for each pid, which upstream neighbors lead
/// to a source using that pid.
struct CnRoutes {
  // (pid, node) -> upstream children on some source's trace
  std::map<std::pair<PathId, NodeId>, std::vector<NodeId>> children;
  // (pid, node) pairs lying on some source's trace
  std::set<std::pair<PathId, NodeId>> on_trace;
};

CnRoutes build_cn_routes(const PathTables& tables, std::span<const SourceState> sources) {
  CnRoutes r;
  for (const auto& s : sources) {
    for (PathId p : s.known_paths) {
      auto trace = path_trace(tables, s.source_id, p);
      for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
        r.on_trace.insert({p, trace[i]});
        auto& kids = r.children[{p, trace[i + 1]}];
        if (std::find(kids.begin(), kids.end(), trace[i]) == kids.end()) kids.push_back(trace[i]);
      }
    }
  }
  for (auto& [key, kids] : r.children) std::sort(kids.begin(), kids.end());
  return r;
}

class Simulator {
 public:
  Simulator(const Topology& topology, const PathTables& tables, std::vector<SourceState> sources,
            const EngineConfig& config, double duration)
      : topo_(topology), tables_(tables), config_(config), duration_(duration), cooldown_(config.cn_cooldown) {
    result_.sink_id = topology.sink_id;
    result_.duration = duration;
    result_.nodes.resize(topology.size());
    for (const auto& n : topology.nodes) {
      auto& st = result_.nodes[static_cast<std::size_t>(n.id)];
      st.id = n.id;
      st.residual_energy = n.initial_energy;
    }
    cn_enabled_ = false;
    for (std::size_t i = 0; i < sources.size(); ++i) {
      source_index_[sources[i].source_id] = i;
      generators_.emplace_back(sources[i].source_id, config.packet_bits);
      result_.sources.push_back({sources[i].source_id, 0, 0});
      if (sources[i].mode == Mode::Incremental || sources[i].mode == Mode::Rebalance) cn_enabled_ = true;
    }
    routes_ = build_cn_routes(tables, sources);
    sources_ = std::move(sources);
  }

  RunResult run() {
    for (std::size_t i = 0; i < sources_.size(); ++i)
      if (0.0 < duration_) push({0.0, EventKind::Generate, sources_[i].source_id, 0, 0});

    while (!events_.empty()) {
      SimEvent ev = events_.top();
      if (ev.time > duration_) break;
      events_.pop();
      now_ = ev.time;
      switch (ev.kind) {
        case EventKind::Generate: on_generate(ev); break;
        case EventKind::TransmitDone: on_transmit_done(ev); break;
        case EventKind::CnHop: on_cn_hop(ev); break;
      }
    }
    result_.final_sources = std::move(sources_);
    return std::move(result_);
  }

 private:
  struct CnMessage {
    CongestionNotification cn;
    std::uint64_t emission = 0;
    double emitted_at = 0.0;
  };

  NodeState& node(NodeId id) { return result_.nodes[static_cast<std::size_t>(id)]; }

  void push(SimEvent ev) {
    ev.seq = next_seq_++;
    events_.push(ev);
  }

  void log(Outcome o, NodeId n, NodeId src, std::uint64_t packet, PathId pid) {
    if (config_.record_log) result_.log.push_back({now_, o, n, src, packet, pid});
  }

  /// Debits a sensor. Returns false, leaving the balance untouched and the
  /// node dead, when it cannot pay.
  bool charge(NodeId id, double joules) {
    if (id == topo_.sink_id) return true;
    NodeState& n = node(id);
    if (!n.alive) return false;
    if (n.residual_energy < joules) {
      kill(id);
      return false;
    }
    n.residual_energy -= joules;
    result_.energy_charged += joules;
    return true;
  }

  void kill(NodeId id) {
    NodeState& n = node(id);
    n.alive = false;
    // A transmission in progress is abandoned with the rest of the data.
    // Queued CNs are never lost: they are handed on at once.
    std::vector<Packet> cns;
    while (!n.queue.empty()) {
      const Packet p = n.queue.front();
      n.queue.pop_front();
      if (p.kind == PacketKind::Cn) {
        cns.push_back(p);
        continue;
      }
      ++n.counters.energy_dropped;
      log(Outcome::EnergyDrop, id, p.source_id, p.seq, p.pid);
    }
    n.queued_data = 0;
    n.busy = false;
    for (const auto& p : cns) cn_arrives(p.to, p.seq);
  }

  void on_generate(const SimEvent& ev) {
    const std::size_t idx = source_index_.at(ev.node_id);
    auto packets = generators_[idx].generate(sources_[idx].allocation, config_.generation_tick, now_);
    for (const auto& p : packets) {
      ++result_.sources[idx].generated;
      node(ev.node_id).counters.generated_bits += static_cast<std::uint64_t>(p.size);
      log(Outcome::Generated, ev.node_id, p.source_id, p.seq, p.pid);
      arrive(ev.node_id, p);
    }
    const double next = static_cast<double>(ev.payload + 1) * config_.generation_tick;
    if (next < duration_) push({next, EventKind::Generate, ev.node_id, 0, ev.payload + 1});
  }

  /// A data packet reaches a sensor (its own source included).
  void arrive(NodeId id, const Packet& p) {
    NodeState& n = node(id);
    if (!n.alive) {
      ++n.counters.energy_dropped;
      log(Outcome::EnergyDrop, id, p.source_id, p.seq, p.pid);
      return;
    }
    if (enqueue(n, p, config_.queue_capacity) == Admission::Accepted) {
      log(Outcome::Enqueued, id, p.source_id, p.seq, p.pid);
      if (!n.busy) start_service(id);
    } else {
      log(Outcome::QueueDrop, id, p.source_id, p.seq, p.pid);
    }
    if (cn_enabled_ && node_congested(n.queued_data, config_.queue_capacity, config_.threshold))
      emit(id);
  }

  void start_service(NodeId id) {
    NodeState& n = node(id);
    if (n.queue.empty() || !n.alive) {
      n.busy = false;
      return;
    }
    n.busy = true;
    push({now_ + service_time(n.queue.front().size, config_.capacity_bps), EventKind::TransmitDone, id, 0, 0});
  }

  void on_transmit_done(const SimEvent& ev) {
    const NodeId id = ev.node_id;
    NodeState& n = node(id);
    if (!n.alive || n.queue.empty()) return;
    Packet p = n.queue.front();
    n.queue.pop_front();
    if (p.kind == PacketKind::Cn) {
      // A failed charge kills the sender but the CN still goes through.
      charge(id, config_.energy.tx(p.size, topo_.link_length(id, p.to)));
      cn_arrives(p.to, p.seq);
      start_service(id);
      return;
    }
    --n.queued_data;
    ++n.counters.dequeued;

    const PathTableEntry* entry = tables_.find_forwarding(id, p.pid);
    if (!entry) {
      ++n.counters.broken_dropped;
      log(Outcome::BrokenDrop, id, p.source_id, p.seq, p.pid);
      start_service(id);
      return;
    }
    const NodeId next = entry->next_node;
    if (!charge(id, config_.energy.tx(p.size, topo_.link_length(id, next)))) {
      // kill() already flushed the rest of the queue.
      ++n.counters.energy_dropped;
      log(Outcome::EnergyDrop, id, p.source_id, p.seq, p.pid);
      return;
    }
    if (p.source_id != id) n.counters.relayed_bits += static_cast<std::uint64_t>(p.size);
    log(Outcome::Sent, id, p.source_id, p.seq, p.pid);

    if (next == topo_.sink_id) {
      ++node(next).counters.received_at_sink;
      ++result_.sources[source_index_.at(p.source_id)].delivered;
      log(Outcome::Delivered, next, p.source_id, p.seq, p.pid);
    } else if (!node(next).alive || !charge(next, config_.energy.rx(p.size))) {
      ++node(next).counters.energy_dropped;
      log(Outcome::EnergyDrop, next, p.source_id, p.seq, p.pid);
    } else {
      arrive(next, p);
    }
    start_service(id);
  }

  // -- congestion notifications ------------------------------------------

  void emit(NodeId id) {
    std::vector<PathId> pids;
    for (const auto* rows : {&tables_.table(id), &tables_.shadowed[static_cast<std::size_t>(id)]})
      for (const auto& e : *rows)
        if (routes_.on_trace.contains({e.pid, id})) pids.push_back(e.pid);
    std::sort(pids.begin(), pids.end());
    pids.erase(std::unique(pids.begin(), pids.end()), pids.end());
    auto cns = cooldown_.emit(id, pids, now_);
    if (cns.empty()) return;

    const std::uint64_t emission = next_emission_++;
    for (const auto& cn : cns) {
      ++result_.cn_count;
      const std::uint64_t msg = messages_.size();
      messages_.push_back({cn, emission, now_});
      log(Outcome::CnEmit, id, kNoNode, emission, cn.pid);
      receive_cn(id, msg);
    }
  }

  /// The CN is at `at`: react if `at` is a source, then pass it upstream.
  void receive_cn(NodeId at, std::uint64_t msg) {
    const CnMessage m = messages_[msg];
    if (auto it = source_index_.find(at); it != source_index_.end()) react(it->second, m);

    auto kids = routes_.children.find({m.cn.pid, at});
    if (kids == routes_.children.end()) return;
    for (NodeId child : kids->second) {
      if (config_.analytic_cn) {
        receive_cn(child, msg);
        continue;
      }
      NodeState& n = node(at);
      if (config_.cn_in_fifo && n.alive) {
        n.queue.push_back({PacketKind::Cn, kNoNode, m.cn.pid, config_.cn_packet_bits, msg, now_, child});
        if (!n.busy) start_service(at);
        continue;
      }
      // Control traffic is never lost; a node that cannot pay dies but the
      // CN still goes through.
      charge(at, config_.energy.tx(config_.cn_packet_bits, topo_.link_length(at, child)));
      push({now_ + service_time(config_.cn_packet_bits, config_.capacity_bps), EventKind::CnHop, child, 0, msg});
    }
  }

  void on_cn_hop(const SimEvent& ev) { cn_arrives(ev.node_id, ev.payload); }

  void cn_arrives(NodeId at, std::uint64_t msg) {
    charge(at, config_.energy.rx(config_.cn_packet_bits));
    log(Outcome::CnRecv, at, kNoNode, messages_[msg].emission, messages_[msg].cn.pid);
    receive_cn(at, msg);
  }

  void react(std::size_t idx, const CnMessage& m) {
    SourceState& s = sources_[idx];
    if (!s.knows(m.cn.pid)) return;

    // CNs of one emission are judged against the allocation held when the
    // first of them arrived.
    auto& snaps = snapshots_[idx];
    std::erase_if(snaps, [&](const auto& kv) { return kv.second.emitted_at + 1.0 < m.emitted_at; });
    auto it = snaps.try_emplace(m.emission, Snapshot{s.allocation, m.emitted_at}).first;
    SourceState before = s;
    before.allocation = it->second.allocation;
    if (!should_react(before, m.cn)) return;

    RateAllocation next = s.mode == Mode::Incremental ? apply_cn_mode2(s, m.cn) : apply_cn_mode3(s, m.cn);
    if (next == s.allocation) return;
    result_.allocation_log.push_back({now_, s.source_id, m.cn, s.allocation, next});
    s.allocation = std::move(next);
  }

  struct Snapshot {
    RateAllocation allocation;
    double emitted_at = 0.0;
  };

  const Topology& topo_;
  const PathTables& tables_;
  EngineConfig config_;
  double duration_;
  double now_ = 0.0;
  bool cn_enabled_ = false;
  CnCooldown cooldown_;
  CnRoutes routes_;
  std::vector<SourceState> sources_;
  std::map<NodeId, std::size_t> source_index_;
  std::vector<PacketGenerator> generators_;
  std::map<std::size_t, std::map<std::uint64_t, Snapshot>> snapshots_;
  std::vector<CnMessage> messages_;
  std::uint64_t next_emission_ = 0;
  std::uint64_t next_seq_ = 0;
  std::priority_queue<SimEvent, std::vector<SimEvent>, EventLater> events_;
  RunResult result_;
};

}  // namespace

RunResult run(const Topology& topology, const PathTables& tables, std::vector<SourceState> sources,
              const EngineConfig& config, double duration) {
  config.validate();
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw Error("config invalid: duration must be >= 0");
  Simulator sim(topology, tables, std::move(sources), config, duration);
  return sim.run();
}

}  // namespace wsnlr
