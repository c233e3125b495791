#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <map>
#include <span>
#include <vector>

#include "wsnlr/congestion.hpp"
#include "wsnlr/energy.hpp"
#include "wsnlr/routing.hpp"
#include "wsnlr/scenario.hpp"

namespace wsnlr {

struct EngineConfig {
  int queue_capacity = 64;         // packets
  double threshold = 0.8;          // fraction of queue_capacity
  int packet_bits = 4000;
  int cn_packet_bits = 128;
  double capacity_bps = 250e3;     // per-node transmit capacity
  double cn_cooldown = 1.0;        // seconds, per (node, pid)
  double generation_tick = 0.01;   // seconds between source generation steps
  bool analytic_cn = false;        // CNs delivered instantly and for free
  bool cn_in_fifo = true;          // CNs wait behind data in each node's transmit queue
  bool record_log = false;
  // Stock first-order constants scaled by 1/100: at full strength a
  // 4000-bit packet over a 300 m hop costs ~0.04 J and sensors holding
  // [0, 0.4] J die within the first second.
  RadioEnergyModel energy{0.5e-9, 1e-12};

  void validate() const;
};

enum class PacketKind : std::uint8_t { Data, Cn };

struct Packet {
  PacketKind kind = PacketKind::Data;
  NodeId source_id = kNoNode;
  PathId pid = kNoPath;
  int size = 0;  // bits
  std::uint64_t seq = 0;
  double created_at = 0.0;
  NodeId to = kNoNode;  // CN packets only: the upstream neighbor it is sent to
};

struct NodeCounters {
  std::uint64_t enqueue_attempts = 0;
  std::uint64_t enqueued = 0;
  std::uint64_t dequeued = 0;
  std::uint64_t dropped = 0;         // queue overflow
  std::uint64_t energy_dropped = 0;  // node could not pay for rx/tx
  std::uint64_t broken_dropped = 0;  // no forwarding entry for the pid
  std::uint64_t relayed_bits = 0;    // data bits sent for other sources
  std::uint64_t generated_bits = 0;
  std::uint64_t received_at_sink = 0;
};

struct NodeState {
  NodeId id = kNoNode;
  std::deque<Packet> queue;
  int queued_data = 0;  // data packets in `queue`; CNs are not counted
  double residual_energy = 0.0;
  bool alive = true;
  bool busy = false;
  NodeCounters counters;
};

enum class Admission { Accepted, Dropped };

/// Drop-tail admission of a data packet into a bounded FIFO. Only data
/// packets count against the capacity.
Admission enqueue(NodeState& node, const Packet& packet, int capacity);

inline double service_time(int bits, double capacity_bps) { return static_cast<double>(bits) / capacity_bps; }

/// Splits a source's allocation into fixed-size packets. Each active path
/// accrues rate * dt bits per step; whole packets are emitted and the
/// remainder carries to the next step.
class PacketGenerator {
 public:
  PacketGenerator(NodeId source, int packet_bits) : source_(source), packet_bits_(packet_bits) {}

  std::vector<Packet> generate(const RateAllocation& allocation, double dt, double now);

 private:
  NodeId source_;
  int packet_bits_;
  std::uint64_t seq_ = 0;
  std::map<PathId, double> carry_bits_;
};

enum class EventKind : std::uint8_t { Generate, TransmitDone, CnHop };

struct SimEvent {
  double time = 0.0;
  EventKind kind = EventKind::Generate;
  NodeId node_id = kNoNode;
  std::uint64_t seq = 0;
  std::uint64_t payload = 0;
};

/// Min-heap order: earliest time, then lowest node, then insertion order.
struct EventLater {
  bool operator()(const SimEvent& a, const SimEvent& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.node_id != b.node_id) return a.node_id > b.node_id;
    return a.seq > b.seq;
  }
};

enum class Outcome : std::uint8_t { Generated, Enqueued, QueueDrop, EnergyDrop, BrokenDrop, Sent, Delivered, CnEmit, CnRecv };

struct LogRecord {
  double time = 0.0;
  Outcome outcome = Outcome::Generated;
  NodeId node = kNoNode;
  NodeId source = kNoNode;
  std::uint64_t packet = 0;  // data packet seq, or CN emission id
  PathId pid = kNoPath;
};

const char* to_string(Outcome o);

/// One line per record: time outcome node source packet pid.
void dump_log(std::ostream& out, std::span<const LogRecord> log);

struct SourceReport {
  NodeId id = kNoNode;
  std::uint64_t generated = 0;
  std::uint64_t delivered = 0;
};

struct RunResult {
  std::vector<NodeState> nodes;  // final state, indexed by id
  NodeId sink_id = 0;
  std::vector<SourceReport> sources;
  std::vector<SourceState> final_sources;
  std::vector<AllocationChange> allocation_log;
  std::vector<LogRecord> log;
  std::uint64_t cn_count = 0;
  double energy_charged = 0.0;  // sum of every accepted charge
  double duration = 0.0;

  std::uint64_t in_flight() const;
};

/// Runs the data plane over [0, duration]. `sources` carry their initial
/// allocations and are updated by CN reactions in the returned copy.
RunResult run(const Topology& topology, const PathTables& tables, std::vector<SourceState> sources,
              const EngineConfig& config, double duration);

}  // namespace wsnlr
