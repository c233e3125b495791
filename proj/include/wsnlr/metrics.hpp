#pragma once

#include <cstdint>
#include <map>
#include <span>

#include "wsnlr/engine.hpp"

namespace wsnlr {

/// Jain's fairness index (sum v)^2 / (N * sum v^2) over nonnegative values.
/// Throws Error("undefined ...") when empty or all zero.
double jain_index(std::span<const double> values);

/// Summary of one run. Fairness and energy figures are NaN where the
/// underlying quantity is undefined (no traffic, no delivery).
struct RunMetrics {
  double drop_rate = 0.0;
  double rate_fairness = 0.0;
  double load_fairness = 0.0;
  double energy_per_delivered = 0.0;  // joules per packet
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
  std::uint64_t cn_count = 0;
  std::map<NodeId, double> per_source_success_rate;
};

/// Data-packet drops at sensor queues over enqueue attempts there; 0 when
/// nothing was offered.
double drop_rate(const RunResult& run);

/// Delivered-at-sink over generated, per source. Sources that generated
/// nothing are left out.
std::map<NodeId, double> success_rates(const RunResult& run);

/// Jain index of the per-source success rates.
double rate_fairness(const RunResult& run);

/// Jain index of the bits relayed by sensors that relayed anything.
double load_fairness(const RunResult& run);

/// Energy spent by all sensors per packet received at the sink.
/// Throws Error("no delivery") when nothing arrived.
double energy_per_delivered(const RunResult& run);

double energy_consumed(const RunResult& run, const Topology& topology);

RunMetrics compute_metrics(const RunResult& run);

}  // namespace wsnlr
