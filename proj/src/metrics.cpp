#include "wsnlr/metrics.hpp"

#include <limits>
#include <vector>

namespace wsnlr {

double jain_index(std::span<const double> values) {
  if (values.empty()) throw Error("undefined: jain index of an empty set");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    if (v < 0.0) throw Error("undefined: jain index needs nonnegative values");
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) throw Error("undefined: jain index of all-zero values");
  return (sum * sum) / (static_cast<double>(values.size()) * sum_sq);
}

double drop_rate(const RunResult& run) {
  std::uint64_t drops = 0;
  std::uint64_t attempts = 0;
  for (const auto& n : run.nodes) {
    if (n.id == run.sink_id) continue;
    drops += n.counters.dropped;
    attempts += n.counters.enqueue_attempts;
  }
  return attempts == 0 ? 0.0 : static_cast<double>(drops) / static_cast<double>(attempts);
}

std::map<NodeId, double> success_rates(const RunResult& run) {
  std::map<NodeId, double> out;
  for (const auto& s : run.sources)
    if (s.generated > 0) out[s.id] = static_cast<double>(s.delivered) / static_cast<double>(s.generated);
  return out;
}

double rate_fairness(const RunResult& run) {
  std::vector<double> v;
  for (const auto& [id, r] : success_rates(run)) v.push_back(r);
  return jain_index(v);
}

double load_fairness(const RunResult& run) {
  std::vector<double> v;
  for (const auto& n : run.nodes)
    if (n.id != run.sink_id && n.counters.relayed_bits > 0) v.push_back(static_cast<double>(n.counters.relayed_bits));
  return jain_index(v);
}

double energy_per_delivered(const RunResult& run) {
  std::uint64_t delivered = 0;
  for (const auto& s : run.sources) delivered += s.delivered;
  if (delivered == 0) throw Error("no delivery: energy per delivered packet is undefined");
  return run.energy_charged / static_cast<double>(delivered);
}

double energy_consumed(const RunResult& run, const Topology& topology) {
  double sum = 0.0;
  for (const auto& n : run.nodes)
    if (n.id != run.sink_id) sum += topology.node(n.id).initial_energy - n.residual_energy;
  return sum;
}

RunMetrics compute_metrics(const RunResult& run) {
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  RunMetrics m;
  m.drop_rate = drop_rate(run);
  m.per_source_success_rate = success_rates(run);
  for (const auto& s : run.sources) m.delivered += s.delivered;
  for (const auto& n : run.nodes) m.dropped += n.counters.dropped + n.counters.energy_dropped + n.counters.broken_dropped;
  m.cn_count = run.cn_count;
  try {
    m.rate_fairness = rate_fairness(run);
  } catch (const Error&) {
    m.rate_fairness = nan;
  }
  try {
    m.load_fairness = load_fairness(run);
  } catch (const Error&) {
    m.load_fairness = nan;
  }
  m.energy_per_delivered = m.delivered > 0 ? energy_per_delivered(run) : nan;
  return m;
}

}  // namespace wsnlr
