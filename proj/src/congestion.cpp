#include "wsnlr/congestion.hpp"

#include <algorithm>
#include <set>

namespace wsnlr {

double RateAllocation::total() const {
  double sum = 0.0;
  for (const auto& [pid, r] : rates) sum += r;
  return sum;
}

bool SourceState::knows(PathId pid) const {
  return std::find(known_paths.begin(), known_paths.end(), pid) != known_paths.end();
}

SourceState make_source(NodeId id, double base_rate, const PathTable& table, Mode mode) {
  SourceState s;
  s.source_id = id;
  s.base_rate = base_rate;
  s.mode = mode;
  for (const auto& e : table) s.known_paths.push_back(e.pid);
  if (!s.known_paths.empty()) s.allocation = init_allocation(s);
  return s;
}

RateAllocation init_allocation(const SourceState& source) {
  if (source.known_paths.empty()) throw Error("no path: source " + std::to_string(source.source_id));
  RateAllocation a;
  if (source.mode == Mode::AllPaths) {
    const double share = source.base_rate / static_cast<double>(source.known_paths.size());
    for (PathId p : source.known_paths) a.rates[p] = share;
  } else {
    a.rates[source.known_paths.front()] = source.base_rate;
  }
  return a;
}

bool should_react(const SourceState& source, const CongestionNotification& cn) {
  switch (source.mode) {
    case Mode::SinglePath:
    case Mode::AllPaths:
      return false;
    case Mode::Incremental:
      return source.knows(cn.pid) && source.allocation.active_count() < source.known_paths.size();
    case Mode::Rebalance:
      return source.allocation.active(cn.pid);
  }
  return false;
}

RateAllocation apply_cn_mode2(const SourceState& source, const CongestionNotification& cn) {
  const RateAllocation& current = source.allocation;
  PathId chosen = kNoPath;
  bool congested_inactive = false;
  for (PathId p : source.known_paths) {
    if (current.active(p)) continue;
    if (p == cn.pid) {
      congested_inactive = true;
      continue;
    }
    chosen = p;
    break;
  }
  if (chosen == kNoPath && congested_inactive) chosen = cn.pid;
  if (chosen == kNoPath) return current;

  RateAllocation next;
  std::set<PathId> active;
  for (const auto& [p, r] : current.rates) active.insert(p);
  active.insert(chosen);
  const double share = source.base_rate / static_cast<double>(active.size());
  for (PathId p : active) next.rates[p] = share;
  return next;
}

RateAllocation apply_cn_mode3(const SourceState& source, const CongestionNotification& cn) {
  const RateAllocation& current = source.allocation;
  if (!current.active(cn.pid) || source.known_paths.empty()) return current;
  const double spread = current.rate(cn.pid) / static_cast<double>(source.known_paths.size());
  RateAllocation next;
  for (PathId p : source.known_paths) next.rates[p] = (p == cn.pid) ? spread : current.rate(p) + spread;
  return next;
}

std::vector<AllocationChange> react_to_batch(SourceState& source, std::span<const CongestionNotification> batch,
                                             double time) {
  std::vector<char> react(batch.size(), 0);
  for (std::size_t i = 0; i < batch.size(); ++i) react[i] = should_react(source, batch[i]) ? 1 : 0;

  std::vector<AllocationChange> log;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    if (!react[i]) continue;
    RateAllocation next = source.mode == Mode::Incremental ? apply_cn_mode2(source, batch[i])
                                                           : apply_cn_mode3(source, batch[i]);
    if (next == source.allocation) continue;
    log.push_back({time, source.source_id, batch[i], source.allocation, next});
    source.allocation = std::move(next);
  }
  return log;
}

bool node_congested(int occupancy, int capacity, double threshold) {
  return static_cast<double>(occupancy) > threshold * static_cast<double>(capacity);
}

std::vector<CongestionNotification> CnCooldown::emit(NodeId nid, std::span<const PathId> pids, double now) {
  std::vector<CongestionNotification> out;
  for (PathId p : pids) {
    auto key = std::make_pair(nid, p);
    auto it = next_allowed_.find(key);
    if (it != next_allowed_.end() && now < it->second) continue;
    next_allowed_[key] = now + period_;
    out.push_back({nid, p});
  }
  return out;
}

std::vector<CongestionNotification> emit_cns(NodeId nid, const PathTable& table, CnCooldown& cooldown, double now) {
  std::vector<PathId> pids;
  pids.reserve(table.size());
  for (const auto& e : table) pids.push_back(e.pid);
  std::sort(pids.begin(), pids.end());
  return cooldown.emit(nid, pids, now);
}

std::vector<NodeId> deliver_cn(std::span<const SourceState> sources, const CongestionNotification& cn) {
  std::vector<NodeId> out;
  for (const auto& s : sources)
    if (s.knows(cn.pid)) out.push_back(s.source_id);
  return out;
}

std::vector<AllocationChange> deliver_batch_analytic(std::vector<SourceState>& sources,
                                                     std::span<const CongestionNotification> batch, double time) {
  std::vector<AllocationChange> log;
  for (auto& s : sources) {
    std::vector<CongestionNotification> mine;
    for (const auto& cn : batch)
      if (s.knows(cn.pid)) mine.push_back(cn);
    auto changes = react_to_batch(s, mine, time);
    log.insert(log.end(), changes.begin(), changes.end());
  }
  return log;
}

double relay_load(std::span<const SourceState> sources, std::span<const PathId> relay_paths) {
  double sum = 0.0;
  for (const auto& s : sources)
    for (PathId p : relay_paths) sum += s.allocation.rate(p);
  return sum;
}

void write_allocation(PathTable& table, const RateAllocation& allocation) {
  for (auto& e : table) {
    e.in_use = allocation.active(e.pid);
    e.rate = allocation.rate(e.pid);
  }
}

}  // namespace wsnlr
