#pragma once

#include <map>
#include <span>
#include <utility>
#include <vector>

#include "wsnlr/routing.hpp"
#include "wsnlr/types.hpp"

namespace wsnlr {

/// CN(nid, pid): node `nid` is congested and relays path `pid`.
struct CongestionNotification {
  NodeId nid = kNoNode;
  PathId pid = kNoPath;

  friend auto operator<=>(const CongestionNotification&, const CongestionNotification&) = default;
};

/// Rates of the active paths of one source. A path is active iff it has an
/// entry here.
struct RateAllocation {
  std::map<PathId, double> rates;

  bool active(PathId pid) const { return rates.contains(pid); }
  double rate(PathId pid) const {
    auto it = rates.find(pid);
    return it == rates.end() ? 0.0 : it->second;
  }
  std::size_t active_count() const { return rates.size(); }
  double total() const;

  friend bool operator==(const RateAllocation&, const RateAllocation&) = default;
};

struct SourceState {
  NodeId source_id = kNoNode;
  double base_rate = 0.0;            // bit/s, never changes
  std::vector<PathId> known_paths;   // decreasing quality
  RateAllocation allocation;
  Mode mode = Mode::SinglePath;

  bool knows(PathId pid) const;
};

/// Builds a source from its (already quality-ordered) path table.
SourceState make_source(NodeId id, double base_rate, const PathTable& table, Mode mode);

/// Mode 0/2/3 start on the best path; mode 1 splits evenly over all known
/// paths. Throws Error("no path") without known paths.
RateAllocation init_allocation(const SourceState& source);

bool should_react(const SourceState& source, const CongestionNotification& cn);

/// Activates the best inactive path other than cn.pid (cn.pid itself if it
/// is the only inactive one) and re-splits the base rate evenly over the
/// active set. Unchanged once every known path is active.
RateAllocation apply_cn_mode2(const SourceState& source, const CongestionNotification& cn);

/// Spreads the rate currently on cn.pid evenly over every known path,
/// cn.pid included. Unchanged when cn.pid is inactive.
RateAllocation apply_cn_mode3(const SourceState& source, const CongestionNotification& cn);

/// Strictly above threshold * capacity.
bool node_congested(int occupancy, int capacity, double threshold);

/// Per-(node, pid) CN suppression.
class CnCooldown {
 public:
  explicit CnCooldown(double period = 1.0) : period_(period) {}

  /// One CN per pid whose cooldown has elapsed; arms the timers it uses.
  std::vector<CongestionNotification> emit(NodeId nid, std::span<const PathId> pids, double now);

  double period() const { return period_; }

 private:
  double period_;
  std::map<std::pair<NodeId, PathId>, double> next_allowed_;
};

/// CNs for every pid in `table`, subject to `cooldown`.
std::vector<CongestionNotification> emit_cns(NodeId nid, const PathTable& table, CnCooldown& cooldown, double now);

/// Sources whose known paths include cn.pid, in input order. This is the
/// analytic-mode delivery set.
std::vector<NodeId> deliver_cn(std::span<const SourceState> sources, const CongestionNotification& cn);

struct AllocationChange {
  double time = 0.0;
  NodeId source = kNoNode;
  CongestionNotification cn;
  RateAllocation before;
  RateAllocation after;
};

/// Reacts to CNs that were emitted together. Whether a source reacts is
/// decided against its allocation before the batch, then reactions apply in
/// order. Returns the changes made.
std::vector<AllocationChange> react_to_batch(SourceState& source, std::span<const CongestionNotification> batch,
                                             double time = 0.0);

/// Instantaneous delivery of one emission batch to every source knowing the
/// pid; returns the allocation changes it caused.
std::vector<AllocationChange> deliver_batch_analytic(std::vector<SourceState>& sources,
                                                     std::span<const CongestionNotification> batch,
                                                     double time = 0.0);

/// Aggregate rate a relay sees: the sum over sources of their rates on the
/// paths the relay belongs to.
double relay_load(std::span<const SourceState> sources, std::span<const PathId> relay_paths);

/// Copies rates and in-use flags into the source's own table.
void write_allocation(PathTable& table, const RateAllocation& allocation);

}  // namespace wsnlr
