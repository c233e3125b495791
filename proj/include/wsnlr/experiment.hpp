#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wsnlr/engine.hpp"
#include "wsnlr/metrics.hpp"
#include "wsnlr/routing.hpp"
#include "wsnlr/scenario.hpp"

namespace wsnlr {

struct RunConfig {
  ScenarioConfig scenario;
  EngineConfig engine;
  QualityMetric quality = QualityMetric::Lifetime;
};

struct Experiment {
  Topology topology;
  std::vector<NodeId> sources;
  PathTables tables;
  RunResult result;
  RunMetrics metrics;
};

/// Topology, sources, routes, initial allocations, data plane, metrics.
Experiment run_experiment(const RunConfig& config);

struct SweepSpec {
  std::vector<Mode> modes{Mode::SinglePath, Mode::AllPaths, Mode::Incremental, Mode::Rebalance};
  std::vector<int> node_counts{50, 100, 150, 200, 250};
  int runs_per_point = 20;
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0: hardware concurrency

  void validate() const;
};

struct SweepRow {
  int run_id = 0;
  Mode mode = Mode::SinglePath;
  int n_nodes = 0;
  std::uint64_t seed = 0;
  RunMetrics metrics;
};

/// Per-point means; NaN entries are skipped.
struct SweepPoint {
  Mode mode = Mode::SinglePath;
  int n_nodes = 0;
  int runs = 0;
  double drop_rate = 0.0;
  double rate_fairness = 0.0;
  double load_fairness = 0.0;
  double energy_per_delivered = 0.0;
  double delivered = 0.0;
  double dropped = 0.0;
  double cn_count = 0.0;
};

/// Rows in (mode, node count, run) order. Run k of every point uses seed
/// base_seed + k, so all modes see the same topologies.
std::vector<SweepRow> run_sweep(const SweepSpec& spec, const RunConfig& base);

std::vector<SweepPoint> summarize(const std::vector<SweepRow>& rows);

inline constexpr const char* kCsvHeader =
    "run_id,mode,n_nodes,seed,drop_rate,rate_fairness,load_fairness,energy_per_delivered_J,delivered,dropped,cn_count";

std::string csv_row(const SweepRow& row);
/// Summary rows carry run_id "mean" and an empty seed.
std::string csv_summary_row(const SweepPoint& point);
/// Header, data rows, then one summary row per point; LF line endings.
void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

/// Data rows of a CSV written by write_csv; summary rows are skipped.
/// Throws Error("csv ...") on a wrong header or a malformed row.
std::vector<SweepRow> read_csv(std::istream& in);

// -- mode orderings ---------------------------------------------------------

/// One expected relation between per-mode means at one node count.
struct OrderingCheck {
  char label = 'a';  // a: drop, b: rate fairness, c: load fairness, d: energy per packet
  int n_nodes = 0;
  /// Smallest slack over the strict inequalities of the check; positive
  /// when all of them hold.
  double margin = 0.0;
  bool passed = false;
  std::string detail;
};

/// Evaluates, for every node count swept with all four modes:
///   a  drop rate            mode 0 > modes 2, 3 > mode 1
///   b  rate fairness        mode 2 > modes 0, 1 and mode 2 >= 0.7
///   c  load fairness        mode 0 > modes 1, 2, 3 and mode 3 > modes 1, 2
///   d  energy per packet    mode 0 < modes 1, 2, 3 and mode 1 > modes 2, 3
std::vector<OrderingCheck> check_orderings(const std::vector<SweepPoint>& points);

// -- canonical example check ---------------------------------------------------

struct FixtureStep {
  std::string label;
  std::map<PathId, double> path_totals;          // bit/s
  std::map<NodeId, double> observer_loads;        // bit/s
  std::map<NodeId, RateAllocation> allocations;   // by source id
};

struct FixtureReport {
  Mode mode = Mode::Rebalance;
  std::vector<FixtureStep> steps;  // initial, after CN(5,1)+CN(5,2), after CN(2,2)
  std::vector<std::string> mismatches;
  bool passed() const { return mismatches.empty(); }
};

/// Replays the canonical example in analytic mode and compares every step
/// against the hand-worked repartition tables (relative tolerance 1e-9).
FixtureReport check_fixture(Mode mode);

void print_fixture_report(std::ostream& out, const FixtureReport& report);

}  // namespace wsnlr
