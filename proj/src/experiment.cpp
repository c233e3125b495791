#include "wsnlr/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <algorithm>
#include <exception>
#include <set>
#include <mutex>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "wsnlr/congestion.hpp"

namespace wsnlr {

Experiment run_experiment(const RunConfig& config) {
  config.scenario.validate();
  config.engine.validate();

  Experiment ex;
  ex.topology = generate_topology(config.scenario);
  ex.sources = select_sources(ex.topology, config.scenario);
  ex.tables = build_paths(ex.topology, ex.sources,
                          RoutingConfig{config.quality, config.engine.energy, config.engine.packet_bits});

  std::vector<SourceState> states;
  for (NodeId s : ex.sources) {
    states.push_back(make_source(s, config.scenario.source_rate_bps, ex.tables.table(s), config.scenario.mode));
    write_allocation(ex.tables.table(s), states.back().allocation);
  }
  ex.result = run(ex.topology, ex.tables, std::move(states), config.engine, config.scenario.duration);
  ex.metrics = compute_metrics(ex.result);
  return ex;
}

void SweepSpec::validate() const {
  if (modes.empty()) throw Error("config invalid: no modes");
  if (node_counts.empty()) throw Error("config invalid: no node counts");
  if (runs_per_point < 1) throw Error("config invalid: runs per point must be >= 1");
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const RunConfig& base) {
  spec.validate();
  std::vector<SweepRow> rows;
  for (Mode m : spec.modes)
    for (int n : spec.node_counts)
      for (int k = 0; k < spec.runs_per_point; ++k) rows.push_back({k, m, n, spec.base_seed + static_cast<std::uint64_t>(k), {}});

  unsigned workers = spec.workers > 0 ? static_cast<unsigned>(spec.workers) : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(rows.size())));

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t i = next++; i < rows.size(); i = next++) {
      try {
        RunConfig cfg = base;
        cfg.scenario.mode = rows[i].mode;
        cfg.scenario.n_nodes = rows[i].n_nodes;
        cfg.scenario.seed = rows[i].seed;
        cfg.engine.record_log = false;
        rows[i].metrics = run_experiment(cfg).metrics;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

namespace {

struct Mean {
  double sum = 0.0;
  int n = 0;
  void add(double v) {
    if (std::isnan(v)) return;
    sum += v;
    ++n;
  }
  double value() const { return n == 0 ? std::nan("") : sum / n; }
};

std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

}  // namespace

std::vector<SweepPoint> summarize(const std::vector<SweepRow>& rows) {
  std::vector<SweepPoint> points;
  std::size_t i = 0;
  while (i < rows.size()) {
    SweepPoint p;
    p.mode = rows[i].mode;
    p.n_nodes = rows[i].n_nodes;
    Mean drop, rate, load, energy, delivered, dropped, cn;
    for (; i < rows.size() && rows[i].mode == p.mode && rows[i].n_nodes == p.n_nodes; ++i) {
      const auto& m = rows[i].metrics;
      ++p.runs;
      drop.add(m.drop_rate);
      rate.add(m.rate_fairness);
      load.add(m.load_fairness);
      energy.add(m.energy_per_delivered);
      delivered.add(static_cast<double>(m.delivered));
      dropped.add(static_cast<double>(m.dropped));
      cn.add(static_cast<double>(m.cn_count));
    }
    p.drop_rate = drop.value();
    p.rate_fairness = rate.value();
    p.load_fairness = load.value();
    p.energy_per_delivered = energy.value();
    p.delivered = delivered.value();
    p.dropped = dropped.value();
    p.cn_count = cn.value();
    points.push_back(p);
  }
  return points;
}

std::string csv_row(const SweepRow& row) {
  const auto& m = row.metrics;
  return std::to_string(row.run_id) + "," + std::to_string(to_int(row.mode)) + "," + std::to_string(row.n_nodes) +
         "," + std::to_string(row.seed) + "," + fmt_double(m.drop_rate) + "," + fmt_double(m.rate_fairness) + "," +
         fmt_double(m.load_fairness) + "," + fmt_double(m.energy_per_delivered) + "," + std::to_string(m.delivered) +
         "," + std::to_string(m.dropped) + "," + std::to_string(m.cn_count);
}

std::string csv_summary_row(const SweepPoint& p) {
  return "mean," + std::to_string(to_int(p.mode)) + "," + std::to_string(p.n_nodes) + ",," + fmt_double(p.drop_rate) +
         "," + fmt_double(p.rate_fairness) + "," + fmt_double(p.load_fairness) + "," +
         fmt_double(p.energy_per_delivered) + "," + fmt_double(p.delivered) + "," + fmt_double(p.dropped) + "," +
         fmt_double(p.cn_count);
}

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << kCsvHeader << '\n';
  for (const auto& r : rows) out << csv_row(r) << '\n';
  for (const auto& p : summarize(rows)) out << csv_summary_row(p) << '\n';
}

// -- canonical example ---------------------------------------------------------

namespace {

constexpr double kKbps = 1e3;

FixtureStep snapshot(const std::string& label, const std::vector<SourceState>& sources, const CanonicalFixture& f) {
  FixtureStep step;
  step.label = label;
  for (PathId p : {1, 2, 3}) {
    const PathId one[] = {p};
    step.path_totals[p] = relay_load(sources, one);
  }
  for (const auto& [node, paths] : f.observers) step.observer_loads[node] = relay_load(sources, paths);
  for (const auto& s : sources) step.allocations[s.source_id] = s.allocation;
  return step;
}

/// Hand-worked repartition for one step, in kbit/s.
struct ExpectedStep {
  std::map<PathId, double> path_totals;
  std::map<NodeId, double> observer_loads;
  std::vector<std::map<PathId, double>> per_source;  // S1..S4
};

ExpectedStep expected_initial() {
  return {{{1, 100}, {2, 180}, {3, 0}},
          {{5, 280}, {2, 180}, {3, 0}, {4, 0}, {10, 0}},
          {{{1, 50}}, {{1, 50}}, {{2, 90}}, {{2, 90}}}};
}

ExpectedStep expected_after_node5() {
  return {{{1, 110}, {2, 110}, {3, 60}},
          {{5, 220}, {2, 110}, {3, 60}, {4, 60}, {10, 60}},
          {{{1, 25}, {2, 25}}, {{1, 25}, {2, 25}}, {{1, 30}, {2, 30}, {3, 30}}, {{1, 30}, {2, 30}, {3, 30}}}};
}

ExpectedStep expected_after_node2() {
  return {{{1, 155}, {2, 45}, {3, 80}},
          {{5, 200}, {2, 45}, {3, 80}, {4, 80}, {10, 80}},
          {{{1, 37.5}, {2, 12.5}}, {{1, 37.5}, {2, 12.5}}, {{1, 40}, {2, 10}, {3, 40}}, {{1, 40}, {2, 10}, {3, 40}}}};
}

bool close(double actual, double expected) {
  return std::abs(actual - expected) <= 1e-9 * std::max(1.0, std::abs(expected));
}

void compare(const FixtureStep& got, const ExpectedStep& want, const CanonicalFixture& f,
             std::vector<std::string>& mismatches) {
  auto report = [&](const std::string& what, double actual, double expected) {
    char buf[200];
    std::snprintf(buf, sizeof buf, "%s: %s expected %.6g kbit/s, got %.6g", got.label.c_str(), what.c_str(), expected,
                  actual);
    mismatches.emplace_back(buf);
  };
  for (const auto& [p, v] : want.path_totals) {
    double actual = got.path_totals.at(p) / kKbps;
    if (!close(actual, v)) report("path " + std::to_string(p) + " total", actual, v);
  }
  for (const auto& [n, v] : want.observer_loads) {
    double actual = got.observer_loads.at(n) / kKbps;
    if (!close(actual, v)) report("node " + std::to_string(n) + " load", actual, v);
  }
  for (std::size_t i = 0; i < want.per_source.size(); ++i) {
    const auto& alloc = got.allocations.at(f.sources[i].id);
    std::set<PathId> pids;
    for (const auto& [p, r] : alloc.rates) pids.insert(p);
    for (const auto& [p, r] : want.per_source[i]) pids.insert(p);
    for (PathId p : pids) {
      double expected = want.per_source[i].contains(p) ? want.per_source[i].at(p) : 0.0;
      double actual = alloc.rate(p) / kKbps;
      if (!close(actual, expected))
        report("S" + std::to_string(i + 1) + " path " + std::to_string(p), actual, expected);
    }
  }
}

}  // namespace

std::vector<SweepRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error("csv: unexpected header");
  std::vector<SweepRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() != 11) throw Error("csv: line " + std::to_string(line_no) + " has " + std::to_string(f.size()) + " fields");
    if (f[0] == "mean") continue;
    try {
      SweepRow r;
      r.run_id = std::stoi(f[0]);
      r.mode = mode_from_int(std::stoi(f[1]));
      r.n_nodes = std::stoi(f[2]);
      r.seed = std::stoull(f[3]);
      r.metrics.drop_rate = std::stod(f[4]);
      r.metrics.rate_fairness = std::stod(f[5]);
      r.metrics.load_fairness = std::stod(f[6]);
      r.metrics.energy_per_delivered = std::stod(f[7]);
      r.metrics.delivered = std::stoull(f[8]);
      r.metrics.dropped = std::stoull(f[9]);
      r.metrics.cn_count = std::stoull(f[10]);
      rows.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw Error("csv: malformed line " + std::to_string(line_no));
    }
  }
  return rows;
}

std::vector<OrderingCheck> check_orderings(const std::vector<SweepPoint>& points) {
  std::map<int, std::map<int, const SweepPoint*>> by_count;
  for (const auto& p : points) by_count[p.n_nodes][to_int(p.mode)] = &p;

  std::vector<OrderingCheck> out;
  for (const auto& [n, modes] : by_count) {
    if (modes.size() != 4) continue;
    auto v = [&](double SweepPoint::*field, int mode) { return modes.at(mode)->*field; };
    // Each pair (hi, lo) requires hi > lo.
    auto check = [&](char label, double SweepPoint::*field, std::vector<std::pair<int, int>> greater) {
      OrderingCheck c;
      c.label = label;
      c.n_nodes = n;
      c.margin = std::numeric_limits<double>::infinity();
      char buf[96];
      for (auto [hi, lo] : greater) {
        const double slack = v(field, hi) - v(field, lo);
        c.margin = std::isnan(slack) ? std::nan("") : std::min(c.margin, slack);
        std::snprintf(buf, sizeof buf, "%sm%d-m%d=%.4g", c.detail.empty() ? "" : " ", hi, lo, slack);
        c.detail += buf;
      }
      c.passed = c.margin > 0.0;
      return c;
    };
    out.push_back(check('a', &SweepPoint::drop_rate, {{0, 2}, {0, 3}, {2, 1}, {3, 1}}));
    auto b = check('b', &SweepPoint::rate_fairness, {{2, 0}, {2, 1}});
    const double rf2 = v(&SweepPoint::rate_fairness, 2);
    char buf[48];
    std::snprintf(buf, sizeof buf, " m2=%.4g", rf2);
    b.detail += buf;
    b.passed = b.passed && rf2 >= 0.7;
    out.push_back(b);
    out.push_back(check('c', &SweepPoint::load_fairness, {{0, 1}, {0, 2}, {0, 3}, {3, 1}, {3, 2}}));
    out.push_back(check('d', &SweepPoint::energy_per_delivered, {{1, 0}, {2, 0}, {3, 0}, {1, 2}, {1, 3}}));
  }
  return out;
}

FixtureReport check_fixture(Mode mode) {
  if (mode != Mode::Incremental && mode != Mode::Rebalance)
    throw Error("config invalid: the canonical example exercises modes 2 and 3 only");
  const CanonicalFixture f = canonical_fixture();

  std::vector<SourceState> sources;
  for (const auto& fs : f.sources) {
    SourceState s;
    s.source_id = fs.id;
    s.base_rate = fs.base_rate_bps;
    s.known_paths = fs.known_paths;
    s.mode = mode;
    s.allocation = init_allocation(s);
    sources.push_back(std::move(s));
  }

  FixtureReport report;
  report.mode = mode;
  report.steps.push_back(snapshot("initial", sources, f));

  const CongestionNotification from_node5[] = {{5, 1}, {5, 2}};
  deliver_batch_analytic(sources, from_node5, 1.0);
  report.steps.push_back(snapshot("after CN(5,1)+CN(5,2)", sources, f));

  const CongestionNotification from_node2[] = {{2, 2}};
  deliver_batch_analytic(sources, from_node2, 2.0);
  report.steps.push_back(snapshot("after CN(2,2)", sources, f));

  compare(report.steps[0], expected_initial(), f, report.mismatches);
  compare(report.steps[1], expected_after_node5(), f, report.mismatches);
  // Mode 2 is saturated after the first batch, so CN(2,2) changes nothing.
  compare(report.steps[2], mode == Mode::Rebalance ? expected_after_node2() : expected_after_node5(), f,
          report.mismatches);
  return report;
}

void print_fixture_report(std::ostream& out, const FixtureReport& report) {
  const CanonicalFixture f = canonical_fixture();
  char buf[200];
  out << "canonical example, mode " << to_int(report.mode) << " (kbit/s)\n";
  for (const auto& step : report.steps) {
    out << "== " << step.label << '\n';
    out << "path       S1      S2      S3      S4   total\n";
    for (PathId p : {1, 2, 3}) {
      std::snprintf(buf, sizeof buf, "%-6d", p);
      out << buf;
      for (const auto& fs : f.sources) {
        const auto& a = step.allocations.at(fs.id);
        if (a.active(p))
          std::snprintf(buf, sizeof buf, "%8.6g", a.rate(p) / kKbps);
        else
          std::snprintf(buf, sizeof buf, "%8s", "-");
        out << buf;
      }
      std::snprintf(buf, sizeof buf, "%8.6g\n", step.path_totals.at(p) / kKbps);
      out << buf;
    }
    for (const auto& [node, load] : step.observer_loads) {
      std::snprintf(buf, sizeof buf, "node %-3d load %.6g\n", node, load / kKbps);
      out << buf;
    }
  }
  if (report.passed()) {
    out << "PASS\n";
  } else {
    out << "FAIL\n";
    for (const auto& m : report.mismatches) out << "  " << m << '\n';
  }
}

}  // namespace wsnlr
