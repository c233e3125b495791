// Command-line front end: single runs, parameter sweeps, and the canonical
// example check.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wsnlr/experiment.hpp"

namespace {

using namespace wsnlr;

struct Options {
  std::vector<int> modes;
  std::vector<int> nodes;
  std::uint64_t seed = 1;
  int runs = 20;
  bool full = false;
  int workers = 0;
  std::string output;
  std::string dump_tables;
  std::string dump_log;
};

void print_metrics(const RunMetrics& m) {
  std::printf("drop_rate             %.6f\n", m.drop_rate);
  std::printf("rate_fairness         %.6f\n", m.rate_fairness);
  std::printf("load_fairness         %.6f\n", m.load_fairness);
  std::printf("energy_per_delivered  %.6g J\n", m.energy_per_delivered);
  std::printf("delivered             %llu\n", static_cast<unsigned long long>(m.delivered));
  std::printf("dropped               %llu\n", static_cast<unsigned long long>(m.dropped));
  std::printf("cn_count              %llu\n", static_cast<unsigned long long>(m.cn_count));
  for (const auto& [id, r] : m.per_source_success_rate) std::printf("source %-4d success   %.6f\n", id, r);
}

int cmd_run(const Options& opt, RunConfig cfg) {
  if (opt.modes.size() > 1 || opt.nodes.size() > 1)
    throw CLI::ValidationError("run takes a single --mode and a single --nodes value");
  if (!opt.modes.empty()) cfg.scenario.mode = mode_from_int(opt.modes.front());
  if (!opt.nodes.empty()) cfg.scenario.n_nodes = opt.nodes.front();
  cfg.scenario.seed = opt.seed;
  cfg.engine.record_log = !opt.dump_log.empty();

  Experiment ex = run_experiment(cfg);
  print_metrics(ex.metrics);

  SweepRow row{0, cfg.scenario.mode, cfg.scenario.n_nodes, cfg.scenario.seed, ex.metrics};
  std::cout << kCsvHeader << '\n' << csv_row(row) << '\n';
  if (!opt.output.empty()) {
    std::ofstream out(opt.output, std::ios::binary);
    out << kCsvHeader << '\n' << csv_row(row) << '\n';
    if (!out) throw Error("cannot write " + opt.output);
  }
  if (!opt.dump_tables.empty()) {
    std::ofstream out(opt.dump_tables, std::ios::binary);
    dump_tables(out, ex.tables);
  }
  if (!opt.dump_log.empty()) {
    std::ofstream out(opt.dump_log, std::ios::binary);
    dump_log(out, ex.result.log);
  }
  return 0;
}

int cmd_sweep(const Options& opt, const RunConfig& cfg) {
  if (opt.output.empty()) throw CLI::ValidationError("sweep needs --output");
  SweepSpec spec;
  if (!opt.modes.empty()) {
    spec.modes.clear();
    for (int m : opt.modes) spec.modes.push_back(mode_from_int(m));
  }
  if (!opt.nodes.empty()) spec.node_counts = opt.nodes;
  spec.runs_per_point = opt.full ? 100 : opt.runs;
  spec.base_seed = opt.seed;
  spec.workers = opt.workers;

  auto rows = run_sweep(spec, cfg);
  std::ofstream out(opt.output, std::ios::binary);
  write_csv(out, rows);
  out.close();
  if (!out) {
    std::error_code ec;
    std::filesystem::remove(opt.output, ec);
    throw Error("cannot write " + opt.output);
  }
  for (const auto& p : summarize(rows))
    std::printf("mode %d  n=%-4d drop %.4f  rate_fair %.4f  load_fair %.4f  J/pkt %.4g\n", to_int(p.mode), p.n_nodes,
                p.drop_rate, p.rate_fairness, p.load_fairness, p.energy_per_delivered);
  return 0;
}

int cmd_fixture(const Options& opt) {
  std::vector<int> modes = opt.modes.empty() ? std::vector<int>{3} : opt.modes;
  bool ok = true;
  for (int m : modes) {
    FixtureReport report = check_fixture(mode_from_int(m));
    print_fixture_report(std::cout, report);
    ok = ok && report.passed();
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multipath load repartition simulator for wireless sensor networks"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value configuration file; flags override it");

  Options opt;
  RunConfig cfg;
  auto& sc = cfg.scenario;
  auto& en = cfg.engine;

  app.add_option("--mode", opt.modes, "Load repartition mode(s) 0..3")->delimiter(',')->check(CLI::Range(0, 3));
  app.add_option("--nodes", opt.nodes, "Number of sensors (list for sweep)")->delimiter(',')->check(CLI::PositiveNumber);
  app.add_option("--seed", opt.seed, "Seed (base seed for sweep)");
  app.add_option("--runs", opt.runs, "Runs per sweep point")->check(CLI::PositiveNumber);
  app.add_flag("--full", opt.full, "100 runs per sweep point");
  app.add_option("--workers", opt.workers, "Sweep worker threads (0: all cores)");
  app.add_option("--rate", sc.source_rate_bps, "Per-source rate, bit/s");
  app.add_option("--duration", sc.duration, "Simulated seconds")->check(CLI::NonNegativeNumber);
  app.add_option("--radio-range", sc.radio_range, "Radio range, m");
  app.add_option("--event-radius", sc.event_radius, "Source selection radius around the event, m");
  app.add_option("--queue-capacity", en.queue_capacity, "Queue capacity, packets");
  app.add_option("--threshold", en.threshold, "Congestion threshold, fraction of queue capacity");
  app.add_option("--packet-bits", en.packet_bits, "Data packet size, bits");
  app.add_option("--capacity-bps", en.capacity_bps, "Per-node transmit capacity, bit/s");
  app.add_option("--cn-cooldown", en.cn_cooldown, "Minimum seconds between CNs per (node, pid)");
  app.add_option("--e-elec", en.energy.e_elec, "Radio electronics energy, J/bit");
  app.add_option("--eps-amp", en.energy.eps_amp, "Amplifier energy, J/bit/m^2");
  app.add_option("--cn-packet-bits", en.cn_packet_bits, "CN packet size, bits");
  app.add_option("--energy-max", sc.energy_max, "Upper bound of initial sensor energy, J");
  std::map<std::string, QualityMetric> metrics{{"energy", QualityMetric::ResidualEnergy},
                                              {"lifetime", QualityMetric::Lifetime}};
  app.add_option("--quality", cfg.quality, "Path quality metric: energy or lifetime")
      ->transform(CLI::CheckedTransformer(metrics, CLI::ignore_case));
  app.add_flag("--analytic", en.analytic_cn, "Deliver CNs instantly and without energy cost");
  bool cn_bypass = false;
  app.add_flag("--cn-bypass", cn_bypass, "Send CNs ahead of queued data instead of through the FIFO");
  app.add_option("--output", opt.output, "CSV output path");

  auto* run = app.add_subcommand("run", "One seeded run; prints metrics and a CSV row");
  run->add_option("--dump-tables", opt.dump_tables, "Write path tables to this file");
  run->add_option("--dump-log", opt.dump_log, "Write the event log to this file");
  auto* sweep = app.add_subcommand("sweep", "Modes x node counts x seeds, written as CSV");
  auto* fixture = app.add_subcommand("fixture", "Replay the canonical four-source example");

  try {
    app.parse(argc, argv);
    en.cn_in_fifo = !cn_bypass;
    if (*run) return cmd_run(opt, cfg);
    if (*sweep) return cmd_sweep(opt, cfg);
    if (*fixture) return cmd_fixture(opt);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
