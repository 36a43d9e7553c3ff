#include "mtjsnn/commands.hpp"

#include <ostream>

#include "json.hpp"
#include "mtjsnn/config.hpp"
#include "mtjsnn/error.hpp"
#include "mtjsnn/io.hpp"

namespace mtjsnn {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

template <typename F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const InvalidInput& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const std::exception& e) {
    err << "simulation failure: " << e.what() << '\n';
    return kExitSimulationFailure;
  }
}

void prepare_out(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw std::runtime_error("cannot create output directory " + dir.string());
}

ConfigDocument load(const CommandOptions& options) {
  ConfigDocument doc = load_config(options.config);
  if (options.seed) doc.train.seed = *options.seed;
  return doc;
}

const char* status_name(TrainStatus s) {
  switch (s) {
    case TrainStatus::converged:
      return "converged";
    case TrainStatus::budget_exhausted:
      return "budget_exhausted";
    case TrainStatus::diverged:
      return "diverged";
  }
  return "unknown";
}

int status_exit(TrainStatus s) {
  switch (s) {
    case TrainStatus::converged:
      return kExitOk;
    case TrainStatus::budget_exhausted:
      return kExitBudgetExhausted;
    case TrainStatus::diverged:
      return kExitDiverged;
  }
  return kExitSimulationFailure;
}

json weights_document(const TrainResult& result, std::uint64_t seed) {
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["status"] = status_name(result.status);
  doc["epochs"] = result.history.epochs.size();
  doc["seed"] = seed;
  json syns = json::array();
  for (const auto& s : result.net.synapses) syns.push_back({{"pre", s.pre}, {"post", s.post}, {"weight", s.weight}});
  doc["synapses"] = syns;
  return doc;
}

std::string history_csv(const TrainHistory& history, std::size_t rows) {
  std::string out = "epoch,total_loss_ns2";
  for (std::size_t r = 1; r <= rows; ++r) out += ",t_row" + std::to_string(r);
  out += '\n';
  for (const auto& e : history.epochs) {
    out += std::to_string(e.epoch) + "," + format_number(e.total_loss);
    for (double t : e.row_times) out += "," + format_number(t);
    out += '\n';
  }
  return out;
}

void write_training(const fs::path& dir, const TrainResult& result, std::uint64_t seed, std::size_t rows) {
  write_file_atomic(dir / "weights.out", weights_document(result, seed).dump(2) + "\n");
  write_file_atomic(dir / "history.csv", history_csv(result.history, rows));
}

void log_training(std::ostream& log, std::ostream& err, const TrainResult& result) {
  log << "training " << status_name(result.status) << " after " << result.history.epochs.size() << " epoch(s)";
  if (!result.history.epochs.empty()) log << ", loss " << result.history.epochs.back().total_loss << " ns^2";
  log << '\n';
  if (!result.diagnostic.empty()) err << result.diagnostic << '\n';
}

json optional_number(const std::optional<double>& x) { return x ? json(*x) : json(nullptr); }

json report_document(const XorBenchResult& bench) {
  const auto& rep = bench.report;
  json doc;
  doc["schema_version"] = kSchemaVersion;
  doc["training"] = {{"status", status_name(bench.training.status)},
                     {"epochs", bench.training.history.epochs.size()}};
  json rows = json::array();
  for (const auto& r : rep.rows) {
    json row;
    row["a"] = r.row.a;
    row["b"] = r.row.b;
    row["bias"] = r.row.bias;
    row["target_bit"] = r.row.target_bit;
    row["target_time_ns"] = r.row.target_time;
    row["onset_ns"] = optional_number(r.onset);
    row["decoded"] = r.decoded ? json(*r.decoded) : json(nullptr);
    row["pass"] = r.pass;
    row["onsets_ns"] = r.onsets;
    rows.push_back(row);
  }
  doc["rows"] = rows;
  doc["mechanisms"] = {{"threshold_gate", rep.threshold_gate},
                       {"latency_shift", rep.latency_shift},
                       {"refraction", rep.refraction}};
  doc["diagnostics"] = rep.diagnostics;
  return doc;
}

std::optional<double> tlr_constant_latency(const TlrParams& p, double drive, const LatencyProbe& probe) {
  const auto onsets = tlr_simulate_onsets(p, [drive](double) { return drive; }, probe.dt, probe.horizon);
  if (onsets.empty()) return std::nullopt;
  return onsets.front();
}

}  // namespace

int cmd_simulate(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigDocument doc = load(options);
    if (!doc.network) throw ConfigError("network: missing required section");
    const Trace trace = simulate_network(*doc.network, doc.sim);
    prepare_out(options.out);
    write_file_atomic(options.out / "trace.csv", trace_csv(trace));
    write_file_atomic(options.out / "spikes.txt", spikes_text(trace));
    for (const auto& [id, onsets] : trace.spike_onsets) log << id << ": " << onsets.size() << " spike(s)\n";
    return static_cast<int>(kExitOk);
  });
}

int cmd_train(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigDocument doc = load(options);
    TrainProblem problem;
    if (doc.network) {
      if (!doc.output) throw ConfigError("output: missing required key");
      if (doc.dataset.empty()) throw ConfigError("dataset: missing or empty");
      problem.net = *doc.network;
      problem.output = *doc.output;
      problem.dataset = doc.dataset;
    } else if (doc.xor_arch) {
      problem.net = build_xor_network(*doc.xor_arch);
      problem.output = xor_ids::o1;
      problem.dataset = xor_dataset(doc.xor_arch->encoding);
    } else {
      throw ConfigError("network: missing required section (or provide xor)");
    }
    problem.sim = doc.sim;
    initialize_weights(problem.net, doc.train);
    const TrainResult result = train(problem, doc.train);
    prepare_out(options.out);
    write_training(options.out, result, doc.train.seed, problem.dataset.size());
    log_training(log, err, result);
    return status_exit(result.status);
  });
}

int cmd_bench_xor(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigDocument doc = load(options);
    if (!doc.xor_arch) throw ConfigError("xor: missing required section");
    XorExperiment exp;
    exp.arch = *doc.xor_arch;
    exp.sim = doc.sim;
    exp.train = doc.train;
    const XorBenchResult bench = run_xor_bench(exp);

    prepare_out(options.out);
    write_training(options.out, bench.training, doc.train.seed, 4);
    write_file_atomic(options.out / "report.json", report_document(bench).dump(2) + "\n");
    for (std::size_t k = 0; k < bench.report.traces.size(); ++k) {
      const Trace& tr = bench.report.traces[k];
      for (std::size_t s = 0; s < tr.signal_names.size(); ++s)
        write_file_atomic(options.out / ("row" + std::to_string(k + 1) + "_" + tr.signal_names[s] + ".csv"),
                          signal_csv(tr, s));
    }

    log_training(log, err, bench.training);
    for (const auto& r : bench.report.rows) {
      log << "row (" << r.row.a << "," << r.row.b << "): o1 ";
      if (r.onset) {
        log << *r.onset << " ns";
      } else {
        log << "silent";
      }
      log << (r.pass ? " pass" : " FAIL") << '\n';
    }
    log << "threshold gate " << (bench.report.threshold_gate ? "pass" : "FAIL") << ", latency shift "
        << (bench.report.latency_shift ? "pass" : "FAIL") << ", refraction "
        << (bench.report.refraction ? "pass" : "FAIL") << '\n';

    if (bench.training.status != TrainStatus::converged) return status_exit(bench.training.status);
    if (!bench.report.rows_pass() || !bench.report.mechanisms_pass()) {
      for (const auto& d : bench.report.diagnostics) err << d << '\n';
      return static_cast<int>(kExitCheckFailed);
    }
    return static_cast<int>(kExitOk);
  });
}

int cmd_sweep_latency(const CommandOptions& options, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const ConfigDocument doc = load(options);
    if (!doc.sweep) throw ConfigError("sweep: missing required section");
    const SweepConfig& sw = *doc.sweep;
    const std::vector<double> grid = options.grid ? parse_grid(*options.grid) : sw.drives;
    if (grid.empty()) throw ConfigError("sweep.drives: no drive levels (set drives or pass --grid)");

    std::vector<std::optional<double>> latencies;
    std::optional<Calibration> cal;
    if (sw.backend == "macrospin") {
      for (double v : grid) latencies.push_back(switching_latency(sw.macrospin, v, sw.probe));
    } else {
      TlrParams params = sw.tlr;
      if (sw.backend == "calibrated") {
        cal = calibrate_tlr(sw.macrospin, sw.calibration_grid.empty() ? grid : sw.calibration_grid, sw.probe, sw.tlr);
        params = cal->params;
      }
      for (double d : grid) latencies.push_back(tlr_constant_latency(params, d, sw.probe));
    }

    prepare_out(options.out);
    std::string csv = "drive,latency_ns\n";
    for (std::size_t i = 0; i < grid.size(); ++i)
      csv += format_number(grid[i]) + "," + (latencies[i] ? format_number(*latencies[i]) : std::string()) + "\n";
    write_file_atomic(options.out / "latency.csv", csv);
    if (cal) {
      json c;
      c["schema_version"] = kSchemaVersion;
      c["i_threshold"] = cal->fit.i_threshold;
      c["q_switch"] = cal->fit.q_switch;
      c["latency_floor"] = cal->fit.latency_floor;
      c["max_rel_residual"] = cal->fit.max_rel_residual;
      c["drives"] = cal->drives;
      c["latencies_ns"] = cal->latencies;
      write_file_atomic(options.out / "calibration.json", c.dump(2) + "\n");
      log << "calibrated: i_threshold " << cal->fit.i_threshold << ", q_switch " << cal->fit.q_switch
          << ", latency_floor " << cal->fit.latency_floor << ", max residual " << cal->fit.max_rel_residual << '\n';
    }
    std::size_t fired = 0;
    for (const auto& l : latencies) fired += l.has_value();
    log << sw.backend << " sweep: " << fired << " of " << grid.size() << " drive level(s) spiked\n";
    return static_cast<int>(kExitOk);
  });
}

}  // namespace mtjsnn
