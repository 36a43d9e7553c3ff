#include "mtjsnn/xor_bench.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mtjsnn/error.hpp"

namespace mtjsnn {

std::string to_string(Encoding e) { return e == Encoding::presence ? "presence" : "timing"; }

Encoding encoding_from_string(const std::string& s) {
  if (s == "presence") return Encoding::presence;
  if (s == "timing") return Encoding::timing;
  throw InvalidInput("unknown encoding '" + s + "' (expected presence or timing)");
}

std::vector<std::string> EncodingConfig::violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(bias_time) || bias_time < 0.0) out.emplace_back("bias_time must be >= 0");
  if (!std::isfinite(one_time) || one_time < 0.0) out.emplace_back("one_time must be >= 0");
  if (!std::isfinite(zero_time) || zero_time < 0.0) out.emplace_back("zero_time must be >= 0");
  return out;
}

XorRow make_xor_row(int a, int b) {
  if ((a != 0 && a != 1) || (b != 0 && b != 1)) throw InvalidInput("XOR inputs must be bits");
  XorRow row;
  row.a = a;
  row.b = b;
  row.target_bit = a ^ b;
  row.target_time = row.target_bit ? kTimeOne : kTimeZero;
  return row;
}

std::vector<XorRow> xor_rows() { return {make_xor_row(0, 0), make_xor_row(0, 1), make_xor_row(1, 0), make_xor_row(1, 1)}; }

Network build_xor_network(const XorArch& arch) {
  arch.hidden.validate();
  arch.output.validate();
  Network net;
  net.source_shape = arch.source_shape;
  for (const auto& id : {xor_ids::a, xor_ids::b, xor_ids::bias}) net.sources.push_back({id, {}});
  for (const auto& id : {xor_ids::i1, xor_ids::i2}) {
    NeuronSpec n;
    n.id = id;
    n.tlr = arch.hidden;
    net.neurons.push_back(n);
  }
  NeuronSpec out;
  out.id = xor_ids::o1;
  out.tlr = arch.output;
  net.neurons.push_back(out);

  auto weight = [&](const std::string& pre, const std::string& post) {
    const auto it = arch.weights.find(pre + "->" + post);
    return it == arch.weights.end() ? 0.0 : it->second;
  };
  for (const auto& post : {xor_ids::i1, xor_ids::i2})
    for (const auto& pre : {xor_ids::a, xor_ids::b, xor_ids::bias}) net.synapses.push_back({pre, post, weight(pre, post)});
  for (const auto& pre : {xor_ids::i1, xor_ids::i2}) net.synapses.push_back({pre, xor_ids::o1, weight(pre, xor_ids::o1)});
  if (arch.bias_to_output) net.synapses.push_back({xor_ids::bias, xor_ids::o1, weight(xor_ids::bias, xor_ids::o1)});

  for (const auto& [edge, w] : arch.weights) {
    const auto arrow = edge.find("->");
    if (arrow == std::string::npos || !net.find_synapse(edge.substr(0, arrow), edge.substr(arrow + 2)))
      throw InvalidInput("weight given for edge '" + edge + "' which is not in the XOR network");
  }
  if (auto v = validate_topology(net); !v.empty())
    throw InvalidState("XOR network failed validation: " + v.front().element + ": " + v.front().message);
  return net;
}

std::map<std::string, std::vector<double>> encode_inputs(const XorRow& row, const EncodingConfig& enc) {
  std::map<std::string, std::vector<double>> stim;
  auto bit_spikes = [&](int bit) -> std::vector<double> {
    if (enc.kind == Encoding::presence) return bit ? std::vector<double>{0.0} : std::vector<double>{};
    return {bit ? enc.one_time : enc.zero_time};
  };
  stim[xor_ids::a] = bit_spikes(row.a);
  stim[xor_ids::b] = bit_spikes(row.b);
  stim[xor_ids::bias] = row.bias ? std::vector<double>{enc.bias_time} : std::vector<double>{};
  return stim;
}

std::vector<Sample> xor_dataset(const EncodingConfig& enc) {
  std::vector<Sample> out;
  for (const auto& row : xor_rows()) out.push_back({encode_inputs(row, enc), row.target_time});
  return out;
}

std::optional<int> decode_output(std::optional<double> onset) {
  if (!onset || !std::isfinite(*onset)) return std::nullopt;
  const double d0 = std::abs(*onset - kTimeZero);
  const double d1 = std::abs(*onset - kTimeOne);
  if (d0 < d1) return 0;
  if (d1 < d0) return 1;
  return std::nullopt;
}

bool XorReport::rows_pass() const {
  return rows.size() == 4 && std::all_of(rows.begin(), rows.end(), [](const XorRowResult& r) { return r.pass; });
}

bool XorReport::mechanisms_pass() const { return threshold_gate && latency_shift && refraction; }

std::optional<double> post_onset_excess(const Trace& trace, const TlrParams& output) {
  const auto onset = first_spike_time(trace, xor_ids::o1);
  if (!onset) return std::nullopt;
  const auto& drive = trace.signal(xor_ids::o1 + ".drive");
  const double window_end = *onset + std::max(output.t_refractory, output.spike_duration);
  double excess = 0.0;
  // Left-point sums on the simulation grid, matching how the neuron integrates.
  for (std::size_t k = 0; k + 1 < trace.time.size(); ++k) {
    const double t0 = std::max(trace.time[k], *onset);
    const double t1 = std::min(trace.time[k + 1], window_end);
    if (t1 <= t0) continue;
    excess += std::max(0.0, drive[k] - output.i_threshold) * (t1 - t0);
  }
  return excess;
}

namespace {

std::string row_name(const XorRow& r) {
  return "row (" + std::to_string(r.a) + "," + std::to_string(r.b) + ")";
}

bool fired(const XorRowResult& r, const std::string& id) {
  const auto it = r.onsets.find(id);
  return it != r.onsets.end() && !it->second.empty();
}

}  // namespace

XorReport run_xor_eval(const Network& net, const SimConfig& sim, const XorEvalOptions& options) {
  const NeuronSpec* o1 = net.find_neuron(xor_ids::o1);
  if (!o1 || !net.find_neuron(xor_ids::i1) || !net.find_neuron(xor_ids::i2))
    throw InvalidInput("run_xor_eval: network lacks i1, i2 or o1");

  XorReport report;
  for (const auto& row : xor_rows()) {
    Network row_net = net;
    apply_stimulus(row_net, encode_inputs(row, options.encoding));
    Trace trace;
    try {
      trace = simulate_network(row_net, sim);
    } catch (const NumericalFailure& e) {
      throw NumericalFailure(row_name(row) + ": " + e.what());
    }
    XorRowResult res;
    res.row = row;
    res.onsets = trace.spike_onsets;
    res.onset = first_spike_time(trace, xor_ids::o1);
    res.decoded = decode_output(res.onset);
    res.pass = res.decoded && *res.decoded == row.target_bit && std::abs(*res.onset - row.target_time) <= options.tol;
    if (!res.decoded) {
      report.diagnostics.push_back(row_name(row) + ": decode failure" +
                                   (res.onset ? " (onset at the 2.25 ns midpoint)" : " (o1 silent)"));
    } else if (!res.pass) {
      std::ostringstream msg;
      msg << row_name(row) << ": o1 onset " << *res.onset << " ns, target " << row.target_time << " ns";
      report.diagnostics.push_back(msg.str());
    }
    report.rows.push_back(std::move(res));
    report.traces.push_back(std::move(trace));
  }

  const auto& r00 = report.rows[0];
  const auto& r01 = report.rows[1];
  const auto& r10 = report.rows[2];

  report.threshold_gate = fired(r00, xor_ids::i1) != fired(r00, xor_ids::i2);
  if (!report.threshold_gate)
    report.diagnostics.emplace_back("threshold gate: on row (0,0) i1 and i2 both " +
                                    std::string(fired(r00, xor_ids::i1) ? "fire" : "stay silent"));

  if (r00.onset && r10.onset) {
    const double shift = *r10.onset - *r00.onset;
    report.latency_shift = shift >= options.shift_low && shift <= options.shift_high;
    if (!report.latency_shift) {
      std::ostringstream msg;
      msg << "latency shift: row (1,0) minus row (0,0) is " << shift << " ns";
      report.diagnostics.push_back(msg.str());
    }
  } else {
    report.diagnostics.emplace_back("latency shift: o1 silent on row (0,0) or (1,0)");
  }

  const auto& o1_onsets = r01.onsets.at(xor_ids::o1);
  const auto excess = post_onset_excess(report.traces[1], o1->tlr);
  const bool second_pulse = excess && *excess >= o1->tlr.q_switch;
  report.refraction = o1_onsets.size() == 1 && second_pulse;
  if (!report.refraction) {
    std::ostringstream msg;
    msg << "refraction: on row (0,1) o1 has " << o1_onsets.size() << " onset(s)";
    if (!second_pulse) msg << " and its drive carries no suprathreshold input after the first onset";
    report.diagnostics.push_back(msg.str());
  }
  return report;
}

XorBenchResult run_xor_bench(const XorExperiment& exp) {
  if (auto v = exp.arch.encoding.violations(); !v.empty()) throw InvalidInput("invalid encoding: " + v.front());
  TrainProblem problem;
  problem.net = build_xor_network(exp.arch);
  initialize_weights(problem.net, exp.train);
  problem.output = xor_ids::o1;
  problem.dataset = xor_dataset(exp.arch.encoding);
  problem.sim = exp.sim;

  XorBenchResult out;
  out.training = train(problem, exp.train);
  XorEvalOptions opts;
  opts.encoding = exp.arch.encoding;
  opts.tol = exp.train.tol;
  out.report = run_xor_eval(out.training.net, exp.sim, opts);
  return out;
}

}  // namespace mtjsnn
