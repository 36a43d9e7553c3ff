#include "mtjsnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "mtjsnn/error.hpp"

namespace mtjsnn {

std::string to_string(Backend b) { return b == Backend::tlr ? "tlr" : "macrospin"; }

Backend backend_from_string(const std::string& s) {
  if (s == "tlr") return Backend::tlr;
  if (s == "macrospin") return Backend::macrospin;
  throw InvalidInput("unknown backend '" + s + "'");
}

const NeuronSpec* Network::find_neuron(const std::string& id) const {
  auto it = std::find_if(neurons.begin(), neurons.end(), [&](const auto& n) { return n.id == id; });
  return it == neurons.end() ? nullptr : &*it;
}

const Source* Network::find_source(const std::string& id) const {
  auto it = std::find_if(sources.begin(), sources.end(), [&](const auto& s) { return s.id == id; });
  return it == sources.end() ? nullptr : &*it;
}

Source* Network::find_source(const std::string& id) {
  auto it = std::find_if(sources.begin(), sources.end(), [&](const auto& s) { return s.id == id; });
  return it == sources.end() ? nullptr : &*it;
}

std::optional<std::size_t> Network::find_synapse(const std::string& pre, const std::string& post) const {
  for (std::size_t k = 0; k < synapses.size(); ++k)
    if (synapses[k].pre == pre && synapses[k].post == post) return k;
  return std::nullopt;
}

std::vector<std::string> SimConfig::violations() const {
  std::vector<std::string> out;
  if (!(dt > 0.0) || dt > 0.01) out.emplace_back("dt must be in (0, 0.01] ns");
  if (!std::isfinite(horizon) || !(horizon >= 10.0 * dt)) out.emplace_back("horizon must be >= 10 * dt");
  return out;
}

std::vector<Violation> validate_topology(const Network& net) {
  std::vector<Violation> out;
  std::set<std::string> ids;
  for (const auto& s : net.sources)
    if (!ids.insert(s.id).second) out.push_back({s.id, "duplicate id"});
  for (const auto& n : net.neurons)
    if (!ids.insert(n.id).second) out.push_back({n.id, "duplicate id"});

  for (const auto& syn : net.synapses) {
    const std::string name = syn.pre + "->" + syn.post;
    if (!net.find_neuron(syn.post)) {
      out.push_back({name, net.find_source(syn.post) ? "post references a source" : "post references unknown neuron '" + syn.post + "'"});
    }
    if (!net.find_neuron(syn.pre) && !net.find_source(syn.pre))
      out.push_back({name, "pre references unknown id '" + syn.pre + "'"});
    if (!std::isfinite(syn.weight)) out.push_back({name, "weight is not finite"});
  }

  // Kahn's algorithm over neuron-to-neuron edges; whatever remains is on a cycle.
  std::unordered_map<std::string, int> indegree;
  for (const auto& n : net.neurons) indegree[n.id] = 0;
  for (const auto& syn : net.synapses)
    if (indegree.count(syn.pre) && indegree.count(syn.post)) ++indegree[syn.post];
  std::vector<std::string> ready;
  for (const auto& n : net.neurons)
    if (indegree[n.id] == 0) ready.push_back(n.id);
  std::size_t visited = 0;
  while (!ready.empty()) {
    const std::string id = ready.back();
    ready.pop_back();
    ++visited;
    for (const auto& syn : net.synapses)
      if (syn.pre == id && indegree.count(syn.post) && --indegree[syn.post] == 0) ready.push_back(syn.post);
  }
  if (visited < indegree.size()) {
    for (const auto& syn : net.synapses)
      if (indegree.count(syn.pre) && indegree.count(syn.post) && indegree[syn.pre] > 0 && indegree[syn.post] > 0)
        out.push_back({syn.pre + "->" + syn.post, "edge lies on a cycle"});
  }
  return out;
}

std::vector<std::size_t> topological_order(const Network& net) {
  const std::size_t n = net.neurons.size();
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t k = 0; k < n; ++k) index[net.neurons[k].id] = k;
  std::vector<int> indegree(n, 0);
  for (const auto& syn : net.synapses)
    if (index.count(syn.pre) && index.count(syn.post)) ++indegree[index[syn.post]];
  // Stable: among ready neurons the declaration order wins.
  std::vector<std::size_t> order;
  std::vector<bool> done(n, false);
  while (order.size() < n) {
    bool progressed = false;
    for (std::size_t k = 0; k < n; ++k) {
      if (done[k] || indegree[k] != 0) continue;
      done[k] = true;
      order.push_back(k);
      progressed = true;
      for (const auto& syn : net.synapses)
        if (syn.pre == net.neurons[k].id && index.count(syn.post)) --indegree[index[syn.post]];
    }
    if (!progressed) throw InvalidInput("network contains a cycle");
  }
  return order;
}

double synaptic_drive(const Network& net, const std::string& post_id,
                      const std::map<std::string, double>& presyn_voltages) {
  double drive = 0.0;
  for (const auto& syn : net.synapses) {
    if (syn.post != post_id) continue;
    auto it = presyn_voltages.find(syn.pre);
    if (it == presyn_voltages.end())
      throw InvalidInput("synaptic_drive: missing presynaptic voltage for '" + syn.pre + "'");
    drive += syn.weight * it->second;
  }
  return drive;
}

const std::vector<double>& Trace::signal(const std::string& name) const {
  for (std::size_t k = 0; k < signal_names.size(); ++k)
    if (signal_names[k] == name) return signals[k];
  throw InvalidInput("trace has no signal '" + name + "'");
}

std::optional<double> first_spike_time(const Trace& trace, const std::string& id) {
  auto it = trace.spike_onsets.find(id);
  if (it == trace.spike_onsets.end()) throw InvalidInput("first_spike_time: unknown id '" + id + "'");
  if (it->second.empty()) return std::nullopt;
  return *std::min_element(it->second.begin(), it->second.end());
}

namespace {

struct InEdge {
  std::size_t node;  // index into the engine's voltage vector
  double weight;
};

struct NeuronRuntime {
  TlrState tlr;
  MacrospinState spin;
  std::optional<SwitchDetector> detector;
  std::optional<double> last_onset;  // macrospin only
};

// Time-stepping engine shared by the recording and the early-exit entry points.
// Node layout: sources first, then neurons in declaration order.
class Engine {
 public:
  Engine(const Network& net, const SimConfig& sim) : net_(net), sim_(sim) {
    if (auto v = sim.violations(); !v.empty()) throw InvalidInput("invalid sim config: " + v.front());
    if (auto v = validate_topology(net); !v.empty())
      throw InvalidInput("invalid network: " + v.front().element + ": " + v.front().message);
    for (const auto& s : net.sources)
      for (double t : s.spikes)
        if (!(t >= 0.0 && t <= sim.horizon))
          throw InvalidInput("source '" + s.id + "' has a spike outside [0, horizon]");
    for (const auto& n : net.neurons) {
      n.tlr.validate();
      if (n.backend == Backend::macrospin) n.macrospin.validate();
    }

    const std::size_t ns = net.sources.size();
    std::unordered_map<std::string, std::size_t> node;
    for (std::size_t k = 0; k < ns; ++k) node[net.sources[k].id] = k;
    for (std::size_t k = 0; k < net.neurons.size(); ++k) node[net.neurons[k].id] = ns + k;
    in_edges_.resize(net.neurons.size());
    for (const auto& syn : net.synapses) in_edges_[node[syn.post] - ns].push_back({node[syn.pre], syn.weight});

    order_ = topological_order(net);
    voltage_.assign(ns + net.neurons.size(), 0.0);
    drive_.assign(net.neurons.size(), 0.0);
    runtime_.resize(net.neurons.size());
    for (std::size_t k = 0; k < net.neurons.size(); ++k) {
      const auto& spec = net.neurons[k];
      if (spec.backend == Backend::macrospin) {
        runtime_[k].spin = tilted_antiparallel_state(spec.macrospin, spec.initial_tilt_deg);
        runtime_[k].detector.emplace(dot(runtime_[k].spin.m, normalized(spec.macrospin.polarizer)));
      }
    }
    steps_ = static_cast<std::size_t>(sim.horizon / sim.dt + 0.5);
  }

  std::size_t steps() const { return steps_; }
  double time(std::size_t k) const { return static_cast<double>(k) * sim_.dt; }

  // Voltages and drives at grid point k.
  void evaluate(std::size_t k) {
    const double t = time(k);
    const std::size_t ns = net_.sources.size();
    for (std::size_t s = 0; s < ns; ++s) {
      double v = 0.0;
      for (double onset : net_.sources[s].spikes)
        if (t >= onset) v += spike_waveform(net_.source_shape, t - onset);
      voltage_[s] = v;
    }
    for (std::size_t n = 0; n < net_.neurons.size(); ++n) {
      const auto& spec = net_.neurons[n];
      if (spec.backend == Backend::tlr) {
        voltage_[ns + n] = tlr_output_voltage(runtime_[n].tlr, spec.tlr, t);
      } else {
        const auto& on = runtime_[n].last_onset;
        const double since = on ? t - *on : -1.0;
        voltage_[ns + n] = (on && since >= 0.0) ? spike_waveform(shape_of(spec.tlr), since) : 0.0;
      }
    }
    for (std::size_t n : order_) {
      double d = 0.0;
      for (const auto& e : in_edges_[n]) d += e.weight * voltage_[e.node];
      drive_[n] = d;
    }
  }

  // Advances every neuron over [t_k, t_k + dt]; returns neurons that committed
  // a spike onset during the step, with the onset time.
  std::vector<std::pair<std::size_t, double>> advance(std::size_t k) {
    std::vector<std::pair<std::size_t, double>> fired;
    const double t = time(k);
    for (std::size_t n : order_) {
      const auto& spec = net_.neurons[n];
      auto& rt = runtime_[n];
      try {
        if (spec.backend == Backend::tlr) {
          auto r = tlr_step(rt.tlr, spec.tlr, drive_[n], t, sim_.dt);
          rt.tlr = r.state;
          if (r.spike_onset) fired.emplace_back(n, *r.spike_onset);
        } else {
          const Vec3 e = normalized(spec.macrospin.polarizer);
          const double p0 = dot(rt.spin.m, e);
          auto r = macrospin_step(rt.spin, spec.macrospin, drive_[n], sim_.dt);
          rt.spin = r.state;
          if (auto on = rt.detector->update(t, p0, t + sim_.dt, dot(rt.spin.m, e))) {
            rt.last_onset = *on;
            fired.emplace_back(n, *on);
          }
        }
      } catch (const NumericalFailure& err) {
        throw NumericalFailure("neuron '" + spec.id + "': " + err.what());
      }
    }
    return fired;
  }

  double voltage_of_neuron(std::size_t n) const { return voltage_[net_.sources.size() + n]; }
  double voltage_of_source(std::size_t s) const { return voltage_[s]; }
  double drive_of(std::size_t n) const { return drive_[n]; }
  double state_of(std::size_t n) const {
    const auto& spec = net_.neurons[n];
    if (spec.backend == Backend::tlr) return runtime_[n].tlr.accumulation;
    return dot(runtime_[n].spin.m, normalized(spec.macrospin.polarizer));
  }
  double node_voltage_of(std::size_t n) const {
    const auto& spec = net_.neurons[n];
    const auto& m = runtime_[n].spin.m;
    return solve_series_circuit(drive_[n], mtj_resistance(m, spec.macrospin), spec.macrospin).v_node;
  }

 private:
  const Network& net_;
  SimConfig sim_;
  std::vector<std::vector<InEdge>> in_edges_;
  std::vector<std::size_t> order_;
  std::vector<double> voltage_;
  std::vector<double> drive_;
  std::vector<NeuronRuntime> runtime_;
  std::size_t steps_ = 0;
};

}  // namespace

Trace simulate_network(const Network& net, const SimConfig& sim) {
  Engine engine(net, sim);
  const std::size_t points = engine.steps() + 1;

  Trace tr;
  tr.time.resize(points);
  struct Column {
    enum Kind { source_v, drive, v, state, node } kind;
    std::size_t index;
  };
  std::vector<Column> columns;
  for (std::size_t s = 0; s < net.sources.size(); ++s) {
    tr.signal_names.push_back(net.sources[s].id + ".v");
    columns.push_back({Column::source_v, s});
  }
  for (std::size_t n = 0; n < net.neurons.size(); ++n) {
    const auto& id = net.neurons[n].id;
    tr.signal_names.push_back(id + ".drive");
    columns.push_back({Column::drive, n});
    tr.signal_names.push_back(id + ".v");
    columns.push_back({Column::v, n});
    tr.signal_names.push_back(id + ".state");
    columns.push_back({Column::state, n});
    if (net.neurons[n].backend == Backend::macrospin) {
      tr.signal_names.push_back(id + ".v_node");
      columns.push_back({Column::node, n});
    }
    tr.spike_onsets[id];
  }
  tr.signals.assign(columns.size(), std::vector<double>(points, 0.0));

  for (std::size_t k = 0; k < points; ++k) {
    engine.evaluate(k);
    tr.time[k] = engine.time(k);
    for (std::size_t c = 0; c < columns.size(); ++c) {
      const auto& col = columns[c];
      double value = 0.0;
      switch (col.kind) {
        case Column::source_v: value = engine.voltage_of_source(col.index); break;
        case Column::drive: value = engine.drive_of(col.index); break;
        case Column::v: value = engine.voltage_of_neuron(col.index); break;
        case Column::state: value = engine.state_of(col.index); break;
        case Column::node: value = engine.node_voltage_of(col.index); break;
      }
      tr.signals[c][k] = value;
    }
    if (k == engine.steps()) break;
    for (const auto& [n, onset] : engine.advance(k))
      if (onset <= sim.horizon) tr.spike_onsets[net.neurons[n].id].push_back(onset);
  }
  return tr;
}

std::optional<double> simulate_first_onset(const Network& net, const SimConfig& sim,
                                           const std::string& id) {
  std::optional<std::size_t> target;
  for (std::size_t n = 0; n < net.neurons.size(); ++n)
    if (net.neurons[n].id == id) target = n;
  if (!target) throw InvalidInput("simulate_first_onset: unknown neuron '" + id + "'");

  Engine engine(net, sim);
  for (std::size_t k = 0; k < engine.steps(); ++k) {
    engine.evaluate(k);
    for (const auto& [n, onset] : engine.advance(k)) {
      if (n != *target) continue;
      if (onset <= sim.horizon) return onset;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace mtjsnn
