#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtjsnn/macrospin.hpp"
#include "mtjsnn/tlr.hpp"

namespace mtjsnn {

enum class Backend { tlr, macrospin };

std::string to_string(Backend b);
Backend backend_from_string(const std::string& s);  // throws InvalidInput

struct NeuronSpec {
  std::string id;
  Backend backend = Backend::tlr;
  // For macrospin neurons only the spike shape (amplitude, duration) of
  // `tlr` is used: it is the pulse emitted downstream at each switching onset.
  TlrParams tlr;
  MacrospinParams macrospin;
  double initial_tilt_deg = 1.0;  // macrospin only
};

// Amplifier synapse: drive of `post` gains weight * V_pre(t).
struct Synapse {
  std::string pre;
  std::string post;
  double weight = 0.0;  // drive units per volt
};

// Spike provider without dynamics (encoding and bias neurons).
struct Source {
  std::string id;
  std::vector<double> spikes;  // ns
};

struct Network {
  std::vector<NeuronSpec> neurons;
  std::vector<Synapse> synapses;
  std::vector<Source> sources;
  SpikeShape source_shape;

  const NeuronSpec* find_neuron(const std::string& id) const;
  const Source* find_source(const std::string& id) const;
  Source* find_source(const std::string& id);
  std::optional<std::size_t> find_synapse(const std::string& pre, const std::string& post) const;
};

struct SimConfig {
  double dt = 0.001;     // ns
  double horizon = 5.0;  // ns

  std::vector<std::string> violations() const;
};

struct Violation {
  std::string element;
  std::string message;
};

// Empty iff the network is a well-formed feedforward graph.
std::vector<Violation> validate_topology(const Network& net);

// Neuron indices in an order where every presynaptic neuron precedes its
// targets. Throws InvalidInput on a cycle.
std::vector<std::size_t> topological_order(const Network& net);

// Sum over in-edges of post_id of weight * V_pre.
double synaptic_drive(const Network& net, const std::string& post_id,
                      const std::map<std::string, double>& presyn_voltages);

// Sampled waveforms on the grid t_k = k * dt, k = 0..N with N = horizon / dt.
// Per neuron: "<id>.drive", "<id>.v" and "<id>.state" (TLR accumulation or
// macrospin m.e). Per source: "<id>.v".
struct Trace {
  std::vector<double> time;
  std::vector<std::string> signal_names;
  std::vector<std::vector<double>> signals;
  std::map<std::string, std::vector<double>> spike_onsets;

  const std::vector<double>& signal(const std::string& name) const;  // throws InvalidInput
};

Trace simulate_network(const Network& net, const SimConfig& sim);

// Earliest onset of `id` that is <= horizon, without recording a trace.
// Stops as soon as the onset is known.
std::optional<double> simulate_first_onset(const Network& net, const SimConfig& sim,
                                           const std::string& id);

std::optional<double> first_spike_time(const Trace& trace, const std::string& id);

}  // namespace mtjsnn
