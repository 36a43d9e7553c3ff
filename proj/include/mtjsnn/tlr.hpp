#pragma once

#include <optional>
#include <string>
#include <vector>

namespace mtjsnn {

// Phenomenological threshold-latency-refraction (TLR) neuron.
//
// The neuron integrates the drive in excess of its threshold. Once the
// accumulated excess reaches q_switch the neuron commits to a spike whose
// onset follows latency_floor later. For a constant drive I > i_threshold
// the first-passage time is therefore
//
//     T(I) = latency_floor + q_switch / (I - i_threshold)
//
// which diverges as I approaches the threshold from above. Input is ignored
// from the commit instant until onset + t_refractory (absolute refraction).
// A t_refractory of exactly 0 disables refraction entirely.

struct TlrParams {
  double i_threshold = 1.0;      // drive units
  double q_switch = 0.1;         // drive units * ns
  double latency_floor = 0.6;    // ns
  double spike_amplitude = 1.0;  // V
  double spike_duration = 2.0;   // ns
  double t_refractory = 4.5;     // ns, measured from spike onset
  double rel_refraction_beta = 0.0;
  double rel_refraction_tau = 1.0;  // ns

  // Empty when the parameters satisfy their invariants.
  std::vector<std::string> violations() const;
  void validate() const;  // throws InvalidInput

  friend bool operator==(const TlrParams&, const TlrParams&) = default;
};

enum class TlrPhase { idle, spiking, refractory };

struct TlrState {
  double accumulation = 0.0;  // drive units * ns, in [0, q_switch)
  TlrPhase phase = TlrPhase::idle;
  std::optional<double> last_spike_onset;  // ns
  // End of the window during which drive is ignored. Only meaningful once a
  // spike has been committed.
  double blocked_until = 0.0;

  friend bool operator==(const TlrState&, const TlrState&) = default;
};

struct TlrStepResult {
  TlrState state;
  double output_voltage = 0.0;       // at t + dt
  std::optional<double> spike_onset;  // set on the step that commits a spike
};

// Advances the neuron over [t, t + dt] under a drive held at its value at t.
// At most one spike can be committed per step.
TlrStepResult tlr_step(const TlrState& state, const TlrParams& params, double drive, double t,
                       double dt);

// Output voltage of a neuron in `state` at time t.
double tlr_output_voltage(const TlrState& state, const TlrParams& params, double t);

// Threshold in effect at time t, including relative refraction if enabled.
double effective_threshold(const TlrState& state, const TlrParams& params, double t);

// Closed-form first-spike latency under a constant drive applied from t = 0
// to an idle neuron. Empty for drive <= i_threshold.
std::optional<double> constant_drive_latency(const TlrParams& params, double drive);

// Raised-cosine pulse of width spike_duration and peak spike_amplitude.
double spike_waveform(const TlrParams& params, double t_since_onset);

// Pulse shape used by spike sources and by neurons that only report onsets.
struct SpikeShape {
  double amplitude = 1.0;  // V
  double duration = 2.0;   // ns

  friend bool operator==(const SpikeShape&, const SpikeShape&) = default;
};

double spike_waveform(const SpikeShape& shape, double t_since_onset);

inline SpikeShape shape_of(const TlrParams& p) { return {p.spike_amplitude, p.spike_duration}; }

// Simulates an idle neuron under drive(t) sampled at t = k*dt (left point)
// and returns every spike onset up to `horizon`.
template <typename DriveFn>
std::vector<double> tlr_simulate_onsets(const TlrParams& params, DriveFn&& drive, double dt,
                                        double horizon) {
  std::vector<double> onsets;
  TlrState state;
  const auto steps = static_cast<long>(horizon / dt + 0.5);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * dt;
    auto r = tlr_step(state, params, drive(t), t, dt);
    state = r.state;
    if (r.spike_onset && *r.spike_onset <= horizon) onsets.push_back(*r.spike_onset);
  }
  return onsets;
}

}  // namespace mtjsnn
