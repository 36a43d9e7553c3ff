#include "mtjsnn/tlr.hpp"

#include <cmath>
#include <numbers>

#include "mtjsnn/error.hpp"

namespace mtjsnn {

std::vector<std::string> TlrParams::violations() const {
  std::vector<std::string> out;
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(i_threshold) || i_threshold <= 0.0) out.emplace_back("i_threshold must be > 0");
  if (!finite(q_switch) || q_switch <= 0.0) out.emplace_back("q_switch must be > 0");
  if (!finite(latency_floor) || latency_floor < 0.0) out.emplace_back("latency_floor must be >= 0");
  if (!finite(spike_amplitude)) out.emplace_back("spike_amplitude must be finite");
  if (!finite(spike_duration) || spike_duration <= 0.0) out.emplace_back("spike_duration must be > 0");
  // 0 switches refraction off; anything else must outlast the spike itself.
  if (!finite(t_refractory) || (t_refractory != 0.0 && t_refractory < spike_duration))
    out.emplace_back("t_refractory must be 0 (disabled) or >= spike_duration");
  if (!finite(rel_refraction_beta) || rel_refraction_beta < 0.0)
    out.emplace_back("rel_refraction_beta must be >= 0");
  if (!finite(rel_refraction_tau) || rel_refraction_tau <= 0.0)
    out.emplace_back("rel_refraction_tau must be > 0");
  return out;
}

void TlrParams::validate() const {
  const auto v = violations();
  if (!v.empty()) throw InvalidInput("invalid TLR parameters: " + v.front());
}

double effective_threshold(const TlrState& state, const TlrParams& params, double t) {
  if (!state.last_spike_onset || params.rel_refraction_beta == 0.0) return params.i_threshold;
  const double since = t - *state.last_spike_onset;
  if (since < 0.0) return params.i_threshold;
  return params.i_threshold *
         (1.0 + params.rel_refraction_beta * std::exp(-since / params.rel_refraction_tau));
}

double tlr_output_voltage(const TlrState& state, const TlrParams& params, double t) {
  if (!state.last_spike_onset) return 0.0;
  const double since = t - *state.last_spike_onset;
  if (since < 0.0 || since > params.spike_duration) return 0.0;
  return spike_waveform(params, since);
}

TlrStepResult tlr_step(const TlrState& state, const TlrParams& params, double drive, double t,
                       double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidInput("tlr_step: dt must be > 0");
  if (!std::isfinite(drive)) throw InvalidInput("tlr_step: drive must be finite");
  if (!std::isfinite(t)) throw InvalidInput("tlr_step: t must be finite");

  TlrStepResult result;
  TlrState& next = result.state;
  next = state;
  const double t_end = t + dt;

  double t_from = t;
  if (state.last_spike_onset && state.blocked_until > t) t_from = state.blocked_until;

  if (t_from < t_end) {
    const double excess = std::max(0.0, drive - effective_threshold(state, params, t));
    const double reached = state.accumulation + excess * (t_end - t_from);
    if (excess > 0.0 && reached >= params.q_switch) {
      const double crossing = t_from + (params.q_switch - state.accumulation) / excess;
      const double onset = crossing + params.latency_floor;
      next.accumulation = 0.0;
      next.last_spike_onset = onset;
      next.blocked_until = params.t_refractory == 0.0 ? onset : onset + params.t_refractory;
      result.spike_onset = onset;
    } else {
      next.accumulation = reached;
    }
  }

  if (next.last_spike_onset && t_end < next.blocked_until) {
    next.phase = t_end < *next.last_spike_onset + params.spike_duration ? TlrPhase::spiking
                                                                        : TlrPhase::refractory;
  } else {
    next.phase = TlrPhase::idle;
  }
  result.output_voltage = tlr_output_voltage(next, params, t_end);
  return result;
}

std::optional<double> constant_drive_latency(const TlrParams& params, double drive) {
  if (!std::isfinite(drive)) throw InvalidInput("constant_drive_latency: drive must be finite");
  if (drive <= params.i_threshold) return std::nullopt;
  return params.latency_floor + params.q_switch / (drive - params.i_threshold);
}

double spike_waveform(const SpikeShape& shape, double t_since_onset) {
  if (!(t_since_onset >= 0.0)) throw InvalidInput("spike_waveform: time since onset must be >= 0");
  if (t_since_onset > shape.duration) return 0.0;
  return shape.amplitude * 0.5 *
         (1.0 - std::cos(2.0 * std::numbers::pi * t_since_onset / shape.duration));
}

double spike_waveform(const TlrParams& params, double t_since_onset) {
  return spike_waveform(shape_of(params), t_since_onset);
}

}  // namespace mtjsnn
