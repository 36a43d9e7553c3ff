#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mtjsnn/tlr.hpp"
#include "mtjsnn/vec3.hpp"

namespace mtjsnn {

// Single-domain free layer of an MTJ in series with an NMOS transistor.
//
//   V_DD --[MTJ R(m)]-- node --[NMOS, gate = v_gate]-- GND
//
// The node voltage is the neuron output. Units: ns, T, V, mA, kOhm.
struct MacrospinParams {
  double gamma = 176.0;            // rad / (ns T)
  double alpha = 0.02;             // Gilbert damping
  double h_easy = 0.05;            // T, easy axis along the polarizer
  double h_demag = 0.5;            // T, out-of-plane (z) demagnetization
  double stt_coefficient = -40.0;  // rad / (ns mA); negative favours the parallel state
  Vec3 polarizer{1.0, 0.0, 0.0};
  double r_parallel = 2.0;      // kOhm
  double r_antiparallel = 4.0;  // kOhm
  double v_dd = 1.0;            // V
  double transistor_k = 1.0;    // mA / V^2
  double transistor_vt = 0.4;   // V

  std::vector<std::string> violations() const;
  void validate() const;  // throws InvalidInput

  friend bool operator==(const MacrospinParams&, const MacrospinParams&) = default;
};

struct MacrospinState {
  Vec3 m;         // unit vector
  double t = 0.0;  // ns
};

// -polarizer tilted by `tilt_deg` towards a fixed perpendicular in-plane
// direction (z x polarizer, or +x if the polarizer is along z).
MacrospinState tilted_antiparallel_state(const MacrospinParams& params, double tilt_deg = 1.0);

// Landau-Lifshitz-Gilbert-Slonczewski right-hand side, 1/ns.
Vec3 llgs_derivative(const Vec3& m, const MacrospinParams& params, double i_device);

double mtj_resistance(const Vec3& m, const MacrospinParams& params);

// Square-law NMOS with triode and saturation regions.
double nmos_current(double v_gate, double v_drain, const MacrospinParams& params);

struct CircuitPoint {
  double v_node = 0.0;  // V
  double current = 0.0;  // mA
};

// Self-consistent node voltage for the series circuit, by bisection on [0, v_dd].
CircuitPoint solve_series_circuit(double v_gate, double r_mtj, const MacrospinParams& params);

// Upward crossings of m.e through 0 count as switching events. A new event
// requires m.e to fall back below -0.5 first.
class SwitchDetector {
 public:
  explicit SwitchDetector(double initial_projection) : armed_(initial_projection < kRearm) {}

  // Returns the interpolated crossing time if the step [t0, t1] switched.
  std::optional<double> update(double t0, double p0, double t1, double p1);

 private:
  static constexpr double kRearm = -0.5;
  bool armed_;
};

struct MacrospinStepResult {
  MacrospinState state;
  CircuitPoint circuit;      // operating point at the start of the step
  double norm_drift = 0.0;   // ||m| - 1| before renormalization
};

// One RK4 step with the device current held at its start-of-step value.
MacrospinStepResult macrospin_step(const MacrospinState& state, const MacrospinParams& params,
                                   double v_gate, double dt);

struct MacrospinTrace {
  std::vector<double> time;     // ns, k * dt
  std::vector<double> v_node;   // V
  std::vector<double> current;  // mA
  std::vector<Vec3> m;
  std::vector<double> switch_onsets;  // ns
  double max_norm_drift = 0.0;
};

MacrospinTrace integrate_macrospin(const MacrospinState& state, const MacrospinParams& params,
                                   const std::function<double(double)>& v_gate, double dt,
                                   double horizon);

struct LatencyProbe {
  double dt = 0.001;        // ns
  double horizon = 20.0;    // ns
  double tilt_deg = 1.0;
};

// Time of the first switching event under a constant gate voltage, starting
// from the tilted antiparallel state.
std::optional<double> switching_latency(const MacrospinParams& params, double v_gate,
                                        const LatencyProbe& probe = {});

// Gate voltage separating "never switches within the probe horizon" from
// "switches", located by bisection on [v_low, v_high].
double find_switching_threshold(const MacrospinParams& params, double v_low, double v_high,
                                const LatencyProbe& probe = {}, double tol = 1e-4);

struct LatencyFit {
  double i_threshold = 0.0;
  double q_switch = 0.0;
  double latency_floor = 0.0;
  double max_rel_residual = 0.0;
};

// Least-squares fit of T(I) = floor + q / (I - i_th) with relative weights.
// The floor is constrained to be non-negative.
LatencyFit fit_latency_law(const std::vector<double>& drives, const std::vector<double>& latencies);

struct Calibration {
  TlrParams params;
  LatencyFit fit;
  std::vector<double> drives;     // switching points used in the fit
  std::vector<double> latencies;  // ns
};

// Measures macrospin latencies over `drive_grid` (gate volts) and fits the
// TLR latency law. Fields of `base` other than the fitted ones are kept.
Calibration calibrate_tlr(const MacrospinParams& params, const std::vector<double>& drive_grid,
                          const LatencyProbe& probe = {}, const TlrParams& base = {});

}  // namespace mtjsnn
