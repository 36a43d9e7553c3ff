#include "mtjsnn/macrospin.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "mtjsnn/error.hpp"

namespace mtjsnn {

namespace {

constexpr double kUnitTolerance = 1e-6;
constexpr double kCircuitTolerance = 1e-9;  // V

void require_unit(const Vec3& m, const char* where) {
  if (std::abs(norm(m) - 1.0) > kUnitTolerance)
    throw InvalidState(std::string(where) + ": magnetization is not a unit vector");
}

Vec3 easy_axis(const MacrospinParams& p) { return normalized(p.polarizer); }

// Unchecked right-hand side; RK4 stages are slightly off the unit sphere.
Vec3 llgs_rhs(const Vec3& m, const MacrospinParams& p, const Vec3& e, double i_device) {
  constexpr Vec3 z{0.0, 0.0, 1.0};
  const Vec3 h_eff = p.h_easy * dot(m, e) * e - p.h_demag * dot(m, z) * z;
  const double gamma_red = p.gamma / (1.0 + p.alpha * p.alpha);
  const Vec3 m_x_h = cross(m, h_eff);
  return -gamma_red * m_x_h - gamma_red * p.alpha * cross(m, m_x_h) +
         p.stt_coefficient * i_device * cross(m, cross(m, e));
}

}  // namespace

std::vector<std::string> MacrospinParams::violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(gamma) || gamma <= 0.0) out.emplace_back("gamma must be > 0");
  if (!std::isfinite(alpha) || alpha <= 0.0) out.emplace_back("alpha must be > 0");
  if (!std::isfinite(h_easy) || !std::isfinite(h_demag)) out.emplace_back("fields must be finite");
  if (!std::isfinite(stt_coefficient)) out.emplace_back("stt_coefficient must be finite");
  if (std::abs(norm(polarizer) - 1.0) > kUnitTolerance) out.emplace_back("polarizer must be a unit vector");
  if (!(r_parallel > 0.0) || !(r_antiparallel > r_parallel) || !std::isfinite(r_antiparallel))
    out.emplace_back("resistances must satisfy r_antiparallel > r_parallel > 0");
  if (!std::isfinite(v_dd) || v_dd <= 0.0) out.emplace_back("v_dd must be > 0");
  if (!std::isfinite(transistor_k) || transistor_k <= 0.0) out.emplace_back("transistor_k must be > 0");
  if (!std::isfinite(transistor_vt)) out.emplace_back("transistor_vt must be finite");
  return out;
}

void MacrospinParams::validate() const {
  const auto v = violations();
  if (!v.empty()) throw InvalidInput("invalid macrospin parameters: " + v.front());
}

MacrospinState tilted_antiparallel_state(const MacrospinParams& params, double tilt_deg) {
  const Vec3 e = easy_axis(params);
  Vec3 u = cross(Vec3{0.0, 0.0, 1.0}, e);
  if (norm(u) < 1e-12) u = {1.0, 0.0, 0.0};
  u = normalized(u);
  const double th = tilt_deg * std::numbers::pi / 180.0;
  return {normalized(-std::cos(th) * e + std::sin(th) * u), 0.0};
}

Vec3 llgs_derivative(const Vec3& m, const MacrospinParams& params, double i_device) {
  require_unit(m, "llgs_derivative");
  return llgs_rhs(m, params, easy_axis(params), i_device);
}

double mtj_resistance(const Vec3& m, const MacrospinParams& params) {
  require_unit(m, "mtj_resistance");
  const double c = dot(m, easy_axis(params));
  return params.r_parallel + (params.r_antiparallel - params.r_parallel) * (1.0 - c) / 2.0;
}

double nmos_current(double v_gate, double v_drain, const MacrospinParams& params) {
  if (!std::isfinite(v_gate) || !std::isfinite(v_drain))
    throw InvalidInput("nmos_current: voltages must be finite");
  if (v_drain < 0.0) throw InvalidInput("nmos_current: v_drain must be >= 0");
  const double v_ov = v_gate - params.transistor_vt;
  if (v_ov <= 0.0) return 0.0;
  if (v_drain < v_ov) return params.transistor_k * (v_ov * v_drain - v_drain * v_drain / 2.0);
  return params.transistor_k * v_ov * v_ov / 2.0;
}

CircuitPoint solve_series_circuit(double v_gate, double r_mtj, const MacrospinParams& params) {
  // f(v) = v - (v_dd - i(v) R) is strictly increasing in v.
  auto f = [&](double v) { return v - (params.v_dd - nmos_current(v_gate, v, params) * r_mtj); };
  double lo = 0.0;
  double hi = params.v_dd;
  if (f(lo) > 0.0 || f(hi) < 0.0)
    throw NumericalFailure("solve_series_circuit: no operating point in [0, v_dd]");
  while (hi - lo > kCircuitTolerance) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  const double v = 0.5 * (lo + hi);
  return {v, nmos_current(v_gate, v, params)};
}

std::optional<double> SwitchDetector::update(double t0, double p0, double t1, double p1) {
  std::optional<double> onset;
  if (armed_ && p0 < 0.0 && p1 >= 0.0) {
    onset = t0 + (t1 - t0) * (-p0) / (p1 - p0);
    armed_ = false;
  }
  if (p1 < kRearm) armed_ = true;
  return onset;
}

MacrospinStepResult macrospin_step(const MacrospinState& state, const MacrospinParams& params,
                                   double v_gate, double dt) {
  if (!std::isfinite(v_gate)) throw InvalidInput("macrospin_step: gate voltage must be finite");
  const Vec3 e = easy_axis(params);
  MacrospinStepResult out;
  out.circuit = solve_series_circuit(v_gate, mtj_resistance(state.m, params), params);
  const double i = out.circuit.current;
  const Vec3& m = state.m;
  const Vec3 k1 = llgs_rhs(m, params, e, i);
  const Vec3 k2 = llgs_rhs(m + 0.5 * dt * k1, params, e, i);
  const Vec3 k3 = llgs_rhs(m + 0.5 * dt * k2, params, e, i);
  const Vec3 k4 = llgs_rhs(m + dt * k3, params, e, i);
  const Vec3 raw = m + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  const double len = norm(raw);
  if (!std::isfinite(len) || len == 0.0) throw NumericalFailure("macrospin_step: magnetization diverged");
  out.norm_drift = std::abs(len - 1.0);
  out.state = {raw * (1.0 / len), state.t + dt};
  return out;
}

MacrospinTrace integrate_macrospin(const MacrospinState& state, const MacrospinParams& params,
                                   const std::function<double(double)>& v_gate, double dt,
                                   double horizon) {
  if (!(dt > 0.0) || dt > 0.01) throw InvalidInput("integrate_macrospin: dt must be in (0, 0.01] ns");
  if (!(horizon >= dt)) throw InvalidInput("integrate_macrospin: horizon must be >= dt");
  require_unit(state.m, "integrate_macrospin");

  const Vec3 e = easy_axis(params);
  const auto steps = static_cast<std::size_t>(horizon / dt + 0.5);
  MacrospinTrace tr;
  tr.time.reserve(steps + 1);
  tr.v_node.reserve(steps + 1);
  tr.current.reserve(steps + 1);
  tr.m.reserve(steps + 1);

  SwitchDetector detector(dot(state.m, e));
  MacrospinState s = state;
  for (std::size_t k = 0;; ++k) {
    const double t = state.t + static_cast<double>(k) * dt;
    const double vg = v_gate(t);
    if (k == steps) {
      const auto op = solve_series_circuit(vg, mtj_resistance(s.m, params), params);
      tr.time.push_back(t);
      tr.v_node.push_back(op.v_node);
      tr.current.push_back(op.current);
      tr.m.push_back(s.m);
      break;
    }
    const auto r = macrospin_step(s, params, vg, dt);
    tr.time.push_back(t);
    tr.v_node.push_back(r.circuit.v_node);
    tr.current.push_back(r.circuit.current);
    tr.m.push_back(s.m);
    tr.max_norm_drift = std::max(tr.max_norm_drift, r.norm_drift);
    if (auto on = detector.update(t, dot(s.m, e), t + dt, dot(r.state.m, e))) tr.switch_onsets.push_back(*on);
    s = r.state;
  }
  return tr;
}

std::optional<double> switching_latency(const MacrospinParams& params, double v_gate,
                                        const LatencyProbe& probe) {
  const Vec3 e = easy_axis(params);
  MacrospinState s = tilted_antiparallel_state(params, probe.tilt_deg);
  SwitchDetector detector(dot(s.m, e));
  const auto steps = static_cast<long>(probe.horizon / probe.dt + 0.5);
  for (long k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * probe.dt;
    const auto r = macrospin_step(s, params, v_gate, probe.dt);
    if (auto on = detector.update(t, dot(s.m, e), t + probe.dt, dot(r.state.m, e))) return on;
    s = r.state;
  }
  return std::nullopt;
}

double find_switching_threshold(const MacrospinParams& params, double v_low, double v_high,
                                const LatencyProbe& probe, double tol) {
  if (switching_latency(params, v_low, probe))
    throw InvalidInput("find_switching_threshold: lower bound already switches");
  if (!switching_latency(params, v_high, probe))
    throw InvalidInput("find_switching_threshold: upper bound does not switch");
  while (v_high - v_low > tol) {
    const double mid = 0.5 * (v_low + v_high);
    if (switching_latency(params, mid, probe)) {
      v_high = mid;
    } else {
      v_low = mid;
    }
  }
  return 0.5 * (v_low + v_high);
}

LatencyFit fit_latency_law(const std::vector<double>& drives, const std::vector<double>& latencies) {
  if (drives.size() != latencies.size()) throw InvalidInput("fit_latency_law: size mismatch");
  if (drives.size() < 4) throw InsufficientData("fit_latency_law: need at least 4 switching points");
  const double i_min = *std::min_element(drives.begin(), drives.end());
  const double i_max = *std::max_element(drives.begin(), drives.end());
  const double scale = std::max(i_max - i_min, std::abs(i_min) + 1e-12);

  // For a fixed threshold the model is linear in (floor, q); solve that
  // weighted problem in closed form and search the threshold in 1-D.
  struct Linear {
    double floor, q, cost;
  };
  auto solve_linear = [&](double i_th) {
    double sw = 0, sx = 0, sxx = 0, sy = 0, sxy = 0;
    for (std::size_t k = 0; k < drives.size(); ++k) {
      const double w = 1.0 / (latencies[k] * latencies[k]);
      const double x = 1.0 / (drives[k] - i_th);
      sw += w;
      sx += w * x;
      sxx += w * x * x;
      sy += w * latencies[k];
      sxy += w * x * latencies[k];
    }
    const double det = sw * sxx - sx * sx;
    double floor = (sxx * sy - sx * sxy) / det;
    double q = (sw * sxy - sx * sy) / det;
    if (!(floor >= 0.0)) {
      floor = 0.0;
      q = sxy / sxx;
    }
    double cost = 0.0;
    for (std::size_t k = 0; k < drives.size(); ++k) {
      const double r = (latencies[k] - floor - q / (drives[k] - i_th)) / latencies[k];
      cost += r * r;
    }
    return Linear{floor, q, cost};
  };
  // Search over u = log(i_min - i_th).
  auto cost_at = [&](double u) { return solve_linear(i_min - std::exp(u)).cost; };
  const double u_lo = std::log(1e-9 * scale);
  const double u_hi = std::log(1e3 * scale);
  constexpr int kScan = 400;
  int best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kScan; ++k) {
    const double c = cost_at(u_lo + (u_hi - u_lo) * k / kScan);
    if (c < best_cost) {
      best_cost = c;
      best = k;
    }
  }
  const double a = u_lo + (u_hi - u_lo) * std::max(0, best - 1) / kScan;
  const double b = u_lo + (u_hi - u_lo) * std::min(kScan, best + 1) / kScan;
  const auto [u_best, c_best] =
      boost::math::tools::brent_find_minima(cost_at, a, b, std::numeric_limits<double>::digits);
  (void)c_best;

  const double i_th = i_min - std::exp(u_best);
  const auto lin = solve_linear(i_th);
  LatencyFit fit{i_th, lin.q, lin.floor, 0.0};
  for (std::size_t k = 0; k < drives.size(); ++k) {
    const double model = fit.latency_floor + fit.q_switch / (drives[k] - i_th);
    fit.max_rel_residual = std::max(fit.max_rel_residual, std::abs(model - latencies[k]) / latencies[k]);
  }
  if (!(fit.q_switch > 0.0)) throw NumericalFailure("fit_latency_law: latencies do not decrease with drive");
  return fit;
}

Calibration calibrate_tlr(const MacrospinParams& params, const std::vector<double>& drive_grid,
                          const LatencyProbe& probe, const TlrParams& base) {
  Calibration cal;
  for (double v : drive_grid) {
    if (auto lat = switching_latency(params, v, probe)) {
      cal.drives.push_back(v);
      cal.latencies.push_back(*lat);
    }
  }
  if (cal.drives.size() < 4)
    throw InsufficientData("calibrate_tlr: fewer than 4 grid points switch within the horizon");
  cal.fit = fit_latency_law(cal.drives, cal.latencies);
  cal.params = base;
  cal.params.i_threshold = cal.fit.i_threshold;
  cal.params.q_switch = cal.fit.q_switch;
  cal.params.latency_floor = cal.fit.latency_floor;
  return cal;
}

}  // namespace mtjsnn
