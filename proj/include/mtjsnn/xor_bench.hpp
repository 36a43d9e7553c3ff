#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mtjsnn/network.hpp"
#include "mtjsnn/trainer.hpp"

namespace mtjsnn {

// Node ids of the XOR network.
namespace xor_ids {
inline const std::string a = "A";
inline const std::string b = "B";
inline const std::string bias = "bias";
inline const std::string i1 = "i1";
inline const std::string i2 = "i2";
inline const std::string o1 = "o1";
}  // namespace xor_ids

inline constexpr double kTimeZero = 2.0;  // ns, output spike time encoding 0
inline constexpr double kTimeOne = 2.5;   // ns, output spike time encoding 1

enum class Encoding { presence, timing };

std::string to_string(Encoding e);
Encoding encoding_from_string(const std::string& s);  // throws InvalidInput

struct EncodingConfig {
  Encoding kind = Encoding::presence;
  double bias_time = 0.0;  // ns
  // Timing encoding only: spike times for bit 1 and bit 0.
  double one_time = 0.0;   // ns
  double zero_time = 0.5;  // ns

  std::vector<std::string> violations() const;
};

struct XorArch {
  TlrParams hidden;
  TlrParams output;
  bool bias_to_output = true;
  SpikeShape source_shape;
  EncodingConfig encoding;
  // Initial weights keyed "pre->post"; missing edges start at 0.
  std::map<std::string, double> weights;
};

struct XorRow {
  int a = 0;
  int b = 0;
  int bias = 1;
  int target_bit = 0;
  double target_time = kTimeZero;
};

XorRow make_xor_row(int a, int b);  // throws InvalidInput for non-bits

// (0,0), (0,1), (1,0), (1,1).
std::vector<XorRow> xor_rows();

Network build_xor_network(const XorArch& arch);

std::map<std::string, std::vector<double>> encode_inputs(const XorRow& row, const EncodingConfig& enc);

std::vector<Sample> xor_dataset(const EncodingConfig& enc);

// Nearest of {2.0, 2.5} ns. Empty for a missing onset or the 2.25 ns tie.
std::optional<int> decode_output(std::optional<double> onset);

struct XorRowResult {
  XorRow row;
  std::optional<double> onset;  // first o1 onset
  std::optional<int> decoded;
  bool pass = false;
  std::map<std::string, std::vector<double>> onsets;  // every neuron
};

struct XorReport {
  std::vector<XorRowResult> rows;
  bool threshold_gate = false;
  bool latency_shift = false;
  bool refraction = false;
  std::vector<std::string> diagnostics;
  std::vector<Trace> traces;  // per row

  bool rows_pass() const;
  bool mechanisms_pass() const;
};

struct XorEvalOptions {
  EncodingConfig encoding;
  double tol = 0.05;                // ns
  double shift_low = 0.35;          // ns
  double shift_high = 0.65;         // ns
};

XorReport run_xor_eval(const Network& net, const SimConfig& sim, const XorEvalOptions& options = {});

// Residual excess charge available to o1 after its first onset on `trace`:
// integral of max(0, drive - i_threshold) over [onset, onset + max(t_refractory,
// spike_duration)], clipped to the trace. Empty if o1 did not fire.
std::optional<double> post_onset_excess(const Trace& trace, const TlrParams& output);

struct XorExperiment {
  XorArch arch;
  SimConfig sim;
  TrainConfig train;
};

struct XorBenchResult {
  TrainResult training;
  XorReport report;
};

// Seeds weights from the train config, trains on the four rows, evaluates.
XorBenchResult run_xor_bench(const XorExperiment& exp);

}  // namespace mtjsnn
