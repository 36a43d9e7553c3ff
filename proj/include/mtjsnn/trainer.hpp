#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mtjsnn/network.hpp"

namespace mtjsnn {

// One training row: spike schedules for (some of) the sources and the desired
// output spike time.
struct Sample {
  std::map<std::string, std::vector<double>> stimulus;
  double target = 0.0;  // ns
};

// Overwrites the schedules of the sources named in `stimulus`.
void apply_stimulus(Network& net, const std::map<std::string, std::vector<double>>& stimulus);

using WeightRange = std::pair<double, double>;

struct TrainConfig {
  double eta = 0.01;
  double fd_epsilon = 1e-3;
  int max_epochs = 10000;
  double tol = 0.05;  // ns
  std::optional<double> no_spike_penalty_time;  // ns, defaults to the horizon
  std::uint64_t seed = 1;
  unsigned threads = 1;  // FD simulations run on this many threads
  // Initial weights are drawn uniformly from the edge's entry in init_ranges
  // (keyed "pre->post"), else from init_range. Edges with neither keep their
  // configured weight.
  std::optional<WeightRange> init_range;
  std::map<std::string, WeightRange> init_ranges;

  std::vector<std::string> violations() const;
};

struct TrainProblem {
  Network net;
  std::string output;
  std::vector<Sample> dataset;
  SimConfig sim;
};

double loss(double t_actual, double t_desired);
double loss_gradient_time(double t_actual, double t_desired);
double weight_update(double grad_time, double jacobian, double eta);

enum class FdKind { central, one_sided, silent };

struct FdJacobian {
  double value = 0.0;  // ns per weight unit
  FdKind kind = FdKind::central;
};

// d t_out / d w for synapse `edge`, from simulations at w +- eps.
// A silent output counts as firing at `penalty_time`; when only one side of
// the perturbation fires, a one-sided difference against the nominal run is
// used. Silent on every side gives 0.
FdJacobian spike_time_jacobian_fd(const Network& net, const Sample& sample, std::size_t edge,
                                  double eps, const std::string& output, const SimConfig& sim,
                                  double penalty_time);

// Output spike time per row; silent rows report `penalty_time`.
std::vector<double> output_times(const Network& net, const std::string& output,
                                 const std::vector<Sample>& dataset, const SimConfig& sim,
                                 double penalty_time);

void initialize_weights(Network& net, const TrainConfig& config);

struct EpochRecord {
  int epoch = 0;
  double total_loss = 0.0;         // ns^2
  std::vector<double> row_times;   // ns
  std::vector<double> weights;     // synapse order
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
};

enum class TrainStatus { converged, budget_exhausted, diverged };

struct TrainResult {
  Network net;
  TrainHistory history;
  TrainStatus status = TrainStatus::budget_exhausted;
  std::string diagnostic;
};

// Batch gradient descent on the summed per-row loss. Initial weights are the
// ones in problem.net; call initialize_weights first to randomize them.
TrainResult train(const TrainProblem& problem, const TrainConfig& config);

// Summed weight update for one epoch, exposed so serial and threaded
// evaluation can be compared directly.
std::vector<double> epoch_update(const TrainProblem& problem, const Network& net,
                                 const std::vector<double>& row_times, const TrainConfig& config);

}  // namespace mtjsnn
