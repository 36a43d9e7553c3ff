#include "mtjsnn/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "mtjsnn/error.hpp"

namespace mtjsnn {

void apply_stimulus(Network& net, const std::map<std::string, std::vector<double>>& stimulus) {
  for (const auto& [id, spikes] : stimulus) {
    Source* s = net.find_source(id);
    if (!s) throw InvalidInput("stimulus names unknown source '" + id + "'");
    s->spikes = spikes;
  }
}

std::vector<std::string> TrainConfig::violations() const {
  std::vector<std::string> out;
  if (!std::isfinite(eta) || eta < 0.0) out.emplace_back("eta must be >= 0");
  if (!std::isfinite(fd_epsilon) || fd_epsilon <= 0.0) out.emplace_back("fd_epsilon must be > 0");
  if (max_epochs < 1) out.emplace_back("max_epochs must be >= 1");
  if (!std::isfinite(tol) || tol <= 0.0) out.emplace_back("tol must be > 0");
  if (threads < 1) out.emplace_back("threads must be >= 1");
  auto bad = [](const WeightRange& r) { return !std::isfinite(r.first) || !std::isfinite(r.second) || r.first > r.second; };
  if (init_range && bad(*init_range)) out.emplace_back("init_range must be [lo, hi] with lo <= hi");
  for (const auto& [edge, r] : init_ranges)
    if (bad(r)) out.emplace_back("init range for " + edge + " must be [lo, hi] with lo <= hi");
  return out;
}

double loss(double t_actual, double t_desired) {
  const double d = t_actual - t_desired;
  return 0.5 * d * d;
}

double loss_gradient_time(double t_actual, double t_desired) { return t_actual - t_desired; }

double weight_update(double grad_time, double jacobian, double eta) { return -eta * grad_time * jacobian; }

namespace {

std::optional<double> output_time(Network net, const Sample& sample, const std::string& output,
                                  const SimConfig& sim) {
  apply_stimulus(net, sample.stimulus);
  return simulate_first_onset(net, sim, output);
}

FdJacobian jacobian_with_nominal(const Network& net, const Sample& sample, std::size_t edge, double eps,
                                 const std::string& output, const SimConfig& sim, double penalty,
                                 const std::optional<double>& nominal) {
  Network plus = net;
  Network minus = net;
  plus.synapses[edge].weight += eps;
  minus.synapses[edge].weight -= eps;
  const auto tp = output_time(std::move(plus), sample, output, sim);
  const auto tm = output_time(std::move(minus), sample, output, sim);

  if (tp && tm) return {(*tp - *tm) / (2.0 * eps), FdKind::central};
  if (tp) return {(*tp - nominal.value_or(penalty)) / eps, FdKind::one_sided};
  if (tm) return {(nominal.value_or(penalty) - *tm) / eps, FdKind::one_sided};
  return {0.0, FdKind::silent};
}

// Uniform double in [0, 1) from the top 53 bits; independent of the standard
// library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

FdJacobian spike_time_jacobian_fd(const Network& net, const Sample& sample, std::size_t edge,
                                  double eps, const std::string& output, const SimConfig& sim,
                                  double penalty_time) {
  if (edge >= net.synapses.size()) throw InvalidInput("spike_time_jacobian_fd: edge index out of range");
  if (!(eps > 0.0)) throw InvalidInput("spike_time_jacobian_fd: eps must be > 0");
  const auto nominal = output_time(net, sample, output, sim);
  return jacobian_with_nominal(net, sample, edge, eps, output, sim, penalty_time, nominal);
}

std::vector<double> output_times(const Network& net, const std::string& output,
                                 const std::vector<Sample>& dataset, const SimConfig& sim,
                                 double penalty_time) {
  std::vector<double> times;
  times.reserve(dataset.size());
  for (const auto& sample : dataset) times.push_back(output_time(net, sample, output, sim).value_or(penalty_time));
  return times;
}

void initialize_weights(Network& net, const TrainConfig& config) {
  std::mt19937_64 rng(config.seed);
  for (auto& syn : net.synapses) {
    const auto it = config.init_ranges.find(syn.pre + "->" + syn.post);
    std::optional<WeightRange> range;
    if (it != config.init_ranges.end()) {
      range = it->second;
    } else {
      range = config.init_range;
    }
    // Draw for every edge so that adding a range to one edge does not shift the others.
    const double u = unit_uniform(rng);
    if (range) syn.weight = range->first + (range->second - range->first) * u;
  }
}

std::vector<double> epoch_update(const TrainProblem& problem, const Network& net,
                                 const std::vector<double>& row_times, const TrainConfig& config) {
  const double penalty = config.no_spike_penalty_time.value_or(problem.sim.horizon);
  const std::size_t n_edges = net.synapses.size();

  struct Job {
    std::size_t row;
    std::size_t edge;
  };
  std::vector<Job> jobs;
  for (std::size_t r = 0; r < problem.dataset.size(); ++r) {
    if (loss_gradient_time(row_times[r], problem.dataset[r].target) == 0.0) continue;
    for (std::size_t e = 0; e < n_edges; ++e) jobs.push_back({r, e});
  }

  std::vector<double> jac(jobs.size(), 0.0);
  auto run_job = [&](std::size_t j) {
    const auto& job = jobs[j];
    const double t0 = row_times[job.row];
    const std::optional<double> nominal = t0 == penalty ? std::nullopt : std::optional<double>(t0);
    jac[j] = jacobian_with_nominal(net, problem.dataset[job.row], job.edge, config.fd_epsilon, problem.output,
                                   problem.sim, penalty, nominal)
                 .value;
  };

  if (config.threads <= 1 || jobs.size() < 2) {
    for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::jthread> workers;
    const unsigned n = std::min<std::size_t>(config.threads, jobs.size());
    for (unsigned w = 0; w < n; ++w) {
      workers.emplace_back([&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
          try {
            run_job(j);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    workers.clear();
    if (failure) std::rethrow_exception(failure);
  }

  // Fixed summation order (row-major over jobs) keeps the result independent
  // of scheduling.
  std::vector<double> delta(n_edges, 0.0);
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const auto& job = jobs[j];
    const double g = loss_gradient_time(row_times[job.row], problem.dataset[job.row].target);
    delta[job.edge] += weight_update(g, jac[j], config.eta);
  }
  return delta;
}

TrainResult train(const TrainProblem& problem, const TrainConfig& config) {
  if (auto v = config.violations(); !v.empty()) throw InvalidInput("invalid train config: " + v.front());
  if (problem.dataset.empty()) throw InvalidInput("train: dataset is empty");
  if (!problem.net.find_neuron(problem.output))
    throw InvalidInput("train: output '" + problem.output + "' is not a neuron");
  if (auto v = validate_topology(problem.net); !v.empty())
    throw InvalidInput("train: invalid network: " + v.front().element + ": " + v.front().message);

  const double penalty = config.no_spike_penalty_time.value_or(problem.sim.horizon);
  TrainResult result;
  result.net = problem.net;
  double initial_loss = 0.0;

  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.epoch = epoch;
    rec.row_times = output_times(result.net, problem.output, problem.dataset, problem.sim, penalty);
    for (std::size_t r = 0; r < problem.dataset.size(); ++r)
      rec.total_loss += loss(rec.row_times[r], problem.dataset[r].target);
    for (const auto& syn : result.net.synapses) rec.weights.push_back(syn.weight);
    result.history.epochs.push_back(rec);

    if (epoch == 0) initial_loss = rec.total_loss;
    if (rec.total_loss > 1e3 * initial_loss) {
      std::ostringstream msg;
      msg << "loss diverged at epoch " << epoch << ": " << rec.total_loss << " ns^2 vs initial " << initial_loss
          << " ns^2";
      result.status = TrainStatus::diverged;
      result.diagnostic = msg.str();
      return result;
    }

    bool done = true;
    for (std::size_t r = 0; r < problem.dataset.size(); ++r)
      if (std::abs(rec.row_times[r] - problem.dataset[r].target) > config.tol) done = false;
    if (done) {
      result.status = TrainStatus::converged;
      return result;
    }

    const auto delta = epoch_update(problem, result.net, rec.row_times, config);
    for (std::size_t e = 0; e < delta.size(); ++e) result.net.synapses[e].weight += delta[e];
  }
  result.status = TrainStatus::budget_exhausted;
  result.diagnostic = "epoch budget of " + std::to_string(config.max_epochs) + " exhausted";
  return result;
}

}  // namespace mtjsnn
