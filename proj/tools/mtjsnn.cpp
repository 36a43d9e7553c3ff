#include <iostream>

#include "CLI11.hpp"
#include "mtjsnn/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Spiking network simulator with MTJ neuron models"};
  app.require_subcommand(1);

  mtjsnn::CommandOptions options;
  std::uint64_t seed = 0;
  std::string grid;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", options.config, "Config file (JSON)")->required();
    cmd->add_option("--out", options.out, "Output directory")->required();
    cmd->add_option("--seed", seed, "Override train.seed");
  };

  auto* simulate = app.add_subcommand("simulate", "Simulate a network and write its trace");
  auto* train = app.add_subcommand("train", "Train synaptic weights on a spike-time dataset");
  auto* bench = app.add_subcommand("bench-xor", "Train and evaluate the XOR network");
  auto* sweep = app.add_subcommand("sweep-latency", "Latency versus constant drive");
  for (auto* cmd : {simulate, train, bench, sweep}) add_common(cmd);
  sweep->add_option("--grid", grid, "Drive levels: start:stop:count or a comma-separated list");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mtjsnn::kExitConfigError;
  }

  for (auto* cmd : {simulate, train, bench, sweep})
    if (cmd->count("--seed")) options.seed = seed;
  if (sweep->count("--grid")) options.grid = grid;

  if (*simulate) return mtjsnn::cmd_simulate(options, std::cout, std::cerr);
  if (*train) return mtjsnn::cmd_train(options, std::cout, std::cerr);
  if (*bench) return mtjsnn::cmd_bench_xor(options, std::cout, std::cerr);
  return mtjsnn::cmd_sweep_latency(options, std::cout, std::cerr);
}
