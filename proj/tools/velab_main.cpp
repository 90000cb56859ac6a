#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>

#include "velab/runner.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", args.seed, "override the config seed");
  cmd->add_option("--out", args.out, "override the output directory");
  cmd->add_option("--threads", args.threads, "override the thread cap");
}

velab::ExperimentConfig load(const CLI::App* cmd, CommonArgs& args) {
  velab::ExperimentConfig config = velab::parse_config_file(args.config_path);
  if (cmd->count("--seed") > 0) config.seed = args.seed;
  if (cmd->count("--out") > 0) config.out = args.out;
  if (cmd->count("--threads") > 0) config.threads = args.threads;
  velab::validate_config(config);
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variance-exploding diffusion laboratory"};
  app.require_subcommand(1);

  CommonArgs train_args, sample_args, oracle_args, compare_args, probe_args;
  std::string sample_checkpoint, probe_checkpoint;

  CLI::App* train = app.add_subcommand("train", "full-batch GD score training");
  add_common(train, train_args);

  CLI::App* sample = app.add_subcommand("sample", "reverse-SDE sampling");
  add_common(sample, sample_args);
  sample->add_option("--checkpoint", sample_checkpoint,
                     "trained network (omit for the closed-form Gaussian score)");

  CLI::App* oracle = app.add_subcommand("oracle", "closed-form KL and error decomposition");
  add_common(oracle, oracle_args);

  CLI::App* compare = app.add_subcommand("compare-schedules",
                                         "schedule comparison at shared endpoints");
  add_common(compare, compare_args);

  CLI::App* probe = app.add_subcommand("probe-bell", "denoising residual sweep");
  add_common(probe, probe_args);
  probe->add_option("--checkpoint", probe_checkpoint,
                    "trained network (omit for a fresh initialization)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (train->parsed()) return velab::cmd_train(load(train, train_args));
    if (sample->parsed()) return velab::cmd_sample(load(sample, sample_args), sample_checkpoint);
    if (oracle->parsed()) return velab::cmd_oracle(load(oracle, oracle_args));
    if (compare->parsed()) return velab::cmd_compare_schedules(load(compare, compare_args));
    if (probe->parsed()) return velab::cmd_probe_bell(load(probe, probe_args), probe_checkpoint);
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return velab::kExitFailure;
  }
  return velab::kExitFailure;
}
