#pragma once

#include <string>

#include "velab/config.hpp"

namespace velab {

// Process exit codes shared by the CLI.
inline constexpr int kExitSuccess = 0;
inline constexpr int kExitFailure = 1;   // validation or runtime error
inline constexpr int kExitMaxSteps = 2;  // training stopped at the step cap
inline constexpr int kExitDiverged = 3;  // training diverged at every retry

// Trains from scratch; writes checkpoint.bin, loss_trace.csv, decay_ratio.csv
// under config.out. Returns kExitSuccess when eps_train was reached,
// kExitMaxSteps or kExitDiverged otherwise.
int cmd_train(const ExperimentConfig& config);

// Generates trajectories and writes samples.csv plus per-coordinate
// moments.csv. checkpoint_path empty selects the closed-form Gaussian score
// (moments.csv then carries reference mean/cov columns).
int cmd_sample(const ExperimentConfig& config, const std::string& checkpoint_path);

// Writes oracle.csv rows over config.n_list and error_report.txt for the
// last entry. Gaussian source only.
int cmd_oracle(const ExperimentConfig& config);

// Writes compare_schedules.csv: per-N exact KL and design factors for the
// two canonical schedule/grid pairings at shared sigma_bar endpoints.
int cmd_compare_schedules(const ExperimentConfig& config);

// Writes bell_probe.csv: denoising residual norm over a log-spaced
// sigma_bar sweep, using a checkpoint or a freshly initialized network.
int cmd_probe_bell(const ExperimentConfig& config, const std::string& checkpoint_path);

}  // namespace velab
