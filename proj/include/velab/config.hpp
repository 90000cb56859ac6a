#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "velab/batch.hpp"
#include "velab/gaussian_oracle.hpp"
#include "velab/schedules.hpp"

namespace velab {

// Flat key=value experiment description. Unknown and duplicate keys are hard
// errors; '#' starts a comment line. Defaults below are the documented ones.
struct ExperimentConfig {
  std::string name = "run";
  std::uint64_t seed = 0;

  // schedule block
  std::string variance = "edm";  // edm | song
  std::string grid = "poly";     // poly | exp
  double rho = 7.0;
  double sigma_min = 0.002;
  double sigma_max = 80.0;
  int steps = 100;
  bool experimental = false;  // permit non-canonical variance/grid pairings

  // data block
  std::string source = "gaussian";  // gaussian | mixture | file
  int d = 2;
  int n = 8;
  std::vector<double> mean = {1.0};  // scalar broadcasts to all coordinates
  double sigma = 1.0;                // data standard deviation
  std::string data_file;

  // net block
  int m = 64;
  int L = 2;

  // train block
  double lr = 0.0;  // 0 selects the default step-size policy
  int max_steps = 2000;
  double eps_train = 1e-10;
  std::string weighting = "edm";  // edm | uniform

  // sample block
  long trajectories = 10000;

  // oracle / comparison block
  std::vector<int> n_list = {25, 50, 100};

  // bell-probe block
  double probe_sigma_min = 1e-4;
  double probe_sigma_max = 80.0;
  int probe_points = 50;

  std::string out = "out";
  int threads = 1;

  std::uint64_t config_hash = 0;  // FNV-1a of the raw config file bytes
};

std::uint64_t fnv1a_hash(const std::string& bytes);

// Parses and validates; throws std::runtime_error with the offending key or
// line on any problem, before any computation starts.
ExperimentConfig parse_config_file(const std::string& path);

// Field-level checks (enums, ranges, cross-field constraints). Grid/schedule
// pairing legality is checked by construction in make_grid.
void validate_config(const ExperimentConfig& config);

VarianceSchedule make_schedule(const ExperimentConfig& config);
TimeGrid make_grid(const ExperimentConfig& config);
TimeGrid make_grid_steps(const ExperimentConfig& config, int n_steps);
WeightingSpec make_weighting(const ExperimentConfig& config, const TimeGrid& grid,
                             const VarianceSchedule& schedule);
Eigen::VectorXd mean_vector(const ExperimentConfig& config);
DataSource make_data_source(const ExperimentConfig& config);
GaussianData make_gaussian_data(const ExperimentConfig& config);  // gaussian source only

}  // namespace velab
