#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <random>

#include "velab/gaussian_oracle.hpp"
#include "velab/schedules.hpp"
#include "velab/score_net.hpp"

namespace velab {

// Score estimate at forward time t; the sampler passes t = T - t<-_j.
using ScoreFn = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& y)>;

struct SamplerConfig {
  int dim = 0;
  long trajectories = 0;
  std::uint64_t seed = 0;
  int threads = 1;
};

// One exponential-integrator update of the reverse SDE, backward step j:
//   Ybar_{j+1} = Ybar_j + Delta_j * score(T - t<-_j, Ybar_j) + sqrt(Delta_j) * U
// with Delta_j = sigma_bar(t_{N-j})^2 - sigma_bar(t_{N-j-1})^2 and U ~ N(0, I)
// drawn coordinate-by-coordinate from rng. Requires 0 <= j < N.
Eigen::VectorXd reverse_sde_step(const Eigen::VectorXd& y, int j, const ScoreFn& score,
                                 const TimeGrid& grid, const VarianceSchedule& schedule,
                                 std::mt19937_64& rng);

// Runs `trajectories` independent chains from Ybar_0 ~ N(0, sigma_bar_T^2 I)
// through all N steps; row r of the result is trajectory r's terminal point.
// Trajectory r consumes only the stream make_stream(seed, r), so results do
// not depend on thread count.
Eigen::MatrixXd sample(const SamplerConfig& config, const TimeGrid& grid,
                       const VarianceSchedule& schedule, const ScoreFn& score);

// Network-backed score: feeds sigma_bar(t) through the augmented coordinate.
ScoreFn make_net_score(const ScoreNet& net, const VarianceSchedule& schedule);

// Closed-form score of the Gaussian target's forward marginal.
ScoreFn make_oracle_score(const GaussianData& data, const VarianceSchedule& schedule);

}  // namespace velab
