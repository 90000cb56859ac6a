#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "velab/batch.hpp"
#include "velab/schedules.hpp"
#include "velab/score_net.hpp"

namespace velab {

// Draws the frozen training set. Stream kStreamBatchData of `seed` produces
// the data points, kStreamBatchNoise the noise columns in storage order, so
// the batch is a pure function of (source, n, grid, schedule, seed).
TrainBatch make_batch(const DataSource& source, int n, const TimeGrid& grid,
                      const VarianceSchedule& schedule, std::uint64_t seed);

enum class StopReason { NotRun, ReachedEpsTrain, MaxSteps, Diverged };

// Full-batch gradient-descent state. loss_trace holds (k, loss at theta^(k))
// for every visited iterate including the final one. For each recorded k,
// argmax_sets[k] lists the (sample, time_index) pairs attaining the maximum
// per-term loss, jstar[k] is the 1-based grid index among them with the
// largest rate factor w(t_j)(t_j - t_{j-1}) sigma_bar_j = beta_j sigma_bar_j^2,
// and rate_factors[k] is that factor's value.
struct TrainState {
  ScoreNet net;
  double lr = 0.0;
  int steps_taken = 0;
  StopReason reason = StopReason::NotRun;
  std::vector<std::pair<int, double>> loss_trace;
  Eigen::MatrixXd per_term;  // at the final iterate
  std::vector<std::vector<std::pair<int, int>>> argmax_sets;
  std::vector<int> jstar;
  std::vector<double> rate_factors;
};

// Default step size 0.1 * n * N / (m * min_j beta_j sigma_bar_j^2).
double default_learning_rate(int n, int width, const WeightingSpec& weighting,
                             const std::vector<double>& sigma_bars);

// Runs plain GD on the hidden layers from state.net at step size state.lr
// (lr = 0 is allowed and leaves the iterate fixed). Stops, in priority
// order, on loss <= eps_train, on divergence (loss exceeding 10x the first
// loss of this call), or after max_steps updates.
void gd_run(TrainState& state, const TrainBatch& batch, const WeightingSpec& weighting,
            int max_steps, double eps_train);

// Restarts gd_run from the same initialization with the step size halved
// whenever a run diverges, up to max_halvings restarts; returns the first
// non-diverged state, or the last diverged one if the cap is exhausted.
// Diverged attempts abort within a couple of iterations, so a deep cap is
// cheap; 40 halvings span 12 decades of step size.
TrainState train_with_retry(const ScoreNet& init, const TrainBatch& batch,
                            const WeightingSpec& weighting, double lr0, int max_steps,
                            double eps_train, int max_halvings = 40);

struct DecayDiagnostics {
  std::vector<double> ratios;  // loss_{k+1} / loss_k
  std::vector<std::vector<std::pair<int, int>>> argmax_sets;
  std::vector<int> jstar;
  std::vector<double> rate_factors;
};

// Per-step loss decay ratios aligned with the diagnostics of the step each
// ratio starts from. Needs at least two recorded losses.
DecayDiagnostics decay_ratio_trace(const TrainState& state);

// Residual norm || sigma_bar * S(x + sigma_bar xi; sigma_bar) + xi || swept
// over an ascending positive sigma_bar grid, for probing the characteristic
// rise-and-fall of the denoising error across noise scales.
std::vector<std::pair<double, double>> bell_shape_probe(const ScoreNet& net,
                                                        const Eigen::VectorXd& x,
                                                        const Eigen::VectorXd& xi,
                                                        const std::vector<double>& sigma_grid);

}  // namespace velab
