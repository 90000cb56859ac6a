#include "velab/training.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "velab/numerics.hpp"

namespace velab {

namespace {

Eigen::MatrixXd draw_points(const DataSource& source, int n, std::mt19937_64& rng) {
  const int d = source.dim;
  Eigen::MatrixXd x(d, n);
  if (source.kind == DataSource::Kind::File) {
    std::ifstream in(source.path);
    if (!in) {
      throw std::runtime_error("make_batch: cannot open data file " + source.path);
    }
    std::string line;
    int row = 0;
    while (row < n && std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream fields(line);
      std::string cell;
      int col = 0;
      while (std::getline(fields, cell, ',')) {
        if (col >= d) break;
        x(col, row) = std::stod(cell);
        ++col;
      }
      if (col != d || std::getline(fields, cell, ',')) {
        throw std::runtime_error("make_batch: row " + std::to_string(row + 1) + " of " +
                                 source.path + " does not have exactly " + std::to_string(d) +
                                 " fields");
      }
      ++row;
    }
    if (row < n) {
      throw std::runtime_error("make_batch: " + source.path + " has only " +
                               std::to_string(row) + " points, need " + std::to_string(n));
    }
    return x;
  }

  if (source.mean.size() != d) {
    throw std::invalid_argument("make_batch: mean dimension must match source dim");
  }
  if (!(source.sigma_sq > 0.0) || !std::isfinite(source.sigma_sq)) {
    throw std::invalid_argument("make_batch: sigma_sq must be positive and finite");
  }
  const double stddev = std::sqrt(source.sigma_sq);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::bernoulli_distribution flip(0.5);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd center = source.mean;
    if (source.kind == DataSource::Kind::Mixture && flip(rng)) {
      center = -center;
    }
    for (int k = 0; k < d; ++k) {
      x(k, i) = center(k) + stddev * normal(rng);
    }
  }
  return x;
}

}  // namespace

TrainBatch make_batch(const DataSource& source, int n, const TimeGrid& grid,
                      const VarianceSchedule& schedule, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("make_batch: need at least one data point");
  }
  if (source.dim < 1) {
    throw std::invalid_argument("make_batch: source dim must be at least 1");
  }
  const int d = source.dim;
  const int steps = grid.steps();
  const Eigen::Index cols = static_cast<Eigen::Index>(n) * steps;

  TrainBatch batch;
  batch.seed = seed;
  std::mt19937_64 data_rng = make_stream(seed, kStreamBatchData);
  batch.x = draw_points(source, n, data_rng);

  std::mt19937_64 noise_rng = make_stream(seed, kStreamBatchNoise);
  std::normal_distribution<double> normal(0.0, 1.0);
  batch.xi.resize(d, cols);
  for (Eigen::Index b = 0; b < cols; ++b) {
    for (int k = 0; k < d; ++k) {
      batch.xi(k, b) = normal(noise_rng);
    }
  }

  batch.sigma_bars.resize(static_cast<std::size_t>(steps));
  for (int j = 1; j <= steps; ++j) {
    batch.sigma_bars[static_cast<std::size_t>(j - 1)] = schedule.sigma_bar(grid.time(j));
  }

  batch.inputs.resize(d + 1, cols);
  for (int j = 0; j < steps; ++j) {
    const double sb = batch.sigma_bars[static_cast<std::size_t>(j)];
    for (int i = 0; i < n; ++i) {
      const Eigen::Index b = batch.col(i, j);
      batch.inputs.col(b).head(d) = batch.x.col(i) + sb * batch.xi.col(b);
      batch.inputs(d, b) = sb;
    }
  }
  return batch;
}

double default_learning_rate(int n, int width, const WeightingSpec& weighting,
                             const std::vector<double>& sigma_bars) {
  const std::size_t steps = sigma_bars.size();
  if (n < 1 || width < 1 || steps == 0 || weighting.beta.size() != steps) {
    throw std::invalid_argument("default_learning_rate: inconsistent shapes");
  }
  double min_rate = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < steps; ++j) {
    min_rate = std::min(min_rate, weighting.beta[j] * sigma_bars[j] * sigma_bars[j]);
  }
  if (!(min_rate > 0.0) || !std::isfinite(min_rate)) {
    throw std::invalid_argument("default_learning_rate: rate factors must be positive");
  }
  return 0.1 * n * static_cast<double>(steps) / (width * min_rate);
}

namespace {

void record_diagnostics(TrainState& state, const LossGrad& eval, const TrainBatch& batch,
                        const WeightingSpec& weighting, int k) {
  state.loss_trace.emplace_back(k, eval.loss);

  const double max_term = eval.per_term.maxCoeff();
  std::vector<std::pair<int, int>> ties;
  for (int j = 0; j < eval.per_term.cols(); ++j) {
    for (int i = 0; i < eval.per_term.rows(); ++i) {
      if (eval.per_term(i, j) == max_term) ties.emplace_back(i, j);
    }
  }
  int best_j = ties.front().second;
  double best_rate = -1.0;
  for (const auto& [i, j] : ties) {
    const double rate = weighting.beta[static_cast<std::size_t>(j)] *
                        batch.sigma_bars[static_cast<std::size_t>(j)] *
                        batch.sigma_bars[static_cast<std::size_t>(j)];
    if (rate > best_rate) {
      best_rate = rate;
      best_j = j;
    }
  }
  state.argmax_sets.push_back(std::move(ties));
  state.jstar.push_back(best_j + 1);
  state.rate_factors.push_back(best_rate);
}

}  // namespace

void gd_run(TrainState& state, const TrainBatch& batch, const WeightingSpec& weighting,
            int max_steps, double eps_train) {
  if (state.net.depth < 1) {
    throw std::invalid_argument("gd_run: network has no trainable hidden layers");
  }
  if (state.lr < 0.0 || !std::isfinite(state.lr)) {
    throw std::invalid_argument("gd_run: learning rate must be non-negative and finite");
  }
  if (max_steps < 0) {
    throw std::invalid_argument("gd_run: max_steps must be non-negative");
  }

  const int k0 = state.steps_taken;
  double first_loss = 0.0;
  for (int k = k0;; ++k) {
    const LossGrad eval = loss_and_grad(state.net, batch, weighting);
    record_diagnostics(state, eval, batch, weighting, k);
    state.per_term = eval.per_term;
    state.steps_taken = k;
    if (k == k0) first_loss = eval.loss;

    if (eval.loss <= eps_train) {
      state.reason = StopReason::ReachedEpsTrain;
      return;
    }
    if (eval.loss > 10.0 * first_loss) {
      state.reason = StopReason::Diverged;
      return;
    }
    if (k - k0 >= max_steps) {
      state.reason = StopReason::MaxSteps;
      return;
    }
    for (int l = 0; l < state.net.depth; ++l) {
      state.net.hidden[static_cast<std::size_t>(l)] -=
          state.lr * eval.hidden_grads[static_cast<std::size_t>(l)];
    }
  }
}

TrainState train_with_retry(const ScoreNet& init, const TrainBatch& batch,
                            const WeightingSpec& weighting, double lr0, int max_steps,
                            double eps_train, int max_halvings) {
  if (!(lr0 > 0.0) || !std::isfinite(lr0)) {
    throw std::invalid_argument("train_with_retry: initial learning rate must be positive");
  }
  if (max_halvings < 0) {
    throw std::invalid_argument("train_with_retry: max_halvings must be non-negative");
  }
  double lr = lr0;
  TrainState state;
  for (int attempt = 0; attempt <= max_halvings; ++attempt, lr *= 0.5) {
    state = TrainState{};
    state.net = init;
    state.lr = lr;
    gd_run(state, batch, weighting, max_steps, eps_train);
    if (state.reason != StopReason::Diverged) return state;
  }
  return state;
}

DecayDiagnostics decay_ratio_trace(const TrainState& state) {
  const std::size_t recorded = state.loss_trace.size();
  if (recorded < 2) {
    throw std::invalid_argument("decay_ratio_trace: need at least two recorded losses");
  }
  DecayDiagnostics diag;
  diag.ratios.reserve(recorded - 1);
  for (std::size_t k = 0; k + 1 < recorded; ++k) {
    const double prev = state.loss_trace[k].second;
    diag.ratios.push_back(prev == 0.0 ? 0.0 : state.loss_trace[k + 1].second / prev);
    diag.argmax_sets.push_back(state.argmax_sets[k]);
    diag.jstar.push_back(state.jstar[k]);
    diag.rate_factors.push_back(state.rate_factors[k]);
  }
  return diag;
}

std::vector<std::pair<double, double>> bell_shape_probe(const ScoreNet& net,
                                                        const Eigen::VectorXd& x,
                                                        const Eigen::VectorXd& xi,
                                                        const std::vector<double>& sigma_grid) {
  if (x.size() != net.data_dim || xi.size() != net.data_dim) {
    throw std::invalid_argument("bell_shape_probe: point dimension mismatch");
  }
  if (sigma_grid.empty()) {
    throw std::invalid_argument("bell_shape_probe: sigma grid is empty");
  }
  for (std::size_t k = 0; k < sigma_grid.size(); ++k) {
    if (!(sigma_grid[k] > 0.0) || (k > 0 && !(sigma_grid[k] > sigma_grid[k - 1]))) {
      throw std::invalid_argument("bell_shape_probe: sigma grid must be positive ascending");
    }
  }
  std::vector<std::pair<double, double>> out;
  out.reserve(sigma_grid.size());
  for (double sb : sigma_grid) {
    const Eigen::VectorXd score = forward(net, x + sb * xi, sb);
    out.emplace_back(sb, (sb * score + xi).norm());
  }
  return out;
}

}  // namespace velab
