#include "velab/sampler.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>

#include "velab/numerics.hpp"

namespace velab {

namespace {

double step_variance(const TimeGrid& grid, const VarianceSchedule& schedule, int j) {
  const int n = grid.steps();
  if (j < 0 || j >= n) {
    throw std::invalid_argument("reverse_sde_step: step index out of range");
  }
  const double delta = schedule.sigma_bar_sq(grid.time(n - j)) -
                       schedule.sigma_bar_sq(grid.time(n - j - 1));
  if (delta < 0.0 || !std::isfinite(delta)) {
    throw std::runtime_error("reverse_sde_step: negative variance increment at step " +
                             std::to_string(j));
  }
  return delta;
}

Eigen::VectorXd draw_normal(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Eigen::VectorXd u(dim);
  for (int k = 0; k < dim; ++k) u(k) = dist(rng);
  return u;
}

}  // namespace

Eigen::VectorXd reverse_sde_step(const Eigen::VectorXd& y, int j, const ScoreFn& score,
                                 const TimeGrid& grid, const VarianceSchedule& schedule,
                                 std::mt19937_64& rng) {
  const double delta = step_variance(grid, schedule, j);
  const double t_fwd = grid.T() - grid.backward(j);
  const Eigen::VectorXd drift = score(t_fwd, y);
  if (drift.size() != y.size()) {
    throw std::invalid_argument("reverse_sde_step: score dimension mismatch");
  }
  return y + delta * drift +
         std::sqrt(delta) * draw_normal(static_cast<int>(y.size()), rng);
}

Eigen::MatrixXd sample(const SamplerConfig& config, const TimeGrid& grid,
                       const VarianceSchedule& schedule, const ScoreFn& score) {
  if (config.dim < 1) {
    throw std::invalid_argument("sample: dim must be at least 1");
  }
  if (config.trajectories < 0) {
    throw std::invalid_argument("sample: trajectories must be non-negative");
  }
  if (!score) {
    throw std::invalid_argument("sample: score function is empty");
  }
  const int n = grid.steps();
  const double init_std = schedule.sigma_bar(grid.T());

  Eigen::MatrixXd out(config.trajectories, config.dim);
  parallel_for(config.trajectories, config.threads, [&](std::int64_t r) {
    std::mt19937_64 rng = make_stream(config.seed, static_cast<std::uint64_t>(r));
    Eigen::VectorXd y = init_std * draw_normal(config.dim, rng);
    for (int j = 0; j < n; ++j) {
      y = reverse_sde_step(y, j, score, grid, schedule, rng);
      if (!y.allFinite()) {
        throw std::runtime_error("sample: trajectory " + std::to_string(r) +
                                 " became non-finite at step " + std::to_string(j));
      }
    }
    out.row(r) = y.transpose();
  });
  return out;
}

ScoreFn make_net_score(const ScoreNet& net, const VarianceSchedule& schedule) {
  auto shared = std::make_shared<ScoreNet>(net);
  return [shared, schedule](double t, const Eigen::VectorXd& y) {
    return forward(*shared, y, schedule.sigma_bar(t));
  };
}

ScoreFn make_oracle_score(const GaussianData& data, const VarianceSchedule& schedule) {
  return [data, schedule](double t, const Eigen::VectorXd& y) {
    return analytic_score(data, schedule, t, y);
  };
}

}  // namespace velab
