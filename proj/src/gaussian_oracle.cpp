#include "velab/gaussian_oracle.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "velab/numerics.hpp"

namespace velab {

namespace {

void check_data(const GaussianData& data) {
  if (data.dim() < 1) {
    throw std::invalid_argument("gaussian oracle: data dimension must be at least 1");
  }
  if (!(data.sigma_sq > 0.0) || !std::isfinite(data.sigma_sq)) {
    throw std::invalid_argument("gaussian oracle: sigma_sq must be positive and finite");
  }
  if (!data.mean.allFinite()) {
    throw std::invalid_argument("gaussian oracle: mean must be finite");
  }
}

// sigma_bar^2 along the backward pass: a[j] = sigma_bar(T - t<-_j)^2, so
// a[0] = sigma_bar_T^2 decreases to a[N] = sigma_bar_delta^2.
std::vector<double> backward_variances(const TimeGrid& grid, const VarianceSchedule& schedule) {
  const int n = grid.steps();
  std::vector<double> a(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) {
    a[static_cast<std::size_t>(j)] = schedule.sigma_bar_sq(grid.time(n - j));
  }
  return a;
}

// x - 1 - ln x, evaluated against log1p to keep accuracy near x = 1.
double ratio_divergence(double x) {
  const double e = x - 1.0;
  return e - std::log1p(e);
}

}  // namespace

Eigen::VectorXd analytic_score(const GaussianData& data, const VarianceSchedule& schedule,
                               double t, const Eigen::VectorXd& x) {
  check_data(data);
  if (x.size() != data.mean.size()) {
    throw std::invalid_argument("analytic_score: dimension mismatch");
  }
  return -(x - data.mean) / (data.sigma_sq + schedule.sigma_bar_sq(t));
}

IterateLaw iterate_law(const GaussianData& data, const TimeGrid& grid,
                       const VarianceSchedule& schedule) {
  check_data(data);
  const int n = grid.steps();
  const std::vector<double> a = backward_variances(grid, schedule);
  const double s2 = data.sigma_sq;

  IterateLaw law;
  law.means.resize(static_cast<std::size_t>(n) + 1);
  law.cov_scalars.resize(static_cast<std::size_t>(n) + 1);
  law.means[0] = Eigen::VectorXd::Zero(data.dim());
  law.cov_scalars[0] = a[0];
  for (int j = 0; j < n; ++j) {
    const double delta = a[j] - a[j + 1];
    const double c = delta / (s2 + a[j]);
    law.means[j + 1] = (1.0 - c) * law.means[j] + c * data.mean;
    law.cov_scalars[j + 1] = (1.0 - c) * (1.0 - c) * law.cov_scalars[j] + delta;
  }

  // Closed form for the same moments; disagreement means the recursion and
  // the summed expression drifted apart, which is a programming error.
  double tail = 0.0;
  for (int j = 0; j <= n; ++j) {
    const double mean_scale = (a[0] - a[j]) / (s2 + a[0]);
    const double cov = (s2 + a[j]) * (s2 + a[j]) *
                       (a[0] / ((s2 + a[0]) * (s2 + a[0])) + tail);
    const Eigen::VectorXd mean_closed = mean_scale * data.mean;
    const double mean_err = relative_error((law.means[j] - mean_closed).norm(), 0.0,
                                           std::max(mean_closed.norm(), 1.0));
    const double cov_err = relative_error(law.cov_scalars[j], cov);
    if (mean_err > 1e-12 || cov_err > 1e-12) {
      throw std::logic_error(
          "iterate_law: recursion and closed form disagree at step " + std::to_string(j));
    }
    if (j < n) {
      tail += (a[j] - a[j + 1]) / ((s2 + a[j + 1]) * (s2 + a[j + 1]));
    }
  }
  return law;
}

double e_sigma(const GaussianData& data, const TimeGrid& grid,
               const VarianceSchedule& schedule) {
  check_data(data);
  const int n = grid.steps();
  const std::vector<double> a = backward_variances(grid, schedule);
  const double s2 = data.sigma_sq;
  const double target_var = s2 + a[static_cast<std::size_t>(n)];

  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n) + 1);
  terms.push_back(target_var * a[0] / ((s2 + a[0]) * (s2 + a[0])));
  for (int j = 0; j < n; ++j) {
    terms.push_back(target_var * (a[j] - a[j + 1]) /
                    ((s2 + a[j + 1]) * (s2 + a[j + 1])));
  }
  const double inverse = kahan_total(terms, /*sort_ascending_magnitude=*/true);
  if (!std::isfinite(inverse) || !(inverse > 0.0)) {
    throw std::runtime_error("e_sigma: accumulated sum is not a positive finite value");
  }
  return 1.0 / inverse;
}

double exact_kl(const GaussianData& data, const TimeGrid& grid,
                const VarianceSchedule& schedule) {
  const double es = e_sigma(data, grid, schedule);
  const double s2 = data.sigma_sq;
  const double var_t = s2 + schedule.sigma_bar_sq(grid.T());
  const double var_delta = s2 + schedule.sigma_bar_sq(grid.delta());
  const double kl = 0.5 * data.dim() * ratio_divergence(es) +
                    data.mean.squaredNorm() * var_delta * es / (2.0 * var_t * var_t);
  if (!std::isfinite(kl)) {
    throw std::runtime_error("exact_kl: result is not finite");
  }
  return kl;
}

double exact_kl_crosscheck(const GaussianData& data, const TimeGrid& grid,
                           const VarianceSchedule& schedule) {
  const IterateLaw law = iterate_law(data, grid, schedule);
  const double target_var = data.sigma_sq + schedule.sigma_bar_sq(grid.delta());
  return gaussian_kl(data.mean, target_var, law.means.back(), law.cov_scalars.back());
}

double gaussian_kl(const Eigen::VectorXd& mean_a, double cov_a,
                   const Eigen::VectorXd& mean_b, double cov_b) {
  if (mean_a.size() != mean_b.size() || mean_a.size() < 1) {
    throw std::invalid_argument("gaussian_kl: dimension mismatch");
  }
  if (!(cov_a > 0.0) || !(cov_b > 0.0) || !std::isfinite(cov_a) || !std::isfinite(cov_b)) {
    throw std::invalid_argument("gaussian_kl: covariances must be positive and finite");
  }
  const double d = static_cast<double>(mean_a.size());
  return 0.5 * d * ratio_divergence(cov_a / cov_b) +
         (mean_a - mean_b).squaredNorm() / (2.0 * cov_b);
}

}  // namespace velab
