#pragma once

#include <Eigen/Dense>
#include <vector>

#include "velab/schedules.hpp"

namespace velab {

// Target distribution N(mean, sigma_sq * I) used for closed-form analysis.
struct GaussianData {
  Eigen::VectorXd mean;
  double sigma_sq = 1.0;

  int dim() const { return static_cast<int>(mean.size()); }
  double second_moment_sq() const {  // E||x||^2 = ||mean||^2 + dim * sigma_sq
    return mean.squaredNorm() + dim() * sigma_sq;
  }
};

// grad log p_t(x) = -(x - mean) / (sigma_sq + sigma_bar(t)^2) for the
// forward marginal p_t of the Gaussian target.
Eigen::VectorXd analytic_score(const GaussianData& data, const VarianceSchedule& schedule,
                               double t, const Eigen::VectorXd& x);

// Law of the exponential-integrator iterates driven by the analytic score:
// each Ybar_j is exactly N(means[j], cov_scalars[j] * I). Computed twice,
// by one-step recursion and in closed form; disagreement beyond 1e-12
// relative is an internal error (std::logic_error).
struct IterateLaw {
  std::vector<Eigen::VectorXd> means;  // size N+1, means[0] = 0
  std::vector<double> cov_scalars;     // size N+1, cov_scalars[0] = sigma_bar_T^2
};

IterateLaw iterate_law(const GaussianData& data, const TimeGrid& grid,
                       const VarianceSchedule& schedule);

// E_sigma = (sigma_sq + sigma_bar_delta^2) / Sigma_N: ratio of the target
// variance at the stopping time to the sampler's terminal variance. The
// reciprocal is accumulated by compensated summation in ascending magnitude.
double e_sigma(const GaussianData& data, const TimeGrid& grid,
               const VarianceSchedule& schedule);

// KL(p_delta || terminal sampler law) for the exact-score sampler:
//   (d/2)(E_sigma - 1 - ln E_sigma)
//   + ||mean||^2 (sigma_sq + sigma_bar_delta^2) E_sigma / (2 (sigma_sq + sigma_bar_T^2)^2).
// Throws std::runtime_error if the value fails to be finite.
double exact_kl(const GaussianData& data, const TimeGrid& grid,
                const VarianceSchedule& schedule);

// Same KL via the iterate-law terminal moments and gaussian_kl; independent
// arithmetic path used for cross-validation.
double exact_kl_crosscheck(const GaussianData& data, const TimeGrid& grid,
                           const VarianceSchedule& schedule);

// KL(N(mean_a, cov_a I) || N(mean_b, cov_b I)) for scalar covariances.
double gaussian_kl(const Eigen::VectorXd& mean_a, double cov_a,
                   const Eigen::VectorXd& mean_b, double cov_b);

}  // namespace velab
