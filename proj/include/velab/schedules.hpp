#pragma once

#include <cstdint>
#include <vector>

namespace velab {

enum class VarianceKind { Edm, Song };
enum class GridKind { Polynomial, Exponential };

// Forward-noise scale of the zero-drift process dX_t = sqrt(2 sigma_t^2) dW_t,
// whose marginal is X_t = X_0 + sigma_bar(t) * xi with
// sigma_bar(t)^2 = 2 * int_0^t sigma_s^2 ds.
//   Edm:  sigma_bar(t) = t       on t in [sigma_min,   sigma_max]
//   Song: sigma_bar(t) = sqrt(t) on t in [sigma_min^2, sigma_max^2]
struct VarianceSchedule {
  VarianceKind kind;
  double sigma_min;  // sigma_bar at the grid's first time
  double sigma_max;  // sigma_bar at the grid's last time

  VarianceSchedule(VarianceKind k, double smin, double smax);

  double sigma_bar(double t) const;
  double sigma_bar_sq(double t) const;
  double t_min() const;  // forward time where sigma_bar == sigma_min
  double t_max() const;  // forward time where sigma_bar == sigma_max
};

// Squared diffusion coefficient sigma_t^2 = (1/2) d(sigma_bar^2)/dt; t > 0.
double diffusion_coeff_sq(const VarianceSchedule& schedule, double t);

// Forward times t_0 < ... < t_N plus the backward view t<-_j = T - t_{N-j},
// so t<-_0 = 0 and t<-_N = T - delta with delta = t_0.
struct TimeGrid {
  std::vector<double> times;  // size N+1
  GridKind kind;
  double rho;  // meaningful for Polynomial only

  int steps() const { return static_cast<int>(times.size()) - 1; }  // N
  double time(int j) const { return times[static_cast<std::size_t>(j)]; }
  double step_len(int j) const { return times[j] - times[j - 1]; }  // t_j - t_{j-1}, j in 1..N
  double T() const { return times.back(); }
  double delta() const { return times.front(); }
  double backward(int j) const { return T() - times[steps() - j]; }      // t<-_j, j in 0..N
  double gamma(int j) const { return backward(j + 1) - backward(j); }    // j in 0..N-1
};

// Places N+1 times across [t_min, t_max] of the variance schedule.
// Polynomial interpolates t^(1/rho) linearly; Exponential interpolates ln t
// linearly (computed in log space). The canonical pairings are
// Edm+Polynomial and Song+Exponential; other pairings require experimental.
TimeGrid build_time_grid(const VarianceSchedule& schedule, GridKind kind, int n_steps,
                         double rho = 0.0, bool experimental = false);

struct EdmWeightingParams {
  double p_mean = -1.2;
  double p_std = 1.2;
  double sigma_data = 0.5;
};

// beta_EDM(sigma_bar) = exp(-(ln sigma_bar - P_mean)^2 / (2 P_std^2))
//                       * (sigma_bar^2 + sigma_data^2) / (sigma_bar * sigma_data^2).
double edm_total_weighting(double sigma_bar, const EdmWeightingParams& params = {});

// Per-gridpoint weighting w(t_j) and total weighting beta_j, j = 1..N stored
// at array index j-1. Invariant: beta_j = w(t_j) * (t_j - t_{j-1}) / sigma_bar(t_j).
struct WeightingSpec {
  std::vector<double> w;
  std::vector<double> beta;
};

// Inverts the total-weighting definition: w(t_j) = beta_j * sigma_bar(t_j) / (t_j - t_{j-1}).
WeightingSpec weighting_from_total(const std::vector<double>& beta, const TimeGrid& grid,
                                   const VarianceSchedule& schedule);

WeightingSpec make_edm_weighting(const TimeGrid& grid, const VarianceSchedule& schedule,
                                 const EdmWeightingParams& params = {});
WeightingSpec make_uniform_weighting(const TimeGrid& grid, const VarianceSchedule& schedule);

// sum_j w(t_j)(t_j - t_{j-1}) sigma_bar(t_j); reported, never enforced.
double weighting_scale_sum(const WeightingSpec& weighting, const TimeGrid& grid,
                           const VarianceSchedule& schedule);

}  // namespace velab
