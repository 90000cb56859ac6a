#include "velab/schedules.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace velab {

VarianceSchedule::VarianceSchedule(VarianceKind k, double smin, double smax)
    : kind(k), sigma_min(smin), sigma_max(smax) {
  if (!(smin > 0.0) || !(smax > smin) || !std::isfinite(smax)) {
    throw std::invalid_argument("VarianceSchedule: need 0 < sigma_min < sigma_max, finite");
  }
}

double VarianceSchedule::sigma_bar(double t) const {
  return kind == VarianceKind::Edm ? t : std::sqrt(t);
}

double VarianceSchedule::sigma_bar_sq(double t) const {
  return kind == VarianceKind::Edm ? t * t : t;
}

double VarianceSchedule::t_min() const {
  return kind == VarianceKind::Edm ? sigma_min : sigma_min * sigma_min;
}

double VarianceSchedule::t_max() const {
  return kind == VarianceKind::Edm ? sigma_max : sigma_max * sigma_max;
}

double diffusion_coeff_sq(const VarianceSchedule& schedule, double t) {
  if (!(t > 0.0)) {
    throw std::invalid_argument("diffusion_coeff_sq: t must be positive");
  }
  return schedule.kind == VarianceKind::Edm ? t : 0.5;
}

TimeGrid build_time_grid(const VarianceSchedule& schedule, GridKind kind, int n_steps,
                         double rho, bool experimental) {
  if (n_steps < 1) {
    throw std::invalid_argument("build_time_grid: need at least one step");
  }
  if (kind == GridKind::Polynomial && !(rho >= 1.0)) {
    throw std::invalid_argument("build_time_grid: polynomial grid needs rho >= 1");
  }
  if (!experimental) {
    const bool canonical =
        (kind == GridKind::Polynomial && schedule.kind == VarianceKind::Edm) ||
        (kind == GridKind::Exponential && schedule.kind == VarianceKind::Song);
    if (!canonical) {
      throw std::invalid_argument(
          "build_time_grid: non-canonical schedule/grid pairing requires experimental=true");
    }
  }

  const double t_lo = schedule.t_min();
  const double t_hi = schedule.t_max();
  const int n = n_steps;

  TimeGrid grid;
  grid.kind = kind;
  grid.rho = kind == GridKind::Polynomial ? rho : 0.0;
  grid.times.resize(static_cast<std::size_t>(n) + 1);
  grid.times.front() = t_lo;
  grid.times.back() = t_hi;

  if (kind == GridKind::Polynomial) {
    const double inv_rho = 1.0 / rho;
    const double hi_r = std::pow(t_hi, inv_rho);
    const double lo_r = std::pow(t_lo, inv_rho);
    for (int j = 1; j < n; ++j) {
      const double frac = static_cast<double>(n - j) / static_cast<double>(n);
      grid.times[static_cast<std::size_t>(j)] = std::pow(hi_r - (hi_r - lo_r) * frac, rho);
    }
  } else {
    const double ln_hi = std::log(t_hi);
    const double ln_lo = std::log(t_lo);
    for (int j = 1; j < n; ++j) {
      const double frac = static_cast<double>(n - j) / static_cast<double>(n);
      grid.times[static_cast<std::size_t>(j)] = std::exp(ln_hi + frac * (ln_lo - ln_hi));
    }
  }
  return grid;
}

double edm_total_weighting(double sigma_bar, const EdmWeightingParams& params) {
  if (!(sigma_bar > 0.0)) {
    throw std::invalid_argument("edm_total_weighting: sigma_bar must be positive");
  }
  if (!(params.p_std > 0.0) || !(params.sigma_data > 0.0)) {
    throw std::invalid_argument("edm_total_weighting: p_std and sigma_data must be positive");
  }
  const double z = (std::log(sigma_bar) - params.p_mean) / params.p_std;
  const double sd_sq = params.sigma_data * params.sigma_data;
  return std::exp(-0.5 * z * z) * (sigma_bar * sigma_bar + sd_sq) / (sigma_bar * sd_sq);
}

WeightingSpec weighting_from_total(const std::vector<double>& beta, const TimeGrid& grid,
                                   const VarianceSchedule& schedule) {
  const int n = grid.steps();
  if (static_cast<int>(beta.size()) != n) {
    throw std::invalid_argument("weighting_from_total: beta size must equal step count");
  }
  WeightingSpec spec;
  spec.beta = beta;
  spec.w.resize(beta.size());
  for (int j = 1; j <= n; ++j) {
    const double b = beta[static_cast<std::size_t>(j - 1)];
    if (!(b > 0.0) || !std::isfinite(b)) {
      throw std::invalid_argument("weighting_from_total: beta_" + std::to_string(j) +
                                  " must be positive and finite");
    }
    spec.w[static_cast<std::size_t>(j - 1)] =
        b * schedule.sigma_bar(grid.time(j)) / grid.step_len(j);
  }
  return spec;
}

WeightingSpec make_edm_weighting(const TimeGrid& grid, const VarianceSchedule& schedule,
                                 const EdmWeightingParams& params) {
  std::vector<double> beta(static_cast<std::size_t>(grid.steps()));
  for (int j = 1; j <= grid.steps(); ++j) {
    beta[static_cast<std::size_t>(j - 1)] =
        edm_total_weighting(schedule.sigma_bar(grid.time(j)), params);
  }
  return weighting_from_total(beta, grid, schedule);
}

WeightingSpec make_uniform_weighting(const TimeGrid& grid, const VarianceSchedule& schedule) {
  return weighting_from_total(std::vector<double>(static_cast<std::size_t>(grid.steps()), 1.0),
                              grid, schedule);
}

double weighting_scale_sum(const WeightingSpec& weighting, const TimeGrid& grid,
                           const VarianceSchedule& schedule) {
  if (static_cast<int>(weighting.w.size()) != grid.steps()) {
    throw std::invalid_argument("weighting_scale_sum: weighting size must equal step count");
  }
  double total = 0.0;
  for (int j = 1; j <= grid.steps(); ++j) {
    total += weighting.w[static_cast<std::size_t>(j - 1)] * grid.step_len(j) *
             schedule.sigma_bar(grid.time(j));
  }
  return total;
}

}  // namespace velab
