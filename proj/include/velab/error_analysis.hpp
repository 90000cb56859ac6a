#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "velab/gaussian_oracle.hpp"
#include "velab/sampler.hpp"
#include "velab/schedules.hpp"

namespace velab {

// Initialization error E_I = m2_sq / sigma_bar_T^2; the sharp one-step
// constant m2_sq / (2 sigma_bar_T^2) is printed alongside in reports.
double compute_e_init(double m2_sq, double sigma_bar_T);

// Discretization error E_D as the sum of its three parts:
//   integral_term   = d * sum_j gamma_j * int over the step of sigma_t^4 / sigma_bar_t^4
//   first_step_term = m2_sq * (sigma_bar_T^2 - sigma_bar(t_{N-1})^2) / (2 sigma_bar_T^4)
//   ratio_term      = (m2_sq + d) * sum_{j=1}^{N-1} (1 - exp(-sb_j^2))
//                     * (sb_j^4 - sb_{j+1}^2 sb_{j-1}^2) / (sb_{j-1}^2 sb_j^4)
// where sb_j = sigma_bar at forward time t_{N-j} and each ratio-term summand
// is clamped at zero (it vanishes identically on the exponential grid).
struct EDiscTerms {
  double integral_term = 0.0;
  double first_step_term = 0.0;
  double ratio_term = 0.0;
  double total = 0.0;
};

// Closed-form step integrals (both variance schedules admit elementary ones).
EDiscTerms compute_e_disc(const TimeGrid& grid, const VarianceSchedule& schedule,
                          double m2_sq, int data_dim);

// Same quantity with the step integrals evaluated by adaptive Simpson;
// cross-validates the closed forms.
EDiscTerms compute_e_disc_quadrature(const TimeGrid& grid, const VarianceSchedule& schedule,
                                     double m2_sq, int data_dim);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
};

// Score error E_S = sum_j gamma_j sigma_{T-t<-_j}^2 E || score - grad log p ||^2
// by Monte Carlo, drawing Y ~ N(mean, (sigma_sq + sigma_bar^2) I) exactly at
// each backward time. Sample s uses only stream make_stream(seed, s), so the
// estimate is independent of thread count. Gaussian targets only: the true
// score must be available in closed form.
McEstimate compute_e_score(const TimeGrid& grid, const VarianceSchedule& schedule,
                           const ScoreFn& score, const GaussianData& data, long mc_samples,
                           std::uint64_t seed, int threads = 1);

// Worst-case weighting mismatch max_j sigma_{t_j}^2 / w(t_j) between the
// sampling error weights and the training weights, brute-forced over the grid.
double score_factor_max(const TimeGrid& grid, const VarianceSchedule& schedule,
                        const WeightingSpec& weighting);

// Closed forms of that maximum under the bell-shaped total weighting, with
// the shared scale carried symbolically as 1 in the bare values:
//   poly_bare = sigma_max - (sigma_max^(1/rho) - (sigma_max^(1/rho) - sigma_min^(1/rho))/N)^rho
//   exp_bare  = (1/2) (sigma_max - sigma_max (sigma_min^2/sigma_max^2)^(1/N))
// full values multiply by the concrete scale = 1 / beta(sigma_max) and equal
// the brute-force maxima on the corresponding canonical grids.
struct DesignFactors {
  double poly_bare = 0.0;
  double exp_bare = 0.0;
  double scale = 0.0;
  double poly_full = 0.0;
  double exp_full = 0.0;
};

DesignFactors design_factors(int n_steps, double rho, double sigma_min, double sigma_max,
                             const EdmWeightingParams& params = {});

// Iteration-complexity prefactors (order constants set to 1):
//   Polynomial:  (m2_sq v d)/d * rho^2 (sigma_max/sigma_min)^(1/rho) sigma_max^2
//   Exponential: (m2_sq v d)/d * ln(sigma_max/sigma_min)^2 sigma_max^2
double iteration_complexity(GridKind kind, double m2_sq, int data_dim, double rho,
                            double sigma_min, double sigma_max);

// rho* = (1/2) ln(sigma_max/sigma_min) minimizes the polynomial prefactor.
double optimal_rho(double sigma_min, double sigma_max);

struct ErrorReport {
  double m2_sq = 0.0;
  int data_dim = 0;
  int n_steps = 0;
  double sigma_min = 0.0;
  double sigma_max = 0.0;
  double rho = 0.0;
  double e_init = 0.0;
  EDiscTerms e_disc{};
  std::optional<McEstimate> e_score;
  double eps_train = 0.0;
  double score_factor = 0.0;
  double complexity_poly = 0.0;
  double complexity_exp = 0.0;
  double rho_star = 0.0;
  // e_init + e_disc.total + score_factor * eps_train; the remaining
  // statistical/estimation/approximation terms stay symbolic.
  double bound = 0.0;
  std::optional<double> kl_exact;
  std::optional<double> bound_over_kl;
  bool edm_simplified_bound = false;
};

struct ErrorReportInputs {
  double m2_sq = 0.0;
  int data_dim = 0;
  const TimeGrid* grid = nullptr;
  const VarianceSchedule* schedule = nullptr;
  const WeightingSpec* weighting = nullptr;
  double eps_train = 0.0;
  double rho = 7.0;
  std::optional<McEstimate> e_score;
  std::optional<double> kl_exact;
  bool edm_simplified_bound = false;
};

ErrorReport full_error_report(const ErrorReportInputs& inputs);

// Human-readable block mirroring the decomposition; with edm_simplified_bound
// set it appends the simplified bound's term structure with a = 7.
std::string render_error_report(const ErrorReport& report);

}  // namespace velab
