#include "velab/error_analysis.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "velab/numerics.hpp"
#include "velab/quadrature.hpp"

namespace velab {

namespace {

void check_endpoints(double sigma_min, double sigma_max) {
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !std::isfinite(sigma_max)) {
    throw std::invalid_argument("error_analysis: need 0 < sigma_min < sigma_max, finite");
  }
}

// int_a^b sigma_t^4 / sigma_bar_t^4 dt; both schedules reduce to c*(1/a - 1/b).
double step_integral_closed(const VarianceSchedule& schedule, double a, double b) {
  const double base = 1.0 / a - 1.0 / b;
  return schedule.kind == VarianceKind::Edm ? base : 0.25 * base;
}

EDiscTerms e_disc_impl(const TimeGrid& grid, const VarianceSchedule& schedule, double m2_sq,
                       int data_dim, bool quadrature) {
  if (m2_sq < 0.0 || data_dim < 0) {
    throw std::invalid_argument("compute_e_disc: m2_sq and data_dim must be non-negative");
  }
  const int n = grid.steps();
  EDiscTerms out;

  for (int k = 1; k <= n; ++k) {
    const double a = grid.time(k - 1);
    const double b = grid.time(k);
    double integral;
    if (quadrature) {
      auto integrand = [&schedule](double t) {
        const double s2 = diffusion_coeff_sq(schedule, t);
        const double sb2 = schedule.sigma_bar_sq(t);
        return s2 * s2 / (sb2 * sb2);
      };
      // The integrand decreases in t, so (b - a) f(a) bounds the step
      // integral; scaling the tolerance to it keeps termination above the
      // rounding floor on wide steps.
      const double tol = 1e-13 * (1.0 + (b - a) * integrand(a));
      integral = adaptive_simpson(integrand, a, b, tol);
    } else {
      integral = step_integral_closed(schedule, a, b);
    }
    out.integral_term += grid.step_len(k) * integral;
  }
  out.integral_term *= data_dim;

  const double var_t = schedule.sigma_bar_sq(grid.T());
  out.first_step_term =
      m2_sq * (var_t - schedule.sigma_bar_sq(grid.time(n - 1))) / (2.0 * var_t * var_t);

  // sb2[j] = sigma_bar^2 at forward time t_{N-j}, decreasing in j.
  for (int j = 1; j < n; ++j) {
    const double sb2 = schedule.sigma_bar_sq(grid.time(n - j));
    const double sb2_prev = schedule.sigma_bar_sq(grid.time(n - j + 1));
    const double sb2_next = schedule.sigma_bar_sq(grid.time(n - j - 1));
    const double summand = (1.0 - std::exp(-sb2)) * (sb2 * sb2 - sb2_next * sb2_prev) /
                           (sb2_prev * sb2 * sb2);
    out.ratio_term += std::max(summand, 0.0);
  }
  out.ratio_term *= (m2_sq + data_dim);

  out.total = out.integral_term + out.first_step_term + out.ratio_term;
  return out;
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(9) << v;
  return s.str();
}

}  // namespace

double compute_e_init(double m2_sq, double sigma_bar_T) {
  if (m2_sq < 0.0 || !(sigma_bar_T > 0.0)) {
    throw std::invalid_argument("compute_e_init: need m2_sq >= 0 and sigma_bar_T > 0");
  }
  return m2_sq / (sigma_bar_T * sigma_bar_T);
}

EDiscTerms compute_e_disc(const TimeGrid& grid, const VarianceSchedule& schedule, double m2_sq,
                          int data_dim) {
  return e_disc_impl(grid, schedule, m2_sq, data_dim, false);
}

EDiscTerms compute_e_disc_quadrature(const TimeGrid& grid, const VarianceSchedule& schedule,
                                     double m2_sq, int data_dim) {
  return e_disc_impl(grid, schedule, m2_sq, data_dim, true);
}

McEstimate compute_e_score(const TimeGrid& grid, const VarianceSchedule& schedule,
                           const ScoreFn& score, const GaussianData& data, long mc_samples,
                           std::uint64_t seed, int threads) {
  if (mc_samples < 1) {
    throw std::invalid_argument("compute_e_score: need at least one sample");
  }
  if (!score) {
    throw std::invalid_argument("compute_e_score: score function is empty");
  }
  const int n = grid.steps();
  const int d = data.dim();

  std::vector<double> fwd_time(static_cast<std::size_t>(n));
  std::vector<double> weight(static_cast<std::size_t>(n));
  std::vector<double> draw_std(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    const double tau = grid.T() - grid.backward(j);
    fwd_time[static_cast<std::size_t>(j)] = tau;
    weight[static_cast<std::size_t>(j)] = grid.gamma(j) * diffusion_coeff_sq(schedule, tau);
    draw_std[static_cast<std::size_t>(j)] =
        std::sqrt(data.sigma_sq + schedule.sigma_bar_sq(tau));
  }

  std::vector<double> totals(static_cast<std::size_t>(mc_samples));
  parallel_for(mc_samples, threads, [&](std::int64_t s) {
    std::mt19937_64 rng = make_stream(seed, static_cast<std::uint64_t>(s));
    std::normal_distribution<double> normal(0.0, 1.0);
    double total = 0.0;
    Eigen::VectorXd y(d);
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < d; ++k) {
        y(k) = data.mean(k) + draw_std[static_cast<std::size_t>(j)] * normal(rng);
      }
      const double tau = fwd_time[static_cast<std::size_t>(j)];
      const Eigen::VectorXd diff = score(tau, y) - analytic_score(data, schedule, tau, y);
      total += weight[static_cast<std::size_t>(j)] * diff.squaredNorm();
    }
    if (!std::isfinite(total)) {
      throw std::runtime_error("compute_e_score: non-finite contribution at sample " +
                               std::to_string(s));
    }
    totals[static_cast<std::size_t>(s)] = total;
  });

  McEstimate est;
  for (double t : totals) est.value += t;
  est.value /= static_cast<double>(mc_samples);
  if (mc_samples > 1) {
    double ss = 0.0;
    for (double t : totals) ss += (t - est.value) * (t - est.value);
    est.std_error = std::sqrt(ss / (static_cast<double>(mc_samples) - 1.0) /
                              static_cast<double>(mc_samples));
  }
  return est;
}

double score_factor_max(const TimeGrid& grid, const VarianceSchedule& schedule,
                        const WeightingSpec& weighting) {
  const int n = grid.steps();
  if (static_cast<int>(weighting.w.size()) != n) {
    throw std::invalid_argument("score_factor_max: weighting size must equal step count");
  }
  double best = 0.0;
  for (int j = 1; j <= n; ++j) {
    best = std::max(best, diffusion_coeff_sq(schedule, grid.time(j)) /
                              weighting.w[static_cast<std::size_t>(j - 1)]);
  }
  return best;
}

DesignFactors design_factors(int n_steps, double rho, double sigma_min, double sigma_max,
                             const EdmWeightingParams& params) {
  if (n_steps < 1) {
    throw std::invalid_argument("design_factors: need at least one step");
  }
  if (!(rho >= 1.0)) {
    throw std::invalid_argument("design_factors: need rho >= 1");
  }
  check_endpoints(sigma_min, sigma_max);

  DesignFactors out;
  const double inv_rho = 1.0 / rho;
  const double hi_r = std::pow(sigma_max, inv_rho);
  const double lo_r = std::pow(sigma_min, inv_rho);
  out.poly_bare = sigma_max - std::pow(hi_r - (hi_r - lo_r) / n_steps, rho);
  const double ratio = (sigma_min * sigma_min) / (sigma_max * sigma_max);
  out.exp_bare = 0.5 * (sigma_max - sigma_max * std::pow(ratio, 1.0 / n_steps));
  out.scale = 1.0 / edm_total_weighting(sigma_max, params);
  out.poly_full = out.poly_bare * out.scale;
  out.exp_full = out.exp_bare * out.scale;
  return out;
}

double iteration_complexity(GridKind kind, double m2_sq, int data_dim, double rho,
                            double sigma_min, double sigma_max) {
  if (m2_sq < 0.0 || data_dim < 1) {
    throw std::invalid_argument("iteration_complexity: need m2_sq >= 0 and data_dim >= 1");
  }
  check_endpoints(sigma_min, sigma_max);
  const double prefactor = std::max(m2_sq, static_cast<double>(data_dim)) / data_dim;
  if (kind == GridKind::Polynomial) {
    if (!(rho >= 1.0)) {
      throw std::invalid_argument("iteration_complexity: polynomial kind needs rho >= 1");
    }
    return prefactor * rho * rho * std::pow(sigma_max / sigma_min, 1.0 / rho) * sigma_max *
           sigma_max;
  }
  const double lr = std::log(sigma_max / sigma_min);
  return prefactor * lr * lr * sigma_max * sigma_max;
}

double optimal_rho(double sigma_min, double sigma_max) {
  check_endpoints(sigma_min, sigma_max);
  return 0.5 * std::log(sigma_max / sigma_min);
}

ErrorReport full_error_report(const ErrorReportInputs& inputs) {
  if (inputs.grid == nullptr || inputs.schedule == nullptr || inputs.weighting == nullptr) {
    throw std::invalid_argument("full_error_report: grid, schedule, and weighting are required");
  }
  if (inputs.m2_sq < 0.0 || inputs.data_dim < 0 || inputs.eps_train < 0.0) {
    throw std::invalid_argument("full_error_report: negative inputs");
  }
  const TimeGrid& grid = *inputs.grid;
  const VarianceSchedule& schedule = *inputs.schedule;

  ErrorReport rep;
  rep.m2_sq = inputs.m2_sq;
  rep.data_dim = inputs.data_dim;
  rep.n_steps = grid.steps();
  rep.sigma_min = schedule.sigma_min;
  rep.sigma_max = schedule.sigma_max;
  rep.rho = (grid.kind == GridKind::Polynomial && grid.rho >= 1.0) ? grid.rho : inputs.rho;
  rep.e_init = compute_e_init(inputs.m2_sq, schedule.sigma_bar(grid.T()));
  rep.e_disc = compute_e_disc(grid, schedule, inputs.m2_sq, inputs.data_dim);
  rep.e_score = inputs.e_score;
  rep.eps_train = inputs.eps_train;
  rep.score_factor = score_factor_max(grid, schedule, *inputs.weighting);
  if (inputs.data_dim >= 1) {
    rep.complexity_poly = iteration_complexity(GridKind::Polynomial, inputs.m2_sq,
                                               inputs.data_dim, rep.rho, schedule.sigma_min,
                                               schedule.sigma_max);
    rep.complexity_exp = iteration_complexity(GridKind::Exponential, inputs.m2_sq,
                                              inputs.data_dim, rep.rho, schedule.sigma_min,
                                              schedule.sigma_max);
  }
  rep.rho_star = optimal_rho(schedule.sigma_min, schedule.sigma_max);
  rep.bound = rep.e_init + rep.e_disc.total + rep.score_factor * inputs.eps_train;
  rep.kl_exact = inputs.kl_exact;
  if (inputs.kl_exact && *inputs.kl_exact > 0.0) {
    rep.bound_over_kl = rep.bound / *inputs.kl_exact;
  }
  rep.edm_simplified_bound = inputs.edm_simplified_bound;
  return rep;
}

std::string render_error_report(const ErrorReport& rep) {
  std::ostringstream out;
  out << "generation error decomposition\n";
  out << "  data: m2^2 = " << fmt(rep.m2_sq) << ", d = " << rep.data_dim << "\n";
  out << "  grid: N = " << rep.n_steps << " on sigma_bar in [" << fmt(rep.sigma_min) << ", "
      << fmt(rep.sigma_max) << "], rho = " << fmt(rep.rho) << "\n";
  out << "  E_I (initialization)   = " << fmt(rep.e_init)
      << "   [sharp constant m2^2/(2 sigma_bar_T^2) = " << fmt(0.5 * rep.e_init) << "]\n";
  out << "  E_D (discretization)   = " << fmt(rep.e_disc.total) << "\n";
  out << "      step-integral term   = " << fmt(rep.e_disc.integral_term) << "\n";
  out << "      first-step term      = " << fmt(rep.e_disc.first_step_term) << "\n";
  out << "      variance-ratio term  = " << fmt(rep.e_disc.ratio_term) << "\n";
  if (rep.e_score) {
    out << "  E_S (score estimation) = " << fmt(rep.e_score->value) << "   (MC std error "
        << fmt(rep.e_score->std_error) << ")\n";
  } else {
    out << "  E_S (score estimation) = not computed\n";
  }
  out << "  eps_train              = " << fmt(rep.eps_train) << "\n";
  out << "  score factor max_j sigma^2_{t_j} / w(t_j) = " << fmt(rep.score_factor)
      << "\n";
  out << "  numeric bound = E_I + E_D + factor * eps_train = " << fmt(rep.bound) << "\n";
  out << "      remaining terms stay symbolic: + factor * (eps_n + eps_est + eps_approx)\n";
  if (rep.kl_exact) {
    out << "  exact KL (Gaussian oracle) = " << fmt(*rep.kl_exact) << "\n";
    if (rep.bound_over_kl) {
      out << "  bound / exact KL           = " << fmt(*rep.bound_over_kl) << "\n";
    }
  }
  out << "  iteration complexity: polynomial = " << fmt(rep.complexity_poly)
      << ", exponential = " << fmt(rep.complexity_exp) << ", rho* = " << fmt(rep.rho_star)
      << "\n";
  if (rep.edm_simplified_bound) {
    const double a = 7.0;
    const double t_cap = rep.sigma_max;
    const double delta = rep.sigma_min;
    const double n = rep.n_steps;
    const double d = rep.data_dim;
    const double per_step = a * a * std::pow(t_cap, 1.0 / a) / (std::pow(delta, 1.0 / a) * n);
    const double per_step_sq = a * a * a * std::pow(t_cap, 2.0 / a) /
                               (std::pow(delta, 2.0 / a) * n * n);
    out << "  simplified bell-shaped-design bound, a = 7:\n";
    out << "      m2^2 / T^2                                   = "
        << fmt(rep.m2_sq / (t_cap * t_cap)) << "\n";
    out << "      d a^2 T^(1/a) / (delta^(1/a) N)              = " << fmt(d * per_step)
        << "\n";
    out << "      (m2^2 + d) (a^2 T^(1/a)/(delta^(1/a) N) + a^3 T^(2/a)/(delta^(2/a) N^2)) = "
        << fmt((rep.m2_sq + d) * (per_step + per_step_sq)) << "\n";
    out << "      + (c1 + (1 - c2 lr m d^((alpha-1)/2) / (n^3 N^2))^K) / N"
           "   [c1, c2, alpha absolute constants]\n";
  }
  return out.str();
}

}  // namespace velab
