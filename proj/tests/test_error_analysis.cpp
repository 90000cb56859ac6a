#include <cmath>
#include <stdexcept>
#include <string>

#include "doctest.h"
#include "velab/error_analysis.hpp"
#include "velab/gaussian_oracle.hpp"
#include "velab/numerics.hpp"
#include "velab/score_net.hpp"
#include "velab/training.hpp"

using namespace velab;

TEST_SUITE("error_analysis") {

TEST_CASE("initialization error is the second moment over the horizon variance") {
  CHECK(compute_e_init(4.0, 80.0) == 0.000625);
  CHECK(compute_e_init(3.0, 2.0) == 0.75);
  CHECK(compute_e_init(0.0, 5.0) == 0.0);
}

TEST_CASE("closed-form discretization error matches quadrature on both schedules") {
  for (int pairing = 0; pairing < 2; ++pairing) {
    VarianceSchedule schedule(pairing == 0 ? VarianceKind::Edm : VarianceKind::Song,
                              0.01, 20.0);
    for (int n : {2, 7, 40}) {
      TimeGrid grid = pairing == 0 ? build_time_grid(schedule, GridKind::Polynomial, n, 7.0)
                                   : build_time_grid(schedule, GridKind::Exponential, n);
      EDiscTerms closed = compute_e_disc(grid, schedule, 3.0, 2);
      EDiscTerms quad = compute_e_disc_quadrature(grid, schedule, 3.0, 2);
      CHECK(relative_error(closed.integral_term, quad.integral_term) < 1e-9);
      CHECK(closed.first_step_term == quad.first_step_term);
      CHECK(relative_error(closed.ratio_term, quad.ratio_term, 1e-30) < 1e-9);
      CHECK(relative_error(closed.total, quad.total) < 1e-9);
      CHECK(closed.total ==
            closed.integral_term + closed.first_step_term + closed.ratio_term);
    }
  }
}

TEST_CASE("the variance-ratio term vanishes on exponential grids") {
  VarianceSchedule schedule(VarianceKind::Song, 0.002, 80.0);
  for (int n : {5, 50}) {
    TimeGrid grid = build_time_grid(schedule, GridKind::Exponential, n);
    EDiscTerms terms = compute_e_disc(grid, schedule, 2.0, 3);
    CHECK(terms.ratio_term < 1e-10 * (1.0 + terms.total));
  }
  // Polynomial grids keep a strictly positive ratio term.
  VarianceSchedule edm(VarianceKind::Edm, 0.002, 80.0);
  TimeGrid poly = build_time_grid(edm, GridKind::Polynomial, 50, 7.0);
  CHECK(compute_e_disc(poly, edm, 2.0, 3).ratio_term > 0.0);
}

TEST_CASE("halving the exponential step count halves the discretization error") {
  VarianceSchedule schedule(VarianceKind::Song, 0.002, 80.0);
  double m2_sq = 1.0 + 2.0 * 0.04;
  for (int n : {50, 100}) {
    TimeGrid coarse = build_time_grid(schedule, GridKind::Exponential, n);
    TimeGrid fine = build_time_grid(schedule, GridKind::Exponential, 2 * n);
    double ratio = compute_e_disc(coarse, schedule, m2_sq, 2).total /
                   compute_e_disc(fine, schedule, m2_sq, 2).total;
    CHECK(ratio > 1.8);
    CHECK(ratio < 2.2);
  }
}

TEST_CASE("score-error Monte Carlo is zero for the exact score and validated") {
  GaussianData data;
  data.mean = Eigen::Vector2d(1.0, -0.5);
  data.sigma_sq = 0.8;
  VarianceSchedule schedule(VarianceKind::Song, 0.01, 10.0);
  TimeGrid grid = build_time_grid(schedule, GridKind::Exponential, 8);

  McEstimate exact = compute_e_score(grid, schedule, make_oracle_score(data, schedule),
                                     data, 200, 5, 2);
  CHECK(exact.value == 0.0);
  CHECK(exact.std_error == 0.0);

  ScoreFn zero = [](double, const Eigen::VectorXd& p) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(p.size()));
  };
  CHECK_THROWS_AS(compute_e_score(grid, schedule, zero, data, 0, 5), std::invalid_argument);
  CHECK_THROWS_AS(compute_e_score(grid, schedule, ScoreFn{}, data, 10, 5),
                  std::invalid_argument);
}

TEST_CASE("zero-score Monte Carlo agrees with the closed-form expectation") {
  GaussianData data;
  data.mean = Eigen::Vector2d(1.0, -0.5);
  data.sigma_sq = 0.8;
  VarianceSchedule schedule(VarianceKind::Song, 0.01, 10.0);
  TimeGrid grid = build_time_grid(schedule, GridKind::Exponential, 8);
  const int N = grid.steps();

  // E || grad log p_t(Y) ||^2 = d / (sigma_sq + sigma_bar_t^2) when
  // Y is drawn from the marginal itself.
  double closed = 0.0;
  for (int j = 0; j < N; ++j) {
    double tau = grid.T() - grid.backward(j);
    closed += grid.gamma(j) * diffusion_coeff_sq(schedule, tau) * data.dim() /
              (data.sigma_sq + schedule.sigma_bar_sq(tau));
  }

  ScoreFn zero = [](double, const Eigen::VectorXd& p) {
    return Eigen::VectorXd(Eigen::VectorXd::Zero(p.size()));
  };
  McEstimate mc = compute_e_score(grid, schedule, zero, data, 4000, 5, 4);
  CHECK(std::fabs(mc.value - closed) < 3.0 * mc.std_error);
  CHECK(mc.std_error > 0.0);

  McEstimate single = compute_e_score(grid, schedule, zero, data, 4000, 5, 1);
  CHECK(single.value == mc.value);
  CHECK(single.std_error == mc.std_error);
}

TEST_CASE("training shrinks the measured score error of a network") {
  DataSource source;
  source.kind = DataSource::Kind::Gaussian;
  source.dim = 2;
  source.mean = Eigen::Vector2d(1.0, 0.0);
  source.sigma_sq = 1.0;
  GaussianData data;
  data.mean = source.mean;
  data.sigma_sq = source.sigma_sq;

  VarianceSchedule schedule(VarianceKind::Edm, 0.05, 5.0);
  TimeGrid grid = build_time_grid(schedule, GridKind::Polynomial, 4, 7.0);
  WeightingSpec weighting = make_edm_weighting(grid, schedule);
  TrainBatch batch = make_batch(source, 8, grid, schedule, 71);

  ScoreNet net0 = init_net(2, 64, 1, 71);
  double lr0 = default_learning_rate(batch.n(), 64, weighting, batch.sigma_bars);
  TrainState state = train_with_retry(net0, batch, weighting, lr0, 400, 1e-12);
  REQUIRE(state.reason != StopReason::Diverged);
  REQUIRE(state.loss_trace.back().second < state.loss_trace.front().second);

  McEstimate before = compute_e_score(grid, schedule, make_net_score(net0, schedule),
                                      data, 2000, 9, 4);
  McEstimate after = compute_e_score(grid, schedule, make_net_score(state.net, schedule),
                                     data, 2000, 9, 4);
  CHECK(after.value < before.value);
}

TEST_CASE("closed-form weighting factors match the brute-force grid maximum") {
  const double sigma_min = 0.002, sigma_max = 80.0;
  DesignFactors factors = design_factors(10, 7.0, sigma_min, sigma_max);

  // Each closed form describes its canonical schedule/grid pairing.
  VarianceSchedule edm(VarianceKind::Edm, sigma_min, sigma_max);
  VarianceSchedule song(VarianceKind::Song, sigma_min, sigma_max);
  TimeGrid poly = build_time_grid(edm, GridKind::Polynomial, 10, 7.0);
  TimeGrid expo = build_time_grid(song, GridKind::Exponential, 10);
  double brute_poly = score_factor_max(poly, edm, make_edm_weighting(poly, edm));
  double brute_exp = score_factor_max(expo, song, make_edm_weighting(expo, song));
  CHECK(relative_error(factors.poly_full, brute_poly) < 1e-9);
  CHECK(relative_error(factors.exp_full, brute_exp) < 1e-9);

  CHECK(factors.scale == 1.0 / edm_total_weighting(sigma_max));
  CHECK(relative_error(factors.poly_full, factors.scale * factors.poly_bare) < 1e-15);
  CHECK(relative_error(factors.exp_full, factors.scale * factors.exp_bare) < 1e-15);
}

TEST_CASE("at matched budgets the exponential factor exceeds the polynomial one") {
  DesignFactors factors = design_factors(100, 7.0, 0.002, 80.0);
  CHECK(factors.exp_full > factors.poly_full);
  CHECK(factors.poly_bare > 0.0);

  // Both bare factors shrink toward zero as the grid refines.
  DesignFactors fine = design_factors(1000000, 7.0, 0.002, 80.0);
  CHECK(fine.poly_bare < 1e-3);
  CHECK(fine.exp_bare < 1e-3);
  CHECK(fine.poly_bare < factors.poly_bare);
  CHECK(fine.exp_bare < factors.exp_bare);
}

TEST_CASE("iteration complexity prefactors follow their closed forms") {
  const double e2 = std::exp(2.0);
  // sigma in [1, e^2]: log-ratio 2, rho* = 1.
  CHECK(relative_error(iteration_complexity(GridKind::Polynomial, 3.0, 2, 2.0, 1.0, e2),
                       1.5 * 4.0 * std::exp(1.0) * e2 * e2) < 1e-14);
  CHECK(relative_error(iteration_complexity(GridKind::Exponential, 3.0, 2, 2.0, 1.0, e2),
                       1.5 * 4.0 * e2 * e2) < 1e-14);
  // At rho = rho* the polynomial/exponential ratio is e^2 / 4.
  double at_star = iteration_complexity(GridKind::Polynomial, 3.0, 2, 1.0, 1.0, e2);
  double exp_val = iteration_complexity(GridKind::Exponential, 3.0, 2, 1.0, 1.0, e2);
  CHECK(relative_error(at_star / exp_val, e2 / 4.0) < 1e-12);
  // max(m2_sq, d) switches once the dimension dominates.
  CHECK(iteration_complexity(GridKind::Exponential, 1.0, 4, 1.0, 1.0, e2) ==
        iteration_complexity(GridKind::Exponential, 4.0, 4, 1.0, 1.0, e2));
}

TEST_CASE("the closed-form rho minimizes the polynomial complexity") {
  CHECK(optimal_rho(0.002, 80.0) == doctest::Approx(5.2983173665480365).epsilon(1e-15));
  std::mt19937_64 rng = make_stream(808, 0);
  std::uniform_real_distribution<double> ulo(1e-3, 0.5);
  std::uniform_real_distribution<double> uhalf_log(1.3, 8.0);
  for (int trial = 0; trial < 10; ++trial) {
    double lo = ulo(rng);
    double star = uhalf_log(rng);  // endpoints chosen so rho* = star > 1
    double hi = lo * std::exp(2.0 * star);
    REQUIRE(optimal_rho(lo, hi) == doctest::Approx(star).epsilon(1e-12));
    double best_rho = 0.0, best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 4000; ++k) {
      double rho = std::max(1.0, star * (0.25 + 3.75 * k / 4000.0));
      double val = iteration_complexity(GridKind::Polynomial, 1.0, 1, rho, lo, hi);
      if (val < best_val) {
        best_val = val;
        best_rho = rho;
      }
    }
    CHECK(std::fabs(best_rho - star) / star < 0.01);
  }
}

TEST_CASE("the report composes its bound from the computed parts") {
  VarianceSchedule schedule(VarianceKind::Edm, 0.1, 4.0);
  TimeGrid grid = build_time_grid(schedule, GridKind::Polynomial, 25, 7.0);
  WeightingSpec weighting = make_edm_weighting(grid, schedule);
  GaussianData data;
  data.mean = Eigen::Vector2d(1.0, 0.0);
  data.sigma_sq = 1.0;

  ErrorReportInputs inputs;
  inputs.m2_sq = data.second_moment_sq();
  inputs.data_dim = 2;
  inputs.grid = &grid;
  inputs.schedule = &schedule;
  inputs.weighting = &weighting;
  inputs.eps_train = 1e-3;
  inputs.kl_exact = exact_kl(data, grid, schedule);
  ErrorReport rep = full_error_report(inputs);

  CHECK(rep.e_init == compute_e_init(inputs.m2_sq, schedule.sigma_bar(grid.T())));
  CHECK(rep.e_disc.total == compute_e_disc(grid, schedule, inputs.m2_sq, 2).total);
  CHECK(rep.score_factor == score_factor_max(grid, schedule, weighting));
  CHECK(rep.bound == rep.e_init + rep.e_disc.total + rep.score_factor * 1e-3);
  CHECK(rep.rho == 7.0);
  CHECK(rep.rho_star == optimal_rho(0.1, 4.0));
  REQUIRE(rep.bound_over_kl.has_value());
  CHECK(*rep.bound_over_kl == rep.bound / *inputs.kl_exact);

  ErrorReportInputs missing = inputs;
  missing.grid = nullptr;
  CHECK_THROWS_AS(full_error_report(missing), std::invalid_argument);
  missing = inputs;
  missing.weighting = nullptr;
  CHECK_THROWS_AS(full_error_report(missing), std::invalid_argument);
  missing = inputs;
  missing.eps_train = -1.0;
  CHECK_THROWS_AS(full_error_report(missing), std::invalid_argument);
}

TEST_CASE("the numeric bound tracks the exact divergence across refinements") {
  VarianceSchedule schedule(VarianceKind::Edm, 0.1, 4.0);
  GaussianData data;
  data.mean = Eigen::Vector2d(1.0, 0.0);
  data.sigma_sq = 1.0;

  double first_ratio = 0.0;
  for (int n : {25, 50, 100, 200}) {
    TimeGrid grid = build_time_grid(schedule, GridKind::Polynomial, n, 7.0);
    WeightingSpec weighting = make_edm_weighting(grid, schedule);
    ErrorReportInputs inputs;
    inputs.m2_sq = data.second_moment_sq();
    inputs.data_dim = 2;
    inputs.grid = &grid;
    inputs.schedule = &schedule;
    inputs.weighting = &weighting;
    inputs.eps_train = 0.0;
    inputs.kl_exact = exact_kl(data, grid, schedule);
    ErrorReport rep = full_error_report(inputs);
    REQUIRE(rep.bound_over_kl.has_value());
    CHECK(*rep.bound_over_kl > 1.0);
    if (first_ratio == 0.0) {
      first_ratio = *rep.bound_over_kl;
    } else {
      CHECK(*rep.bound_over_kl > 0.5 * first_ratio);
      CHECK(*rep.bound_over_kl < 2.0 * first_ratio);
    }
  }
}

TEST_CASE("rendering reflects the decomposition and the simplified-bound mode") {
  VarianceSchedule schedule(VarianceKind::Edm, 0.002, 80.0);
  TimeGrid grid = build_time_grid(schedule, GridKind::Polynomial, 50, 7.0);
  WeightingSpec weighting = make_edm_weighting(grid, schedule);
  ErrorReportInputs inputs;
  inputs.m2_sq = 1.0;
  inputs.data_dim = 2;
  inputs.grid = &grid;
  inputs.schedule = &schedule;
  inputs.weighting = &weighting;
  inputs.eps_train = 0.0;

  std::string plain = render_error_report(full_error_report(inputs));
  CHECK(plain.find("E_I") != std::string::npos);
  CHECK(plain.find("E_D") != std::string::npos);
  CHECK(plain.find("not computed") != std::string::npos);
  CHECK(plain.find("a = 7") == std::string::npos);

  inputs.edm_simplified_bound = true;
  inputs.e_score = McEstimate{0.5, 0.01};
  std::string detailed = render_error_report(full_error_report(inputs));
  CHECK(detailed.find("a = 7") != std::string::npos);
  CHECK(detailed.find("not computed") == std::string::npos);
}

}  // TEST_SUITE
