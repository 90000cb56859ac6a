#include <cmath>
#include <random>
#include <stdexcept>

#include "doctest.h"
#include "velab/gaussian_oracle.hpp"
#include "velab/numerics.hpp"
#include "velab/quadrature.hpp"
#include "velab/schedules.hpp"

using namespace velab;

namespace {

GaussianData scalar_target(double mean, double sigma_sq) {
  GaussianData data;
  data.mean = Eigen::VectorXd::Constant(1, mean);
  data.sigma_sq = sigma_sq;
  return data;
}

}  // namespace

TEST_SUITE("gaussian_oracle") {

TEST_CASE("analytic score differentiates the log marginal density") {
  GaussianData data = scalar_target(0.7, 1.3);
  VarianceSchedule schedule(VarianceKind::Edm, 0.05, 9.0);
  auto log_density = [&](double t, double x) {
    double v = data.sigma_sq + schedule.sigma_bar_sq(t);
    double z = x - data.mean(0);
    return -0.5 * z * z / v - 0.5 * std::log(2.0 * M_PI * v);
  };
  const double h = 1e-5;
  for (double t : {0.05, 0.8, 9.0}) {
    for (double x : {-2.0, 0.7, 3.1}) {
      double fd = (log_density(t, x + h) - log_density(t, x - h)) / (2.0 * h);
      Eigen::VectorXd point = Eigen::VectorXd::Constant(1, x);
      double got = analytic_score(data, schedule, t, point)(0);
      CHECK(relative_error(got, fd, 1e-12) < 1e-8);
    }
  }
}

TEST_CASE("the score vanishes at the mean and is odd for a centered target") {
  VarianceSchedule schedule(VarianceKind::Song, 0.1, 5.0);
  GaussianData data;
  data.mean = Eigen::Vector3d(0.4, -1.0, 2.0);
  data.sigma_sq = 0.6;
  CHECK(analytic_score(data, schedule, 1.0, data.mean).norm() == 0.0);

  GaussianData centered;
  centered.mean = Eigen::Vector3d::Zero();
  centered.sigma_sq = 0.6;
  Eigen::Vector3d x(1.0, -0.5, 0.25);
  Eigen::VectorXd plus = analytic_score(centered, schedule, 2.0, x);
  Eigen::VectorXd minus = analytic_score(centered, schedule, 2.0, Eigen::VectorXd(-x));
  CHECK((plus + minus).norm() == 0.0);
}

TEST_CASE("a two-step exponential grid reproduces hand-computed moments") {
  // sigma_bar in [0.5, 2] puts the time domain at [0.25, 4]; the exponential
  // midpoint is exactly 1. Recursion constants are then small rationals:
  // shrinkages 0.6 and 0.375, mean factors 0.6 and 0.75, variances
  // 4 -> 3.64 -> 2.171875, terminal variance ratio 1.25 / 2.171875.
  VarianceSchedule schedule(VarianceKind::Song, 0.5, 2.0);
  TimeGrid grid = build_time_grid(schedule, GridKind::Exponential, 2);
  REQUIRE(grid.steps() == 2);
  CHECK(grid.time(0) == 0.25);
  CHECK(grid.time(1) == 1.0);
  CHECK(grid.time(2) == 4.0);

  const double m = 0.9;
  GaussianData data = scalar_target(m, 1.0);
  IterateLaw law = iterate_law(data, grid, schedule);
  REQUIRE(law.means.size() == 3);
  CHECK(law.means[0].norm() == 0.0);
  CHECK(law.means[1](0) == doctest::Approx(0.6 * m).epsilon(1e-14));
  CHECK(law.means[2](0) == doctest::Approx(0.75 * m).epsilon(1e-14));
  CHECK(law.cov_scalars[0] == 4.0);
  CHECK(law.cov_scalars[1] == doctest::Approx(3.64).epsilon(1e-14));
  CHECK(law.cov_scalars[2] == doctest::Approx(2.171875).epsilon(1e-14));

  CHECK(e_sigma(data, grid, schedule) == doctest::Approx(1.0 / 1.7375).epsilon(1e-14));

  double r = 1.25 / 2.171875;
  double hand = 0.5 * (r - 1.0 - std::log(r)) + 0.0625 * m * m / (2.0 * 2.171875);
  CHECK(exact_kl(data, grid, schedule) == doctest::Approx(hand).epsilon(1e-13));
}

TEST_CASE("two arithmetic paths to the divergence agree to ten digits") {
  std::mt19937_64 rng = make_stream(404, 0);
  std::uniform_real_distribution<double> usig(0.2, 2.0);
  std::uniform_real_distribution<double> um(-2.0, 2.0);
  std::uniform_int_distribution<int> un(2, 120);
  std::uniform_int_distribution<int> ud(1, 4);
  std::uniform_int_distribution<int> upair(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    int d = ud(rng);
    GaussianData data;
    data.mean = Eigen::VectorXd::NullaryExpr(d, [&](Eigen::Index) { return um(rng); });
    data.sigma_sq = usig(rng) * usig(rng);
    bool edm = upair(rng) == 0;
    VarianceSchedule schedule(edm ? VarianceKind::Edm : VarianceKind::Song, 0.01, 30.0);
    TimeGrid grid = edm ? build_time_grid(schedule, GridKind::Polynomial, un(rng), 7.0)
                        : build_time_grid(schedule, GridKind::Exponential, un(rng));
    double a = exact_kl(data, grid, schedule);
    double b = exact_kl_crosscheck(data, grid, schedule);
    CHECK(a >= 0.0);
    CHECK(relative_error(a, b, 1e-300) < 1e-10);
  }
}

TEST_CASE("refining the grid always lowers the exact divergence") {
  GaussianData data;
  data.mean = Eigen::Vector2d(1.0, -0.5);
  data.sigma_sq = 1.0;
  for (int pairing = 0; pairing < 2; ++pairing) {
    VarianceSchedule schedule(pairing == 0 ? VarianceKind::Edm : VarianceKind::Song,
                              0.002, 80.0);
    double prev = std::numeric_limits<double>::infinity();
    for (int n : {25, 50, 100, 200}) {
      TimeGrid grid = pairing == 0 ? build_time_grid(schedule, GridKind::Polynomial, n, 7.0)
                                   : build_time_grid(schedule, GridKind::Exponential, n);
      double kl = exact_kl(data, grid, schedule);
      CHECK(kl > 0.0);
      CHECK(kl < prev);
      prev = kl;
    }
  }
}

TEST_CASE("the divergence depends on the grid only through its variance levels") {
  // EDM and SONG schedules with the same sigma_bar bounds traverse identical
  // sigma_bar sequences under exponential grids, so the divergence agrees.
  GaussianData data;
  data.mean = Eigen::Vector2d(0.8, 0.1);
  data.sigma_sq = 0.49;
  VarianceSchedule edm(VarianceKind::Edm, 0.05, 10.0);
  VarianceSchedule song(VarianceKind::Song, 0.05, 10.0);
  TimeGrid g_edm = build_time_grid(edm, GridKind::Exponential, 40, 7.0, true);
  TimeGrid g_song = build_time_grid(song, GridKind::Exponential, 40);
  for (int j = 0; j <= 40; ++j) {
    CHECK(relative_error(song.sigma_bar(g_song.time(j)), edm.sigma_bar(g_edm.time(j))) <
          1e-12);
  }
  CHECK(relative_error(exact_kl(data, g_song, song), exact_kl(data, g_edm, edm)) < 1e-10);
}

TEST_CASE("scalar-covariance divergence matches hand values and quadrature") {
  Eigen::VectorXd zero1 = Eigen::VectorXd::Zero(1);
  Eigen::VectorXd one1 = Eigen::VectorXd::Constant(1, 1.0);
  CHECK(gaussian_kl(one1, 0.7, one1, 0.7) == 0.0);

  // KL(N(0,1) || N(1,2)) = (1/2)(1/2 - 1 - ln(1/2) + 1/2).
  double hand = 0.5 * (0.5 - 1.0 - std::log(0.5) + 0.5);
  CHECK(gaussian_kl(zero1, 1.0, one1, 2.0) == doctest::Approx(hand).epsilon(1e-15));

  // Dimension scaling: iid coordinates add.
  Eigen::VectorXd zero3 = Eigen::VectorXd::Zero(3);
  Eigen::VectorXd one3 = Eigen::VectorXd::Constant(3, 1.0);
  CHECK(gaussian_kl(zero3, 1.0, one3, 2.0) == doctest::Approx(3.0 * hand).epsilon(1e-14));

  CHECK_THROWS_AS(gaussian_kl(zero1, 1.0, one3, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_kl(zero1, -1.0, one1, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(gaussian_kl(zero1, 1.0, one1, 0.0), std::invalid_argument);

  // Independent check: integrate p log(p/q) numerically.
  double ma = 0.3, va = 1.4, mb = -0.6, vb = 0.9;
  auto integrand = [&](double x) {
    double pa = std::exp(-0.5 * (x - ma) * (x - ma) / va) / std::sqrt(2.0 * M_PI * va);
    double log_ratio = 0.5 * std::log(vb / va) - 0.5 * (x - ma) * (x - ma) / va +
                       0.5 * (x - mb) * (x - mb) / vb;
    return pa * log_ratio;
  };
  double quad = adaptive_simpson(integrand, -20.0, 20.0, 1e-10);
  Eigen::VectorXd mean_a = Eigen::VectorXd::Constant(1, ma);
  Eigen::VectorXd mean_b = Eigen::VectorXd::Constant(1, mb);
  CHECK(gaussian_kl(mean_a, va, mean_b, vb) == doctest::Approx(quad).epsilon(1e-8));
}

}  // TEST_SUITE
