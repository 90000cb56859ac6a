#include "velab/runner.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "velab/checkpoint.hpp"
#include "velab/csv.hpp"
#include "velab/error_analysis.hpp"
#include "velab/gaussian_oracle.hpp"
#include "velab/sampler.hpp"
#include "velab/training.hpp"

namespace velab {

namespace {

std::string out_path(const ExperimentConfig& config, const std::string& file) {
  std::filesystem::create_directories(config.out);
  return (std::filesystem::path(config.out) / file).string();
}

std::string pairing_name(const ExperimentConfig& config) {
  return config.variance + "+" + config.grid;
}

const char* reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::ReachedEpsTrain: return "reached eps_train";
    case StopReason::MaxSteps: return "hit max_steps";
    case StopReason::Diverged: return "diverged";
    default: return "not run";
  }
}

}  // namespace

int cmd_train(const ExperimentConfig& config) {
  const VarianceSchedule schedule = make_schedule(config);
  const TimeGrid grid = make_grid(config);
  const WeightingSpec weighting = make_weighting(config, grid, schedule);
  if (config.L < 1) {
    throw std::runtime_error("train: need at least one hidden layer (L >= 1)");
  }
  const DataSource source = make_data_source(config);
  const TrainBatch batch = make_batch(source, config.n, grid, schedule, config.seed);
  const ScoreNet init = init_net(config.d, config.m, config.L, config.seed);
  const double lr0 = config.lr > 0.0
                         ? config.lr
                         : default_learning_rate(config.n, config.m, weighting,
                                                 batch.sigma_bars);

  TrainState state =
      train_with_retry(init, batch, weighting, lr0, config.max_steps, config.eps_train);

  save_checkpoint(state.net, out_path(config, "checkpoint.bin"));

  CsvWriter loss_csv(out_path(config, "loss_trace.csv"), config.config_hash, config.seed,
                     {"step", "loss"});
  for (const auto& [step, loss] : state.loss_trace) {
    loss_csv.row({CsvWriter::num(step), CsvWriter::num(loss)});
  }

  CsvWriter decay_csv(out_path(config, "decay_ratio.csv"), config.config_hash, config.seed,
                      {"step", "loss", "ratio", "j_star", "rate_factor"});
  if (state.loss_trace.size() >= 2) {
    const DecayDiagnostics diag = decay_ratio_trace(state);
    for (std::size_t k = 0; k < diag.ratios.size(); ++k) {
      decay_csv.row({CsvWriter::num(state.loss_trace[k].first),
                     CsvWriter::num(state.loss_trace[k].second),
                     CsvWriter::num(diag.ratios[k]), CsvWriter::num(diag.jstar[k]),
                     CsvWriter::num(diag.rate_factors[k])});
    }
  }

  std::cout << "train: " << reason_name(state.reason) << " after " << state.steps_taken
            << " steps, final loss " << state.loss_trace.back().second << ", lr " << state.lr
            << "\n";
  std::cout << "train: weighting scale sum " << weighting_scale_sum(weighting, grid, schedule)
            << "\n";
  std::cout << "train: wrote " << out_path(config, "checkpoint.bin") << ", loss_trace.csv, "
            << "decay_ratio.csv\n";

  switch (state.reason) {
    case StopReason::ReachedEpsTrain: return kExitSuccess;
    case StopReason::MaxSteps: return kExitMaxSteps;
    default:
      std::cerr << "train: diverged at every learning rate tried (last lr " << state.lr
                << ")\n";
      return kExitDiverged;
  }
}

int cmd_sample(const ExperimentConfig& config, const std::string& checkpoint_path) {
  const VarianceSchedule schedule = make_schedule(config);
  const TimeGrid grid = make_grid(config);

  ScoreFn score;
  bool oracle_mode = checkpoint_path.empty();
  if (oracle_mode) {
    score = make_oracle_score(make_gaussian_data(config), schedule);
  } else {
    const ScoreNet net = load_checkpoint(checkpoint_path);
    if (net.data_dim != config.d) {
      throw std::runtime_error("sample: checkpoint dimension " +
                               std::to_string(net.data_dim) + " does not match config d = " +
                               std::to_string(config.d));
    }
    score = make_net_score(net, schedule);
  }

  SamplerConfig sampler_config;
  sampler_config.dim = config.d;
  sampler_config.trajectories = config.trajectories;
  sampler_config.seed = config.seed;
  sampler_config.threads = config.threads;
  const Eigen::MatrixXd samples = sample(sampler_config, grid, schedule, score);

  std::vector<std::string> columns;
  for (int c = 0; c < config.d; ++c) columns.push_back("x" + std::to_string(c));
  CsvWriter samples_csv(out_path(config, "samples.csv"), config.config_hash, config.seed,
                        columns);
  std::vector<std::string> cells(static_cast<std::size_t>(config.d));
  for (Eigen::Index r = 0; r < samples.rows(); ++r) {
    for (int c = 0; c < config.d; ++c) {
      cells[static_cast<std::size_t>(c)] = CsvWriter::num(samples(r, c));
    }
    samples_csv.row(cells);
  }

  std::vector<std::string> moment_columns = {"coordinate", "mean", "var"};
  if (oracle_mode) {
    moment_columns.push_back("ref_mean");
    moment_columns.push_back("ref_cov");
  }
  CsvWriter moments_csv(out_path(config, "moments.csv"), config.config_hash, config.seed,
                        moment_columns);
  Eigen::VectorXd ref_mean;
  double ref_cov = 0.0;
  if (oracle_mode) {
    const IterateLaw law = iterate_law(make_gaussian_data(config), grid, schedule);
    ref_mean = law.means.back();
    ref_cov = law.cov_scalars.back();
  }
  const double rows = static_cast<double>(samples.rows());
  for (int c = 0; c < config.d; ++c) {
    double mean = 0.0, var = 0.0;
    if (rows > 0) mean = samples.col(c).mean();
    if (rows > 1) {
      var = (samples.col(c).array() - mean).square().sum() / (rows - 1.0);
    }
    std::vector<std::string> row = {CsvWriter::num(c), CsvWriter::num(mean),
                                    CsvWriter::num(var)};
    if (oracle_mode) {
      row.push_back(CsvWriter::num(ref_mean(c)));
      row.push_back(CsvWriter::num(ref_cov));
    }
    moments_csv.row(row);
  }

  std::cout << "sample: " << samples.rows() << " trajectories ("
            << (oracle_mode ? "closed-form score" : "checkpoint score") << "), wrote "
            << out_path(config, "samples.csv") << " and moments.csv\n";
  return kExitSuccess;
}

int cmd_oracle(const ExperimentConfig& config) {
  const VarianceSchedule schedule = make_schedule(config);
  const GaussianData data = make_gaussian_data(config);
  const double m2_sq = data.second_moment_sq();

  CsvWriter csv(out_path(config, "oracle.csv"), config.config_hash, config.seed,
                {"N", "schedule", "rho", "sigma_min", "sigma_max", "E_sigma", "exact_kl",
                 "kl_crosscheck", "E_I", "E_D"});
  for (int n_steps : config.n_list) {
    const TimeGrid grid = make_grid_steps(config, n_steps);
    const double es = e_sigma(data, grid, schedule);
    const double kl = exact_kl(data, grid, schedule);
    const double cross = exact_kl_crosscheck(data, grid, schedule);
    const double e_init = compute_e_init(m2_sq, schedule.sigma_bar(grid.T()));
    const EDiscTerms e_disc = compute_e_disc(grid, schedule, m2_sq, config.d);
    csv.row({CsvWriter::num(n_steps), pairing_name(config), CsvWriter::num(config.rho),
             CsvWriter::num(config.sigma_min), CsvWriter::num(config.sigma_max),
             CsvWriter::num(es), CsvWriter::num(kl), CsvWriter::num(cross),
             CsvWriter::num(e_init), CsvWriter::num(e_disc.total)});
  }

  if (!config.n_list.empty()) {
    const int last_n = config.n_list.back();
    const TimeGrid grid = make_grid_steps(config, last_n);
    const WeightingSpec weighting = make_weighting(config, grid, schedule);
    ErrorReportInputs inputs;
    inputs.m2_sq = m2_sq;
    inputs.data_dim = config.d;
    inputs.grid = &grid;
    inputs.schedule = &schedule;
    inputs.weighting = &weighting;
    inputs.eps_train = config.eps_train;
    inputs.rho = config.rho;
    inputs.kl_exact = exact_kl(data, grid, schedule);
    inputs.edm_simplified_bound = (config.variance == "edm");
    const ErrorReport report = full_error_report(inputs);
    std::ofstream txt(out_path(config, "error_report.txt"), std::ios::trunc);
    txt << render_error_report(report);
    if (!txt) {
      throw std::runtime_error("oracle: cannot write error_report.txt");
    }
  }

  std::cout << "oracle: wrote " << out_path(config, "oracle.csv")
            << (config.n_list.empty() ? " (header only)" : " and error_report.txt") << "\n";
  return kExitSuccess;
}

int cmd_compare_schedules(const ExperimentConfig& config) {
  const GaussianData data = make_gaussian_data(config);
  const double m2_sq = data.second_moment_sq();
  const VarianceSchedule edm(VarianceKind::Edm, config.sigma_min, config.sigma_max);
  const VarianceSchedule song(VarianceKind::Song, config.sigma_min, config.sigma_max);

  CsvWriter csv(out_path(config, "compare_schedules.csv"), config.config_hash, config.seed,
                {"N", "exact_kl_poly", "exact_kl_exp", "factor_poly", "factor_exp",
                 "factor_poly_bare", "factor_exp_bare", "complexity_poly", "complexity_exp",
                 "winner_score_dominant", "winner_sampling_dominant"});
  for (int n_steps : config.n_list) {
    const TimeGrid grid_poly =
        build_time_grid(edm, GridKind::Polynomial, n_steps, config.rho);
    const TimeGrid grid_exp = build_time_grid(song, GridKind::Exponential, n_steps);
    const double kl_poly = exact_kl(data, grid_poly, edm);
    const double kl_exp = exact_kl(data, grid_exp, song);
    const DesignFactors factors =
        design_factors(n_steps, config.rho, config.sigma_min, config.sigma_max);
    const double comp_poly = iteration_complexity(GridKind::Polynomial, m2_sq, config.d,
                                                  config.rho, config.sigma_min,
                                                  config.sigma_max);
    const double comp_exp = iteration_complexity(GridKind::Exponential, m2_sq, config.d,
                                                 config.rho, config.sigma_min,
                                                 config.sigma_max);
    std::string winner_score = "none";
    std::string winner_sampling = "none";
    if (n_steps >= 2) {
      winner_score = factors.poly_full < factors.exp_full ? "poly" : "exp";
      winner_sampling = kl_exp <= kl_poly ? "exp" : "poly";
    }
    csv.row({CsvWriter::num(n_steps), CsvWriter::num(kl_poly), CsvWriter::num(kl_exp),
             CsvWriter::num(factors.poly_full), CsvWriter::num(factors.exp_full),
             CsvWriter::num(factors.poly_bare), CsvWriter::num(factors.exp_bare),
             CsvWriter::num(comp_poly), CsvWriter::num(comp_exp), winner_score,
             winner_sampling});
  }

  std::cout << "compare-schedules: wrote " << out_path(config, "compare_schedules.csv")
            << "\n";
  return kExitSuccess;
}

int cmd_probe_bell(const ExperimentConfig& config, const std::string& checkpoint_path) {
  const VarianceSchedule schedule = make_schedule(config);

  ScoreNet net;
  if (checkpoint_path.empty()) {
    net = init_net(config.d, config.m, config.L, config.seed);
  } else {
    net = load_checkpoint(checkpoint_path);
    if (net.data_dim != config.d) {
      throw std::runtime_error("probe-bell: checkpoint dimension " +
                               std::to_string(net.data_dim) + " does not match config d = " +
                               std::to_string(config.d));
    }
  }

  // Probe at the first training point and first noise draw of this seed.
  const TimeGrid tiny = make_grid_steps(config, 1);
  const TrainBatch batch = make_batch(make_data_source(config), 1, tiny, schedule, config.seed);
  const Eigen::VectorXd x = batch.x.col(0);
  const Eigen::VectorXd xi = batch.xi.col(0);

  std::vector<double> sigmas(static_cast<std::size_t>(config.probe_points));
  if (config.probe_points == 1) {
    sigmas[0] = config.probe_sigma_min;
  } else {
    const double ln_lo = std::log(config.probe_sigma_min);
    const double ln_hi = std::log(config.probe_sigma_max);
    for (int k = 0; k < config.probe_points; ++k) {
      sigmas[static_cast<std::size_t>(k)] =
          std::exp(ln_lo + (ln_hi - ln_lo) * k / (config.probe_points - 1));
    }
    // The log-space round trip perturbs the ends; pin them exactly.
    sigmas.front() = config.probe_sigma_min;
    sigmas.back() = config.probe_sigma_max;
  }

  const auto probe = bell_shape_probe(net, x, xi, sigmas);
  CsvWriter csv(out_path(config, "bell_probe.csv"), config.config_hash, config.seed,
                {"sigma_bar", "residual_norm"});
  for (const auto& [sb, res] : probe) {
    csv.row({CsvWriter::num(sb), CsvWriter::num(res)});
  }

  std::cout << "probe-bell: wrote " << out_path(config, "bell_probe.csv") << "\n";
  return kExitSuccess;
}

}  // namespace velab
