#include "velab/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace velab {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' has non-numeric value '" + value + "'");
  }
}

long long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' has non-integer value '" + value + "'");
  }
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error("config: key '" + key + "' has non-integer value '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw std::runtime_error("config: key '" + key + "' must be true or false, got '" + value +
                           "'");
}

std::vector<double> parse_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  if (trim(value).empty()) return out;
  std::istringstream fields(value);
  std::string cell;
  while (std::getline(fields, cell, ',')) {
    out.push_back(parse_double(key, trim(cell)));
  }
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  if (trim(value).empty()) return out;
  std::istringstream fields(value);
  std::string cell;
  while (std::getline(fields, cell, ',')) {
    out.push_back(static_cast<int>(parse_int(key, trim(cell))));
  }
  return out;
}

}  // namespace

std::uint64_t fnv1a_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("config: cannot open " + path);
  }
  std::ostringstream raw;
  raw << in.rdbuf();
  const std::string bytes = raw.str();

  ExperimentConfig config;
  config.config_hash = fnv1a_hash(bytes);

  std::map<std::string, std::string> seen;
  std::istringstream lines(bytes);
  std::string line;
  int line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config: line " + std::to_string(line_no) +
                               " is not of the form key=value: '" + stripped + "'");
    }
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error("config: empty key at line " + std::to_string(line_no));
    }
    if (!seen.emplace(key, value).second) {
      throw std::runtime_error("config: duplicate key '" + key + "' at line " +
                               std::to_string(line_no));
    }

    if (key == "name") config.name = value;
    else if (key == "seed") config.seed = parse_u64(key, value);
    else if (key == "variance") config.variance = value;
    else if (key == "grid") config.grid = value;
    else if (key == "rho") config.rho = parse_double(key, value);
    else if (key == "sigma_min") config.sigma_min = parse_double(key, value);
    else if (key == "sigma_max") config.sigma_max = parse_double(key, value);
    else if (key == "steps") config.steps = static_cast<int>(parse_int(key, value));
    else if (key == "experimental") config.experimental = parse_bool(key, value);
    else if (key == "source") config.source = value;
    else if (key == "d") config.d = static_cast<int>(parse_int(key, value));
    else if (key == "n") config.n = static_cast<int>(parse_int(key, value));
    else if (key == "mean") config.mean = parse_double_list(key, value);
    else if (key == "sigma") config.sigma = parse_double(key, value);
    else if (key == "data_file") config.data_file = value;
    else if (key == "m") config.m = static_cast<int>(parse_int(key, value));
    else if (key == "L") config.L = static_cast<int>(parse_int(key, value));
    else if (key == "lr") config.lr = parse_double(key, value);
    else if (key == "max_steps") config.max_steps = static_cast<int>(parse_int(key, value));
    else if (key == "eps_train") config.eps_train = parse_double(key, value);
    else if (key == "weighting") config.weighting = value;
    else if (key == "trajectories") config.trajectories = static_cast<long>(parse_int(key, value));
    else if (key == "n_list") config.n_list = parse_int_list(key, value);
    else if (key == "probe_sigma_min") config.probe_sigma_min = parse_double(key, value);
    else if (key == "probe_sigma_max") config.probe_sigma_max = parse_double(key, value);
    else if (key == "probe_points") config.probe_points = static_cast<int>(parse_int(key, value));
    else if (key == "out") config.out = value;
    else if (key == "threads") config.threads = static_cast<int>(parse_int(key, value));
    else {
      throw std::runtime_error("config: unknown key '" + key + "' at line " +
                               std::to_string(line_no));
    }
  }

  validate_config(config);
  return config;
}

void validate_config(const ExperimentConfig& config) {
  auto fail = [](const std::string& msg) { throw std::runtime_error("config: " + msg); };

  if (config.variance != "edm" && config.variance != "song")
    fail("variance must be edm or song, got '" + config.variance + "'");
  if (config.grid != "poly" && config.grid != "exp")
    fail("grid must be poly or exp, got '" + config.grid + "'");
  if (config.weighting != "edm" && config.weighting != "uniform")
    fail("weighting must be edm or uniform, got '" + config.weighting + "'");
  if (config.source != "gaussian" && config.source != "mixture" && config.source != "file")
    fail("source must be gaussian, mixture, or file, got '" + config.source + "'");
  if (!(config.sigma_min > 0.0) || !(config.sigma_max > config.sigma_min))
    fail("need 0 < sigma_min < sigma_max");
  if (config.steps < 1) fail("steps must be at least 1");
  if (config.grid == "poly" && !(config.rho >= 1.0)) fail("poly grid needs rho >= 1");
  if (config.d < 1) fail("d must be at least 1");
  if (config.n < 1) fail("n must be at least 1");
  if (!(config.sigma > 0.0) || !std::isfinite(config.sigma)) fail("sigma must be positive");
  if (config.mean.size() != 1 && static_cast<int>(config.mean.size()) != config.d)
    fail("mean must be a single value or exactly d values");
  if (config.source == "file" && config.data_file.empty())
    fail("source=file requires data_file");
  if (config.m < 1) fail("m must be at least 1");
  if (config.L < 0) fail("L must be non-negative");
  if (config.lr < 0.0 || !std::isfinite(config.lr)) fail("lr must be non-negative and finite");
  if (config.max_steps < 0) fail("max_steps must be non-negative");
  if (std::isnan(config.eps_train) || config.eps_train < 0.0)
    fail("eps_train must be non-negative");
  if (config.trajectories < 0) fail("trajectories must be non-negative");
  for (int nn : config.n_list) {
    if (nn < 1) fail("n_list entries must be at least 1");
  }
  if (!(config.probe_sigma_min > 0.0) || !(config.probe_sigma_max > config.probe_sigma_min))
    fail("need 0 < probe_sigma_min < probe_sigma_max");
  if (config.probe_points < 1) fail("probe_points must be at least 1");
  if (config.threads < 1) fail("threads must be at least 1");
  if (config.out.empty()) fail("out must be non-empty");
}

VarianceSchedule make_schedule(const ExperimentConfig& config) {
  return VarianceSchedule(config.variance == "edm" ? VarianceKind::Edm : VarianceKind::Song,
                          config.sigma_min, config.sigma_max);
}

TimeGrid make_grid(const ExperimentConfig& config) {
  return make_grid_steps(config, config.steps);
}

TimeGrid make_grid_steps(const ExperimentConfig& config, int n_steps) {
  return build_time_grid(make_schedule(config),
                         config.grid == "poly" ? GridKind::Polynomial : GridKind::Exponential,
                         n_steps, config.rho, config.experimental);
}

WeightingSpec make_weighting(const ExperimentConfig& config, const TimeGrid& grid,
                             const VarianceSchedule& schedule) {
  if (config.weighting == "edm") return make_edm_weighting(grid, schedule);
  return make_uniform_weighting(grid, schedule);
}

Eigen::VectorXd mean_vector(const ExperimentConfig& config) {
  Eigen::VectorXd mean(config.d);
  if (config.mean.size() == 1) {
    mean.setConstant(config.mean[0]);
  } else {
    for (int k = 0; k < config.d; ++k) mean(k) = config.mean[static_cast<std::size_t>(k)];
  }
  return mean;
}

DataSource make_data_source(const ExperimentConfig& config) {
  DataSource source;
  source.dim = config.d;
  source.mean = mean_vector(config);
  source.sigma_sq = config.sigma * config.sigma;
  source.path = config.data_file;
  if (config.source == "gaussian") source.kind = DataSource::Kind::Gaussian;
  else if (config.source == "mixture") source.kind = DataSource::Kind::Mixture;
  else source.kind = DataSource::Kind::File;
  return source;
}

GaussianData make_gaussian_data(const ExperimentConfig& config) {
  if (config.source != "gaussian") {
    throw std::runtime_error(
        "config: this command needs a closed-form target; set source=gaussian");
  }
  GaussianData data;
  data.mean = mean_vector(config);
  data.sigma_sq = config.sigma * config.sigma;
  return data;
}

}  // namespace velab
