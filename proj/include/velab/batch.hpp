#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace velab {

// Where training data x_1..x_n comes from.
//   Gaussian: x_i ~ N(mean, sigma_sq I)
//   Mixture:  x_i ~ (1/2) N(mean, sigma_sq I) + (1/2) N(-mean, sigma_sq I)
//   File:     rows of a headerless CSV, one point per line
struct DataSource {
  enum class Kind { Gaussian, Mixture, File };
  Kind kind = Kind::Gaussian;
  int dim = 0;
  Eigen::VectorXd mean;
  double sigma_sq = 1.0;
  std::string path;
};

// Frozen training set: data x (d x n), noise draws xi (d x nN), the noise
// scales sigma_bar(t_1..t_N), and the augmented inputs actually fed to the
// network. Column b = j*n + i holds pair (x_i, t_{j+1}); inputs column b is
// [x_i + sigma_bars[j] * xi_col_b ; sigma_bars[j]].
struct TrainBatch {
  Eigen::MatrixXd x;
  Eigen::MatrixXd xi;
  std::vector<double> sigma_bars;
  Eigen::MatrixXd inputs;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(x.cols()); }
  int steps() const { return static_cast<int>(sigma_bars.size()); }
  int dim() const { return static_cast<int>(x.rows()); }
  // i in 0..n-1 indexes the data point, j in 0..N-1 the grid time t_{j+1}.
  Eigen::Index col(int i, int j) const {
    return static_cast<Eigen::Index>(j) * n() + i;
  }
};

}  // namespace velab
