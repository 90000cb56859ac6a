#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "velab/batch.hpp"
#include "velab/schedules.hpp"

namespace velab {

// Deep ReLU score network without biases:
//   S(X) = W_out * relu(W_L * ... * relu(W_1 * relu(W_in * X)))
// on augmented input X = [x ; sigma_bar] in R^(d+1). Gradient descent
// updates only the hidden matrices W_1..W_L; W_in and W_out stay frozen
// at initialization.
struct ScoreNet {
  int data_dim = 0;   // d
  int width = 0;      // m
  int depth = 0;      // L, number of trainable hidden layers
  std::uint64_t seed = 0;
  Eigen::MatrixXd input_layer;                // m x (d+1)
  std::vector<Eigen::MatrixXd> hidden;        // L matrices, each m x m
  Eigen::MatrixXd output_layer;               // d x m
};

// He-style init: W_in and hidden ~ N(0, 2/m) entrywise, output ~ N(0, 1/d).
ScoreNet init_net(int data_dim, int width, int depth, std::uint64_t seed);

// Score at a single point; appends sigma_bar as the time coordinate.
Eigen::VectorXd forward(const ScoreNet& net, const Eigen::VectorXd& x, double sigma_bar);

// Columns are pre-augmented (d+1)-vectors; returns d x B scores.
Eigen::MatrixXd forward_batch(const ScoreNet& net, const Eigen::MatrixXd& aug_inputs);

// Raised when a loss/gradient evaluation produces a non-finite value;
// (sample, time_index) identify the offending batch column (0-based).
struct NumericalFailure : std::runtime_error {
  int sample;
  int time_index;
  NumericalFailure(const std::string& what, int sample_i, int time_j)
      : std::runtime_error(what), sample(sample_i), time_index(time_j) {}
};

// Full-batch objective
//   loss = (1/2n) sum_{i,j} beta_j || sigma_bar_j S(x_i + sigma_bar_j xi_ij; t_j) + xi_ij ||^2
// with gradients for the trainable hidden layers only. per_term(i, j) holds
// the unscaled summand beta_j ||.||^2.
struct LossGrad {
  double loss = 0.0;
  std::vector<Eigen::MatrixXd> hidden_grads;
  Eigen::MatrixXd per_term;  // n x N
};

LossGrad loss_and_grad(const ScoreNet& net, const TrainBatch& batch,
                       const WeightingSpec& weighting);

}  // namespace velab
