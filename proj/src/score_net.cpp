#include "velab/score_net.hpp"

#include <cmath>
#include <random>
#include <string>

#include "velab/numerics.hpp"

namespace velab {

namespace {

void fill_gaussian(Eigen::MatrixXd& mat, double stddev, std::mt19937_64& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  for (Eigen::Index r = 0; r < mat.rows(); ++r) {
    for (Eigen::Index c = 0; c < mat.cols(); ++c) {
      mat(r, c) = dist(rng);
    }
  }
}

Eigen::Index first_bad_col(const Eigen::MatrixXd& mat) {
  for (Eigen::Index c = 0; c < mat.cols(); ++c) {
    if (!mat.col(c).allFinite()) return c;
  }
  return -1;
}

[[noreturn]] void throw_bad_column(const char* stage, Eigen::Index col, int n) {
  const int i = static_cast<int>(col % n);
  const int j = static_cast<int>(col / n);
  throw NumericalFailure(std::string("loss_and_grad: ") + stage +
                             " is non-finite at sample " + std::to_string(i) +
                             ", time index " + std::to_string(j),
                         i, j);
}

}  // namespace

ScoreNet init_net(int data_dim, int width, int depth, std::uint64_t seed) {
  if (data_dim < 1 || width < 1 || depth < 0) {
    throw std::invalid_argument("init_net: need data_dim >= 1, width >= 1, depth >= 0");
  }
  ScoreNet net;
  net.data_dim = data_dim;
  net.width = width;
  net.depth = depth;
  net.seed = seed;

  std::mt19937_64 rng = make_stream(seed, kStreamNetInit);
  const double hidden_std = std::sqrt(2.0 / width);
  net.input_layer.resize(width, data_dim + 1);
  fill_gaussian(net.input_layer, hidden_std, rng);
  net.hidden.resize(static_cast<std::size_t>(depth));
  for (auto& w : net.hidden) {
    w.resize(width, width);
    fill_gaussian(w, hidden_std, rng);
  }
  net.output_layer.resize(data_dim, width);
  fill_gaussian(net.output_layer, std::sqrt(1.0 / data_dim), rng);
  return net;
}

Eigen::VectorXd forward(const ScoreNet& net, const Eigen::VectorXd& x, double sigma_bar) {
  if (x.size() != net.data_dim) {
    throw std::invalid_argument("forward: input dimension mismatch");
  }
  Eigen::MatrixXd aug(net.data_dim + 1, 1);
  aug.topRows(net.data_dim) = x;
  aug(net.data_dim, 0) = sigma_bar;
  return forward_batch(net, aug).col(0);
}

Eigen::MatrixXd forward_batch(const ScoreNet& net, const Eigen::MatrixXd& aug_inputs) {
  if (aug_inputs.rows() != net.data_dim + 1) {
    throw std::invalid_argument("forward_batch: inputs must have data_dim + 1 rows");
  }
  Eigen::MatrixXd q = (net.input_layer * aug_inputs).cwiseMax(0.0);
  for (const auto& w : net.hidden) {
    q = (w * q).cwiseMax(0.0);
  }
  return net.output_layer * q;
}

LossGrad loss_and_grad(const ScoreNet& net, const TrainBatch& batch,
                       const WeightingSpec& weighting) {
  const int n = batch.n();
  const int steps = batch.steps();
  const int d = net.data_dim;
  if (n < 1 || steps < 1) {
    throw std::invalid_argument("loss_and_grad: batch must be non-empty");
  }
  if (batch.dim() != d) {
    throw std::invalid_argument("loss_and_grad: batch dimension mismatch");
  }
  if (static_cast<int>(weighting.beta.size()) != steps) {
    throw std::invalid_argument("loss_and_grad: weighting size must equal step count");
  }
  const Eigen::Index cols = static_cast<Eigen::Index>(n) * steps;
  if (batch.inputs.rows() != d + 1 || batch.inputs.cols() != cols ||
      batch.xi.cols() != cols) {
    throw std::invalid_argument("loss_and_grad: batch layout mismatch");
  }

  // Forward pass, keeping every activation for backprop.
  std::vector<Eigen::MatrixXd> q(static_cast<std::size_t>(net.depth) + 1);
  q[0] = (net.input_layer * batch.inputs).cwiseMax(0.0);
  for (int l = 1; l <= net.depth; ++l) {
    q[static_cast<std::size_t>(l)] =
        (net.hidden[static_cast<std::size_t>(l - 1)] * q[static_cast<std::size_t>(l - 1)])
            .cwiseMax(0.0);
  }
  Eigen::MatrixXd scores = net.output_layer * q[static_cast<std::size_t>(net.depth)];
  if (!scores.allFinite()) {
    throw_bad_column("network output", first_bad_col(scores), n);
  }

  LossGrad out;
  out.per_term.resize(n, steps);
  Eigen::MatrixXd residual(d, cols);   // u = sigma_bar_j * S + xi
  Eigen::MatrixXd d_scores(d, cols);   // dL/dS
  for (int j = 0; j < steps; ++j) {
    const double sb = batch.sigma_bars[static_cast<std::size_t>(j)];
    const double beta = weighting.beta[static_cast<std::size_t>(j)];
    const Eigen::Index start = static_cast<Eigen::Index>(j) * n;
    residual.middleCols(start, n) =
        sb * scores.middleCols(start, n) + batch.xi.middleCols(start, n);
    d_scores.middleCols(start, n) = (beta * sb / n) * residual.middleCols(start, n);
    for (int i = 0; i < n; ++i) {
      out.per_term(i, j) = beta * residual.col(start + i).squaredNorm();
    }
  }
  out.loss = out.per_term.sum() / (2.0 * n);
  if (!std::isfinite(out.loss)) {
    Eigen::Index bad = first_bad_col(residual);
    if (bad < 0) {
      Eigen::Index r = 0, c = 0;
      out.per_term.cwiseAbs().maxCoeff(&r, &c);
      bad = c * n + r;
    }
    throw_bad_column("loss", bad, n);
  }

  // Backward pass through the trainable hidden stack only.
  out.hidden_grads.resize(static_cast<std::size_t>(net.depth));
  if (net.depth > 0) {
    Eigen::MatrixXd delta =
        (net.output_layer.transpose() * d_scores)
            .cwiseProduct(
                (q[static_cast<std::size_t>(net.depth)].array() > 0.0).cast<double>().matrix());
    for (int l = net.depth; l >= 1; --l) {
      if (!delta.allFinite()) {
        throw_bad_column("backpropagated gradient", first_bad_col(delta), n);
      }
      Eigen::MatrixXd& grad = out.hidden_grads[static_cast<std::size_t>(l - 1)];
      grad = delta * q[static_cast<std::size_t>(l - 1)].transpose();
      if (!grad.allFinite()) {
        Eigen::Index bad = first_bad_col(q[static_cast<std::size_t>(l - 1)]);
        throw_bad_column("hidden-layer gradient", bad >= 0 ? bad : 0, n);
      }
      if (l > 1) {
        delta = (net.hidden[static_cast<std::size_t>(l - 1)].transpose() * delta)
                    .cwiseProduct(
                        (q[static_cast<std::size_t>(l - 1)].array() > 0.0).cast<double>().matrix());
      }
    }
  }
  return out;
}

}  // namespace velab
