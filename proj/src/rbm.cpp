#include "hrbm/rbm.hpp"

#include <cmath>
#include <numeric>

#include "hrbm/errors.hpp"

namespace hrbm {

GaussBernRBM make_rbm(int n_visible, int n_hidden, double beta) {
  GaussBernRBM rbm;
  rbm.W = Matrix::Zero(n_visible, n_hidden);
  rbm.b = Vector::Zero(n_visible);
  rbm.c = Vector::Zero(n_hidden);
  rbm.beta = beta;
  return rbm;
}

Vector mean_hidden(const GaussBernRBM& rbm, const Vector& s) {
  return rbm.W.transpose() * s + rbm.c;
}

Matrix mean_hidden(const GaussBernRBM& rbm, const Matrix& s_cols) {
  Matrix h = rbm.W.transpose() * s_cols;
  h.colwise() += rbm.c;
  return h;
}

Vector sample_hidden(const GaussBernRBM& rbm, const Vector& s, Rng& rng) {
  Vector lambda = mean_hidden(rbm, s);
  const double sd = 1.0 / std::sqrt(rbm.beta);
  for (Eigen::Index mu = 0; mu < lambda.size(); ++mu) lambda(mu) += sd * rng.normal();
  return lambda;
}

Matrix sample_hidden(const GaussBernRBM& rbm, const Matrix& s_cols, Rng& rng) {
  Matrix lambda = mean_hidden(rbm, s_cols);
  const double sd = 1.0 / std::sqrt(rbm.beta);
  for (Eigen::Index a = 0; a < lambda.cols(); ++a) {
    for (Eigen::Index mu = 0; mu < lambda.rows(); ++mu) lambda(mu, a) += sd * rng.normal();
  }
  return lambda;
}

Vector sample_visible(const GaussBernRBM& rbm, const Vector& lambda, Rng& rng) {
  const Vector x = rbm.W * lambda + rbm.b;
  Vector s(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * rbm.beta * x(i)));
    s(i) = rng.uniform() < p_plus ? 1.0 : -1.0;
  }
  return s;
}

Matrix sample_visible(const GaussBernRBM& rbm, const Matrix& lambda_cols, Rng& rng) {
  Matrix x = rbm.W * lambda_cols;
  x.colwise() += rbm.b;
  Matrix s(x.rows(), x.cols());
  for (Eigen::Index a = 0; a < x.cols(); ++a) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double p_plus = 1.0 / (1.0 + std::exp(-2.0 * rbm.beta * x(i, a)));
      s(i, a) = rng.uniform() < p_plus ? 1.0 : -1.0;
    }
  }
  return s;
}

Matrix cd_k_gradient(const GaussBernRBM& rbm, const Matrix& batch, int k_steps, Rng& rng,
                     bool mean_field_tail) {
  if (batch.cols() == 0) throw TooFewSamples("cd_k_gradient: empty batch");
  const double inv_b = 1.0 / static_cast<double>(batch.cols());

  const Matrix pos_hidden = mean_hidden(rbm, batch);  // <lambda | s = s_a>
  Matrix positive = batch * pos_hidden.transpose() * inv_b;

  Matrix s = batch;
  Matrix lambda;
  for (int k = 0; k < k_steps; ++k) {
    lambda = sample_hidden(rbm, s, rng);
    s = sample_visible(rbm, lambda, rng);
  }
  if (mean_field_tail) lambda = mean_hidden(rbm, s);
  Matrix negative = s * lambda.transpose() * inv_b;

  return positive - negative;
}

TrainResult train(GaussBernRBM rbm, const Matrix& samples, const TrainConfig& cfg,
                  const EpochCallback& callback) {
  if (cfg.beta > 0) rbm.beta = cfg.beta;
  const int m = static_cast<int>(samples.cols());
  const int bsize = std::min(cfg.batch_size, m);

  TrainResult result;
  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);

  Matrix chains;  // persistent CD state, re-seeded whenever the width changes
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::uint64_t epoch_base = static_cast<std::uint64_t>(epoch) * 1000003ULL;
    Rng shuffle_rng = Rng::stream(cfg.seed, epoch_base);
    shuffle_rng.shuffle(order);

    double update_norm_sum = 0.0;
    int n_batches = 0;
    for (int start = 0; start < m; start += bsize) {
      const int width = std::min(bsize, m - start);
      Matrix batch(samples.rows(), width);
      for (int j = 0; j < width; ++j) {
        batch.col(j) = samples.col(order[static_cast<std::size_t>(start + j)]);
      }
      Rng batch_rng = Rng::stream(cfg.seed, epoch_base + 1 + static_cast<std::uint64_t>(n_batches));

      Matrix grad;
      if (cfg.persistent) {
        if (chains.cols() != width) chains = batch;
        const double inv_b = 1.0 / static_cast<double>(width);
        Matrix positive = batch * mean_hidden(rbm, batch).transpose() * inv_b;
        Matrix lambda;
        for (int k = 0; k < cfg.cd_steps; ++k) {
          lambda = sample_hidden(rbm, chains, batch_rng);
          chains = sample_visible(rbm, lambda, batch_rng);
        }
        if (cfg.mean_field_tail) lambda = mean_hidden(rbm, chains);
        grad = positive - chains * lambda.transpose() * inv_b;
      } else {
        grad = cd_k_gradient(rbm, batch, cfg.cd_steps, batch_rng, cfg.mean_field_tail);
      }

      rbm.W += cfg.learning_rate * grad;
      update_norm_sum += grad.norm();
      ++n_batches;
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.mean_update_norm = n_batches > 0 ? update_norm_sum / n_batches : 0.0;
    stats.weight_norm = rbm.W.norm();
    result.log.push_back(stats);
    if (callback) callback(stats, rbm);
  }

  result.model = std::move(rbm);
  return result;
}

TrainResult train(GaussBernRBM rbm, const BinaryDataset& data, const TrainConfig& cfg,
                  const EpochCallback& callback) {
  return train(std::move(rbm), data.samples, cfg, callback);
}

Vector generate_samples(const GaussBernRBM& rbm, const Vector& s0, int steps, Rng& rng) {
  Vector s = s0;
  for (int k = 0; k < steps; ++k) {
    const Vector lambda = sample_hidden(rbm, s, rng);
    s = sample_visible(rbm, lambda, rng);
  }
  return s;
}

}  // namespace hrbm
