#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "hrbm/dataset.hpp"
#include "hrbm/rng.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

// Binary-gaussian RBM:
//   H(s, l) = 1/2 sum_u (l_u - c_u)^2 - sum_i b_i s_i - sum_iu W_iu s_i l_u
// with s_i in {-1,+1} and l_u real, at inverse temperature beta.
struct GaussBernRBM {
  Matrix W;  // N x p
  Vector b;  // visible bias, length N
  Vector c;  // hidden bias, length p
  double beta = 1.0;

  int n_visible() const { return static_cast<int>(W.rows()); }
  int n_hidden() const { return static_cast<int>(W.cols()); }
};

GaussBernRBM make_rbm(int n_visible, int n_hidden, double beta);

// Conditional mean of the hidden layer, W^T s + c.
Vector mean_hidden(const GaussBernRBM& rbm, const Vector& s);
Matrix mean_hidden(const GaussBernRBM& rbm, const Matrix& s_cols);

// l_u ~ Normal(W^T s + c, 1/beta), independent across units.
Vector sample_hidden(const GaussBernRBM& rbm, const Vector& s, Rng& rng);
Matrix sample_hidden(const GaussBernRBM& rbm, const Matrix& s_cols, Rng& rng);

// P(s_i = +1 | l) = 1 / (1 + exp(-2 beta x_i)), x = W l + b.
Vector sample_visible(const GaussBernRBM& rbm, const Vector& lambda, Rng& rng);
Matrix sample_visible(const GaussBernRBM& rbm, const Matrix& lambda_cols, Rng& rng);

// CD-K weight gradient over a batch (visible states as columns):
// positive phase s_i (W^T s + c)_u averaged over data, negative phase
// s_i^(K) l_u^(K) from K alternating Gibbs-block steps started at each
// sample. With mean_field_tail the final hidden value is replaced by its
// conditional mean given the final visible state.
Matrix cd_k_gradient(const GaussBernRBM& rbm, const Matrix& batch, int k_steps,
                     Rng& rng, bool mean_field_tail = false);

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 100;
  int cd_steps = 20;
  int epochs = 1;
  std::uint64_t seed = 0;
  double beta = 2.0;
  bool persistent = false;       // PCD; default plain CD from the data
  bool mean_field_tail = false;
};

struct EpochStats {
  int epoch = 0;
  double mean_update_norm = 0.0;  // mean ||dW||_F over batches
  double weight_norm = 0.0;       // ||W||_F after the epoch
};

using EpochCallback = std::function<void(const EpochStats&, const GaussBernRBM&)>;

struct TrainResult {
  GaussBernRBM model;
  std::vector<EpochStats> log;
};

// Mini-batch gradient ascent W <- W + eta * dW; biases stay frozen. The
// epoch shuffle and every chain derive from the config seed, so runs are
// reproducible bit-for-bit.
TrainResult train(GaussBernRBM rbm, const Matrix& samples, const TrainConfig& cfg,
                  const EpochCallback& callback = {});
TrainResult train(GaussBernRBM rbm, const BinaryDataset& data, const TrainConfig& cfg,
                  const EpochCallback& callback = {});

// Alternating block-Gibbs chain of the given length; returns the final
// visible state.
Vector generate_samples(const GaussBernRBM& rbm, const Vector& s0, int steps, Rng& rng);

}  // namespace hrbm
