#pragma once

#include <string>
#include <vector>

#include "hrbm/baselines.hpp"
#include "hrbm/dataset.hpp"
#include "hrbm/rbm.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

// Ten per-class expert RBMs with shared (N, k); biases stay zero.
struct ExpertEnsemble {
  std::vector<GaussBernRBM> experts;
  InitKind init = InitKind::hopfield_qr;
  int k = 1;

  int n_experts() const { return static_cast<int>(experts.size()); }
};

// f_mu(s) = || s^T W^(mu) ||^2, one feature per expert.
Vector feature_map(const ExpertEnsemble& ensemble, const Vector& s);
Matrix feature_map(const ExpertEnsemble& ensemble, const Matrix& s_cols);

// Builds one expert per class from the requested initialization and trains it
// with CD on that class's samples only.
ExpertEnsemble train_experts(const BinaryDataset& data, const InitSpec& init,
                             const TrainConfig& cfg);

struct LogRegConfig {
  double l2 = 1e-4;      // on weights; intercepts unregularized
  double tol = 1e-8;     // on the gradient norm
  int max_iters = 200;
};

// Multinomial logistic regression head over standardized features.
struct LogRegHead {
  Matrix weights;     // n_classes x n_features
  Vector intercepts;  // n_classes
  Vector feat_mean;   // standardization fitted on the training features
  Vector feat_std;
  bool trained = false;
  int iterations = 0;
  double final_grad_norm = 0.0;
};

// Damped-Newton fit to gradient-norm tolerance. Throws NonConvergence (with
// the final gradient norm in the message) if the budget runs out.
LogRegHead fit_multinomial_logreg(const Matrix& features, const std::vector<int>& labels,
                                  int n_classes, const LogRegConfig& cfg = {});

LogRegHead train_head(const ExpertEnsemble& ensemble, const BinaryDataset& data,
                      const LogRegConfig& cfg = {});

int classify(const ExpertEnsemble& ensemble, const LogRegHead& head, const Vector& s);
std::vector<int> classify(const ExpertEnsemble& ensemble, const LogRegHead& head,
                          const Matrix& s_cols);

// Fraction misclassified.
double test_error(const ExpertEnsemble& ensemble, const LogRegHead& head,
                  const BinaryDataset& testset);

}  // namespace hrbm
