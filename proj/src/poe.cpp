#include "hrbm/poe.hpp"

#include <cmath>

#include "hrbm/errors.hpp"
#include "hrbm/forward_map.hpp"
#include "hrbm/patterns.hpp"

namespace hrbm {

Vector feature_map(const ExpertEnsemble& ensemble, const Vector& s) {
  Vector f(ensemble.n_experts());
  for (int mu = 0; mu < ensemble.n_experts(); ++mu) {
    f(mu) = (ensemble.experts[static_cast<std::size_t>(mu)].W.transpose() * s).squaredNorm();
  }
  return f;
}

Matrix feature_map(const ExpertEnsemble& ensemble, const Matrix& s_cols) {
  Matrix f(ensemble.n_experts(), s_cols.cols());
  for (int mu = 0; mu < ensemble.n_experts(); ++mu) {
    const Matrix h = ensemble.experts[static_cast<std::size_t>(mu)].W.transpose() * s_cols;
    f.row(mu) = h.colwise().squaredNorm();
  }
  return f;
}

namespace {

// Re-labels a class slice as a one-class dataset so the clustering helpers
// can run on it directly.
BinaryDataset as_single_class(const BinaryDataset& data, const std::vector<int>& idx) {
  BinaryDataset single = select(data, idx);
  std::vector<int> all(static_cast<std::size_t>(single.count()));
  for (int a = 0; a < single.count(); ++a) all[static_cast<std::size_t>(a)] = a;
  for (auto& l : single.labels) l = 0;
  single.class_index.assign(1, all);
  return single;
}

}  // namespace

ExpertEnsemble train_experts(const BinaryDataset& data, const InitSpec& init,
                             const TrainConfig& cfg) {
  const int n_classes = data.n_classes();
  const int n = data.n_visible();

  ExpertEnsemble ens;
  ens.init = init.kind;
  ens.k = init.k;
  ens.experts.reserve(static_cast<std::size_t>(n_classes));

  for (int cls = 0; cls < n_classes; ++cls) {
    const auto& idx = data.class_index[static_cast<std::size_t>(cls)];
    if (idx.empty()) throw EmptyClass("train_experts: class " + std::to_string(cls) + " is empty");
    BinaryDataset class_data = as_single_class(data, idx);

    GaussBernRBM expert = make_rbm(n, init.k, cfg.beta);
    switch (init.kind) {
      case InitKind::hopfield_qr:
        expert.W = qr_orthogonalize(subpattern_clusters(class_data, init.k).xi).U;
        break;
      case InitKind::hebbian:
        expert.W = hebbian_init(subpattern_clusters(class_data, init.k).xi);
        break;
      case InitKind::pca:
        expert.W = pca_init(class_data.samples, init.k);
        break;
      case InitKind::random: {
        Rng rng = Rng::stream(init.seed, static_cast<std::uint64_t>(cls));
        expert.W = random_init(n, init.k, 0.01, rng);
        break;
      }
    }

    if (cfg.epochs > 0) {
      TrainConfig expert_cfg = cfg;
      expert_cfg.seed = init.seed ^ (0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(cls));
      expert = train(std::move(expert), class_data.samples, expert_cfg).model;
    }
    ens.experts.push_back(std::move(expert));
  }
  return ens;
}

namespace {

Matrix standardized(const Matrix& features, const Vector& mean, const Vector& std) {
  Matrix z = features;
  z.colwise() -= mean;
  z.array().colwise() /= std.array();
  return z;
}

}  // namespace

LogRegHead fit_multinomial_logreg(const Matrix& features, const std::vector<int>& labels,
                                  int n_classes, const LogRegConfig& cfg) {
  const int d = static_cast<int>(features.rows());
  const int m = static_cast<int>(features.cols());
  if (m == 0 || static_cast<int>(labels.size()) != m) {
    throw TooFewSamples("fit_multinomial_logreg: bad feature/label sizes");
  }

  LogRegHead head;
  head.feat_mean = features.rowwise().mean();
  Vector var = Vector::Zero(d);
  for (int a = 0; a < m; ++a) {
    var += (features.col(a) - head.feat_mean).cwiseAbs2();
  }
  var /= static_cast<double>(m);
  head.feat_std = var.cwiseSqrt();
  for (int j = 0; j < d; ++j) {
    if (head.feat_std(j) == 0.0) head.feat_std(j) = 1.0;
  }
  const Matrix z = standardized(features, head.feat_mean, head.feat_std);

  // Augmented design [z; 1]; parameters theta (n_classes x (d+1)) with the
  // intercept in the last column. L2 on weights only; a vanishing ridge on
  // the intercepts removes the soft-max gauge freedom from the Hessian.
  const int da = d + 1;
  Matrix za(da, m);
  za.topRows(d) = z;
  za.row(d).setOnes();

  Matrix theta = Matrix::Zero(n_classes, da);
  const double inv_m = 1.0 / static_cast<double>(m);
  const double intercept_ridge = 1e-10;

  auto loss_and_probs = [&](const Matrix& th, Matrix& probs) {
    Matrix logits = th * za;  // n_classes x m
    double nll = 0.0;
    probs.resize(n_classes, m);
    for (int a = 0; a < m; ++a) {
      const double mx = logits.col(a).maxCoeff();
      const double lse = mx + std::log((logits.col(a).array() - mx).exp().sum());
      nll -= logits(labels[static_cast<std::size_t>(a)], a) - lse;
      probs.col(a) = (logits.col(a).array() - lse).exp();
    }
    double reg = 0.5 * cfg.l2 * th.leftCols(d).squaredNorm() +
                 0.5 * intercept_ridge * th.col(d).squaredNorm();
    return nll * inv_m + reg;
  };

  Matrix probs;
  double loss = loss_and_probs(theta, probs);

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // Gradient.
    Matrix resid = probs;  // P - Y
    for (int a = 0; a < m; ++a) resid(labels[static_cast<std::size_t>(a)], a) -= 1.0;
    Matrix grad = resid * za.transpose() * inv_m;
    grad.leftCols(d) += cfg.l2 * theta.leftCols(d);
    grad.col(d) += intercept_ridge * theta.col(d);

    head.final_grad_norm = grad.norm();
    head.iterations = iter;
    if (head.final_grad_norm < cfg.tol) {
      head.trained = true;
      break;
    }

    // Newton system over the flattened parameters, class-major blocks.
    const int np = n_classes * da;
    Matrix hess = Matrix::Zero(np, np);
    for (int a = 0; a < m; ++a) {
      const Vector pa = probs.col(a);
      const Vector xa = za.col(a);
      const Matrix outer = xa * xa.transpose();
      for (int kc = 0; kc < n_classes; ++kc) {
        for (int lc = 0; lc < n_classes; ++lc) {
          const double mkl = (kc == lc ? pa(kc) * (1.0 - pa(kc)) : -pa(kc) * pa(lc));
          if (mkl == 0.0) continue;
          hess.block(kc * da, lc * da, da, da) += mkl * inv_m * outer;
        }
      }
    }
    for (int kc = 0; kc < n_classes; ++kc) {
      for (int j = 0; j < d; ++j) hess(kc * da + j, kc * da + j) += cfg.l2;
      hess(kc * da + d, kc * da + d) += intercept_ridge;
    }

    // Flatten class-major: block kc of the system covers theta.row(kc).
    Matrix grad_t = grad.transpose();  // da x n_classes, column-major
    Eigen::Map<const Eigen::VectorXd> gvec(grad_t.data(), np);
    Vector step = hess.ldlt().solve(gvec);

    // Backtracking on the Newton step.
    double scale = 1.0;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      Matrix trial = theta;
      for (int kc = 0; kc < n_classes; ++kc) {
        for (int j = 0; j < da; ++j) trial(kc, j) -= scale * step(kc * da + j);
      }
      Matrix trial_probs;
      const double trial_loss = loss_and_probs(trial, trial_probs);
      if (trial_loss <= loss + 1e-12) {
        theta = std::move(trial);
        probs = std::move(trial_probs);
        loss = trial_loss;
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) break;
  }

  if (!head.trained) {
    throw NonConvergence("logistic regression did not reach tolerance; final gradient norm " +
                         std::to_string(head.final_grad_norm));
  }
  head.weights = theta.leftCols(d);
  head.intercepts = theta.col(d);
  return head;
}

LogRegHead train_head(const ExpertEnsemble& ensemble, const BinaryDataset& data,
                      const LogRegConfig& cfg) {
  const Matrix features = feature_map(ensemble, data.samples);
  return fit_multinomial_logreg(features, data.labels, data.n_classes(), cfg);
}

namespace {

int predict_one(const LogRegHead& head, const Vector& f) {
  const Vector z = (f - head.feat_mean).cwiseQuotient(head.feat_std);
  const Vector logits = head.weights * z + head.intercepts;
  Eigen::Index arg = 0;
  logits.maxCoeff(&arg);
  return static_cast<int>(arg);
}

}  // namespace

int classify(const ExpertEnsemble& ensemble, const LogRegHead& head, const Vector& s) {
  return predict_one(head, feature_map(ensemble, s));
}

std::vector<int> classify(const ExpertEnsemble& ensemble, const LogRegHead& head,
                          const Matrix& s_cols) {
  const Matrix features = feature_map(ensemble, s_cols);
  std::vector<int> out(static_cast<std::size_t>(features.cols()));
  for (Eigen::Index a = 0; a < features.cols(); ++a) {
    out[static_cast<std::size_t>(a)] = predict_one(head, features.col(a));
  }
  return out;
}

double test_error(const ExpertEnsemble& ensemble, const LogRegHead& head,
                  const BinaryDataset& testset) {
  const std::vector<int> pred = classify(ensemble, head, testset.samples);
  int wrong = 0;
  for (int a = 0; a < testset.count(); ++a) {
    if (pred[static_cast<std::size_t>(a)] != testset.labels[static_cast<std::size_t>(a)]) ++wrong;
  }
  return static_cast<double>(wrong) / testset.count();
}

}  // namespace hrbm
