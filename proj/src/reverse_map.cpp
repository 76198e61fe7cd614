#include "hrbm/reverse_map.hpp"

#include <cmath>

#include "hrbm/errors.hpp"

namespace hrbm {

HopfieldNetwork integrate_out_hidden(const GaussBernRBM& rbm) {
  HopfieldNetwork net;
  net.J = rbm.W * rbm.W.transpose();
  // A nonzero hidden bias shifts the gaussian integral and lands on the
  // visible units as an extra field W c; identical to b when c = 0.
  net.b = rbm.b + rbm.W * rbm.c;
  net.beta = rbm.beta;
  net.factor = rbm.W;
  return net;
}

namespace {

double soft_objective(const Matrix& E) { return E.norm(); }

double condition_number(const Matrix& X) {
  Eigen::JacobiSVD<Matrix> svd(X);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / smin;
}

}  // namespace

Matrix binarization_gradient(const Matrix& W, const Matrix& X, double alpha) {
  const Matrix U = W * X;
  const Matrix T = (alpha * U).array().tanh().matrix();
  const Matrix E = U - T;
  // sech^2(alpha U) = 1 - tanh^2(alpha U)
  const Matrix sech2 = (1.0 - T.array().square()).matrix();
  return 2.0 * W.transpose() * (E - alpha * E.cwiseProduct(sech2));
}

BinarizationSolution binarize_descent(const Matrix& W, const Matrix& X0,
                                      const DescentConfig& cfg) {
  BinarizationSolution sol;
  Matrix X = X0;
  double prev_obj = std::numeric_limits<double>::infinity();
  sol.status = DescentStatus::no_convergence;

  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Matrix U = W * X;
    const Matrix T = (cfg.alpha * U).array().tanh().matrix();
    const Matrix E_soft = U - T;
    const double obj = soft_objective(E_soft);
    sol.trace.push_back(obj);
    if (obj > prev_obj + 1e-12) ++sol.monotonicity_violations;
    prev_obj = obj;

    const Matrix sech2 = (1.0 - T.array().square()).matrix();
    const Matrix G = 2.0 * W.transpose() * (E_soft - cfg.alpha * E_soft.cwiseProduct(sech2));
    if (G.norm() < cfg.tol) {
      sol.status = DescentStatus::converged;
      break;
    }
    if (it % 100 == 0 && condition_number(X) > cfg.cond_limit) {
      sol.status = DescentStatus::singular_x;
      break;
    }
    X -= cfg.gamma * G;
  }

  sol.iterations = it;
  sol.X = std::move(X);
  sol.B_p = W * sol.X;
  sol.B = sign_pm(sol.B_p);
  sol.E = sol.B_p - sol.B;
  sol.objective = sol.E.norm();
  return sol;
}

BinarizationSolution binarize_descent_multistart(const Matrix& W, int n_starts,
                                                 const DescentConfig& cfg, Rng& rng) {
  BinarizationSolution best;
  bool have = false;
  for (int s = 0; s < n_starts; ++s) {
    Matrix X0(W.cols(), W.cols());
    for (Eigen::Index j = 0; j < X0.size(); ++j) X0(j) = rng.normal();
    BinarizationSolution sol = binarize_descent(W, X0, cfg);
    if (sol.status == DescentStatus::singular_x) continue;
    if (!have || sol.objective < best.objective) {
      best = std::move(sol);
      have = true;
    }
  }
  if (!have) {
    throw NonConvergence("binarize_descent_multistart: every start aborted on a singular X");
  }
  return best;
}

Matrix lowdin_orthogonalize(const Matrix& W) {
  Eigen::BDCSVD<Matrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (sv(sv.size() - 1) < 1e-10 * sv(0)) {
    throw RankDeficient("lowdin_orthogonalize: W is not full column rank");
  }
  return svd.matrixU() * svd.matrixV().transpose();
}

ReconstructionResult reconstruct_hn(const Matrix& W, const BinarizationSolution& sol,
                                    ReconstructionMode mode) {
  const Eigen::Index p = W.cols();
  const Matrix& B_p = sol.B_p;

  Matrix inner;  // B_p^T B_p, or B_p^T C B_p with the correction factor
  if (mode == ReconstructionMode::case1) {
    const double dev = (W.transpose() * W - Matrix::Identity(p, p)).norm();
    if (dev > 1e-6) {
      throw NotOrthogonal("reconstruct_hn case1: ||W^T W - I|| = " + std::to_string(dev));
    }
    inner = B_p.transpose() * B_p;
  } else {
    Eigen::BDCSVD<Matrix> svd(W, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(sv.size() - 1) < 1e-10 * sv(0)) {
      throw RankDeficient("reconstruct_hn case2: W is not full column rank");
    }
    const Matrix C = svd.matrixU() * sv.cwiseAbs2().cwiseInverse().asDiagonal() *
                     svd.matrixU().transpose();
    inner = B_p.transpose() * C * B_p;
  }

  Eigen::LLT<Matrix> llt(inner);
  if (llt.info() != Eigen::Success) {
    throw RankDeficient("reconstruct_hn: B_p^T (C) B_p is not positive definite");
  }

  ReconstructionResult res;
  res.net.J = B_p * llt.solve(B_p.transpose());
  res.net.b = Vector::Zero(W.rows());
  res.net.beta = 1.0;

  // Fixed-point conditions on the candidate patterns B = sgn(B_p):
  // (a) |(J E)| < |B_p| elementwise, or (b) (J E) . B_p < 0.
  res.diag.JE = res.net.J * sol.E;
  Eigen::Index ok = 0;
  for (Eigen::Index j = 0; j < res.diag.JE.size(); ++j) {
    const double je = res.diag.JE(j);
    const double bp = B_p(j);
    if (std::abs(je) < std::abs(bp) || je * bp < 0.0) ++ok;
  }
  res.diag.fraction_conditions_ok =
      static_cast<double>(ok) / static_cast<double>(res.diag.JE.size());
  res.diag.sign_fixed_points = (sign_pm(res.net.J * sol.B).array() == sol.B.array()).all();
  return res;
}

ReversePipelineResult reverse_pipeline(const GaussBernRBM& rbm, const Matrix& X0,
                                       const DescentConfig& cfg,
                                       const std::vector<int>* class_of_column) {
  ReversePipelineResult res;
  res.solution = binarize_descent(rbm.W, X0, cfg);

  res.patterns.xi = res.solution.B;
  const int p = static_cast<int>(res.solution.B.cols());
  if (class_of_column) {
    res.patterns.class_of_column = *class_of_column;
  } else {
    res.patterns.class_of_column.resize(static_cast<std::size_t>(p));
    for (int mu = 0; mu < p; ++mu) res.patterns.class_of_column[static_cast<std::size_t>(mu)] = mu;
  }

  res.net = projection_couplings(res.patterns);
  int fixed = 0;
  for (int mu = 0; mu < p; ++mu) {
    const Vector col = res.patterns.xi.col(mu);
    if ((update_deterministic(res.net, col).array() == col.array()).all()) ++fixed;
  }
  res.fixed_point_fraction = static_cast<double>(fixed) / p;
  return res;
}

}  // namespace hrbm
