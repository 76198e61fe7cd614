#include "hrbm/forward_map.hpp"

#include <cmath>

#include "hrbm/errors.hpp"

namespace hrbm {

namespace {

void require_full_rank(const Matrix& xi, const char* who) {
  if (!is_full_rank(xi)) {
    throw RankDeficient(std::string(who) + ": matrix is not full column rank");
  }
}

}  // namespace

OrthogonalFactorization qr_orthogonalize(const Matrix& xi) {
  require_full_rank(xi, "qr_orthogonalize");
  const Eigen::Index n = xi.rows(), p = xi.cols();
  Eigen::HouseholderQR<Matrix> qr(xi);
  OrthogonalFactorization f;
  f.method = FactorizationMethod::qr;
  f.U = qr.householderQ() * Matrix::Identity(n, p);
  f.R = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();
  // Hold R's diagonal positive; flipping a column of Q and the matching row
  // of R preserves the product and makes the pair unique.
  for (Eigen::Index mu = 0; mu < p; ++mu) {
    if (f.R(mu, mu) < 0.0) {
      f.R.row(mu) = -f.R.row(mu);
      f.U.col(mu) = -f.U.col(mu);
    }
  }
  return f;
}

OrthogonalFactorization sqrt_factorization(const Matrix& xi) {
  const Matrix gram = xi.transpose() * xi;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector& ev = eig.eigenvalues();
  if (ev(0) < 1e-10 * ev(ev.size() - 1)) {
    throw RankDeficient("sqrt_factorization: xi^T xi is numerically singular");
  }
  OrthogonalFactorization f;
  f.method = FactorizationMethod::sqrt;
  f.inv_sqrt_gram =
      eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  f.U = xi * f.inv_sqrt_gram;
  return f;
}

OrthogonalFactorization svd_factorization(const Matrix& xi) {
  require_full_rank(xi, "svd_factorization");
  Eigen::BDCSVD<Matrix> svd(xi, Eigen::ComputeThinU | Eigen::ComputeThinV);
  OrthogonalFactorization f;
  f.method = FactorizationMethod::svd;
  f.U = svd.matrixU();
  f.singular_values = svd.singularValues();
  f.V = svd.matrixV();
  return f;
}

OrthogonalFactorization qr_orthogonalize(const PatternMatrix& patterns) {
  return qr_orthogonalize(patterns.xi);
}
OrthogonalFactorization sqrt_factorization(const PatternMatrix& patterns) {
  return sqrt_factorization(patterns.xi);
}
OrthogonalFactorization svd_factorization(const PatternMatrix& patterns) {
  return svd_factorization(patterns.xi);
}

GaussBernRBM hn_to_rbm(const PatternMatrix& patterns, double beta, const Vector& bias,
                       FactorizationMethod method) {
  OrthogonalFactorization f;
  switch (method) {
    case FactorizationMethod::qr: f = qr_orthogonalize(patterns.xi); break;
    case FactorizationMethod::sqrt: f = sqrt_factorization(patterns.xi); break;
    case FactorizationMethod::svd: f = svd_factorization(patterns.xi); break;
  }
  GaussBernRBM rbm;
  rbm.W = std::move(f.U);
  rbm.b = bias.size() > 0 ? bias : Vector::Zero(patterns.n());
  rbm.c = Vector::Zero(patterns.p());
  rbm.beta = beta;
  return rbm;
}

namespace {

double log_det_spd(const Matrix& m, const char* who) {
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    throw RankDeficient(std::string(who) + ": gram matrix is not positive definite");
  }
  return 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

}  // namespace

OverlapBM build_overlap_bm(const PatternMatrix& patterns, double beta) {
  require_full_rank(patterns.xi, "build_overlap_bm");
  const double n = static_cast<double>(patterns.n());
  OverlapBM bm;
  bm.n_visible = patterns.n();
  bm.n_hidden = patterns.p();
  const Matrix gram = patterns.xi.transpose() * patterns.xi;
  bm.hidden_coupling = gram / n;
  bm.visible_hidden = patterns.xi / std::sqrt(n);
  bm.beta = beta;
  bm.log_det_gram = log_det_spd(gram, "build_overlap_bm");
  return bm;
}

ProjectionBM build_projection_bm(const PatternMatrix& patterns, double beta) {
  require_full_rank(patterns.xi, "build_projection_bm");
  ProjectionBM bm;
  bm.n_visible = patterns.n();
  bm.n_hidden = patterns.p();
  const Matrix gram = patterns.xi.transpose() * patterns.xi;
  Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw RankDeficient("build_projection_bm: gram matrix is not positive definite");
  }
  bm.hidden_coupling = llt.solve(Matrix::Identity(patterns.p(), patterns.p()));
  bm.visible_hidden = patterns.xi * bm.hidden_coupling;
  bm.beta = beta;
  bm.log_det_gram = log_det_spd(gram, "build_projection_bm");
  return bm;
}

double f0_value(const GaussBernRBM& rbm, const Vector& lambda) {
  const Vector x = rbm.W * lambda + rbm.b;
  double lc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) lc += log_cosh(rbm.beta * x(i));
  return 0.5 * (lambda - rbm.c).squaredNorm() - lc / rbm.beta;
}

Vector f0_gradient(const GaussBernRBM& rbm, const Vector& lambda) {
  const Vector x = rbm.W * lambda + rbm.b;
  return (lambda - rbm.c) - rbm.W.transpose() * (rbm.beta * x).array().tanh().matrix();
}

double f0_value(const OverlapBM& bm, const Vector& lambda) {
  // visible_hidden is xi/sqrt(N), so the cosh argument (beta/sqrt(N)) (xi l)_i
  // is just beta (visible_hidden l)_i.
  const Vector x = bm.visible_hidden * lambda;
  double lc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) lc += log_cosh(bm.beta * x(i));
  return 0.5 * lambda.dot(bm.hidden_coupling * lambda) - lc / bm.beta;
}

Vector f0_gradient(const OverlapBM& bm, const Vector& lambda) {
  const Vector x = bm.visible_hidden * lambda;
  return bm.hidden_coupling * lambda -
         bm.visible_hidden.transpose() * (bm.beta * x).array().tanh().matrix();
}

double f0_value(const ProjectionBM& bm, const Vector& lambda) {
  const Vector x = bm.visible_hidden * lambda;
  double lc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) lc += log_cosh(bm.beta * x(i));
  return 0.5 * lambda.dot(bm.hidden_coupling * lambda) - lc / bm.beta;
}

Vector f0_gradient(const ProjectionBM& bm, const Vector& lambda) {
  const Vector x = bm.visible_hidden * lambda;
  return bm.hidden_coupling * lambda -
         bm.visible_hidden.transpose() * (bm.beta * x).array().tanh().matrix();
}

}  // namespace hrbm
