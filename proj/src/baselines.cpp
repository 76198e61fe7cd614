#include "hrbm/baselines.hpp"

#include <cmath>

#include "hrbm/errors.hpp"

namespace hrbm {

InitKind parse_init_kind(const std::string& name) {
  if (name == "hopfield" || name == "hopfield_qr") return InitKind::hopfield_qr;
  if (name == "hebbian") return InitKind::hebbian;
  if (name == "pca") return InitKind::pca;
  if (name == "random") return InitKind::random;
  throw SchemaMismatch("unknown init kind: " + name);
}

const char* to_string(InitKind k) {
  switch (k) {
    case InitKind::hopfield_qr: return "hopfield";
    case InitKind::hebbian: return "hebbian";
    case InitKind::pca: return "pca";
    case InitKind::random: return "random";
  }
  return "?";
}

Matrix pca_init(const Matrix& samples, int p) {
  const Eigen::Index n = samples.rows();
  const Eigen::Index m = samples.cols();
  if (p > n || m < p) throw RankDeficient("pca_init: need p <= N and at least p samples");

  const Vector mean = samples.rowwise().mean();
  Matrix centered = samples;
  centered.colwise() -= mean;
  const Matrix cov = centered * centered.transpose() / static_cast<double>(m);

  Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
  if (eig.info() != Eigen::Success) throw RankDeficient("pca_init: eigensolver failed");

  // Eigenvalues come out ascending; take the top p and fix each sign so the
  // largest-magnitude entry is positive (first index on ties).
  Matrix w(n, p);
  for (int j = 0; j < p; ++j) {
    Vector v = eig.eigenvectors().col(n - 1 - j);
    Eigen::Index imax = 0;
    double amax = -1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(v(i)) > amax) {
        amax = std::abs(v(i));
        imax = i;
      }
    }
    if (v(imax) < 0.0) v = -v;
    w.col(j) = v;
  }
  return w;
}

Matrix hebbian_init(const Matrix& xi) {
  return xi / std::sqrt(static_cast<double>(xi.rows()));
}

Matrix random_init(int n, int p, double stddev, Rng& rng) {
  Matrix w(n, p);
  for (Eigen::Index j = 0; j < w.size(); ++j) w(j) = stddev * rng.normal();
  return w;
}

}  // namespace hrbm
