#pragma once

#include "hrbm/patterns.hpp"
#include "hrbm/rbm.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

enum class FactorizationMethod { qr, sqrt, svd };

// Orthogonal factor U (U^T U = I) of the pattern matrix with
// U U^T = xi (xi^T xi)^{-1} xi^T, plus the method-specific companion pieces.
struct OrthogonalFactorization {
  FactorizationMethod method = FactorizationMethod::qr;
  Matrix U;              // N x p
  Matrix R;              // qr: upper triangular with positive diagonal
  Matrix inv_sqrt_gram;  // sqrt: (xi^T xi)^{-1/2}
  Vector singular_values;
  Matrix V;              // svd: right singular vectors
};

// xi = QR with R's diagonal held positive (unique choice).
OrthogonalFactorization qr_orthogonalize(const Matrix& xi);
OrthogonalFactorization qr_orthogonalize(const PatternMatrix& patterns);

// K = xi (xi^T xi)^{-1/2}.
OrthogonalFactorization sqrt_factorization(const Matrix& xi);
OrthogonalFactorization sqrt_factorization(const PatternMatrix& patterns);

// xi = U Sigma V^T.
OrthogonalFactorization svd_factorization(const Matrix& xi);
OrthogonalFactorization svd_factorization(const PatternMatrix& patterns);

// Maps a projection Hopfield network to the equivalent binary-gaussian RBM:
// weights are the orthogonalized patterns, hidden bias zero, visible bias
// carried through unchanged.
GaussBernRBM hn_to_rbm(const PatternMatrix& patterns, double beta,
                       const Vector& bias = Vector(),
                       FactorizationMethod method = FactorizationMethod::qr);

// Non-restricted Boltzmann machines over (s, lambda) from the overlap and
// projection quadratic forms. The hidden units interact through
// `hidden_coupling`; `log_det_gram` carries the determinant prefactor of the
// partition function in log space.
struct OverlapBM {
  int n_visible = 0;
  int n_hidden = 0;
  Matrix hidden_coupling;  // xi^T xi / N
  Matrix visible_hidden;   // xi / sqrt(N)
  double beta = 1.0;
  double log_det_gram = 0.0;  // ln det(xi^T xi)
};

struct ProjectionBM {
  int n_visible = 0;
  int n_hidden = 0;
  Matrix hidden_coupling;  // (xi^T xi)^{-1}
  Matrix visible_hidden;   // xi (xi^T xi)^{-1}
  double beta = 1.0;
  double log_det_gram = 0.0;
};

OverlapBM build_overlap_bm(const PatternMatrix& patterns, double beta);
ProjectionBM build_projection_bm(const PatternMatrix& patterns, double beta);

// Effective landscape over the hidden variables,
//   F0(l) = 1/2 ||l - c||^2 - 1/beta sum_i ln cosh(beta (W l + b)_i)
// for the RBM form, and the analogous quadratic + ln cosh forms for the two
// BMs. Gradients are analytic.
double f0_value(const GaussBernRBM& rbm, const Vector& lambda);
Vector f0_gradient(const GaussBernRBM& rbm, const Vector& lambda);
double f0_value(const OverlapBM& bm, const Vector& lambda);
Vector f0_gradient(const OverlapBM& bm, const Vector& lambda);
double f0_value(const ProjectionBM& bm, const Vector& lambda);
Vector f0_gradient(const ProjectionBM& bm, const Vector& lambda);

}  // namespace hrbm
