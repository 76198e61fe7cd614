#pragma once

#include <vector>

#include "hrbm/hopfield.hpp"
#include "hrbm/rbm.hpp"
#include "hrbm/rng.hpp"
#include "hrbm/types.hpp"

namespace hrbm {

// Integrates out the gaussian hidden layer: pairwise Ising model with
// J = W W^T, independent of beta. A nonzero hidden bias folds into the
// visible bias as b + W c (identical to b in the usual c = 0 setting).
HopfieldNetwork integrate_out_hidden(const GaussBernRBM& rbm);

// Gradient of the softened binarization objective ||W X - tanh(alpha W X)||_F^2
// with respect to X:  G = 2 W^T (E - alpha E .* sech^2(alpha W X)),
// E = W X - tanh(alpha W X).
Matrix binarization_gradient(const Matrix& W, const Matrix& X, double alpha);

struct DescentConfig {
  double alpha = 200.0;
  double gamma = 0.05;
  double tol = 1e-8;       // on ||G||_F
  int max_iters = 50000;
  double cond_limit = 1e12;
};

enum class DescentStatus { converged, no_convergence, singular_x };

struct BinarizationSolution {
  Matrix X;        // p x p transform
  Matrix B_p;      // W X, near-binary
  Matrix B;        // sgn(B_p), ties to +1
  Matrix E;        // B_p - B
  double objective = 0.0;        // ||E||_F
  std::vector<double> trace;     // softened objective per iteration
  DescentStatus status = DescentStatus::converged;
  int iterations = 0;
  int monotonicity_violations = 0;
};

// Plain gradient descent X <- X - gamma G(X) until ||G||_F < tol or the
// iteration budget runs out. The condition number of X is monitored every
// 100 iterations; exceeding cond_limit aborts with status singular_x.
BinarizationSolution binarize_descent(const Matrix& W, const Matrix& X0,
                                      const DescentConfig& cfg = {});

// Best of n_starts descents from random gaussian X0 (fallback when no
// informed initial transform is available).
BinarizationSolution binarize_descent_multistart(const Matrix& W, int n_starts,
                                                 const DescentConfig& cfg, Rng& rng);

// Nearest matrix with orthonormal columns in Frobenius norm: L = U V^T from
// the thin SVD of W.
Matrix lowdin_orthogonalize(const Matrix& W);

enum class ReconstructionMode { case1, case2 };

struct ReconstructionDiagnostics {
  Matrix JE;
  double fraction_conditions_ok = 0.0;  // entries with |(JE)| < |B_p| or (JE).B_p < 0
  bool sign_fixed_points = false;       // sgn(J B) == B
};

struct ReconstructionResult {
  HopfieldNetwork net;
  ReconstructionDiagnostics diag;
};

// case1: J = B_p (B_p^T B_p)^{-1} B_p^T, requires W^T W = I within 1e-6.
// case2: J = B_p (B_p^T C B_p)^{-1} B_p^T with C = (W^+)^T W^+.
ReconstructionResult reconstruct_hn(const Matrix& W, const BinarizationSolution& sol,
                                    ReconstructionMode mode);

struct ReversePipelineResult {
  BinarizationSolution solution;
  PatternMatrix patterns;          // candidate B = sgn(W X*)
  HopfieldNetwork net;             // projection network built from B
  double fixed_point_fraction = 0.0;  // candidate columns that are fixed points
};

// Descent from X0, threshold to candidate patterns, build the projection
// network and report how many candidates are deterministic fixed points.
ReversePipelineResult reverse_pipeline(const GaussBernRBM& rbm, const Matrix& X0,
                                       const DescentConfig& cfg = {},
                                       const std::vector<int>* class_of_column = nullptr);

}  // namespace hrbm
